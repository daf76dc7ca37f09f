#include "wgs/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wgs/errors.hpp"

namespace wgs {

// ---------------------------------------------------------------- WeightedGraph

WeightedGraph::WeightedGraph(int n_sites) : n_sites_(n_sites), dense_(RMatrix::Zero(n_sites, n_sites)) {
    if (n_sites < 0) throw ArgumentError("negative site count");
}

WeightedGraph WeightedGraph::from_matrix(const RMatrix& phases) {
    if (phases.rows() != phases.cols()) throw ArgumentError("phase matrix must be square");
    const int n = static_cast<int>(phases.rows());
    WeightedGraph g(n);
    for (int a = 0; a < n; ++a) {
        if (phases(a, a) != 0.0) throw ArgumentError("phase matrix must have a zero diagonal");
        for (int b = a + 1; b < n; ++b) {
            if (!std::isfinite(phases(a, b)) || phases(a, b) != phases(b, a))
                throw ArgumentError("phase matrix must be finite and symmetric");
            const double w = wrap_phase(phases(a, b));
            g.dense_(a, b) = w;
            g.dense_(b, a) = w;
        }
    }
    return g;
}

WeightedGraph WeightedGraph::distance_kernel(std::shared_ptr<const Lattice> lattice, std::vector<double> class_phases) {
    if (!lattice) throw ArgumentError("distance kernel needs a lattice");
    if (static_cast<int>(class_phases.size()) != lattice->distance_class_count())
        throw ArgumentError("need one phase per distance class");
    WeightedGraph g;
    g.n_sites_ = lattice->size();
    g.dense_.resize(0, 0);
    for (double& p : class_phases) {
        if (!std::isfinite(p)) throw ArgumentError("non-finite class phase");
        p = wrap_phase(p);
    }
    g.lattice_ = std::move(lattice);
    g.class_phases_ = std::move(class_phases);
    return g;
}

double WeightedGraph::operator()(int a, int b) const {
    if (a == b) return 0.0;
    if (is_dense()) return dense_(a, b);
    return class_phases_[lattice_->distance_class(a, b)];
}

void WeightedGraph::row(int a, std::span<double> out) const {
    if (static_cast<int>(out.size()) != n_sites_) throw ArgumentError("row buffer has wrong length");
    if (is_dense()) {
        for (int c = 0; c < n_sites_; ++c) out[c] = dense_(a, c);
        return;
    }
    for (int c = 0; c < n_sites_; ++c) out[c] = c == a ? 0.0 : class_phases_[lattice_->distance_class(a, c)];
}

WeightedGraph WeightedGraph::with_entry(int a, int b, double phase) const {
    if (!is_dense()) throw ArgumentError("individual phases of a distance kernel are tied");
    if (a == b || a < 0 || b < 0 || a >= n_sites_ || b >= n_sites_) throw ArgumentError("bad phase index");
    if (!std::isfinite(phase)) throw ArgumentError("non-finite phase");
    WeightedGraph g = *this;
    g.dense_(a, b) = g.dense_(b, a) = wrap_phase(phase);
    return g;
}

WeightedGraph WeightedGraph::with_class_phase(int cls, double phase) const {
    if (is_dense()) throw ArgumentError("dense graph has no distance classes");
    if (cls < 0 || cls >= static_cast<int>(class_phases_.size())) throw ArgumentError("bad class index");
    auto phases = class_phases_;
    phases[cls] = phase;
    return distance_kernel(lattice_, std::move(phases));
}

RMatrix WeightedGraph::to_matrix() const {
    if (is_dense()) return dense_;
    RMatrix m(n_sites_, n_sites_);
    for (int a = 0; a < n_sites_; ++a)
        for (int b = 0; b < n_sites_; ++b) m(a, b) = (*this)(a, b);
    return m;
}

// ------------------------------------------------------------ DeformationMatrix

DeformationMatrix::DeformationMatrix(CMatrix values, double real_cap) : values_(std::move(values)) {
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        const cplx v = values_.data()[i];
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw ArgumentError("non-finite deformation");
        if (std::abs(v.real()) > real_cap)
            throw NumericRangeError("deformation real part " + std::to_string(v.real()) + " exceeds cap");
    }
}

// --------------------------------------------------------------- LocalUnitaries

LocalUnitaries::LocalUnitaries(std::vector<Mat2> matrices) : matrices_(std::move(matrices)) {
    for (const auto& u : matrices_) {
        if (!u.allFinite()) throw ArgumentError("non-finite local unitary");
        const double defect = (u.adjoint() * u - Mat2::Identity()).cwiseAbs().maxCoeff();
        if (defect > 1e-12) throw ArgumentError("local matrix is not unitary (defect " + std::to_string(defect) + ")");
    }
}

LocalUnitaries LocalUnitaries::identity(int n_sites) {
    return LocalUnitaries(std::vector<Mat2>(n_sites, Mat2::Identity()));
}

// -------------------------------------------------------------- SymmetryProfile

int SymmetryProfile::unitary_class(int site) const {
    if (!ties_unitaries()) return site;
    if (alternating_unitaries) return lattice ? lattice->sublattice(site) : site % 2;
    return 0;
}

int SymmetryProfile::unitary_class_count(int n_sites) const {
    if (!ties_unitaries()) return n_sites;
    if (alternating_unitaries) return std::min(2, n_sites);
    return 1;
}

// ---------------------------------------------------------- SuperpositionAnsatz

SuperpositionAnsatz::SuperpositionAnsatz(WeightedGraph graph, DeformationMatrix deformations,
                                         LocalUnitaries unitaries, CVector weights,
                                         std::optional<SymmetryProfile> symmetry)
    : graph_(std::move(graph)),
      deformations_(std::move(deformations)),
      unitaries_(std::move(unitaries)),
      weights_(std::move(weights)),
      symmetry_(std::move(symmetry)) {
    validate();
}

void SuperpositionAnsatz::validate() const {
    const int n = graph_.size();
    if (n < 1) throw ArgumentError("ansatz needs at least one site");
    if (weights_.size() < 1) throw ArgumentError("ansatz needs at least one branch");
    if (deformations_.n_sites() != n || deformations_.n_branches() != weights_.size())
        throw ArgumentError("deformation matrix must be N x m");
    if (unitaries_.size() != n) throw ArgumentError("need one local unitary per site");
    if (!weights_.allFinite()) throw ArgumentError("non-finite superposition weight");
    if (weights_.cwiseAbs().maxCoeff() == 0.0) throw ArgumentError("all superposition weights are zero");
    if (symmetry_) {
        const auto& sym = *symmetry_;
        if ((sym.mode == SymmetryMode::distance_dependent || sym.mode == SymmetryMode::fully_translation_invariant ||
             sym.mode == SymmetryMode::range_cutoff) &&
            !sym.lattice)
            throw ArgumentError("symmetry profile needs lattice coordinates");
        if (sym.lattice && sym.lattice->size() != n) throw ArgumentError("symmetry lattice size mismatch");
    }
}

SuperpositionAnsatz SuperpositionAnsatz::plus_state(int n_sites) {
    return SuperpositionAnsatz(WeightedGraph(n_sites), DeformationMatrix(CMatrix::Zero(n_sites, 1)),
                               LocalUnitaries::identity(n_sites), CVector::Ones(1));
}

SuperpositionAnsatz SuperpositionAnsatz::with_graph(WeightedGraph graph) const {
    auto out = *this;
    out.graph_ = std::move(graph);
    out.validate();
    return out;
}

SuperpositionAnsatz SuperpositionAnsatz::with_deformations(DeformationMatrix deformations) const {
    auto out = *this;
    out.deformations_ = std::move(deformations);
    out.validate();
    return out;
}

SuperpositionAnsatz SuperpositionAnsatz::with_unitaries(LocalUnitaries unitaries) const {
    auto out = *this;
    out.unitaries_ = std::move(unitaries);
    out.validate();
    return out;
}

SuperpositionAnsatz SuperpositionAnsatz::with_weights(CVector weights) const {
    auto out = *this;
    out.weights_ = std::move(weights);
    out.validate();
    return out;
}

SuperpositionAnsatz SuperpositionAnsatz::with_symmetry(std::optional<SymmetryProfile> symmetry) const {
    auto out = *this;
    out.symmetry_ = std::move(symmetry);
    out.validate();
    return out;
}

bool SuperpositionAnsatz::ties_hold() const {
    if (!symmetry_) return true;
    const auto& sym = *symmetry_;
    const int n = n_sites();
    if (sym.ties_phases()) {
        if (graph_.is_dense()) {
            // Dense storage must still agree on every distance class.
            std::vector<std::optional<double>> seen(sym.lattice->distance_class_count());
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b) {
                    auto& s = seen[sym.lattice->distance_class(a, b)];
                    if (!s) s = graph_(a, b);
                    else if (*s != graph_(a, b)) return false;
                }
        }
    }
    if (sym.mode == SymmetryMode::range_cutoff) {
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (sym.lattice->distance(a, b) >= sym.r0 && graph_(a, b) != 0.0) return false;
    }
    if (sym.ties_deformations()) {
        const auto& d = deformations_.values();
        for (int a = 1; a < n; ++a)
            for (int j = 0; j < n_branches(); ++j)
                if (d(a, j) != d(0, j)) return false;
    }
    if (sym.ties_unitaries()) {
        std::vector<int> first(sym.unitary_class_count(n), -1);
        for (int a = 0; a < n; ++a) {
            int c = sym.unitary_class(a);
            if (first[c] < 0) first[c] = a;
            else if (unitaries_[a] != unitaries_[first[c]]) return false;
        }
    }
    return true;
}

// -------------------------------------------------------------------- amplitude

cplx amplitude(const SuperpositionAnsatz& ansatz, std::span<const int> s) {
    const int n = ansatz.n_sites();
    if (static_cast<int>(s.size()) != n)
        throw ArgumentError("basis vector length " + std::to_string(s.size()) + " != " + std::to_string(n));
    double phase = 0.0;
    for (int a = 0; a < n; ++a) {
        if (s[a] != 0 && s[a] != 1) throw ArgumentError("basis vector entries must be 0 or 1");
        if (!s[a]) continue;
        for (int b = a + 1; b < n; ++b)
            if (s[b]) phase += ansatz.graph()(a, b);
    }
    const auto& d = ansatz.deformations();
    cplx total = 0.0;
    for (int j = 0; j < ansatz.n_branches(); ++j) {
        cplx expo(0.0, -phase);
        for (int a = 0; a < n; ++a)
            if (s[a]) expo += d(a, j);
        total += ansatz.weights()[j] * std::exp(expo);
    }
    return total;
}

void apply_single_qubit(CVector& state, int n_sites, int site, const Mat2& u) {
    const Eigen::Index stride = Eigen::Index{1} << (n_sites - 1 - site);
    const Eigen::Index dim = state.size();
    for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
        for (Eigen::Index off = 0; off < stride; ++off) {
            const Eigen::Index i0 = base + off;
            const Eigen::Index i1 = i0 + stride;
            const cplx v0 = state[i0];
            const cplx v1 = state[i1];
            state[i0] = u(0, 0) * v0 + u(0, 1) * v1;
            state[i1] = u(1, 0) * v0 + u(1, 1) * v1;
        }
    }
}

CVector dense_amplitudes(const SuperpositionAnsatz& ansatz, int max_sites) {
    const int n = ansatz.n_sites();
    if (n > max_sites)
        throw CapacityError("dense state for " + std::to_string(n) + " sites exceeds cap " + std::to_string(max_sites));
    const Eigen::Index dim = Eigen::Index{1} << n;
    CVector psi(dim);
    std::vector<int> s(n);
    for (Eigen::Index x = 0; x < dim; ++x) {
        for (int a = 0; a < n; ++a) s[a] = static_cast<int>((x >> (n - 1 - a)) & 1);
        psi[x] = amplitude(ansatz, s);
    }
    return psi;
}

CVector dense_state(const SuperpositionAnsatz& ansatz, int max_sites) {
    CVector psi = dense_amplitudes(ansatz, max_sites);
    const int n = ansatz.n_sites();
    for (int a = 0; a < n; ++a) apply_single_qubit(psi, n, a, ansatz.unitaries()[a]);
    const double norm = psi.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw DegenerateStateError("ansatz state has zero or non-finite norm");
    return psi / norm;
}

}  // namespace wgs
