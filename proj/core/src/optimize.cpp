#include "wgs/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include <Eigen/Eigenvalues>

#include "wgs/errors.hpp"

namespace wgs {

// ------------------------------------------------------------ ParameterPacking

ParameterPacking::ParameterPacking(SymmetryProfile symmetry, int n_sites, int n_branches)
    : symmetry_(std::move(symmetry)), n_sites_(n_sites), n_branches_(n_branches) {
    if (n_sites < 1 || n_branches < 1) throw ArgumentError("packing needs at least one site and one branch");
    const auto& lat = symmetry_.lattice;
    if (symmetry_.mode != SymmetryMode::free || symmetry_.alternating_unitaries) {
        if (!lat) throw ArgumentError("symmetry profile needs a lattice");
    }
    if (lat && lat->size() != n_sites) throw ArgumentError("lattice size does not match the site count");

    int off = 0;
    phase_offset_ = off;
    if (dense_phases()) {
        pair_free_ = RMatrix::Constant(n_sites, n_sites, -1.0);
        for (int a = 0; a < n_sites; ++a)
            for (int b = a + 1; b < n_sites; ++b) {
                if (symmetry_.mode == SymmetryMode::range_cutoff && lat->distance(a, b) >= symmetry_.r0) continue;
                pair_free_(a, b) = pair_free_(b, a) = static_cast<double>(free_pairs_.size());
                layout_.push_back({ParameterKind::phase, static_cast<int>(free_pairs_.size()), off++, 1});
                free_pairs_.emplace_back(a, b);
            }
    } else {
        const int nc = lat->distance_class_count();
        class_reps_.assign(nc, {-1, -1});
        for (int b = 1; b < n_sites; ++b) {
            const int c = lat->distance_class(0, b);
            if (class_reps_[c].first < 0) class_reps_[c] = {0, b};
        }
        for (int c = 0; c < nc; ++c) {
            if (class_reps_[c].first < 0) throw ArgumentError("distance class without a representative pair");
            if (symmetry_.r0 > 0.0 && lat->class_distance(c) >= symmetry_.r0) continue;
            layout_.push_back({ParameterKind::phase, c, off++, 1});
            free_classes_.push_back(c);
        }
    }

    deform_offset_ = off;
    const int slots = symmetry_.ties_deformations() ? n_branches : n_sites * n_branches;
    for (int s = 0; s < slots; ++s) {
        layout_.push_back({ParameterKind::deformation, s, off, 2});
        off += 2;
    }

    unitary_offset_ = off;
    for (int c = 0; c < symmetry_.unitary_class_count(n_sites); ++c) {
        layout_.push_back({ParameterKind::unitary, c, off, 3});
        off += 3;
    }

    weight_offset_ = off;
    layout_.push_back({ParameterKind::weight, 0, off, 1});
    off += 1;
    for (int j = 1; j < n_branches; ++j) {
        layout_.push_back({ParameterKind::weight, j, off, 2});
        off += 2;
    }
    size_ = off;
}

bool ParameterPacking::phase_is_free(int a, int b) const {
    if (!dense_phases() || a == b) return false;
    return pair_free_(a, b) >= 0.0;
}

Mat2 rotation_unitary(const Eigen::Vector3d& theta) {
    const double t = theta.norm();
    if (t == 0.0) return Mat2::Identity();
    const Eigen::Vector3d n = theta / t;
    const Mat2 gen = n[0] * pauli::x() + n[1] * pauli::y() + n[2] * pauli::z();
    return std::cos(t) * Mat2::Identity() - cplx(0.0, std::sin(t)) * gen;
}

Eigen::Vector3d rotation_angles(const Mat2& u) {
    Mat2 v = u / std::sqrt(u.determinant());
    if (v.trace().real() < 0.0) v = -v;
    const double c = 0.5 * v.trace().real();
    Eigen::Vector3d s(-0.5 * (v * pauli::x()).trace().imag(), -0.5 * (v * pauli::y()).trace().imag(),
                      -0.5 * (v * pauli::z()).trace().imag());
    const double sn = s.norm();
    if (sn == 0.0) return Eigen::Vector3d::Zero();
    return std::atan2(sn, c) * s / sn;
}

RVector ParameterPacking::pack(const SuperpositionAnsatz& ans) const {
    if (ans.n_sites() != n_sites_ || ans.n_branches() != n_branches_)
        throw ArgumentError("ansatz shape does not match the packing");
    RVector v(size_);
    const auto& g = ans.graph();
    if (dense_phases()) {
        for (std::size_t p = 0; p < free_pairs_.size(); ++p)
            v[phase_offset_ + static_cast<int>(p)] = g(free_pairs_[p].first, free_pairs_[p].second);
    } else {
        for (std::size_t p = 0; p < free_classes_.size(); ++p) {
            const auto [a, b] = class_reps_[free_classes_[p]];
            v[phase_offset_ + static_cast<int>(p)] = g(a, b);
        }
    }

    const auto& d = ans.deformations();
    const bool tied = symmetry_.ties_deformations();
    const int slots = tied ? n_branches_ : n_sites_ * n_branches_;
    for (int s = 0; s < slots; ++s) {
        const int site = tied ? 0 : s / n_branches_;
        const int branch = tied ? s : s % n_branches_;
        v[deform_offset_ + 2 * s] = d(site, branch).real();
        v[deform_offset_ + 2 * s + 1] = d(site, branch).imag();
    }

    const int nu = symmetry_.unitary_class_count(n_sites_);
    std::vector<int> first(nu, -1);
    for (int a = 0; a < n_sites_; ++a) {
        const int c = symmetry_.unitary_class(a);
        if (first[c] < 0) first[c] = a;
    }
    for (int c = 0; c < nu; ++c) v.segment<3>(unitary_offset_ + 3 * c) = rotation_angles(ans.unitaries()[first[c]]);

    // Gauge: rotate the weights so the first one is real, keeping the sign of
    // its real part (a real first weight is left untouched).
    const CVector& w = ans.weights();
    cplx gauge = 1.0;
    if (std::abs(w[0]) > 0.0) {
        gauge = std::conj(w[0]) / std::abs(w[0]);
        if (w[0].real() < 0.0) gauge = -gauge;
    }
    v[weight_offset_] = (w[0] * gauge).real();
    for (int j = 1; j < n_branches_; ++j) {
        const cplx x = w[j] * gauge;
        v[weight_offset_ + 2 * j - 1] = x.real();
        v[weight_offset_ + 2 * j] = x.imag();
    }
    return v;
}

SuperpositionAnsatz ParameterPacking::unpack(const RVector& v) const {
    if (v.size() != size_) throw ArgumentError("parameter vector has wrong length");
    WeightedGraph graph = [&] {
        if (dense_phases()) {
            RMatrix p = RMatrix::Zero(n_sites_, n_sites_);
            for (std::size_t q = 0; q < free_pairs_.size(); ++q) {
                const auto [a, b] = free_pairs_[q];
                p(a, b) = p(b, a) = v[phase_offset_ + static_cast<int>(q)];
            }
            return WeightedGraph::from_matrix(p);
        }
        std::vector<double> phases(symmetry_.lattice->distance_class_count(), 0.0);
        for (std::size_t q = 0; q < free_classes_.size(); ++q)
            phases[free_classes_[q]] = v[phase_offset_ + static_cast<int>(q)];
        return WeightedGraph::distance_kernel(symmetry_.lattice, std::move(phases));
    }();

    CMatrix d(n_sites_, n_branches_);
    if (symmetry_.ties_deformations()) {
        for (int j = 0; j < n_branches_; ++j)
            d.col(j).setConstant(cplx(v[deform_offset_ + 2 * j], v[deform_offset_ + 2 * j + 1]));
    } else {
        for (int a = 0; a < n_sites_; ++a)
            for (int j = 0; j < n_branches_; ++j) {
                const int s = a * n_branches_ + j;
                d(a, j) = cplx(v[deform_offset_ + 2 * s], v[deform_offset_ + 2 * s + 1]);
            }
    }

    const int nu = symmetry_.unitary_class_count(n_sites_);
    std::vector<Mat2> cls(nu);
    for (int c = 0; c < nu; ++c) cls[c] = rotation_unitary(v.segment<3>(unitary_offset_ + 3 * c));
    std::vector<Mat2> us(n_sites_);
    for (int a = 0; a < n_sites_; ++a) us[a] = cls[symmetry_.unitary_class(a)];

    CVector w(n_branches_);
    w[0] = v[weight_offset_];
    for (int j = 1; j < n_branches_; ++j) w[j] = cplx(v[weight_offset_ + 2 * j - 1], v[weight_offset_ + 2 * j]);

    return SuperpositionAnsatz(std::move(graph), DeformationMatrix(std::move(d)), LocalUnitaries(std::move(us)),
                               std::move(w), symmetry_);
}

// ----------------------------------------------------------------- EnergyModel

EnergyModel::EnergyModel(TwoLocalHamiltonian h, const SymmetryProfile& symmetry) : h_(std::move(h)) {
    // Class blocks are pre-unitary, so only the phases and deformations need
    // to be translation invariant.
    if (symmetry.ties_phases() && symmetry.ties_deformations() && h_.lattice &&
        h_.lattice->periodic())
        classes_ = translation_classes(h_);
}

double EnergyModel::operator()(const SuperpositionAnsatz& ansatz, EvalStats* stats) const {
    ExpectationOptions opt;
    opt.classes = classes();
    opt.stats = stats;
    return expectation(ansatz, h_.terms, opt);
}

// ----------------------------------------------------------------- config/trace

void OptimizerConfig::validate() const {
    if (max_iterations < 0 || max_rounds < 1 || restarts < 1 || lbfgs_memory < 1)
        throw ArgumentError("iteration counts must be positive");
    if (!(gradient_tolerance > 0.0) || !(fd_scale > 0.0) || !(sweep_tolerance > 0.0) || !(eigen_regularization > 0.0))
        throw ArgumentError("optimizer tolerances must be positive");
    if (m_schedule.empty()) throw ArgumentError("m schedule is empty");
    for (std::size_t i = 0; i < m_schedule.size(); ++i) {
        if (m_schedule[i] < 1) throw ArgumentError("m schedule entries must be >= 1");
        if (i > 0 && m_schedule[i] <= m_schedule[i - 1]) throw ArgumentError("m schedule must be increasing");
    }
}

void write_trace_csv(const std::string& path, const OptimizationTrace& trace, bool timing) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw ArgumentError("cannot write " + tmp);
        out << "iter,m,energy,grad_norm,stage,seconds\n";
        char buf[256];
        for (const auto& r : trace.records) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.12f,%.6e,%s,%.3f\n", r.iteration, r.m, r.energy, r.grad_norm,
                          r.stage.c_str(), timing ? r.seconds : 0.0);
            out << buf;
        }
        if (!out) throw ArgumentError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

// ------------------------------------------------------------ energy/gradient

double energy(const ParameterPacking& packing, const RVector& v, const EnergyModel& model, EvalStats* stats) {
    return model(packing.unpack(v), stats);
}

RVector gradient_fd(const std::function<double(const RVector&)>& f, const RVector& v, double fd_scale) {
    RVector g(v.size());
    RVector probe = v;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double h = fd_scale * (1.0 + std::abs(v[i]));
        double fp, fm;
        try {
            probe[i] = v[i] + h;
            fp = f(probe);
            probe[i] = v[i] - h;
            fm = f(probe);
        } catch (const NumericRangeError& e) {
            throw NumericRangeError("energy probe failed at component " + std::to_string(i) + ": " + e.what());
        }
        probe[i] = v[i];
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NumericRangeError("non-finite energy probe at component " + std::to_string(i));
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

RVector gradient_fd(const ParameterPacking& packing, const RVector& v, const EnergyModel& model, double fd_scale) {
    return gradient_fd([&](const RVector& x) { return energy(packing, x, model); }, v, fd_scale);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool no_worse(double after, double before, double tol) {
    return after <= before + tol * std::max(1.0, std::abs(before));
}

}  // namespace

QuasiNewtonResult minimize_quasi_newton(const ParameterPacking& packing, const RVector& v0, const EnergyModel& model,
                                        const OptimizerConfig& config, OptimizationTrace* trace,
                                        const std::string& stage) {
    const auto t0 = Clock::now();
    LbfgsOptions opt;
    opt.max_iterations = config.max_iterations;
    opt.memory = config.lbfgs_memory;
    opt.gradient_tolerance = config.gradient_tolerance;
    opt.value_tolerance = config.sweep_tolerance;
    auto f = [&](const RVector& x) { return energy(packing, x, model); };
    auto g = [&](const RVector& x) { return gradient_fd(f, x, config.fd_scale); };
    IterationFn cb;
    if (trace) {
        cb = [&](int it, double e, double gn) {
            trace->records.push_back({it, packing.n_branches(), e, gn, stage, seconds_since(t0)});
        };
    }
    const LbfgsResult r = lbfgs_minimize(f, g, v0, opt, cb);
    return {r.x, r.value, r.status, r.iterations};
}

// ---------------------------------------------------------------------- sweeps

namespace {

struct LocalTerm {
    std::vector<int> sites;
    CMatrix op;
};

std::vector<LocalTerm> local_terms(const TwoLocalObservable& obs) {
    std::vector<LocalTerm> out;
    for (const auto& t : obs.pair_terms) out.push_back({{t.a, t.b}, t.matrix});
    for (const auto& t : obs.site_terms) out.push_back({{t.a}, t.matrix});
    return out;
}

/// Extends an operator on `op_sites` by identities to the ordered `block`.
CMatrix embed_operator(const CMatrix& op, std::span<const int> op_sites, std::span<const int> block) {
    const int k = static_cast<int>(block.size());
    std::vector<int> shift(op_sites.size());
    int mask = 0;
    for (std::size_t p = 0; p < op_sites.size(); ++p) {
        const auto it = std::find(block.begin(), block.end(), op_sites[p]);
        if (it == block.end()) throw ArgumentError("operator site missing from block");
        shift[p] = k - 1 - static_cast<int>(it - block.begin());
        mask |= 1 << shift[p];
    }
    const int dim = 1 << k;
    CMatrix out = CMatrix::Zero(dim, dim);
    for (int s = 0; s < dim; ++s)
        for (int t = 0; t < dim; ++t) {
            if ((s & ~mask) != (t & ~mask)) continue;
            int si = 0, ti = 0;
            for (int sh : shift) {
                si = (si << 1) | ((s >> sh) & 1);
                ti = (ti << 1) | ((t >> sh) & 1);
            }
            out(s, t) = op(si, ti);
        }
    return out;
}

CMatrix swap_pair(const CMatrix& m) {
    static const int perm[4] = {0, 2, 1, 3};
    CMatrix out(4, 4);
    for (int s = 0; s < 4; ++s)
        for (int t = 0; t < 4; ++t) out(perm[s], perm[t]) = m(s, t);
    return out;
}

CrossGram swap_cross(const CrossGram& c) {
    CrossGram out = c;
    std::swap(out.sites[0], out.sites[1]);
    for (auto& b : out.blocks) b = swap_pair(b);
    return out;
}

/// Minimal generalized eigenvector of (A, B + eps tr(B) I) after symmetric
/// diagonal scaling of both forms by diag(B)^(-1/2); empty on failure.
std::optional<CVector> minimal_eigenvector(CMatrix a, CMatrix b, double eps) {
    a = 0.5 * (a + a.adjoint());
    b = 0.5 * (b + b.adjoint());
    const double tr = b.trace().real();
    if (!(tr > 0.0) || !std::isfinite(tr) || !a.allFinite()) return std::nullopt;
    // Branches can differ in norm by many orders of magnitude.
    const Eigen::Index k = b.rows();
    RVector scale(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double bii = b(i, i).real();
        scale[i] = bii > 1e-300 * tr ? 1.0 / std::sqrt(bii) : 1.0 / std::sqrt(tr);
    }
    a = scale.asDiagonal() * a * scale.asDiagonal();
    b = scale.asDiagonal() * b * scale.asDiagonal();
    b += eps * b.trace().real() * CMatrix::Identity(k, k);
    Eigen::GeneralizedSelfAdjointEigenSolver<CMatrix> ges(a, b, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (ges.info() != Eigen::Success) return std::nullopt;
    CVector x = scale.asDiagonal() * ges.eigenvectors().col(0);
    if (!x.allFinite() || x.norm() == 0.0) return std::nullopt;
    return x;
}

SweepResult unchanged(const SuperpositionAnsatz& ans, double e, std::string status) {
    return {ans, e, e, false, std::move(status)};
}

SweepResult accept_if_better(const SuperpositionAnsatz& old, double e0, const SuperpositionAnsatz& cand,
                             const EnergyModel& model, const OptimizerConfig& cfg) {
    double e1;
    try {
        e1 = model(cand);
    } catch (const NumericRangeError&) {
        return unchanged(old, e0, "rejected: numeric range");
    } catch (const DegenerateStateError&) {
        return unchanged(old, e0, "rejected: degenerate state");
    }
    if (!std::isfinite(e1) || !no_worse(e1, e0, cfg.sweep_tolerance)) return unchanged(old, e0, "rejected: energy rose");
    if (e1 >= e0) return unchanged(old, e0, "unchanged");
    return {cand, e0, e1, true, "ok"};
}

CVector normalized_weights(CVector w) {
    const double mx = w.cwiseAbs().maxCoeff();
    if (mx > 0.0) w /= mx;
    return w;
}

}  // namespace

SweepResult sweep_alpha_deformations(const SuperpositionAnsatz& ans, int site, const EnergyModel& model,
                                     const OptimizerConfig& cfg) {
    const int n = ans.n_sites();
    const int m = ans.n_branches();
    if (site < 0 || site >= n) throw ArgumentError("site out of range");
    if (ans.symmetry() && ans.symmetry()->ties_deformations())
        throw ArgumentError("deformations are tied across sites; a single-site sweep would break the tie");
    const double e0 = model(ans);

    CMatrix d0 = ans.deformations().values();
    d0.row(site).setZero();
    const SuperpositionAnsatz base = ans.with_deformations(DeformationMatrix(d0));

    // Basis index p = sigma * m + branch; sigma is the value of s_site.
    const int one[1] = {site};
    const CrossGram cn = cross_gram(base, one);
    const double ref = cn.log_scale;
    CMatrix A = CMatrix::Zero(2 * m, 2 * m);
    CMatrix B = CMatrix::Zero(2 * m, 2 * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int s = 0; s < 2; ++s) B(s * m + i, s * m + j) = cn.block(j, i)(s, s);

    std::map<std::vector<int>, CMatrix> grouped;
    for (const auto& t : local_terms(model.hamiltonian().terms)) {
        std::vector<int> block = t.sites;
        if (std::find(block.begin(), block.end(), site) == block.end()) block.push_back(site);
        std::sort(block.begin(), block.end());
        CMatrix h = embed_operator(t.op, t.sites, block);
        auto [it, fresh] = grouped.try_emplace(block, h);
        if (!fresh) it->second += h;
    }
    for (const auto& [block, h] : grouped) {
        const CMatrix u = block_unitary(ans, block);
        const CMatrix kt = (u.adjoint() * h * u).transpose();
        const CrossGram c = cross_gram(base, block);
        const double w = std::exp(c.log_scale - ref);
        const int k = static_cast<int>(block.size());
        const int bit = k - 1 - static_cast<int>(std::find(block.begin(), block.end(), site) - block.begin());
        const int dim = 1 << k;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                // A(p, q) = sum_{s_site = sq, t_site = sp} K(t, s) C_{j,i}(s, t)
                const CMatrix prod = kt.cwiseProduct(c.block(j, i));
                cplx acc[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
                for (int s = 0; s < dim; ++s)
                    for (int t = 0; t < dim; ++t) acc[(t >> bit) & 1][(s >> bit) & 1] += prod(s, t);
                for (int sp = 0; sp < 2; ++sp)
                    for (int sq = 0; sq < 2; ++sq) A(sp * m + i, sq * m + j) += w * acc[sp][sq];
            }
    }

    const auto x = minimal_eigenvector(A, B, cfg.eigen_regularization);
    if (!x) return unchanged(ans, e0, "rejected: eigensolver failed");
    if (x->cwiseAbs().maxCoeff() == 0.0) throw DegenerateStateError("all-zero generalized eigenvector");

    const double scale = x->cwiseAbs().maxCoeff();
    constexpr double delta = 1e-8;
    CVector alpha(m);
    CMatrix d = ans.deformations().values();
    for (int j = 0; j < m; ++j) {
        const cplx z = (*x)[j] / scale, w = (*x)[m + j] / scale;
        if (std::abs(z) > 1e-13) {
            alpha[j] = z;
            d(site, j) = std::log(w / z);
            if (w == 0.0) return unchanged(ans, e0, "rejected: vanishing s=1 component");
        } else if (std::abs(w) > 0.0) {
            const cplx prev = ans.deformations()(site, j);
            d(site, j) = prev + std::log(std::abs(w) / delta);
            alpha[j] = delta * std::exp(cplx(0.0, std::arg(w))) * std::exp(-prev);
        } else {
            alpha[j] = 0.0;
        }
    }
    if (alpha.cwiseAbs().maxCoeff() == 0.0) throw DegenerateStateError("all branch weights vanished");
    if (!d.allFinite()) return unchanged(ans, e0, "rejected: non-finite deformation");
    try {
        const SuperpositionAnsatz cand =
            ans.with_deformations(DeformationMatrix(d)).with_weights(normalized_weights(alpha));
        return accept_if_better(ans, e0, cand, model, cfg);
    } catch (const NumericRangeError&) {
        return unchanged(ans, e0, "rejected: deformation cap");
    }
}

SweepResult sweep_weights(const SuperpositionAnsatz& ans, const EnergyModel& model, const OptimizerConfig& cfg) {
    const int n = ans.n_sites();
    const int m = ans.n_branches();
    const double e0 = model(ans);
    const CrossGram cn = cross_gram(ans, std::span<const int>{});
    const double ref = cn.log_scale;
    CMatrix A = CMatrix::Zero(m, m);
    CMatrix B(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) B(i, j) = cn.block(j, i)(0, 0);

    const auto& obs = model.hamiltonian().terms;
    const TermClasses* classes = model.classes();
    std::map<int, CrossGram> class_cache;
    // Single-site cross blocks (scaled to ref) recovered from pair blocks.
    std::vector<std::vector<Mat2>> site_blocks(n);
    auto add = [&](const CMatrix& kt, const std::vector<CMatrix>& blocks, double w) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) A(i, j) += w * kt.cwiseProduct(blocks[j * m + i]).sum();
    };
    for (std::size_t term = 0; term < obs.pair_terms.size(); ++term) {
        const auto& t = obs.pair_terms[term];
        const int pair[2] = {t.a, t.b};
        CrossGram c;
        if (classes) {
            const int cls = classes->pair_class[term];
            const bool sw = classes->swapped[term];
            auto it = class_cache.find(cls);
            if (it == class_cache.end()) {
                CrossGram own = cross_gram(ans, pair);
                it = class_cache.emplace(cls, sw ? swap_cross(own) : own).first;
            }
            c = sw ? swap_cross(it->second) : it->second;
        } else {
            c = cross_gram(ans, pair);
        }
        const double w = std::exp(c.log_scale - ref);
        const CMatrix u = block_unitary(ans, pair);
        add((u.adjoint() * t.matrix * u).transpose(), c.blocks, w);
        for (int side = 0; side < 2; ++side) {
            const int s = pair[side];
            if (!site_blocks[s].empty()) continue;
            site_blocks[s].resize(static_cast<std::size_t>(m) * m);
            for (std::size_t q = 0; q < c.blocks.size(); ++q)
                site_blocks[s][q] = w * partial_trace_pair(Mat4(c.blocks[q]), side);
        }
    }
    for (const auto& t : obs.site_terms) {
        if (site_blocks[t.a].empty()) {
            const int one[1] = {t.a};
            const CrossGram c = cross_gram(ans, one);
            const double w = std::exp(c.log_scale - ref);
            site_blocks[t.a].resize(static_cast<std::size_t>(m) * m);
            for (std::size_t q = 0; q < c.blocks.size(); ++q) site_blocks[t.a][q] = w * c.blocks[q];
        }
        const Mat2& u = ans.unitaries()[t.a];
        const Mat2 kt = (u.adjoint() * t.matrix * u).transpose();
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) A(i, j) += kt.cwiseProduct(site_blocks[t.a][j * m + i]).sum();
    }

    const auto x = minimal_eigenvector(A, B, cfg.eigen_regularization);
    if (!x) return unchanged(ans, e0, "rejected: eigensolver failed");
    return accept_if_better(ans, e0, ans.with_weights(normalized_weights(*x)), model, cfg);
}

SweepResult sweep_phase(const SuperpositionAnsatz& ans, int a, int b, const EnergyModel& model,
                        const OptimizerConfig& cfg) {
    const int n = ans.n_sites();
    if (a == b || a < 0 || b < 0 || a >= n || b >= n) throw ArgumentError("phase sweep needs two distinct sites");
    if (!ans.graph().is_dense()) throw ArgumentError("phases are tied by distance; no single-pair coordinate");
    if (ans.symmetry() && ans.symmetry()->mode == SymmetryMode::range_cutoff &&
        ans.symmetry()->lattice->distance(a, b) >= ans.symmetry()->r0)
        throw ArgumentError("pair lies beyond the range cutoff");
    const double e0 = model(ans);
    const SuperpositionAnsatz base = ans.with_graph(ans.graph().with_entry(a, b, 0.0));

    // Energy is c0 + 2 Re(u c1) over a constant norm, u = exp(-i phase);
    // only terms touching a or b contribute to c1.
    cplx c1 = 0.0;
    for (const auto& t : local_terms(model.hamiltonian().terms)) {
        const bool touches = std::find(t.sites.begin(), t.sites.end(), a) != t.sites.end() ||
                             std::find(t.sites.begin(), t.sites.end(), b) != t.sites.end();
        if (!touches) continue;
        std::vector<int> block{a, b};
        for (int s : t.sites)
            if (s != a && s != b) block.push_back(s);
        const int k = static_cast<int>(block.size());
        const GramBlock g = gram_block(base, block);
        const double tr = g.entries.trace().real();
        if (!(tr > 0.0)) throw DegenerateStateError("ansatz state has zero norm");
        const CMatrix u = block_unitary(ans, block);
        const CMatrix kt = (u.adjoint() * embed_operator(t.op, t.sites, block) * u).transpose();
        const int dim = 1 << k;
        const int both = 3 << (k - 2);
        for (int s = 0; s < dim; ++s) {
            if ((s & both) != both) continue;
            for (int r = 0; r < dim; ++r) {
                if ((r & both) == both) continue;
                c1 += kt(s, r) * g.entries(s, r) / tr;  // Tr(K P1 R P0)
            }
        }
    }
    if (std::abs(c1) < 1e-14) return unchanged(ans, e0, "unchanged");
    const double phi = std::arg(c1) - kPi;
    return accept_if_better(ans, e0, ans.with_graph(ans.graph().with_entry(a, b, phi)), model, cfg);
}

SweepResult sweep_local_unitary(const SuperpositionAnsatz& ans, int site, const EnergyModel& model,
                                const OptimizerConfig& cfg) {
    const int n = ans.n_sites();
    if (site < 0 || site >= n) throw ArgumentError("site out of range");
    if (ans.symmetry() && ans.symmetry()->ties_unitaries())
        throw ArgumentError("local unitaries are tied; a single-site sweep would break the tie");
    const double e0 = model(ans);

    // Dressed densities of every term touching the site, site first.
    struct Piece {
        CMatrix h;
        CMatrix rho;
        int k;
    };
    std::vector<Piece> pieces;
    for (const auto& t : local_terms(model.hamiltonian().terms)) {
        if (std::find(t.sites.begin(), t.sites.end(), site) == t.sites.end()) continue;
        std::vector<int> block{site};
        for (int s : t.sites)
            if (s != site) block.push_back(s);
        const GramBlock g = gram_block(ans, block);
        pieces.push_back({embed_operator(t.op, t.sites, block), dress_block(ans, block, g.entries),
                          static_cast<int>(block.size())});
    }
    if (pieces.empty()) return unchanged(ans, e0, "unchanged");

    auto local_energy = [&](const Eigen::Vector3d& theta) {
        const Mat2 r = rotation_unitary(theta);
        double e = 0.0;
        for (const auto& p : pieces) {
            const CMatrix rr = p.k == 1 ? CMatrix(r) : kron(r, CMatrix::Identity(2, 2));
            e += (p.h * rr * p.rho * rr.adjoint()).trace().real();
        }
        return e;
    };

    const double f0 = local_energy(Eigen::Vector3d::Zero());
    const double h = 0.5 * kPi;
    const double d3 = h / std::sqrt(3.0);
    const Eigen::Vector3d starts[8] = {{0, 0, 0}, {h, 0, 0}, {-h, 0, 0}, {0, h, 0},
                                       {0, -h, 0}, {0, 0, h}, {0, 0, -h}, {d3, d3, d3}};
    LbfgsOptions opt;
    opt.max_iterations = 100;
    opt.gradient_tolerance = 1e-10;
    auto f = [&](const RVector& x) { return local_energy(Eigen::Vector3d(x)); };
    auto g = [&](const RVector& x) { return gradient_fd(f, x, 1e-7); };
    double best = f0;
    Eigen::Vector3d best_theta = Eigen::Vector3d::Zero();
    bool any = false;
    for (const auto& s : starts) {
        try {
            const LbfgsResult r = lbfgs_minimize(f, g, RVector(s), opt);
            any = true;
            if (r.value < best) {
                best = r.value;
                best_theta = r.x;
            }
        } catch (const NumericRangeError&) {
        }
    }
    if (!any) return unchanged(ans, e0, "rejected: inner minimization failed");
    if (best >= f0) return unchanged(ans, e0, "unchanged");

    // Project back onto U(2) to keep the unitarity defect at round-off level.
    const Mat2 raw = rotation_unitary(best_theta) * ans.unitaries()[site];
    Eigen::JacobiSVD<Mat2> svd(raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
    std::vector<Mat2> us = ans.unitaries().matrices();
    us[site] = svd.matrixU() * svd.matrixV().adjoint();
    return accept_if_better(ans, e0, ans.with_unitaries(LocalUnitaries(std::move(us))), model, cfg);
}

// ------------------------------------------------------------------- growth

SuperpositionAnsatz grow_superposition(const SuperpositionAnsatz& ans, std::mt19937_64& rng) {
    const int n = ans.n_sites();
    const int m = ans.n_branches();
    const CVector& w = ans.weights();
    int src = 0;
    for (int j = 1; j < m; ++j)
        if (std::abs(w[j]) > std::abs(w[src])) src = j;
    const bool tied = ans.symmetry() && ans.symmetry()->ties_deformations();

    std::normal_distribution<double> noise(0.0, 0.1 / std::sqrt(2.0));
    CMatrix d(n, m + 1);
    d.leftCols(m) = ans.deformations().values();
    if (tied) {
        const cplx e(noise(rng), noise(rng));
        for (int a = 0; a < n; ++a) d(a, m) = ans.deformations()(a, src) + e;
    } else {
        for (int a = 0; a < n; ++a) {
            const double re = noise(rng);
            const double im = noise(rng);
            d(a, m) = ans.deformations()(a, src) + cplx(re, im);
        }
    }
    CVector nw(m + 1);
    nw.head(m) = w;
    nw[m] = 0.01 * w.cwiseAbs().maxCoeff();
    return SuperpositionAnsatz(ans.graph(), DeformationMatrix(std::move(d)), ans.unitaries(), std::move(nw),
                               ans.symmetry());
}

SuperpositionAnsatz embed_superposition(const SuperpositionAnsatz& ans) {
    const int m = ans.n_branches();
    CMatrix d(ans.n_sites(), m + 1);
    d.leftCols(m) = ans.deformations().values();
    d.col(m) = ans.deformations().values().col(0);
    CVector w(m + 1);
    w.head(m) = ans.weights();
    w[m] = 0.0;
    return SuperpositionAnsatz(ans.graph(), DeformationMatrix(std::move(d)), ans.unitaries(), std::move(w),
                               ans.symmetry());
}

SuperpositionAnsatz initial_ansatz(const ParameterPacking& packing, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> phase(-0.1, 0.1);
    std::normal_distribution<double> noise(0.0, 0.1 / std::sqrt(2.0));
    const int m = packing.n_branches();
    RVector v = RVector::Zero(packing.size());
    for (const auto& s : packing.layout()) {
        switch (s.kind) {
            case ParameterKind::phase: v[s.offset] = phase(rng); break;
            case ParameterKind::deformation: {
                const int branch = packing.symmetry().ties_deformations() ? s.index : s.index % m;
                v[s.offset] = 1.0;
                if (branch > 0) {
                    v[s.offset] += noise(rng);
                    v[s.offset + 1] = noise(rng);
                }
                break;
            }
            case ParameterKind::unitary: break;
            case ParameterKind::weight: v[s.offset] = 1.0 / std::sqrt(static_cast<double>(m)); break;
        }
    }
    return packing.unpack(v);
}

// ------------------------------------------------------------------ schedule

namespace {

struct Stage {
    const EnergyModel& model;
    const OptimizerConfig& cfg;
    OptimizationTrace& trace;
    Clock::time_point t0;
    int iteration = 0;

    void record(int m, double e, double gn, const std::string& stage) {
        trace.records.push_back({++iteration, m, e, gn, stage, seconds_since(t0)});
        if (cfg.on_record) cfg.on_record(trace.records.back());
    }

    double quasi_newton(SuperpositionAnsatz& ans, const ParameterPacking& packing) {
        OptimizationTrace local;
        RVector v0 = packing.pack(ans);
        const double e_in = model(ans);
        const double offset = seconds_since(t0);
        QuasiNewtonResult r;
        try {
            r = minimize_quasi_newton(packing, v0, model, cfg, &local);
        } catch (const NumericRangeError&) {
            record(packing.n_branches(), e_in, 0.0, "lbfgs:failed");
            return e_in;
        }
        for (auto rec : local.records) {
            rec.iteration = ++iteration;
            rec.seconds += offset;
            trace.records.push_back(std::move(rec));
            if (cfg.on_record) cfg.on_record(trace.records.back());
        }
        if (r.energy < e_in) {
            ans = packing.unpack(r.v);
            return r.energy;
        }
        return e_in;
    }

    double sweep_round(SuperpositionAnsatz& ans, double e) {
        const int m = ans.n_branches();
        const int n = ans.n_sites();
        const auto& sym = ans.symmetry();
        auto apply = [&](const SweepResult& r) {
            if (r.changed) {
                ans = r.ansatz;
                e = r.energy_after;
            }
        };
        auto guarded = [&](auto&& op) {
            try {
                apply(op());
            } catch (const std::exception&) {
            }
        };
        guarded([&] { return sweep_weights(ans, model, cfg); });
        record(m, e, 0.0, "sweep:weights");
        for (SweepKind kind : cfg.sweep_order) {
            switch (kind) {
                case SweepKind::deformations:
                    if (sym && sym->ties_deformations()) break;
                    for (int a = 0; a < n; ++a) guarded([&] { return sweep_alpha_deformations(ans, a, model, cfg); });
                    record(m, e, 0.0, "sweep:deformations");
                    break;
                case SweepKind::phases: {
                    if (!ans.graph().is_dense()) break;
                    const ParameterPacking packing(sym.value_or(SymmetryProfile{}), n, m);
                    for (const auto& [a, b] : packing.free_pairs())
                        guarded([&] { return sweep_phase(ans, a, b, model, cfg); });
                    record(m, e, 0.0, "sweep:phases");
                    break;
                }
                case SweepKind::unitaries:
                    if (sym && sym->ties_unitaries()) break;
                    for (int a = 0; a < n; ++a) guarded([&] { return sweep_local_unitary(ans, a, model, cfg); });
                    record(m, e, 0.0, "sweep:unitaries");
                    break;
            }
        }
        return e;
    }

    // Adds one branch. Besides the noisy copy, reflections d -> -conj(d) and
    // d -> -d of every branch (and, with untied deformations, of single sites
    // of the heaviest branch) are tried with weights from an exact solve; the
    // lowest energy wins.
    SuperpositionAnsatz grow(const SuperpositionAnsatz& ans, std::mt19937_64& rng) {
        SuperpositionAnsatz best = grow_superposition(ans, rng);
        double best_e = model(best);
        const int m = ans.n_branches();
        const int n = ans.n_sites();
        const CMatrix& d = ans.deformations().values();
        std::vector<CVector> columns;
        for (int j = 0; j < m; ++j) {
            columns.push_back(-d.col(j).conjugate());
            columns.push_back(-d.col(j));
        }
        if (!(ans.symmetry() && ans.symmetry()->ties_deformations())) {
            int src = 0;
            for (int j = 1; j < m; ++j)
                if (std::abs(ans.weights()[j]) > std::abs(ans.weights()[src])) src = j;
            for (int a = 0; a < n; ++a) {
                CVector c = d.col(src);
                c[a] = -std::conj(c[a]);
                columns.push_back(c);
                c[a] = -d(a, src);
                columns.push_back(c);
            }
        }
        for (const CVector& col : columns) {
            {
                CMatrix nd(n, m + 1);
                nd.leftCols(m) = d;
                nd.col(m) = col;
                CVector w(m + 1);
                w.head(m) = ans.weights();
                w[m] = 0.0;
                try {
                    SuperpositionAnsatz cand(ans.graph(), DeformationMatrix(std::move(nd)), ans.unitaries(),
                                             std::move(w), ans.symmetry());
                    SweepResult r = sweep_weights(cand, model, cfg);
                    if (r.changed && r.energy_after < best_e) {
                        best_e = r.energy_after;
                        best = r.ansatz;
                    }
                } catch (const std::exception&) {
                }
            }
        }
        record(m + 1, best_e, 0.0, "grow");
        return best;
    }

    double optimize(SuperpositionAnsatz& ans, const ParameterPacking& packing) {
        double e = model(ans);
        for (int round = 0; round < cfg.max_rounds; ++round) {
            const double start = e;
            e = quasi_newton(ans, packing);
            e = sweep_round(ans, e);
            if (start - e < cfg.sweep_tolerance * std::max(1.0, std::abs(start))) break;
        }
        return e;
    }
};

}  // namespace

ScheduleResult run_schedule(const EnergyModel& model, const SymmetryProfile& symmetry, const OptimizerConfig& cfg,
                            const SuperpositionAnsatz* warm_start) {
    cfg.validate();
    const int n = model.hamiltonian().n_sites() > 0 ? model.hamiltonian().n_sites()
                                                    : (warm_start ? warm_start->n_sites() : 0);
    if (n < 1) throw ArgumentError("Hamiltonian has no lattice");
    std::mt19937_64 rng(cfg.seed);
    ScheduleResult out;
    Stage st{model, cfg, out.trace, Clock::now()};

    std::optional<SuperpositionAnsatz> current;
    std::size_t first = 0;
    if (warm_start) {
        if (warm_start->n_sites() != n) throw ArgumentError("warm start has the wrong site count");
        // Project onto the profile so every tie holds exactly.
        const ParameterPacking own(symmetry, n, warm_start->n_branches());
        current = own.unpack(own.pack(*warm_start));
        while (first < cfg.m_schedule.size() && cfg.m_schedule[first] < current->n_branches()) ++first;
        if (first == cfg.m_schedule.size()) first = cfg.m_schedule.size() - 1;
    }

    for (std::size_t idx = first; idx < cfg.m_schedule.size(); ++idx) {
        const int m_target = std::max(cfg.m_schedule[idx], current ? current->n_branches() : 1);
        const ParameterPacking packing(symmetry, n, m_target);
        if (!current) {
            // Pick the best of several short starts, then continue from it.
            double best_e = std::numeric_limits<double>::infinity();
            OptimizationTrace best_trace;
            for (int r = 0; r < cfg.restarts; ++r) {
                SuperpositionAnsatz cand = initial_ansatz(packing, rng);
                OptimizationTrace local;
                Stage probe{model, cfg, local, st.t0};
                const double e = probe.quasi_newton(cand, packing);
                if (e < best_e) {
                    best_e = e;
                    current = cand;
                    best_trace = std::move(local);
                }
            }
            for (auto rec : best_trace.records) {
                rec.iteration = ++st.iteration;
                out.trace.records.push_back(std::move(rec));
            }
        }
        while (current->n_branches() < m_target) current = st.grow(*current, rng);

        double e = st.optimize(*current, packing);
        if (!out.stages.empty() && e > out.stages.back().energy) {
            // Fall back on the previous optimum with zero-weight branches.
            SuperpositionAnsatz prev = out.stages.back().ansatz;
            while (prev.n_branches() < m_target) prev = embed_superposition(prev);
            current = prev;
            e = out.stages.back().energy;
            st.record(m_target, e, 0.0, "embed");
        }
        out.stages.push_back({m_target, e, *current});
    }
    return out;
}

}  // namespace wgs
