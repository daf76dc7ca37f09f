#include "wgs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <type_traits>

#include <Eigen/Eigenvalues>

#include "wgs/errors.hpp"

namespace wgs {

// ---------------------------------------------------------- SparseHamiltonian

SparseHamiltonian::SparseHamiltonian(const TwoLocalObservable& obs, int n_sites) : n_(n_sites) {
    obs.validate(n_sites);
    if (n_sites > 30) throw CapacityError("matrix-free Hamiltonian limited to 30 sites");
    const Eigen::Index dim = dimension();
    diag_ = RVector::Zero(dim);
    for (const auto& t : obs.site_terms) {
        const int shift = n_ - 1 - t.a;
        const double d0 = t.matrix(0, 0).real(), d1 = t.matrix(1, 1).real();
        for (Eigen::Index x = 0; x < dim; ++x) diag_[x] += ((x >> shift) & 1) ? d1 : d0;
        if (t.matrix.imag().cwiseAbs().maxCoeff() > 0.0) real_ = false;
        Mat2 off = t.matrix;
        off(0, 0) = off(1, 1) = 0.0;
        if (off.cwiseAbs().maxCoeff() > 0.0) site_off_.emplace_back(t.a, off);
    }
    for (const auto& t : obs.pair_terms) {
        const int sa = n_ - 1 - t.a, sb = n_ - 1 - t.b;
        double d[4];
        for (int s = 0; s < 4; ++s) d[s] = t.matrix(s, s).real();
        for (Eigen::Index x = 0; x < dim; ++x) diag_[x] += d[(((x >> sa) & 1) << 1) | ((x >> sb) & 1)];
        if (t.matrix.imag().cwiseAbs().maxCoeff() > 0.0) real_ = false;
        Mat4 off = t.matrix;
        for (int s = 0; s < 4; ++s) off(s, s) = 0.0;
        if (off.cwiseAbs().maxCoeff() > 0.0) pair_off_.push_back({{t.a, t.b}, off});
    }
}

namespace {
template <typename Scalar>
Scalar coeff_as(cplx v) {
    if constexpr (std::is_same_v<Scalar, double>) return v.real();
    else return v;
}
}  // namespace

template <typename Scalar, typename Vec>
void SparseHamiltonian::apply_impl(const Eigen::Ref<const Vec>& x, Vec& y) const {
    const Eigen::Index dim = dimension();
    y = (diag_.array().template cast<Scalar>() * x.array()).matrix();
    for (const auto& [a, mc] : site_off_) {
        const Scalar m01 = coeff_as<Scalar>(mc(0, 1)), m10 = coeff_as<Scalar>(mc(1, 0));
        const Eigen::Index stride = Eigen::Index{1} << (n_ - 1 - a);
        for (Eigen::Index base = 0; base < dim; base += 2 * stride)
            for (Eigen::Index off = 0; off < stride; ++off) {
                const Eigen::Index i0 = base + off, i1 = i0 + stride;
                y[i0] += m01 * x[i1];
                y[i1] += m10 * x[i0];
            }
    }
    for (const auto& [ab, mc] : pair_off_) {
        Scalar m[4][4];
        for (int s = 0; s < 4; ++s)
            for (int t = 0; t < 4; ++t) m[s][t] = coeff_as<Scalar>(mc(s, t));
        const Eigen::Index ma = Eigen::Index{1} << (n_ - 1 - ab.first);
        const Eigen::Index mb = Eigen::Index{1} << (n_ - 1 - ab.second);
        for (Eigen::Index i = 0; i < dim; ++i) {
            if (i & (ma | mb)) continue;
            const Eigen::Index idx[4] = {i, i | mb, i | ma, i | ma | mb};
            Scalar v[4];
            for (int s = 0; s < 4; ++s) v[s] = x[idx[s]];
            for (int s = 0; s < 4; ++s) {
                Scalar acc = 0.0;
                for (int t = 0; t < 4; ++t) acc += m[s][t] * v[t];
                y[idx[s]] += acc;
            }
        }
    }
}

void SparseHamiltonian::apply(const Eigen::Ref<const CVector>& x, CVector& y) const {
    apply_impl<cplx, CVector>(x, y);
}

void SparseHamiltonian::apply(const Eigen::Ref<const RVector>& x, RVector& y) const {
    if (!real_) throw ArgumentError("Hamiltonian has complex matrix elements");
    apply_impl<double, RVector>(x, y);
}

CMatrix SparseHamiltonian::dense() const {
    const Eigen::Index dim = dimension();
    CMatrix h(dim, dim);
    CVector e = CVector::Zero(dim), col;
    for (Eigen::Index j = 0; j < dim; ++j) {
        e[j] = 1.0;
        apply(e, col);
        h.col(j) = col;
        e[j] = 0.0;
    }
    return h;
}

// ------------------------------------------------------------- ground states

GroundState dense_ground_state(const TwoLocalObservable& h, int n_sites, const ExactOptions& opt) {
    if (n_sites > std::max(opt.dense_cap, 0) || n_sites > 13)
        throw CapacityError("dense diagonalization of " + std::to_string(n_sites) + " sites exceeds cap");
    const SparseHamiltonian sh(h, n_sites);
    const CMatrix dense = sh.dense();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(dense);
    if (es.info() != Eigen::Success) throw NumericRangeError("dense eigensolver failed");
    GroundState gs;
    gs.energy = es.eigenvalues()[0];
    gs.state = es.eigenvectors().col(0);
    gs.residual = (dense * gs.state - gs.energy * gs.state).norm();
    return gs;
}

namespace {

template <typename Scalar>
GroundState lanczos_impl(const SparseHamiltonian& sh, const ExactOptions& opt) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index dim = sh.dimension();

    int basis = opt.max_basis;
    if (basis <= 0) {
        const double bytes_per_vec = static_cast<double>(sizeof(Scalar)) * static_cast<double>(dim);
        basis = static_cast<int>(std::clamp(1.5e9 / bytes_per_vec, 8.0, 60.0));
    }
    basis = static_cast<int>(std::min<Eigen::Index>(basis, dim));

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd;
    Vec v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        if constexpr (std::is_same_v<Scalar, double>) v[i] = nd(rng);
        else v[i] = cplx(nd(rng), nd(rng));
    }
    v.normalize();

    GroundState gs;
    gs.iterative = true;
    Mat V(dim, basis);
    Vec w, coeff;
    for (int cycle = 0; cycle <= opt.max_restarts; ++cycle) {
        V.col(0) = v;
        std::vector<double> alpha, beta;
        double theta = 0.0;
        RVector y;
        bool done = false;
        int used = 0;
        for (int j = 0; j < basis; ++j) {
            used = j + 1;
            sh.apply(V.col(j), w);
            ++gs.iterations;
            alpha.push_back(std::real(V.col(j).dot(w)));
            // Full reorthogonalization against the cycle's basis; a second
            // pass only when the first one cancelled most of w.
            for (int pass = 0; pass < 2; ++pass) {
                const double before = w.norm();
                coeff.noalias() = V.leftCols(j + 1).adjoint() * w;
                w.noalias() -= V.leftCols(j + 1) * coeff;
                if (w.norm() > 0.7 * before) break;
            }
            const double b = w.norm();

            const int size = j + 1;
            RVector diag(size), sub(std::max(size - 1, 0));
            for (int i = 0; i < size; ++i) diag[i] = alpha[i];
            for (int i = 0; i + 1 < size; ++i) sub[i] = beta[i];
            Eigen::SelfAdjointEigenSolver<RMatrix> tri;
            tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            theta = tri.eigenvalues()[0];
            y = tri.eigenvectors().col(0);
            const double resid = b * std::abs(y[size - 1]);
            const double scale = std::max(1.0, std::abs(theta));
            if (resid < opt.tolerance * scale || b < 1e-14 * scale) {
                done = true;
                break;
            }
            if (j + 1 < basis) {
                beta.push_back(b);
                V.col(j + 1) = w / b;
            }
        }
        Vec x = V.leftCols(used) * y.cast<Scalar>();
        x.normalize();
        v = x;
        gs.energy = theta;
        if (done) {
            sh.apply(x, w);
            gs.residual = (w - theta * x).norm();
            gs.state = x.template cast<cplx>();
            return gs;
        }
    }
    sh.apply(v, w);
    gs.residual = (w - gs.energy * v).norm();
    throw NumericRangeError("Lanczos did not converge; residual " + std::to_string(gs.residual));
}

}  // namespace

GroundState lanczos_ground_state(const TwoLocalObservable& h, int n_sites, const ExactOptions& opt) {
    if (n_sites > opt.iterative_cap)
        throw CapacityError("iterative diagonalization of " + std::to_string(n_sites) + " sites exceeds cap");
    const SparseHamiltonian sh(h, n_sites);
    if (sh.is_real()) return lanczos_impl<double>(sh, opt);
    return lanczos_impl<cplx>(sh, opt);
}

GroundState exact_ground_energy(const TwoLocalObservable& h, int n_sites, const ExactOptions& opt) {
    if (n_sites <= opt.dense_cap) return dense_ground_state(h, n_sites, opt);
    return lanczos_ground_state(h, n_sites, opt);
}

GroundState exact_ground_energy(const TwoLocalHamiltonian& h, const ExactOptions& opt) {
    return exact_ground_energy(h.terms, h.n_sites(), opt);
}

// -------------------------------------------------------------- dense helpers

ReducedDensity brute_reduced(const CVector& state, std::span<const int> sites, int max_block) {
    const Eigen::Index dim = state.size();
    int n = 0;
    while ((Eigen::Index{1} << n) < dim) ++n;
    if ((Eigen::Index{1} << n) != dim) throw ArgumentError("state length is not a power of two");
    const int k = static_cast<int>(sites.size());
    if (k > max_block) throw CapacityError("brute partial trace block exceeds cap");
    for (int p = 0; p < k; ++p) {
        if (sites[p] < 0 || sites[p] >= n) throw ArgumentError("site index out of range");
        for (int q = 0; q < p; ++q)
            if (sites[p] == sites[q]) throw ArgumentError("duplicate site index");
    }

    Eigen::Index block_mask = 0;
    for (int a : sites) block_mask |= Eigen::Index{1} << (n - 1 - a);
    auto block_index = [&](Eigen::Index x) {
        int s = 0;
        for (int p = 0; p < k; ++p) s = (s << 1) | static_cast<int>((x >> (n - 1 - sites[p])) & 1);
        return s;
    };
    // Group amplitudes by the complementary configuration.
    const int bdim = 1 << k;
    CMatrix rho = CMatrix::Zero(bdim, bdim);
    std::vector<cplx> col(bdim);
    for (Eigen::Index rest = 0; rest < dim; ++rest) {
        if (rest & block_mask) continue;
        std::fill(col.begin(), col.end(), cplx(0.0));
        // enumerate block configurations
        for (int s = 0; s < bdim; ++s) {
            Eigen::Index x = rest;
            for (int p = 0; p < k; ++p)
                if ((s >> (k - 1 - p)) & 1) x |= Eigen::Index{1} << (n - 1 - sites[p]);
            col[block_index(x)] = state[x];
        }
        for (int s = 0; s < bdim; ++s)
            for (int t = 0; t < bdim; ++t) rho(s, t) += col[s] * std::conj(col[t]);
    }
    const double tr = rho.trace().real();
    if (!(tr > 0.0)) throw DegenerateStateError("zero state");
    return {std::vector<int>(sites.begin(), sites.end()), rho / tr};
}

double dense_expectation(const CVector& state, const TwoLocalObservable& obs) {
    const Eigen::Index dim = state.size();
    int n = 0;
    while ((Eigen::Index{1} << n) < dim) ++n;
    const SparseHamiltonian sh(obs, n);
    CVector hx;
    sh.apply(state, hx);
    return state.dot(hx).real() / state.squaredNorm();
}

// ---------------------------------------------------------- Anderson bound

ClusterDecomposition cluster_decomposition(const TwoLocalHamiltonian& h, std::span<const int> shape) {
    if (!h.lattice) throw ArgumentError("cluster decomposition needs a lattice");
    const Lattice& lat = *h.lattice;
    const int dim = lat.dim();
    if (static_cast<int>(shape.size()) != dim) throw ArgumentError("cluster shape needs one extent per axis");
    for (int ax = 0; ax < dim; ++ax) {
        if (shape[ax] < 1 || shape[ax] > lat.extents()[ax] || lat.extents()[ax] % shape[ax] != 0)
            throw ArgumentError("cluster shape does not tile the lattice");
    }
    const int n = lat.size();
    h.terms.validate(n);

    // Patch id of every site.
    std::vector<int> patch(n);
    int per_axis[3] = {1, 1, 1};
    for (int ax = 0; ax < dim; ++ax) per_axis[ax] = lat.extents()[ax] / shape[ax];
    for (int a = 0; a < n; ++a) {
        auto c = lat.coords(a);
        int id = 0;
        for (int ax = 0; ax < dim; ++ax) id = id * per_axis[ax] + c[ax] / shape[ax];
        patch[a] = id;
    }
    int n_patches = 1;
    for (int ax = 0; ax < dim; ++ax) n_patches *= per_axis[ax];

    // Assign pair terms: internal to a patch, or to a two-site connector.
    std::vector<std::vector<std::size_t>> patch_terms(n_patches);
    std::map<std::pair<int, int>, std::vector<std::size_t>> connectors;
    for (std::size_t t = 0; t < h.terms.pair_terms.size(); ++t) {
        const auto& pt = h.terms.pair_terms[t];
        if (patch[pt.a] == patch[pt.b]) patch_terms[patch[pt.a]].push_back(t);
        else connectors[{std::min(pt.a, pt.b), std::max(pt.a, pt.b)}].push_back(t);
    }

    std::vector<int> incidence(n, 0);
    for (const auto& pt : h.terms.pair_terms) {
        ++incidence[pt.a];
        ++incidence[pt.b];
    }

    struct Draft {
        std::vector<int> sites;
        std::vector<std::size_t> pair_terms;
        bool patch = false;
    };
    std::vector<Draft> drafts;
    for (int p = 0; p < n_patches; ++p) {
        Draft d;
        for (int a = 0; a < n; ++a)
            if (patch[a] == p) d.sites.push_back(a);
        d.pair_terms = patch_terms[p];
        d.patch = true;
        drafts.push_back(std::move(d));
    }
    for (auto& [ab, terms] : connectors) drafts.push_back({{ab.first, ab.second}, terms, false});

    // Site terms per site.
    std::vector<std::vector<std::size_t>> site_terms(n);
    for (std::size_t t = 0; t < h.terms.site_terms.size(); ++t) site_terms[h.terms.site_terms[t].a].push_back(t);

    ClusterDecomposition out;
    for (const auto& d : drafts) {
        ClusterDecomposition::Cluster c;
        c.sites = d.sites;
        std::map<int, int> local;
        for (std::size_t i = 0; i < d.sites.size(); ++i) local[d.sites[i]] = static_cast<int>(i);
        std::vector<int> local_incidence(d.sites.size(), 0);
        for (std::size_t t : d.pair_terms) {
            const auto& pt = h.terms.pair_terms[t];
            c.terms.pair_terms.push_back({local[pt.a], local[pt.b], pt.matrix});
            ++local_incidence[local[pt.a]];
            ++local_incidence[local[pt.b]];
        }
        for (std::size_t i = 0; i < d.sites.size(); ++i) {
            const int a = d.sites[i];
            double fraction = 0.0;
            if (incidence[a] > 0) fraction = static_cast<double>(local_incidence[i]) / incidence[a];
            else if (d.patch) fraction = 1.0;  // isolated site keeps its field in its patch
            if (fraction == 0.0) continue;
            for (std::size_t t : site_terms[a])
                c.terms.site_terms.push_back({static_cast<int>(i), fraction * h.terms.site_terms[t].matrix});
        }
        out.clusters.push_back(std::move(c));
    }
    return out;
}

double anderson_bound(const TwoLocalHamiltonian& h, std::span<const int> shape, const ExactOptions& opt) {
    const ClusterDecomposition dec = cluster_decomposition(h, shape);
    // Identical cluster Hamiltonians are diagonalized once.
    std::map<std::string, double> cache;
    double total = 0.0;
    for (const auto& c : dec.clusters) {
        std::string key = std::to_string(c.sites.size()) + ';';
        char buf[64];
        for (const auto& t : c.terms.pair_terms) {
            key += std::to_string(t.a) + ',' + std::to_string(t.b) + ':';
            for (int s = 0; s < 16; ++s) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,", t.matrix.data()[s].real(), t.matrix.data()[s].imag());
                key += buf;
            }
        }
        key += '|';
        for (const auto& t : c.terms.site_terms) {
            key += std::to_string(t.a) + ':';
            for (int s = 0; s < 4; ++s) {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,", t.matrix.data()[s].real(), t.matrix.data()[s].imag());
                key += buf;
            }
        }
        auto it = cache.find(key);
        if (it == cache.end()) {
            const double e = exact_ground_energy(c.terms, static_cast<int>(c.sites.size()), opt).energy;
            it = cache.emplace(std::move(key), e).first;
        }
        total += it->second;
    }
    return total;
}

}  // namespace wgs
