#include "wgs/reduction.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <string>

#include "wgs/errors.hpp"

namespace wgs {
namespace {

/// mantissa * 2^exponent
struct Scaled {
    cplx m{1.0, 0.0};
    int e = 0;
};

void renormalize(Scaled& v) {
    const double big = std::max(std::abs(v.m.real()), std::abs(v.m.imag()));
    if (big == 0.0) {
        v.e = 0;
        return;
    }
    int shift = 0;
    std::frexp(big, &shift);
    v.m = {std::ldexp(v.m.real(), -shift), std::ldexp(v.m.imag(), -shift)};
    v.e += shift;
}

int log2_magnitude(const Scaled& v) {
    const double big = std::max(std::abs(v.m.real()), std::abs(v.m.imag()));
    if (big == 0.0) return INT_MIN / 4;
    return v.e + std::ilogb(big);
}

cplx ldexp_c(cplx v, int e) { return {std::ldexp(v.real(), e), std::ldexp(v.imag(), e)}; }

void check_sites(int n_sites, std::span<const int> sites, int max_block) {
    if (static_cast<int>(sites.size()) > max_block)
        throw CapacityError("block of " + std::to_string(sites.size()) + " sites exceeds cap " +
                            std::to_string(max_block));
    for (std::size_t p = 0; p < sites.size(); ++p) {
        if (sites[p] < 0 || sites[p] >= n_sites) throw ArgumentError("block site index out of range");
        for (std::size_t q = 0; q < p; ++q)
            if (sites[p] == sites[q]) throw ArgumentError("block site indices must be distinct");
    }
}

int pow3(int k) {
    int v = 1;
    for (int i = 0; i < k; ++i) v *= 3;
    return v;
}

/// Products over traced sites c of
///   1 + exp(d_c^i + conj(d_c^j) - i sum_p delta_p phase(a_p, c))
/// for every branch pair i <= j and difference pattern delta in {-1,0,1}^k.
/// Pattern index: sum_p (delta_p + 1) 3^(k-1-p).
struct TracedProducts {
    int k = 0;
    int n_patterns = 1;
    std::vector<std::pair<int, int>> pairs;
    std::vector<Scaled> values;  // [pair][pattern]

    const Scaled& at(std::size_t pair, int pattern) const { return values[pair * n_patterns + pattern]; }
};

TracedProducts traced_products(const SuperpositionAnsatz& ansatz, std::span<const int> sites) {
    const int n = ansatz.n_sites();
    const int m = ansatz.n_branches();
    const int k = static_cast<int>(sites.size());

    TracedProducts out;
    out.k = k;
    out.n_patterns = pow3(k);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) out.pairs.emplace_back(i, j);
    const std::size_t n_pairs = out.pairs.size();
    const int np = out.n_patterns;
    out.values.assign(n_pairs * np, Scaled{});

    std::vector<char> in_block(n, 0);
    for (int a : sites) in_block[a] = 1;

    // omega[p][c] = exp(-i phase(a_p, c))
    std::vector<std::vector<cplx>> omega(k, std::vector<cplx>(n));
    std::vector<double> row(n);
    for (int p = 0; p < k; ++p) {
        ansatz.graph().row(sites[p], row);
        for (int c = 0; c < n; ++c) omega[p][c] = std::polar(1.0, -row[c]);
    }

    const CMatrix& d = ansatz.deformations().values();
    std::vector<cplx> table(np);
    std::vector<cplx> weight(n_pairs);
    int since_renorm = 0;
    for (int c = 0; c < n; ++c) {
        if (in_block[c]) continue;

        table[0] = 1.0;
        int size = 1;
        for (int p = 0; p < k; ++p) {
            const cplx w = omega[p][c];
            const cplx wc = std::conj(w);
            for (int idx = size - 1; idx >= 0; --idx) {
                const cplx base = table[idx];
                table[3 * idx] = base * wc;
                table[3 * idx + 1] = base;
                table[3 * idx + 2] = base * w;
            }
            size *= 3;
        }

        for (std::size_t q = 0; q < n_pairs; ++q) {
            const auto [i, j] = out.pairs[q];
            weight[q] = std::exp(d(c, i) + std::conj(d(c, j)));
        }

        for (std::size_t q = 0; q < n_pairs; ++q) {
            const cplx e = weight[q];
            Scaled* acc = &out.values[q * np];
            for (int t = 0; t < np; ++t) {
                const cplx f = 1.0 + e * table[t];
                if (std::abs(f.real()) + std::abs(f.imag()) < 1e-300) {
                    acc[t].m = 0.0;
                } else {
                    acc[t].m *= f;
                }
            }
        }
        if (++since_renorm == 4) {
            since_renorm = 0;
            for (auto& v : out.values) renormalize(v);
        }
    }
    for (auto& v : out.values) renormalize(v);

    for (std::size_t q = 0; q < n_pairs; ++q)
        for (int t = 0; t < np; ++t) {
            const cplx v = out.values[q * np + t].m;
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw NumericRangeError("non-finite traced product for branch pair (" +
                                        std::to_string(out.pairs[q].first) + ", " +
                                        std::to_string(out.pairs[q].second) + ")");
        }
    return out;
}

/// Per-branch open-site vectors: v_i[s] = w_i exp(-i P(s) + sum_p d_{a_p}^i s_p)
/// stored as mantissas with a shared per-branch exponent.
struct OpenVectors {
    std::vector<std::vector<cplx>> mant;  // [branch][s]
    std::vector<int> exponent;            // per branch
};

OpenVectors open_vectors(const SuperpositionAnsatz& ansatz, std::span<const int> sites, bool with_weights) {
    const int m = ansatz.n_branches();
    const int k = static_cast<int>(sites.size());
    const int dim = 1 << k;
    const CMatrix& d = ansatz.deformations().values();

    std::vector<double> internal(dim, 0.0);
    for (int s = 0; s < dim; ++s) {
        double ph = 0.0;
        for (int p = 0; p < k; ++p) {
            if (!((s >> (k - 1 - p)) & 1)) continue;
            for (int q = p + 1; q < k; ++q)
                if ((s >> (k - 1 - q)) & 1) ph += ansatz.graph()(sites[p], sites[q]);
        }
        internal[s] = ph;
    }

    OpenVectors out;
    out.mant.assign(m, std::vector<cplx>(dim));
    out.exponent.assign(m, 0);
    std::vector<cplx> logs(dim);
    for (int i = 0; i < m; ++i) {
        const cplx w = with_weights ? ansatz.weights()[i] : cplx(1.0);
        double max_re = -INFINITY;
        for (int s = 0; s < dim; ++s) {
            cplx lg(0.0, -internal[s]);
            for (int p = 0; p < k; ++p)
                if ((s >> (k - 1 - p)) & 1) lg += d(sites[p], i);
            logs[s] = lg;
            max_re = std::max(max_re, lg.real());
        }
        const int e = static_cast<int>(std::ceil(max_re / std::log(2.0)));
        out.exponent[i] = e;
        const double shift = e * std::log(2.0);
        for (int s = 0; s < dim; ++s) out.mant[i][s] = w * std::exp(logs[s] - shift);
    }
    return out;
}

/// Common exponent for all contributions of (pair, pattern).
int reference_exponent(const TracedProducts& tp, const OpenVectors& ov) {
    int ref = INT_MIN / 4;
    for (std::size_t q = 0; q < tp.pairs.size(); ++q) {
        const auto [i, j] = tp.pairs[q];
        for (int t = 0; t < tp.n_patterns; ++t)
            ref = std::max(ref, log2_magnitude(tp.at(q, t)) + ov.exponent[i] + ov.exponent[j]);
    }
    return ref + 1;
}

std::vector<int> pattern_offsets(int k) {
    const int dim = 1 << k;
    std::vector<int> a(dim, 0);
    for (int s = 0; s < dim; ++s) {
        int v = 0;
        for (int p = 0; p < k; ++p) v = 3 * v + ((s >> (k - 1 - p)) & 1);
        a[s] = v;
    }
    return a;
}

int pattern_center(int k) {
    int v = 0;
    for (int p = 0; p < k; ++p) v = 3 * v + 1;
    return v;
}

/// block(i,j)[s][t] from traced products and open vectors (no symmetrization).
CMatrix pair_block(const TracedProducts& tp, const OpenVectors& ov, std::size_t q, int ref,
                   const std::vector<int>& offs, int center) {
    const auto [i, j] = tp.pairs[q];
    const int dim = 1 << tp.k;
    std::vector<cplx> scaled(tp.n_patterns);
    const int extra = ov.exponent[i] + ov.exponent[j] - ref;
    for (int t = 0; t < tp.n_patterns; ++t) {
        const Scaled& v = tp.at(q, t);
        scaled[t] = ldexp_c(v.m, v.e + extra);
    }
    CMatrix blk(dim, dim);
    for (int s = 0; s < dim; ++s) {
        const cplx vs = ov.mant[i][s];
        for (int t = 0; t < dim; ++t) blk(s, t) = vs * std::conj(ov.mant[j][t]) * scaled[offs[s] - offs[t] + center];
    }
    return blk;
}

}  // namespace

// ------------------------------------------------------------------ GramBlock

CMatrix GramBlock::value() const {
    if (log_scale > 700.0) throw NumericRangeError("gram block magnitude exceeds double range");
    return entries * std::exp(log_scale);
}

double GramBlock::log_trace() const {
    const double tr = entries.trace().real();
    if (!(tr > 0.0)) throw DegenerateStateError("gram block has non-positive trace");
    return std::log(tr) + log_scale;
}

void TwoLocalObservable::validate(int n_sites) const {
    for (const auto& t : pair_terms) {
        if (t.a < 0 || t.b < 0 || t.a >= n_sites || t.b >= n_sites) throw ArgumentError("pair term index out of range");
        if (t.a == t.b) throw ArgumentError("pair term needs two distinct sites");
        if (hermiticity_defect(t.matrix) > 1e-12) throw ArgumentError("pair term matrix is not Hermitian");
    }
    for (const auto& t : site_terms) {
        if (t.a < 0 || t.a >= n_sites) throw ArgumentError("site term index out of range");
        if (hermiticity_defect(t.matrix) > 1e-12) throw ArgumentError("site term matrix is not Hermitian");
    }
}

// ------------------------------------------------------------------ builders

GramBlock gram_block(const SuperpositionAnsatz& ansatz, std::span<const int> sites, int max_block) {
    check_sites(ansatz.n_sites(), sites, max_block);
    const int k = static_cast<int>(sites.size());
    const int dim = 1 << k;

    const TracedProducts tp = traced_products(ansatz, sites);
    const OpenVectors ov = open_vectors(ansatz, sites, true);
    const int ref = reference_exponent(tp, ov);
    const auto offs = pattern_offsets(k);
    const int center = pattern_center(k);

    CMatrix acc = CMatrix::Zero(dim, dim);
    for (std::size_t q = 0; q < tp.pairs.size(); ++q) {
        const CMatrix blk = pair_block(tp, ov, q, ref, offs, center);
        if (tp.pairs[q].first == tp.pairs[q].second) acc += blk;
        else acc += blk + blk.adjoint();
    }
    GramBlock out;
    out.sites.assign(sites.begin(), sites.end());
    out.entries = 0.5 * (acc + acc.adjoint());
    out.log_scale = ref * std::log(2.0);
    return out;
}

CrossGram cross_gram(const SuperpositionAnsatz& ansatz, std::span<const int> sites, int max_block) {
    check_sites(ansatz.n_sites(), sites, max_block);
    const int k = static_cast<int>(sites.size());
    const int m = ansatz.n_branches();

    const TracedProducts tp = traced_products(ansatz, sites);
    const OpenVectors ov = open_vectors(ansatz, sites, false);
    const int ref = reference_exponent(tp, ov);
    const auto offs = pattern_offsets(k);
    const int center = pattern_center(k);

    CrossGram out;
    out.sites.assign(sites.begin(), sites.end());
    out.n_branches = m;
    out.blocks.resize(static_cast<std::size_t>(m) * m);
    out.log_scale = ref * std::log(2.0);
    for (std::size_t q = 0; q < tp.pairs.size(); ++q) {
        const auto [i, j] = tp.pairs[q];
        CMatrix blk = pair_block(tp, ov, q, ref, offs, center);
        out.blocks[static_cast<std::size_t>(j) * m + i] = blk.adjoint();
        out.blocks[static_cast<std::size_t>(i) * m + j] = std::move(blk);
    }
    return out;
}

double log_norm_squared(const SuperpositionAnsatz& ansatz) {
    const GramBlock g = gram_block(ansatz, {}, 0);
    const cplx tr = g.entries(0, 0);
    if (!(tr.real() > 0.0)) throw DegenerateStateError("ansatz state has zero norm");
    if (std::abs(tr.imag()) > 1e-10 * std::abs(tr.real()))
        throw NumericRangeError("norm has a non-negligible imaginary part");
    return std::log(tr.real()) + g.log_scale;
}

double norm_squared(const SuperpositionAnsatz& ansatz) {
    const double lg = log_norm_squared(ansatz);
    if (lg > 709.0) throw NumericRangeError("squared norm overflows a double; use log_norm_squared");
    return std::exp(lg);
}

CMatrix block_unitary(const SuperpositionAnsatz& ansatz, std::span<const int> sites) {
    CMatrix u = CMatrix::Identity(1, 1);
    for (int a : sites) u = kron(u, ansatz.unitaries()[a]);
    return u;
}

CMatrix dress_block(const SuperpositionAnsatz& ansatz, std::span<const int> sites, const CMatrix& pre_unitary) {
    const double tr = pre_unitary.trace().real();
    if (!(tr > 0.0) || !std::isfinite(tr)) throw DegenerateStateError("reduced block has non-positive trace");
    const CMatrix u = block_unitary(ansatz, sites);
    CMatrix rho = u * (pre_unitary / tr) * u.adjoint();
    return 0.5 * (rho + rho.adjoint());
}

ReducedDensity reduced_density(const SuperpositionAnsatz& ansatz, std::span<const int> sites, int max_block) {
    const GramBlock g = gram_block(ansatz, sites, max_block);
    return {g.sites, dress_block(ansatz, sites, g.entries)};
}

Mat2 partial_trace_pair(const Mat4& rho, int keep) {
    Mat2 out = Mat2::Zero();
    for (int s = 0; s < 4; ++s)
        for (int t = 0; t < 4; ++t) {
            const int s0 = s >> 1, s1 = s & 1, t0 = t >> 1, t1 = t & 1;
            if (keep == 0 && s1 == t1) out(s0, t0) += rho(s, t);
            if (keep == 1 && s0 == t0) out(s1, t1) += rho(s, t);
        }
    return out;
}

namespace {

Mat4 swap_qubits(const Mat4& m) {
    static const int perm[4] = {0, 2, 1, 3};
    Mat4 out;
    for (int s = 0; s < 4; ++s)
        for (int t = 0; t < 4; ++t) out(perm[s], perm[t]) = m(s, t);
    return out;
}

Mat4 normalized_pair_block(const SuperpositionAnsatz& ansatz, int a, int b, const ExpectationOptions& opt) {
    const int sites[2] = {a, b};
    const GramBlock g = gram_block(ansatz, sites, opt.max_block);
    if (opt.stats) ++opt.stats->gram_blocks;
    const double tr = g.entries.trace().real();
    if (!(tr > 0.0) || !std::isfinite(tr)) throw DegenerateStateError("ansatz state has zero norm");
    return g.entries / tr;
}

}  // namespace

double expectation(const SuperpositionAnsatz& ansatz, const TwoLocalObservable& obs, const ExpectationOptions& opt) {
    const int n = ansatz.n_sites();
    obs.validate(n);
    if (opt.classes && opt.classes->pair_class.size() != obs.pair_terms.size())
        throw ArgumentError("term classes do not match the observable");

    cplx total = 0.0;
    std::vector<char> have_site(n, 0);
    std::vector<Mat2> site_pre(n);
    auto note_sites = [&](const PairTerm& t, const Mat4& pre) {
        if (!have_site[t.a]) {
            site_pre[t.a] = partial_trace_pair(pre, 0);
            have_site[t.a] = 1;
        }
        if (!have_site[t.b]) {
            site_pre[t.b] = partial_trace_pair(pre, 1);
            have_site[t.b] = 1;
        }
    };
    auto dressed = [&](const PairTerm& t, const Mat4& pre) {
        const Mat4 u = kron(ansatz.unitaries()[t.a], ansatz.unitaries()[t.b]);
        return (t.matrix * (u * pre * u.adjoint())).trace();
    };

    if (opt.classes) {
        // One canonical block per class; terms repeating the previous unitaries and
        // matrix of their class reuse its contribution.
        struct ClassEntry {
            bool ready = false;
            Mat4 canon;
            bool have_last = false;
            bool last_swapped = false;
            Mat2 ua, ub;
            Mat4 matrix;
            cplx value;
        };
        std::vector<ClassEntry> entries;
        for (std::size_t term = 0; term < obs.pair_terms.size(); ++term) {
            const auto& t = obs.pair_terms[term];
            const int cls = opt.classes->pair_class[term];
            const bool sw = opt.classes->swapped[term];
            if (cls < 0) throw ArgumentError("negative term class");
            if (static_cast<std::size_t>(cls) >= entries.size()) entries.resize(cls + 1);
            ClassEntry& e = entries[cls];
            if (!e.ready) {
                const Mat4 blk = normalized_pair_block(ansatz, t.a, t.b, opt);
                e.canon = sw ? swap_qubits(blk) : blk;
                e.ready = true;
            }
            const Mat2& ua = ansatz.unitaries()[t.a];
            const Mat2& ub = ansatz.unitaries()[t.b];
            if (!have_site[t.a] || !have_site[t.b]) note_sites(t, sw ? swap_qubits(e.canon) : e.canon);
            if (e.have_last && e.last_swapped == sw && e.ua == ua && e.ub == ub && e.matrix == t.matrix) {
                total += e.value;
                continue;
            }
            const cplx v = dressed(t, sw ? swap_qubits(e.canon) : e.canon);
            total += v;
            e.have_last = true;
            e.last_swapped = sw;
            e.ua = ua;
            e.ub = ub;
            e.matrix = t.matrix;
            e.value = v;
        }
    } else {
        // Blocks keyed by ordered site pair, so repeated pairs are evaluated once.
        std::map<std::pair<int, int>, Mat4> pair_cache;
        for (const auto& t : obs.pair_terms) {
            Mat4 pre;
            if (auto it = pair_cache.find({t.a, t.b}); it != pair_cache.end()) {
                pre = it->second;
            } else if (auto jt = pair_cache.find({t.b, t.a}); jt != pair_cache.end()) {
                pre = swap_qubits(jt->second);
            } else {
                pre = normalized_pair_block(ansatz, t.a, t.b, opt);
                pair_cache.emplace(std::make_pair(t.a, t.b), pre);
            }
            total += dressed(t, pre);
            note_sites(t, pre);
        }
    }
    for (const auto& t : obs.site_terms) {
        if (!have_site[t.a]) {
            const int sites[1] = {t.a};
            const GramBlock g = gram_block(ansatz, sites, opt.max_block);
            if (opt.stats) ++opt.stats->gram_blocks;
            const double tr = g.entries.trace().real();
            if (!(tr > 0.0) || !std::isfinite(tr)) throw DegenerateStateError("ansatz state has zero norm");
            site_pre[t.a] = g.entries / tr;
            have_site[t.a] = 1;
        }
        const Mat2& u = ansatz.unitaries()[t.a];
        total += (t.matrix * (u * site_pre[t.a] * u.adjoint())).trace();
    }
    const double value = total.real();
    if (!std::isfinite(value)) throw NumericRangeError("non-finite expectation value");
    if (std::abs(total.imag()) > 1e-9 * (1.0 + std::abs(value)))
        throw NumericRangeError("expectation has imaginary residue " + std::to_string(total.imag()));
    return value;
}

}  // namespace wgs
