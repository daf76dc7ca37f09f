#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wgs/ansatz.hpp"

namespace wgs {

inline constexpr int kDefaultBlockCap = 12;

/// Unnormalized k-site reduced operator before local-unitary dressing.
///
/// Stored scaled: the true matrix is exp(log_scale) * entries. Row/column
/// index bit (k-1-p) corresponds to sites[p], so sites[0] is the most
/// significant qubit.
struct GramBlock {
    std::vector<int> sites;
    CMatrix entries;
    double log_scale = 0.0;

    /// Unscaled matrix; throws NumericRangeError if it does not fit a double.
    CMatrix value() const;
    /// Natural log of the (real) trace.
    double log_trace() const;
};

/// Normalized reduced density operator (trace one, local unitaries applied).
struct ReducedDensity {
    std::vector<int> sites;
    CMatrix matrix;
};

struct PairTerm {
    int a = 0;
    int b = 0;
    Mat4 matrix;  ///< acts on (a, b) with a as the more significant qubit
};

struct SiteTerm {
    int a = 0;
    Mat2 matrix;
};

/// Sum of one- and two-site Hermitian terms.
struct TwoLocalObservable {
    std::vector<PairTerm> pair_terms;
    std::vector<SiteTerm> site_terms;

    std::size_t term_count() const { return pair_terms.size() + site_terms.size(); }
    /// Throws ArgumentError unless indices are < n_sites, pairs are distinct
    /// and every matrix is Hermitian within 1e-12.
    void validate(int n_sites) const;
};

/// Groups of pair terms whose pre-unitary blocks coincide (translation
/// classes). `swapped[t]` means term t sees the class block with its two
/// qubits exchanged. Every pair term must have a class.
struct TermClasses {
    std::vector<int> pair_class;
    std::vector<char> swapped;
};

/// Counters filled in by the evaluation routines.
struct EvalStats {
    std::size_t gram_blocks = 0;
};

struct ExpectationOptions {
    const TermClasses* classes = nullptr;
    EvalStats* stats = nullptr;
    int max_block = kDefaultBlockCap;
};

GramBlock gram_block(const SuperpositionAnsatz& ansatz, std::span<const int> sites,
                     int max_block = kDefaultBlockCap);

/// Squared norm of the unnormalized state; NumericRangeError if it overflows.
double norm_squared(const SuperpositionAnsatz& ansatz);
double log_norm_squared(const SuperpositionAnsatz& ansatz);

ReducedDensity reduced_density(const SuperpositionAnsatz& ansatz, std::span<const int> sites,
                               int max_block = kDefaultBlockCap);

/// <psi|obs|psi> / <psi|psi>; cost O(m^2 K N).
double expectation(const SuperpositionAnsatz& ansatz, const TwoLocalObservable& obs,
                   const ExpectationOptions& options = {});

/// Per-branch-pair blocks without superposition weights:
///   block(i, j)[s][t] = sum_rest psi_i(s, rest) conj(psi_j(t, rest))
/// with psi_i the pre-unitary amplitude of branch i. All blocks share
/// `log_scale`.
struct CrossGram {
    std::vector<int> sites;
    int n_branches = 0;
    std::vector<CMatrix> blocks;  // row-major over (i, j)
    double log_scale = 0.0;

    const CMatrix& block(int i, int j) const { return blocks[static_cast<std::size_t>(i) * n_branches + j]; }
};

CrossGram cross_gram(const SuperpositionAnsatz& ansatz, std::span<const int> sites,
                     int max_block = kDefaultBlockCap);

/// Dresses a pre-unitary block with the local unitaries of its sites and
/// normalizes by the trace.
CMatrix dress_block(const SuperpositionAnsatz& ansatz, std::span<const int> sites, const CMatrix& pre_unitary);

/// Tensor product of the local unitaries of `sites`, sites[0] most significant.
CMatrix block_unitary(const SuperpositionAnsatz& ansatz, std::span<const int> sites);

/// Reduces a two-qubit operator to qubit `keep` (0 = more significant).
Mat2 partial_trace_pair(const Mat4& rho, int keep);

}  // namespace wgs
