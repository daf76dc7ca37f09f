#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wgs/hamiltonian.hpp"
#include "wgs/reduction.hpp"

namespace wgs {

struct ExactOptions {
    int dense_cap = 10;       ///< largest N diagonalized densely
    int iterative_cap = 24;   ///< largest N for the matrix-free Lanczos path
    double tolerance = 1e-8;  ///< Lanczos: stop when residual < tolerance * max(1, |theta|)
    int max_restarts = 200;
    int max_basis = 0;        ///< Krylov vectors per restart cycle; 0 picks from memory
    std::uint64_t seed = 7;
};

struct GroundState {
    double energy = 0.0;
    CVector state;           ///< normalized eigenvector (Ritz vector on the iterative path)
    bool iterative = false;
    double residual = 0.0;   ///< |H x - E x|
    int iterations = 0;      ///< matrix-vector products (iterative path)
};

/// Matrix-free Hamiltonian on 2^N amplitudes; site 0 is the most significant bit.
class SparseHamiltonian {
  public:
    SparseHamiltonian(const TwoLocalObservable& obs, int n_sites);

    int n_sites() const { return n_; }
    Eigen::Index dimension() const { return Eigen::Index{1} << n_; }
    /// y = H x
    void apply(const Eigen::Ref<const CVector>& x, CVector& y) const;
    /// Real arithmetic path; requires is_real().
    void apply(const Eigen::Ref<const RVector>& x, RVector& y) const;
    /// True when every matrix element is real.
    bool is_real() const { return real_; }
    CMatrix dense() const;

  private:
    template <typename Scalar, typename Vec>
    void apply_impl(const Eigen::Ref<const Vec>& x, Vec& y) const;

    int n_;
    bool real_ = true;
    RVector diag_;
    std::vector<std::pair<int, Mat2>> site_off_;
    std::vector<std::pair<std::pair<int, int>, Mat4>> pair_off_;
};

/// Dense path for N <= dense_cap, Lanczos up to iterative_cap, CapacityError beyond.
GroundState exact_ground_energy(const TwoLocalObservable& h, int n_sites, const ExactOptions& options = {});
GroundState exact_ground_energy(const TwoLocalHamiltonian& h, const ExactOptions& options = {});

GroundState dense_ground_state(const TwoLocalObservable& h, int n_sites, const ExactOptions& options = {});
/// Restarted Lanczos with full reorthogonalization inside each cycle.
GroundState lanczos_ground_state(const TwoLocalObservable& h, int n_sites, const ExactOptions& options = {});

/// Literal partial trace of a normalized state vector (trace one).
ReducedDensity brute_reduced(const CVector& state, std::span<const int> sites, int max_block = 10);

/// <psi|obs|psi> for a normalized dense vector.
double dense_expectation(const CVector& state, const TwoLocalObservable& obs);

/// Exact split of a Hamiltonian into cluster Hamiltonians.
struct ClusterDecomposition {
    struct Cluster {
        std::vector<int> sites;               ///< global site indices
        TwoLocalObservable terms;             ///< indices local to `sites`
    };
    std::vector<Cluster> clusters;
};

/// Site-disjoint translates of a rectangular patch (`shape` gives the patch
/// extent per axis) keep their internal pair terms; every pair term between
/// patches forms its own two-site cluster. Single-site terms are split by
/// bond-incidence fractions so the cluster Hamiltonians sum exactly to H.
ClusterDecomposition cluster_decomposition(const TwoLocalHamiltonian& h, std::span<const int> shape);

/// Sum of exact cluster ground energies; a lower bound on the ground energy.
double anderson_bound(const TwoLocalHamiltonian& h, std::span<const int> shape, const ExactOptions& options = {});

}  // namespace wgs
