#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "wgs/lattice.hpp"
#include "wgs/types.hpp"

namespace wgs {

/// Symmetric phase matrix of a weighted graph, entries wrapped to (-pi, pi].
///
/// Two storage forms share one interface: a dense N x N matrix, and a
/// distance kernel where the phase of a pair depends only on the lattice
/// distance of its sites. The kernel form keeps memory O(N) for large
/// translation-invariant lattices.
class WeightedGraph {
  public:
    explicit WeightedGraph(int n_sites = 0);

    /// Throws ArgumentError unless `phases` is square, symmetric and has a
    /// zero diagonal.
    static WeightedGraph from_matrix(const RMatrix& phases);
    /// One phase per lattice distance class (see Lattice::distance_class).
    static WeightedGraph distance_kernel(std::shared_ptr<const Lattice> lattice,
                                         std::vector<double> class_phases);

    int size() const { return n_sites_; }
    bool is_dense() const { return !lattice_; }
    double operator()(int a, int b) const;

    /// Phases from site `a` to every site (`out[a]` is zero).
    void row(int a, std::span<double> out) const;

    WeightedGraph with_entry(int a, int b, double phase) const;
    WeightedGraph with_class_phase(int cls, double phase) const;

    const std::shared_ptr<const Lattice>& lattice() const { return lattice_; }
    std::span<const double> class_phases() const { return class_phases_; }
    RMatrix to_matrix() const;

  private:
    int n_sites_ = 0;
    RMatrix dense_;
    std::shared_ptr<const Lattice> lattice_;
    std::vector<double> class_phases_;
};

inline constexpr double kDefaultDeformationCap = 50.0;

/// Complex N x m matrix; column j is the deformation vector of branch j.
class DeformationMatrix {
  public:
    DeformationMatrix() = default;
    explicit DeformationMatrix(CMatrix values, double real_cap = kDefaultDeformationCap);

    int n_sites() const { return static_cast<int>(values_.rows()); }
    int n_branches() const { return static_cast<int>(values_.cols()); }
    cplx operator()(int site, int branch) const { return values_(site, branch); }
    const CMatrix& values() const { return values_; }

  private:
    CMatrix values_;
};

/// One 2x2 unitary per site.
class LocalUnitaries {
  public:
    LocalUnitaries() = default;
    explicit LocalUnitaries(std::vector<Mat2> matrices);
    static LocalUnitaries identity(int n_sites);

    int size() const { return static_cast<int>(matrices_.size()); }
    const Mat2& operator[](int site) const { return matrices_[site]; }
    const std::vector<Mat2>& matrices() const { return matrices_; }

  private:
    std::vector<Mat2> matrices_;
};

enum class SymmetryMode { free, range_cutoff, distance_dependent, fully_translation_invariant };

/// Declarative parameter-tying rules.
struct SymmetryProfile {
    SymmetryMode mode = SymmetryMode::free;
    double r0 = 0.0;                     ///< range_cutoff: phases vanish at distance >= r0
    bool alternating_unitaries = false;  ///< one unitary per checkerboard sublattice
    bool shared_deformation = false;     ///< every site uses the same deformation per branch
    std::shared_ptr<const Lattice> lattice;

    bool ties_deformations() const {
        return shared_deformation || mode == SymmetryMode::fully_translation_invariant;
    }
    bool ties_unitaries() const {
        return alternating_unitaries || mode == SymmetryMode::fully_translation_invariant;
    }
    bool ties_phases() const {
        return mode == SymmetryMode::distance_dependent || mode == SymmetryMode::fully_translation_invariant;
    }
    /// Class index of the unitary at `site`.
    int unitary_class(int site) const;
    int unitary_class_count(int n_sites) const;
};

/// Superposition of m deformed weighted graph states sharing phases and
/// local unitaries. Immutable; the `with_*` members return modified copies.
///
/// Pre-unitary amplitude of branch j on basis state s:
///   exp(-i sum_{a<b} phase_ab s_a s_b + sum_a d_a^(j) s_a)
class SuperpositionAnsatz {
  public:
    SuperpositionAnsatz(WeightedGraph graph, DeformationMatrix deformations, LocalUnitaries unitaries,
                        CVector weights, std::optional<SymmetryProfile> symmetry = std::nullopt);

    /// Single-branch |+>^N (all phases and deformations zero, identity unitaries).
    static SuperpositionAnsatz plus_state(int n_sites);

    int n_sites() const { return graph_.size(); }
    int n_branches() const { return static_cast<int>(weights_.size()); }

    const WeightedGraph& graph() const { return graph_; }
    const DeformationMatrix& deformations() const { return deformations_; }
    const LocalUnitaries& unitaries() const { return unitaries_; }
    const CVector& weights() const { return weights_; }
    const std::optional<SymmetryProfile>& symmetry() const { return symmetry_; }

    SuperpositionAnsatz with_graph(WeightedGraph graph) const;
    SuperpositionAnsatz with_deformations(DeformationMatrix deformations) const;
    SuperpositionAnsatz with_unitaries(LocalUnitaries unitaries) const;
    SuperpositionAnsatz with_weights(CVector weights) const;
    SuperpositionAnsatz with_symmetry(std::optional<SymmetryProfile> symmetry) const;

    /// True when every parameter tie of the attached profile holds bit-exactly.
    bool ties_hold() const;

  private:
    void validate() const;

    WeightedGraph graph_;
    DeformationMatrix deformations_;
    LocalUnitaries unitaries_;
    CVector weights_;
    std::optional<SymmetryProfile> symmetry_;
};

inline constexpr int kDefaultOracleCap = 14;

/// Unnormalized pre-unitary amplitude of basis state `s` (entries 0/1).
cplx amplitude(const SuperpositionAnsatz& ansatz, std::span<const int> s);

/// Normalized state vector with all local unitaries applied. Site 0 is the
/// most significant bit of the basis index.
CVector dense_state(const SuperpositionAnsatz& ansatz, int max_sites = kDefaultOracleCap);

/// Pre-unitary amplitudes for every basis state (no normalization).
CVector dense_amplitudes(const SuperpositionAnsatz& ansatz, int max_sites = kDefaultOracleCap);

/// Applies `u` to qubit `site` of an N-qubit vector in place.
void apply_single_qubit(CVector& state, int n_sites, int site, const Mat2& u);

}  // namespace wgs
