#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wgs/ansatz.hpp"
#include "wgs/hamiltonian.hpp"
#include "wgs/lbfgs.hpp"
#include "wgs/reduction.hpp"

namespace wgs {

enum class ParameterKind { phase, deformation, unitary, weight };

/// Contiguous run of the packed vector. `index` is the free phase entry,
/// the deformation slot (site * m + branch, or branch when tied), the
/// unitary class, or the branch.
struct ParameterSlice {
    ParameterKind kind;
    int index = 0;
    int offset = 0;
    int length = 0;
};

/// Real-vector view of an ansatz under a symmetry profile.
///
/// Layout: free phases, then deformations (re, im), then three rotation
/// angles per distinct local unitary, then weights (re, im) with the
/// imaginary part of the first weight dropped.
class ParameterPacking {
  public:
    ParameterPacking(SymmetryProfile symmetry, int n_sites, int n_branches);

    int size() const { return size_; }
    int n_sites() const { return n_sites_; }
    int n_branches() const { return n_branches_; }
    const SymmetryProfile& symmetry() const { return symmetry_; }
    const std::vector<ParameterSlice>& layout() const { return layout_; }

    /// Phases live in a dense matrix (free or range-cutoff modes) rather than
    /// a distance kernel.
    bool dense_phases() const { return !symmetry_.ties_phases(); }
    /// Free pairs (dense form) or free distance classes (kernel form).
    const std::vector<Bond>& free_pairs() const { return free_pairs_; }
    const std::vector<int>& free_classes() const { return free_classes_; }
    /// True when the phase of pair (a, b) is a free coordinate of its own.
    bool phase_is_free(int a, int b) const;

    RVector pack(const SuperpositionAnsatz& ansatz) const;
    SuperpositionAnsatz unpack(const RVector& v) const;

  private:
    SymmetryProfile symmetry_;
    int n_sites_;
    int n_branches_;
    int size_ = 0;
    std::vector<ParameterSlice> layout_;
    std::vector<Bond> free_pairs_;
    std::vector<int> free_classes_;
    std::vector<Bond> class_reps_;
    RMatrix pair_free_;
    int phase_offset_ = 0, deform_offset_ = 0, unitary_offset_ = 0, weight_offset_ = 0;
};

/// Unitary exp(-i theta . sigma).
Mat2 rotation_unitary(const Eigen::Vector3d& theta);
/// Inverse of rotation_unitary up to global phase, with |theta| <= pi/2.
Eigen::Vector3d rotation_angles(const Mat2& u);

/// Energy functional of a Hamiltonian. When the symmetry profile makes the
/// ansatz translation invariant, pair terms are grouped by translation class
/// so each class costs one block evaluation.
class EnergyModel {
  public:
    EnergyModel(TwoLocalHamiltonian h, const SymmetryProfile& symmetry);

    double operator()(const SuperpositionAnsatz& ansatz, EvalStats* stats = nullptr) const;
    const TwoLocalHamiltonian& hamiltonian() const { return h_; }
    const TermClasses* classes() const { return classes_ ? &*classes_ : nullptr; }

  private:
    TwoLocalHamiltonian h_;
    std::optional<TermClasses> classes_;
};

enum class SweepKind { deformations, phases, unitaries };

struct TraceRecord;

struct OptimizerConfig {
    int max_iterations = 200;          ///< per quasi-Newton pass
    double gradient_tolerance = 1e-7;
    double fd_scale = 1e-6;            ///< fd step h = fd_scale * (1 + |p|)
    double sweep_tolerance = 1e-10;    ///< relative energy
    double eigen_regularization = 1e-12;
    std::uint64_t seed = 1;
    std::vector<int> m_schedule{1};
    std::vector<SweepKind> sweep_order{SweepKind::deformations, SweepKind::phases, SweepKind::unitaries};
    int max_rounds = 10;               ///< quasi-Newton + sweep rounds per m
    int restarts = 1;                  ///< random initializations at the first m
    int lbfgs_memory = 8;
    /// Called for every trace record as it is produced.
    std::function<void(const TraceRecord&)> on_record;

    /// Throws ArgumentError on non-positive tolerances or an empty/unsorted schedule.
    void validate() const;
};

struct TraceRecord {
    int iteration = 0;
    int m = 0;
    double energy = 0.0;
    double grad_norm = 0.0;  ///< zero for sweep records
    std::string stage;
    double seconds = 0.0;
};

struct OptimizationTrace {
    std::vector<TraceRecord> records;
};

/// Writes iter,m,energy,grad_norm,stage,seconds; seconds are zeroed unless
/// `timing` is set so repeated runs produce identical files.
void write_trace_csv(const std::string& path, const OptimizationTrace& trace, bool timing);

double energy(const ParameterPacking& packing, const RVector& v, const EnergyModel& model,
              EvalStats* stats = nullptr);

/// Central differences with step fd_scale * (1 + |v_i|). A non-finite probe
/// raises NumericRangeError naming the component.
RVector gradient_fd(const std::function<double(const RVector&)>& f, const RVector& v, double fd_scale = 1e-6);
RVector gradient_fd(const ParameterPacking& packing, const RVector& v, const EnergyModel& model,
                    double fd_scale = 1e-6);

struct QuasiNewtonResult {
    RVector v;
    double energy = 0.0;
    LbfgsStatus status = LbfgsStatus::max_iterations;
    int iterations = 0;
};

QuasiNewtonResult minimize_quasi_newton(const ParameterPacking& packing, const RVector& v0, const EnergyModel& model,
                                        const OptimizerConfig& config, OptimizationTrace* trace = nullptr,
                                        const std::string& stage = "lbfgs");

struct SweepResult {
    SuperpositionAnsatz ansatz;
    double energy_before = 0.0;
    double energy_after = 0.0;
    bool changed = false;
    std::string status;  ///< "ok", "unchanged" or the reason an update was rejected
};

/// Exact minimization over the weights and the deformations of one site.
SweepResult sweep_alpha_deformations(const SuperpositionAnsatz& ansatz, int site, const EnergyModel& model,
                                     const OptimizerConfig& config = {});
/// Exact minimization over the weights alone (valid under every profile).
SweepResult sweep_weights(const SuperpositionAnsatz& ansatz, const EnergyModel& model,
                          const OptimizerConfig& config = {});
/// Closed-form minimization over one pair phase of a dense graph.
SweepResult sweep_phase(const SuperpositionAnsatz& ansatz, int a, int b, const EnergyModel& model,
                        const OptimizerConfig& config = {});
/// Minimization over one local unitary.
SweepResult sweep_local_unitary(const SuperpositionAnsatz& ansatz, int site, const EnergyModel& model,
                                const OptimizerConfig& config = {});

/// Appends a branch copied from the largest-weight branch with complex
/// Gaussian noise (sigma 0.1) on its deformations and weight 0.01 max|alpha|.
SuperpositionAnsatz grow_superposition(const SuperpositionAnsatz& ansatz, std::mt19937_64& rng);

/// Appends an exact copy of branch 0's deformations with weight zero; the
/// state is unchanged.
SuperpositionAnsatz embed_superposition(const SuperpositionAnsatz& ansatz);

/// Random start: phases uniform in (-0.1, 0.1), deformations 1, identity
/// unitaries, equal weights.
SuperpositionAnsatz initial_ansatz(const ParameterPacking& packing, std::mt19937_64& rng);

struct StageResult {
    int m = 0;
    double energy = 0.0;
    SuperpositionAnsatz ansatz;
};

struct ScheduleResult {
    std::vector<StageResult> stages;  ///< one per m in the schedule, energies non-increasing
    OptimizationTrace trace;

    const StageResult& best() const { return stages.back(); }
};

/// Runs the stepwise-m schedule. With `warm_start`, schedule entries below its
/// branch count are skipped and optimization resumes from it.
ScheduleResult run_schedule(const EnergyModel& model, const SymmetryProfile& symmetry, const OptimizerConfig& config,
                            const SuperpositionAnsatz* warm_start = nullptr);

}  // namespace wgs
