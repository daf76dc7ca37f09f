#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wgs/ansatz.hpp"
#include "wgs/optimize.hpp"
#include "wgs/reduction.hpp"

namespace wgs {

/// Parsed experiment description. Sections and keys:
///
///   [model]     type=ising, field=<B or list>, field_min/field_max/field_step
///   [lattice]   dim, extents=<list>, periodic
///   [ansatz]    symmetry=free|range_cutoff|distance_dependent|translation_invariant,
///               r0, m_schedule=<list>, alternating, shared_deformation, seed, load
///   [optimizer] max_iterations, gradient_tolerance, fd_scale, sweep_tolerance,
///               eigen_regularization, max_rounds, restarts, lbfgs_memory, sweep_order
///   [outputs]   directory, timing, anderson_cluster=<list>, reduce_sites=<list>,
///               entropy_blocks
struct ExperimentConfig {
    std::string model = "ising";
    std::vector<double> fields{1.0};

    int dim = 1;
    std::vector<int> extents{8};
    bool periodic = true;

    SymmetryMode symmetry = SymmetryMode::free;
    double r0 = 0.0;
    bool alternating = false;
    bool shared_deformation = false;
    std::string load;  ///< optional checkpoint used as the starting point

    OptimizerConfig optimizer;

    std::string directory = "out";
    bool timing = false;
    std::vector<int> anderson_cluster;
    std::vector<int> reduce_sites{0, 1};
    int entropy_blocks = 3;
};

/// Throws ConfigError on unknown sections or keys and malformed values.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// WGS_SEED, when set, replaces the configured seed.
void apply_environment(ExperimentConfig& config);

struct RunOptions {
    int jobs = 1;
    bool cold_start = false;
    std::string out_dir;  ///< overrides the configured directory when non-empty
};

struct ResultRow {
    double field = 0.0;
    int m = 0;
    std::optional<double> energy;
    std::optional<double> energy_per_bond;
    std::optional<double> exact;
    std::optional<double> rel_dev;
    std::optional<double> anderson;
    std::optional<double> q_max;
    std::array<std::optional<double>, 3> entropy;
    double seconds = 0.0;
};

struct RunReport {
    std::vector<ResultRow> rows;
    std::vector<std::string> files;  ///< written outputs
    std::vector<SuperpositionAnsatz> optima;  ///< best ansatz per field point
};

RunReport run_optimize(const ExperimentConfig& config, const RunOptions& options = {});
RunReport run_sweep_field(const ExperimentConfig& config, const RunOptions& options = {});
RunReport run_compare_exact(const ExperimentConfig& config, const RunOptions& options = {});
RunReport run_anderson(const ExperimentConfig& config, const RunOptions& options = {});
RunReport run_reduce(const ExperimentConfig& config, const RunOptions& options = {});

/// CSV with a timestamp comment line followed by the fixed header
///   B,m,energy,energy_per_bond,rel_dev,anderson,q_max,entropy_L1,entropy_L2,entropy_L3,seconds
/// Empty cells mark values that were not computed.
void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows, bool timing);

/// Runs a subcommand and maps failures to exit codes: 1 configuration,
/// 2 capacity, 3 numeric. Diagnostics go to `err`.
int execute(const std::string& subcommand, const ExperimentConfig& config, const RunOptions& options,
            std::ostream& err);

}  // namespace wgs
