// Acceptance suite: one PASS/FAIL line per criterion.
//
//   wgs_acceptance            run every criterion
//   wgs_acceptance 1 2 9      run a subset
//
// WGS_ACCEPTANCE_OUT selects where the pipeline runs write their CSV files
// (default: a directory under the system temp path).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>

#include "test_support.hpp"
#include "wgs/analysis.hpp"
#include "wgs/experiment.hpp"
#include "wgs/optimize.hpp"
#include "wgs/oracle.hpp"

using namespace wgs;
using namespace wgs::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string format(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

std::string out_root() {
    if (const char* env = std::getenv("WGS_ACCEPTANCE_OUT")) return env;
    return (fs::temp_directory_path() / "wgs_acceptance").string();
}

RunOptions run_dir(const std::string& name) {
    const fs::path p = fs::path(out_root()) / name;
    fs::create_directories(p);
    return {1, false, p.string()};
}

/// Sandwich violations across compare-exact rows, shared with criterion 7.
struct SandwichLog {
    int rows = 0;
    int violations = 0;
    double worst = -std::numeric_limits<double>::infinity();

    void check(const ResultRow& r) {
        ++rows;
        const double lower = *r.anderson - *r.exact;
        const double upper = *r.exact - *r.energy;
        const double excess = std::max(lower, upper);
        if (excess > 1e-9) ++violations;
        worst = std::max(worst, excess);
    }
} sandwich;

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> pick_n(2, 10), pick_m(1, 3);
    double worst_rho = 0.0, worst_e = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = pick_n(rng);
        const int m = pick_m(rng);
        const auto ans = random_ansatz(rng, n, m);
        const int k = std::uniform_int_distribution<int>(1, std::min(3, n))(rng);
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        std::shuffle(all.begin(), all.end(), rng);
        const std::vector<int> sites(all.begin(), all.begin() + k);

        const CVector psi = dense_state(ans);
        const CMatrix fast = reduced_density(ans, sites).matrix;
        const CMatrix brute = brute_reduced(psi, sites).matrix;
        worst_rho = std::max(worst_rho, max_abs(fast - brute));

        const auto obs = random_observable(rng, n, n + 2);
        worst_e = std::max(worst_e, std::abs(expectation(ans, obs) - dense_expectation(psi, obs)));
    }
    return {worst_rho <= 1e-10 && worst_e <= 1e-9,
            format("1000 instances, max |rho - brute| = %.2e, max |E - dense| = %.2e", worst_rho, worst_e)};
}

Outcome basis_property() {
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int n = 1; n <= 8; ++n) {
        const auto base = random_ansatz(rng, n, 1);
        const int dim = 1 << n;
        CMatrix states(dim, dim);
        for (int code = 0; code < dim; ++code) {
            CMatrix d(n, 1);
            for (int a = 0; a < n; ++a) d(a, 0) = ((code >> a) & 1) ? cplx(0.0, kPi) : cplx(0.0, 0.0);
            states.col(code) =
                dense_state(base.with_deformations(DeformationMatrix(d)).with_weights(CVector::Ones(1)));
        }
        const CMatrix gram = states.adjoint() * states;
        worst = std::max(worst, max_abs(gram - CMatrix::Identity(dim, dim)));
    }
    return {worst <= 1e-10, format("N = 1..8, max |<i|j> - delta_ij| = %.2e", worst)};
}

ExperimentConfig chain20() {
    ExperimentConfig c;
    c.dim = 1;
    c.extents = {20};
    c.periodic = true;
    c.symmetry = SymmetryMode::distance_dependent;
    c.fields = {0.5, 1.0, 1.5};
    c.optimizer.m_schedule = {1, 2, 3, 4};
    c.optimizer.seed = 1;
    c.anderson_cluster = {5};
    c.entropy_blocks = 0;
    return c;
}

// Criteria 3 and 4 share one compare-exact run.
std::optional<RunReport> chain20_report;

const RunReport& chain20_run() {
    if (!chain20_report) chain20_report = run_compare_exact(chain20(), run_dir("chain20"));
    return *chain20_report;
}

Outcome chain_accuracy() {
    const auto& rep = chain20_run();
    std::string detail = "N=20 ring, m <= 4:";
    bool pass = true;
    for (double b : {0.5, 1.0, 1.5}) {
        double best = 1.0;
        for (const auto& r : rep.rows)
            if (r.field == b) best = std::min(best, *r.rel_dev);
        for (const auto& r : rep.rows)
            if (r.field == b) sandwich.check(r);
        pass = pass && best <= 1e-2;
        detail += format(" B=%.1f dev %.3e;", b, best);
    }
    return {pass, detail + " threshold 1e-2"};
}

Outcome m_scaling() {
    const auto& rep = chain20_run();
    std::vector<double> dev;
    for (const auto& r : rep.rows)
        if (r.field == 1.0) dev.push_back(*r.rel_dev);
    bool monotone = true;
    std::string detail = "B=1 deviations by m:";
    for (std::size_t i = 0; i < dev.size(); ++i) {
        detail += format(" %.3e", dev[i]);
        if (i > 0 && dev[i] > dev[i - 1] * (1.0 + 1e-12)) monotone = false;
    }
    const double ratio = dev.front() / dev.back();
    detail += format("; dev(1)/dev(4) = %.2f (need >= 2), non-increasing %s", ratio, monotone ? "yes" : "no");
    return {monotone && dev.size() == 4 && ratio >= 2.0, detail};
}

Outcome square_accuracy() {
    ExperimentConfig c;
    c.dim = 2;
    c.extents = {4, 4};
    c.periodic = true;
    c.symmetry = SymmetryMode::distance_dependent;
    c.fields = {2.0, 3.0, 4.0};
    c.optimizer.m_schedule = {1, 2};
    c.optimizer.seed = 1;
    c.anderson_cluster = {2, 2};
    c.entropy_blocks = 0;
    const auto rep = run_compare_exact(c, run_dir("square4"));
    std::string detail = "4x4 torus:";
    bool pass = true;
    for (double b : c.fields) {
        double best = 1.0;
        for (const auto& r : rep.rows)
            if (r.field == b) {
                best = std::min(best, *r.rel_dev);
                sandwich.check(r);
            }
        pass = pass && best <= 2e-2;
        detail += format(" B=%.0f dev %.3e;", b, best);
    }
    return {pass, detail + " threshold 2e-2"};
}

std::pair<double, double> q_peak(const RunReport& rep) {
    const ResultRow* top = &rep.rows.front();
    for (const auto& r : rep.rows)
        if (*r.q_max > *top->q_max) top = &r;
    return {top->field, *top->q_max};
}

std::vector<double> field_grid(double lo, double hi, double step) {
    std::vector<double> out;
    for (int i = 0; lo + i * step <= hi + 1e-9; ++i) out.push_back(lo + i * step);
    return out;
}

Outcome critical_signature() {
    ExperimentConfig chain;
    chain.dim = 1;
    chain.extents = {30};
    chain.symmetry = SymmetryMode::fully_translation_invariant;
    chain.fields = field_grid(0.2, 2.0, 0.05);
    chain.optimizer.m_schedule = {1};
    chain.entropy_blocks = 0;
    const auto [b1, q1] = q_peak(run_sweep_field(chain, run_dir("chain30")));

    ExperimentConfig square = chain;
    square.dim = 2;
    square.extents = {10, 10};
    square.fields = field_grid(1.0, 5.0, 0.1);
    const auto [b2, q2] = q_peak(run_sweep_field(square, run_dir("square10")));

    const bool pass = b1 >= 1.0 - 1e-9 && b1 <= 1.25 + 1e-9 && b2 >= 2.7 - 1e-9 && b2 <= 3.5 + 1e-9;
    return {pass, format("q_max peak: N=30 chain at B=%.2f (q=%.3f, window [1.0, 1.25]); 10x10 at B=%.2f "
                         "(q=%.3f, window [2.7, 3.5])",
                         b1, q1, b2, q2)};
}

Outcome sandwich_property() {
    // Extra small systems on top of the rows collected by criteria 3 and 5.
    ExperimentConfig c;
    c.extents = {8};
    c.fields = field_grid(0.25, 2.0, 0.25);
    c.optimizer.m_schedule = {1, 2};
    c.anderson_cluster = {4};
    c.entropy_blocks = 0;
    for (const auto& r : run_compare_exact(c, run_dir("ring8")).rows) sandwich.check(r);
    c.dim = 2;
    c.extents = {2, 4};
    c.anderson_cluster = {2, 2};
    for (const auto& r : run_compare_exact(c, run_dir("ladder")).rows) sandwich.check(r);
    return {sandwich.violations == 0, format("%d compare-exact rows, %d violations beyond 1e-9 (largest excess %.2e)",
                                             sandwich.rows, sandwich.violations, sandwich.worst)};
}

Outcome monotone_sweeps() {
    std::mt19937_64 rng(808);
    OptimizerConfig cfg;
    int violations = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = std::uniform_int_distribution<int>(2, 8)(rng);
        const int m = std::uniform_int_distribution<int>(1, 3)(rng);
        const auto ans = random_ansatz(rng, n, m, 0.5);
        const auto obs = random_observable(rng, n, n + 1);
        TwoLocalHamiltonian h;
        h.terms = obs;
        h.lattice = build_lattice(1, {n}, false);
        SymmetryProfile sym;
        const EnergyModel model(h, sym);
        const double before = model(ans);
        const int a = static_cast<int>(rng() % n);
        const int b = (a + 1 + static_cast<int>(rng() % (n - 1))) % n;
        const SweepResult r = [&] {
            switch (trial % 4) {
                case 0: return sweep_alpha_deformations(ans, a, model, cfg);
                case 1: return sweep_weights(ans, model, cfg);
                case 2: return sweep_phase(ans, a, b, model, cfg);
                default: return sweep_local_unitary(ans, a, model, cfg);
            }
        }();
        const double after = model(r.ansatz);
        const double excess = (after - before) / std::max(1.0, std::abs(before));
        worst = std::max(worst, excess);
        if (excess > cfg.sweep_tolerance) ++violations;
    }
    return {violations == 0, format("1000 sweeps, %d increases beyond tolerance (largest relative change %+.2e)",
                                    violations, worst)};
}

double expectation_seconds(int n) {
    const auto lat = build_lattice(1, {n}, true);
    SymmetryProfile sym;
    sym.mode = SymmetryMode::fully_translation_invariant;
    sym.lattice = lat;
    const ParameterPacking packing(sym, n, 2);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd(0.0, 0.3);
    RVector v(packing.size());
    for (auto& x : v) x = nd(rng);
    const auto ans = packing.unpack(v);
    const EnergyModel model(ising(lat, 1.0), sym);

    double best = 1e300;
    for (int rep = 0; rep < 5; ++rep) {
        int calls = 0;
        const auto t0 = Clock::now();
        double sink = 0.0, elapsed = 0.0;
        do {
            sink += model(ans);
            ++calls;
            elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
        } while (elapsed < 0.2);
        if (!std::isfinite(sink)) return -1.0;
        best = std::min(best, elapsed / calls);
    }
    return best;
}

Outcome scaling_check() {
    std::vector<double> t;
    std::string detail = "per-evaluation time:";
    for (int n : {64, 128, 256, 512}) {
        t.push_back(expectation_seconds(n));
        detail += format(" N=%d %.3g ms;", n, 1e3 * t.back());
    }
    double worst = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) worst = std::max(worst, t[i] / t[i - 1]);
    return {worst <= 2.6, detail + format(" largest doubling ratio %.2f (limit 2.6)", worst)};
}

Outcome entropy_behaviour() {
    const int n = 12;
    const auto ring = build_lattice(1, {n}, true);
    RMatrix g = RMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) g(a, b) = g(b, a) = std::pow(ring->distance(a, b), -0.5);
    const auto power_law = SuperpositionAnsatz::plus_state(n).with_graph(WeightedGraph::from_matrix(g));
    bool increasing = true;
    double prev = -1.0;
    std::string detail = "power-law S(L):";
    for (int l = 1; l <= 4; ++l) {
        std::vector<int> block(l);
        std::iota(block.begin(), block.end(), 0);
        const double s = block_entropy(power_law, block);
        detail += format(" %.4f", s);
        increasing = increasing && s > prev;
        prev = s;
    }

    ExperimentConfig c;
    c.extents = {30};
    c.symmetry = SymmetryMode::fully_translation_invariant;
    c.fields = {0.2, 1.1, 2.5};
    c.optimizer.m_schedule = {1};
    c.entropy_blocks = 3;
    const auto rep = run_optimize(c, run_dir("entropy"));
    std::vector<double> beta;
    for (const auto& r : rep.rows) {
        std::vector<std::pair<int, double>> pts;
        for (int l = 1; l <= 3; ++l) pts.push_back({l, *r.entropy[l - 1]});
        beta.push_back(area_law_fit(pts, 1).coefficient);
    }
    detail += format("; area-law coefficient B=0.2 %.4f, B=1.1 %.4f, B=2.5 %.4f", beta[0], beta[1], beta[2]);
    return {increasing && beta[1] > beta[0] && beta[1] > beta[2], detail};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "oracle equivalence", oracle_equivalence},
        {2, "deformation basis orthonormal", basis_property},
        {3, "N=20 chain accuracy", chain_accuracy},
        {4, "improvement with m", m_scaling},
        {5, "4x4 lattice accuracy", square_accuracy},
        {6, "critical-point correlation peak", critical_signature},
        {7, "anderson <= exact <= variational", sandwich_property},
        {8, "monotone sweeps", monotone_sweeps},
        {9, "linear expectation scaling", scaling_check},
        {10, "block entropy behaviour", entropy_behaviour},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
