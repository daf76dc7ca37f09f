#include "wgs/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "wgs/analysis.hpp"
#include "wgs/errors.hpp"
#include "wgs/hamiltonian.hpp"
#include "wgs/oracle.hpp"
#include "wgs/serialization.hpp"

namespace wgs {

// ---------------------------------------------------------------- parsing

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct Entry {
    std::string section, key, value;
    int line;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("line " + std::to_string(line) + ": [" + section + "] " + key + ": " + what);
    }

    double real() const {
        try {
            std::size_t pos = 0;
            const double v = std::stod(value, &pos);
            if (pos != value.size() || !std::isfinite(v)) fail("expected a number, got '" + value + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("expected a number, got '" + value + "'");
        }
    }

    long long integer() const {
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(value, &pos);
            if (pos != value.size()) fail("expected an integer, got '" + value + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("expected an integer, got '" + value + "'");
        }
    }

    int positive() const {
        const long long v = integer();
        if (v < 1 || v > 1'000'000'000) fail("expected a positive integer");
        return static_cast<int>(v);
    }

    bool boolean() const {
        if (value == "true" || value == "yes" || value == "1" || value == "on") return true;
        if (value == "false" || value == "no" || value == "0" || value == "off") return false;
        fail("expected true or false, got '" + value + "'");
    }

    std::vector<int> int_list() const {
        std::vector<int> out;
        for (const auto& item : split_list(value)) {
            Entry e = *this;
            e.value = item;
            out.push_back(static_cast<int>(e.integer()));
        }
        if (out.empty()) fail("expected a comma-separated list");
        return out;
    }

    std::vector<double> real_list() const {
        std::vector<double> out;
        for (const auto& item : split_list(value)) {
            Entry e = *this;
            e.value = item;
            out.push_back(e.real());
        }
        if (out.empty()) fail("expected a comma-separated list");
        return out;
    }
};

SymmetryMode parse_symmetry(const Entry& e) {
    if (e.value == "free") return SymmetryMode::free;
    if (e.value == "range_cutoff") return SymmetryMode::range_cutoff;
    if (e.value == "distance_dependent") return SymmetryMode::distance_dependent;
    if (e.value == "translation_invariant" || e.value == "fully_translation_invariant")
        return SymmetryMode::fully_translation_invariant;
    e.fail("unknown symmetry mode '" + e.value + "'");
}

std::vector<SweepKind> parse_sweep_order(const Entry& e) {
    std::vector<SweepKind> out;
    for (const auto& item : split_list(e.value)) {
        if (item == "deformations") out.push_back(SweepKind::deformations);
        else if (item == "phases") out.push_back(SweepKind::phases);
        else if (item == "unitaries") out.push_back(SweepKind::unitaries);
        else e.fail("unknown sweep kind '" + item + "'");
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"model", {"type", "field", "field_min", "field_max", "field_step"}},
        {"lattice", {"dim", "extents", "periodic"}},
        {"ansatz", {"symmetry", "r0", "m_schedule", "alternating", "shared_deformation", "seed", "load"}},
        {"optimizer",
         {"max_iterations", "gradient_tolerance", "fd_scale", "sweep_tolerance", "eigen_regularization", "max_rounds",
          "restarts", "lbfgs_memory", "sweep_order"}},
        {"outputs", {"directory", "timing", "anderson_cluster", "reduce_sites", "entropy_blocks"}},
    };

    std::vector<Entry> entries;
    std::set<std::pair<std::string, std::string>> seen;
    std::string section, line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(source + ":" + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            if (!schema.count(section))
                throw ConfigError(source + ":" + std::to_string(lineno) + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError(source + ":" + std::to_string(lineno) + ": key outside of a section");
        Entry e{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno};
        if (!schema.at(section).count(e.key))
            throw ConfigError(source + ":" + std::to_string(lineno) + ": unknown key '" + e.key + "' in [" + section +
                              "]");
        if (!seen.insert({section, e.key}).second)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + e.key + "'");
        entries.push_back(std::move(e));
    }

    ExperimentConfig c;
    std::optional<double> fmin, fmax, fstep;
    bool have_field = false, have_extents = false;
    for (const auto& e : entries) {
        const std::string& k = e.key;
        if (e.section == "model") {
            if (k == "type") {
                if (e.value != "ising") e.fail("only the ising model is supported");
                c.model = e.value;
            } else if (k == "field") {
                c.fields = e.real_list();
                have_field = true;
            } else if (k == "field_min") fmin = e.real();
            else if (k == "field_max") fmax = e.real();
            else if (k == "field_step") fstep = e.real();
        } else if (e.section == "lattice") {
            if (k == "dim") {
                c.dim = e.positive();
                if (c.dim > 3) e.fail("dimension must be 1, 2 or 3");
            } else if (k == "extents") {
                c.extents = e.int_list();
                have_extents = true;
            } else if (k == "periodic") c.periodic = e.boolean();
        } else if (e.section == "ansatz") {
            if (k == "symmetry") c.symmetry = parse_symmetry(e);
            else if (k == "r0") {
                c.r0 = e.real();
                if (c.r0 < 0.0) e.fail("must be >= 0");
            } else if (k == "m_schedule") c.optimizer.m_schedule = e.int_list();
            else if (k == "alternating") c.alternating = e.boolean();
            else if (k == "shared_deformation") c.shared_deformation = e.boolean();
            else if (k == "seed") {
                const long long s = e.integer();
                if (s < 0) e.fail("seed must be non-negative");
                c.optimizer.seed = static_cast<std::uint64_t>(s);
            } else if (k == "load") c.load = e.value;
        } else if (e.section == "optimizer") {
            auto& o = c.optimizer;
            if (k == "max_iterations") o.max_iterations = static_cast<int>(e.integer());
            else if (k == "gradient_tolerance") o.gradient_tolerance = e.real();
            else if (k == "fd_scale") o.fd_scale = e.real();
            else if (k == "sweep_tolerance") o.sweep_tolerance = e.real();
            else if (k == "eigen_regularization") o.eigen_regularization = e.real();
            else if (k == "max_rounds") o.max_rounds = e.positive();
            else if (k == "restarts") o.restarts = e.positive();
            else if (k == "lbfgs_memory") o.lbfgs_memory = e.positive();
            else if (k == "sweep_order") o.sweep_order = parse_sweep_order(e);
        } else if (e.section == "outputs") {
            if (k == "directory") c.directory = e.value;
            else if (k == "timing") c.timing = e.boolean();
            else if (k == "anderson_cluster") c.anderson_cluster = e.int_list();
            else if (k == "reduce_sites") c.reduce_sites = e.int_list();
            else if (k == "entropy_blocks") {
                c.entropy_blocks = static_cast<int>(e.integer());
                if (c.entropy_blocks < 0 || c.entropy_blocks > 3) e.fail("must be between 0 and 3");
            }
        }
    }

    if (fmin || fmax || fstep) {
        if (have_field) throw ConfigError(source + ": give either field or field_min/field_max/field_step");
        if (!fmin || !fmax || !fstep) throw ConfigError(source + ": field range needs field_min, field_max and field_step");
        if (!(*fstep > 0.0) || *fmax < *fmin) throw ConfigError(source + ": bad field range");
        const long long count = std::llround((*fmax - *fmin) / *fstep) + 1;
        if (count > 100000) throw ConfigError(source + ": field range has too many points");
        c.fields.clear();
        for (long long i = 0; i < count; ++i) c.fields.push_back(*fmin + static_cast<double>(i) * *fstep);
    }
    if (!have_extents) c.extents.assign(c.dim, c.extents.front());
    if (c.extents.size() == 1 && c.dim > 1) c.extents.assign(c.dim, c.extents.front());
    if (static_cast<int>(c.extents.size()) != c.dim) throw ConfigError(source + ": extents must list one value per dimension");
    for (int e : c.extents)
        if (e < 1) throw ConfigError(source + ": extents must be positive");
    if (c.symmetry == SymmetryMode::range_cutoff && !(c.r0 > 0.0))
        throw ConfigError(source + ": range_cutoff needs r0 > 0");
    try {
        c.optimizer.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    return parse_config(in, path);
}

void apply_environment(ExperimentConfig& config) {
    const char* s = std::getenv("WGS_SEED");
    if (!s || !*s) return;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end != '\0' || s[0] == '-') throw ConfigError(std::string("WGS_SEED is not a non-negative integer: ") + s);
    config.optimizer.seed = v;
}

// ---------------------------------------------------------------- pipelines

namespace {

using Clock = std::chrono::steady_clock;

/// Checkpoints store dense phases; past this size they would not fit on disk.
constexpr int kCheckpointSiteLimit = 4096;

struct Setup {
    std::shared_ptr<const Lattice> lattice;
    SymmetryProfile symmetry;
    std::string directory;
};

Setup make_setup(const ExperimentConfig& c, const RunOptions& opt) {
    Setup s;
    try {
        s.lattice = build_lattice(c.dim, c.extents, c.periodic);
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("lattice: ") + e.what());
    }
    s.symmetry.mode = c.symmetry;
    s.symmetry.r0 = c.r0;
    s.symmetry.alternating_unitaries = c.alternating;
    s.symmetry.shared_deformation = c.shared_deformation;
    s.symmetry.lattice = s.lattice;
    s.directory = opt.out_dir.empty() ? c.directory : opt.out_dir;
    std::filesystem::create_directories(s.directory);
    return s;
}

std::string field_tag(double b) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "B%.4f", b);
    return buf;
}

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

/// Runs f(i) for i in [0, n) on up to `jobs` threads; rethrows the first
/// failure in index order.
void parallel_for(int n, int jobs, const std::function<void(int)>& f) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(jobs, n); ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void fill_diagnostics(ResultRow& row, const SuperpositionAnsatz& ans, const Lattice& lat, int entropy_blocks) {
    if (lat.size() > 1) row.q_max = correlations(ans, 0, 1).q_max;
    int min_extent = lat.extents()[0];
    for (int e : lat.extents()) min_extent = std::min(min_extent, e);
    for (int l = 1; l <= entropy_blocks; ++l) {
        int vol = 1;
        for (int i = 0; i < lat.dim(); ++i) vol *= l;
        if (l > min_extent || vol > kDefaultBlockCap || vol >= lat.size()) continue;
        const auto block = cube_block(lat, l);
        row.entropy[l - 1] = block_entropy(ans, block);
    }
}

std::optional<SuperpositionAnsatz> load_start(const ExperimentConfig& c, int n_sites) {
    if (c.load.empty()) return std::nullopt;
    SuperpositionAnsatz a = load_ansatz(c.load);
    if (a.n_sites() != n_sites) throw ConfigError("checkpoint " + c.load + " has the wrong site count");
    return a;
}

struct FieldRun {
    ScheduleResult schedule;
    double seconds = 0.0;
};

FieldRun optimize_field(const ExperimentConfig& c, const Setup& s, double field, const SuperpositionAnsatz* start) {
    const auto t0 = Clock::now();
    const EnergyModel model(ising(s.lattice, field), s.symmetry);
    FieldRun r{run_schedule(model, s.symmetry, c.optimizer, start), 0.0};
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

void write_outputs(const ExperimentConfig& c, const Setup& s, double field, const FieldRun& run, RunReport& report) {
    const std::string tag = field_tag(field);
    const std::string trace = join(s.directory, "trace_" + tag + ".csv");
    write_trace_csv(trace, run.schedule.trace, c.timing);
    report.files.push_back(trace);
    if (s.lattice->size() <= kCheckpointSiteLimit) {
        const std::string ckpt = join(s.directory, "ansatz_" + tag + ".wgs");
        save_ansatz(ckpt, run.schedule.best().ansatz);
        report.files.push_back(ckpt);
    }
}

/// Optimizes every field point independently (cold) and emits one row per m.
RunReport optimize_all(const ExperimentConfig& c, const RunOptions& opt, const std::string& name,
                       const std::function<void(ResultRow&, std::size_t)>& extra) {
    const Setup s = make_setup(c, opt);
    const auto start = load_start(c, s.lattice->size());
    const double bonds = static_cast<double>(s.lattice->bonds().size());
    const int nf = static_cast<int>(c.fields.size());
    std::vector<std::optional<FieldRun>> runs(nf);
    parallel_for(nf, opt.jobs, [&](int i) { runs[i] = optimize_field(c, s, c.fields[i], start ? &*start : nullptr); });

    RunReport report;
    for (int i = 0; i < nf; ++i) {
        const auto& run = *runs[i];
        for (const auto& st : run.schedule.stages) {
            ResultRow row;
            row.field = c.fields[i];
            row.m = st.m;
            row.energy = st.energy;
            if (bonds > 0) row.energy_per_bond = st.energy / bonds;
            fill_diagnostics(row, st.ansatz, *s.lattice, c.entropy_blocks);
            row.seconds = c.timing ? run.seconds : 0.0;
            extra(row, static_cast<std::size_t>(i));
            report.rows.push_back(row);
        }
        write_outputs(c, s, c.fields[i], run, report);
        report.optima.push_back(run.schedule.best().ansatz);
    }
    const std::string csv = join(s.directory, name + ".csv");
    write_results_csv(csv, report.rows, c.timing);
    report.files.push_back(csv);
    return report;
}

std::vector<double> anderson_bounds(const ExperimentConfig& c, const Setup& s) {
    std::vector<double> out;
    for (double b : c.fields) out.push_back(anderson_bound(ising(s.lattice, b), c.anderson_cluster));
    return out;
}

std::string cell(const std::optional<double>& v) {
    if (!v) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", *v);
    return buf;
}

}  // namespace

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows, bool timing) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw ArgumentError("cannot write " + tmp);
        const std::time_t now = std::time(nullptr);
        char stamp[64];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        out << "# generated " << stamp << '\n';
        out << "B,m,energy,energy_per_bond,rel_dev,anderson,q_max,entropy_L1,entropy_L2,entropy_L3,seconds\n";
        for (const auto& r : rows) {
            out << cell(r.field) << ',' << (r.m > 0 ? std::to_string(r.m) : "") << ',' << cell(r.energy) << ','
                << cell(r.energy_per_bond) << ',' << cell(r.rel_dev) << ',' << cell(r.anderson) << ','
                << cell(r.q_max) << ',' << cell(r.entropy[0]) << ',' << cell(r.entropy[1]) << ','
                << cell(r.entropy[2]) << ',';
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f", timing ? r.seconds : 0.0);
            out << buf << '\n';
        }
        if (!out) throw ArgumentError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

RunReport run_optimize(const ExperimentConfig& c, const RunOptions& opt) {
    return optimize_all(c, opt, "optimize", [](ResultRow&, std::size_t) {});
}

RunReport run_compare_exact(const ExperimentConfig& c, const RunOptions& opt) {
    const Setup s = make_setup(c, opt);
    const ExactOptions exact_opt;
    const int n = s.lattice->size();
    if (n > exact_opt.iterative_cap)
        throw CapacityError("compare-exact: " + std::to_string(n) + " sites exceed the exact-diagonalization cap of " +
                            std::to_string(exact_opt.iterative_cap));
    std::vector<double> exact(c.fields.size());
    parallel_for(static_cast<int>(c.fields.size()), opt.jobs,
                 [&](int i) { exact[i] = exact_ground_energy(ising(s.lattice, c.fields[i]), exact_opt).energy; });
    std::vector<double> bounds;
    if (!c.anderson_cluster.empty()) bounds = anderson_bounds(c, s);
    return optimize_all(c, opt, "compare-exact", [&](ResultRow& row, std::size_t i) {
        row.exact = exact[i];
        row.rel_dev = (*row.energy - exact[i]) / std::abs(exact[i]);
        if (!bounds.empty()) row.anderson = bounds[i];
    });
}

RunReport run_sweep_field(const ExperimentConfig& c, const RunOptions& opt) {
    const Setup s = make_setup(c, opt);
    const auto start = load_start(c, s.lattice->size());
    const double bonds = static_cast<double>(s.lattice->bonds().size());
    const int nf = static_cast<int>(c.fields.size());
    std::vector<std::optional<FieldRun>> runs(nf);
    if (opt.cold_start) {
        parallel_for(nf, opt.jobs,
                     [&](int i) { runs[i] = optimize_field(c, s, c.fields[i], start ? &*start : nullptr); });
    } else {
        // Warm start: each field point resumes from the previous optimum.
        const SuperpositionAnsatz* prev = start ? &*start : nullptr;
        for (int i = 0; i < nf; ++i) {
            runs[i] = optimize_field(c, s, c.fields[i], prev);
            prev = &runs[i]->schedule.best().ansatz;
        }
    }

    RunReport report;
    for (int i = 0; i < nf; ++i) {
        const auto& run = *runs[i];
        const auto& best = run.schedule.best();
        ResultRow row;
        row.field = c.fields[i];
        row.m = best.m;
        row.energy = best.energy;
        if (bonds > 0) row.energy_per_bond = best.energy / bonds;
        fill_diagnostics(row, best.ansatz, *s.lattice, c.entropy_blocks);
        row.seconds = c.timing ? run.seconds : 0.0;
        report.rows.push_back(row);
        report.optima.push_back(best.ansatz);
    }
    if (!c.anderson_cluster.empty()) {
        const auto bounds = anderson_bounds(c, s);
        for (int i = 0; i < nf; ++i) report.rows[i].anderson = bounds[i];
    }
    if (s.lattice->size() <= kCheckpointSiteLimit) {
        for (int i = 0; i < nf; ++i) {
            const std::string ckpt = join(s.directory, "ansatz_" + field_tag(c.fields[i]) + ".wgs");
            save_ansatz(ckpt, report.optima[i]);
            report.files.push_back(ckpt);
        }
    }
    const std::string csv = join(s.directory, "sweep-field.csv");
    write_results_csv(csv, report.rows, c.timing);
    report.files.push_back(csv);
    return report;
}

RunReport run_anderson(const ExperimentConfig& c, const RunOptions& opt) {
    if (c.anderson_cluster.empty()) throw ConfigError("anderson needs [outputs] anderson_cluster");
    const Setup s = make_setup(c, opt);
    RunReport report;
    const int nf = static_cast<int>(c.fields.size());
    std::vector<double> bounds(nf);
    std::vector<double> secs(nf);
    parallel_for(nf, opt.jobs, [&](int i) {
        const auto t0 = Clock::now();
        bounds[i] = anderson_bound(ising(s.lattice, c.fields[i]), c.anderson_cluster);
        secs[i] = std::chrono::duration<double>(Clock::now() - t0).count();
    });
    for (int i = 0; i < nf; ++i) {
        ResultRow row;
        row.field = c.fields[i];
        row.anderson = bounds[i];
        row.seconds = c.timing ? secs[i] : 0.0;
        report.rows.push_back(row);
    }
    const std::string csv = join(s.directory, "anderson.csv");
    write_results_csv(csv, report.rows, c.timing);
    report.files.push_back(csv);
    return report;
}

RunReport run_reduce(const ExperimentConfig& c, const RunOptions& opt) {
    const Setup s = make_setup(c, opt);
    for (int site : c.reduce_sites)
        if (site < 0 || site >= s.lattice->size()) throw ConfigError("reduce_sites index out of range");
    RunReport report;
    std::optional<SuperpositionAnsatz> ans = load_start(c, s.lattice->size());
    double field = c.fields.front();
    if (!ans) {
        const FieldRun run = optimize_field(c, s, field, nullptr);
        write_outputs(c, s, field, run, report);
        ans = run.schedule.best().ansatz;
    }
    const ReducedDensity rd = reduced_density(*ans, c.reduce_sites);
    const std::string path = join(s.directory, "reduced.csv");
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw ArgumentError("cannot write " + tmp);
        out << "# sites";
        for (int site : rd.sites) out << ' ' << site;
        out << "\nrow,col,re,im\n";
        char buf[96];
        for (Eigen::Index r = 0; r < rd.matrix.rows(); ++r)
            for (Eigen::Index q = 0; q < rd.matrix.cols(); ++q) {
                std::snprintf(buf, sizeof buf, "%ld,%ld,%.15g,%.15g\n", static_cast<long>(r), static_cast<long>(q),
                              rd.matrix(r, q).real(), rd.matrix(r, q).imag());
                out << buf;
            }
    }
    std::filesystem::rename(tmp, path);
    report.files.push_back(path);
    report.optima.push_back(*ans);
    return report;
}

int execute(const std::string& sub, const ExperimentConfig& c, const RunOptions& opt, std::ostream& err) {
    try {
        if (sub == "optimize") run_optimize(c, opt);
        else if (sub == "sweep-field") run_sweep_field(c, opt);
        else if (sub == "compare-exact") run_compare_exact(c, opt);
        else if (sub == "anderson") run_anderson(c, opt);
        else if (sub == "reduce") run_reduce(c, opt);
        else throw ConfigError("unknown subcommand '" + sub + "'");
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    } catch (const ArgumentError& e) {
        err << "invalid argument: " << e.what() << '\n';
        return 1;
    } catch (const CapacityError& e) {
        err << "capacity error: " << e.what() << '\n';
        return 2;
    } catch (const NumericRangeError& e) {
        err << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const DegenerateStateError& e) {
        err << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace wgs
