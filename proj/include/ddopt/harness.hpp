#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ddopt/core.hpp"
#include "ddopt/d3ca.hpp"
#include "ddopt/radisa.hpp"

namespace ddopt {

// ---------------------------------------------------------------------------
// Reference optimum
// ---------------------------------------------------------------------------

struct ReferenceOptions {
    double gap_tol = 1e-8;
    std::size_t max_epochs = 20000;
    std::uint64_t seed = 7;
};

struct ReferenceResult {
    double f_star = 0.0;  // F(w(alpha)) at termination
    double dual_value = 0.0;
    double gap = 0.0;
    std::size_t epochs = 0;
    std::vector<double> w;
    std::vector<double> alpha;
};

// Serial SDCA on the whole dataset (random permutation per epoch) until
// F(w(alpha)) - D(alpha) <= gap_tol * max(1, |F|). Throws
// MaxIterationsExceeded carrying the achieved gap in the message.
ReferenceResult reference_solve(const Dataset& data, const ProblemSpec& spec, const ReferenceOptions& opts = {});

// Serial evaluation of F and D on an unpartitioned dataset.
double serial_primal(const Dataset& data, const ProblemSpec& spec, const std::vector<double>& w);
double serial_dual(const Dataset& data, const ProblemSpec& spec, const std::vector<double>& alpha);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

// (f_t - f_star) / f_star. A negative value means f_star is not converged;
// it is returned as-is, with *below_reference set and a warning on stderr.
double relative_optimality(double f_t, double f_star, bool* below_reference = nullptr);

// (t_1 / t_P) * 100.
double weak_scaling_efficiency(double t_1, double t_P);

// ---------------------------------------------------------------------------
// Config files: a TOML subset of [sections] with `key = value` lines where a
// value is a number, a "string", true/false, or a (nested) [array].
// ---------------------------------------------------------------------------

struct ConfigValue {
    std::variant<double, std::string, bool, std::vector<ConfigValue>> v;

    bool is_number() const { return std::holds_alternative<double>(v); }
    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_array() const { return std::holds_alternative<std::vector<ConfigValue>>(v); }
    double number() const;
    const std::string& string() const;
    bool boolean() const;
    const std::vector<ConfigValue>& array() const;
};

using ConfigSection = std::map<std::string, ConfigValue>;

struct ConfigFile {
    std::vector<std::pair<std::string, ConfigSection>> sections;  // file order
};

ConfigFile parse_config(std::istream& in);
ConfigFile parse_config_file(const std::string& path);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

enum class SolverKind { D3ca, Radisa, RadisaAvg };
const char* solver_name(SolverKind s);
SolverKind parse_solver(const std::string& name);

enum class ExperimentKind { Convergence, Strong, Weak };

struct ExperimentConfig {
    std::string name;
    ExperimentKind kind = ExperimentKind::Convergence;
    std::vector<SolverKind> solvers{SolverKind::D3ca, SolverKind::Radisa, SolverKind::RadisaAvg};
    std::vector<std::pair<std::size_t, std::size_t>> partitions{{4, 2}};
    std::vector<double> lambdas;  // empty: per-kind, per-solver defaults
    LossKind loss = LossKind::Hinge;
    std::size_t iters = 50;
    std::optional<double> target;  // stop once rel_opt <= target (strong/weak)

    std::string data = "synthetic";  // or a LIBSVM / GOPT1 path
    std::size_t rows = 0, cols = 0;  // synthetic total size (convergence, strong)
    std::size_t rows_per_block = 0, cols_per_block = 0;  // weak scaling; convergence when rows == 0
    std::vector<double> densities{1.0};
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> shuffle_seed;

    double gamma = 1.0;
    std::vector<double> gamma_grid;
    std::size_t batch = 0;  // L; 0: samples / P
    std::size_t samples = 0;  // P*L per column block; 0: n
    bool scale_gamma_by_p = false;
    std::size_t gradient_lag = 1;
    std::size_t local_passes = 1;
    bool beta_stepsize = false;
    double gap_tol = 1e-8;
    int threads = 0;

    std::string output;             // trajectory CSV
    std::string efficiency_output;  // weak scaling efficiency CSV
};

ExperimentConfig experiment_from_section(const std::string& name, const ConfigSection& section);
std::vector<ExperimentConfig> load_experiments(const std::string& path);

// One line of the trajectory CSV.
struct CsvRow {
    std::string solver;
    std::size_t P = 0, Q = 0;
    double lambda = 0.0;
    std::size_t iter = 0;
    double rel_opt = 0.0;
    std::uint64_t reduce_ops = 0;
    std::uint64_t scalars_communicated = 0;
    double wall_seconds = 0.0;
    double primal_value = 0.0;
    double f_star = 0.0;
};

struct EfficiencyRow {
    std::string solver;
    std::size_t Q = 0;
    double density = 1.0;
    std::size_t P = 0;
    double t_1 = 0.0;
    double t_P = 0.0;
    double efficiency = 0.0;
    bool reached = true;  // both runs reached the target
};

// One finished weak-scaling run, the input to efficiency_table.
struct WeakRun {
    std::string solver;
    std::size_t Q = 0;
    double density = 1.0;
    std::size_t P = 0;
    double seconds = 0.0;
    bool reached = true;
};

// Efficiency of every run relative to the P=1 run with the same solver, Q
// and density.
std::vector<EfficiencyRow> efficiency_table(const std::vector<WeakRun>& runs);

struct ExperimentReport {
    std::vector<CsvRow> rows;
    std::vector<EfficiencyRow> efficiency;
    std::vector<WeakRun> weak_runs;
};

// Monotone seconds source; injectable for tests.
using Clock = std::function<double()>;
Clock steady_clock_seconds();

// Strong scaling keeps P*L fixed: L = samples / P (at least 1).
std::size_t strong_scaling_batch(std::size_t samples, std::size_t P);

// Gamma for a RADiSA cell, optionally scaled by the number of row partitions.
double effective_gamma(double gamma, std::size_t P, bool scale_by_p);

ExperimentReport run_experiment(const ExperimentConfig& config, const Clock& clock = steady_clock_seconds());

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);
std::vector<CsvRow> read_csv(std::istream& in);
void write_efficiency_csv(std::ostream& out, const std::vector<EfficiencyRow>& rows);

// One summary line per (solver, P, Q, lambda) group of a trajectory CSV.
struct SummaryRow {
    std::string solver;
    std::size_t P = 0, Q = 0;
    double lambda = 0.0;
    std::size_t iters = 0;
    double final_rel_opt = 0.0;
    std::optional<std::size_t> first_iter_below;  // first iteration with rel_opt <= threshold
    std::uint64_t reduce_ops = 0;
    std::uint64_t scalars = 0;
    double wall_seconds = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<CsvRow>& rows, double threshold);
void print_summary(std::ostream& out, const std::vector<SummaryRow>& summary, double threshold);

// Single-solver run shared by the CLI and the drivers.
struct TrainOptions {
    SolverKind solver = SolverKind::D3ca;
    std::size_t iters = 50;
    std::size_t batch = 0;  // 0: n / P
    double gamma = 1.0;
    std::size_t local_passes = 1;
    bool beta_stepsize = false;
    std::uint64_t seed = 1;
    std::size_t gradient_lag = 1;
    int threads = 0;
    std::optional<double> f_star;
    std::optional<double> target;
};

struct TrainResult {
    PrimalVector w;
    RunHistory history;
    std::vector<double> wall_seconds;  // per record, since start
};

TrainResult train(const PartitionedData& data, const ProblemSpec& spec, const TrainOptions& opts,
                  const Clock& clock = steady_clock_seconds());

// Runs each gamma for opts.iters iterations and returns the one with the
// lowest final primal value (ties: the smaller gamma).
double tune_gamma(const PartitionedData& data, const ProblemSpec& spec, TrainOptions opts,
                  const std::vector<double>& grid);

}  // namespace ddopt
