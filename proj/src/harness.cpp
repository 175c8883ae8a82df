#include "ddopt/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include "ddopt/data_io.hpp"
#include "ddopt/losses.hpp"
#include "ddopt/partitioner.hpp"
#include "ddopt/rng.hpp"

namespace ddopt {

// ---------------------------------------------------------------------------
// Reference optimum
// ---------------------------------------------------------------------------

double serial_primal(const Dataset& data, const ProblemSpec& spec, const std::vector<double>& w) {
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) loss_sum += loss_eval(spec.loss, data.x.row(i).dot(w), data.y[i]).value;
    double sq = 0.0;
    for (double v : w) sq += v * v;
    return loss_sum / static_cast<double>(data.n()) + spec.lambda * sq;
}

namespace {

std::vector<double> serial_primal_from_dual(const Dataset& data, const ProblemSpec& spec,
                                            const std::vector<double>& alpha) {
    std::vector<double> w(data.m(), 0.0);
    for (std::size_t i = 0; i < data.n(); ++i)
        if (alpha[i] != 0.0) data.x.row(i).axpy(alpha[i], w);
    const double inv = 1.0 / (spec.sigma() * static_cast<double>(data.n()));
    for (double& v : w) v *= inv;
    return w;
}

}  // namespace

double serial_dual(const Dataset& data, const ProblemSpec& spec, const std::vector<double>& alpha) {
    double conj = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        if (!dual_feasible(alpha[i], data.y[i]))
            throw Error(Errc::InfeasibleDual, "alpha_" + std::to_string(i) + " * y outside [0,1]", {std::int64_t(i)});
        conj += neg_conjugate(spec.loss, alpha[i], data.y[i]);
    }
    const auto w = serial_primal_from_dual(data, spec, alpha);
    double sq = 0.0;
    for (double v : w) sq += v * v;
    return conj / static_cast<double>(data.n()) - spec.lambda * sq;
}

ReferenceResult reference_solve(const Dataset& data, const ProblemSpec& spec, const ReferenceOptions& opts) {
    spec.validate();
    if (!(opts.gap_tol > 0.0)) throw Error(Errc::InvalidArgument, "gap tolerance must be positive");
    if (data.n() != spec.n || data.m() != spec.m) throw Error(Errc::DimensionMismatch, "problem spec does not match data");
    const std::size_t n = data.n();
    const double sigma_n = spec.sigma() * static_cast<double>(n);

    std::vector<double> alpha(n, 0.0), w(data.m(), 0.0), sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = data.x.row(i).squared_norm();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 1; epoch <= opts.max_epochs; ++epoch) {
        auto rng = rng_stream(opts.seed, {"reference", epoch});
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.next_index(i)]);
        for (const std::size_t i : order) {
            const auto row = data.x.row(i);
            const double da = sq[i] > 0.0 ? sdca_step(spec.loss, alpha[i], row.dot(w), data.y[i], sigma_n, sq[i])
                                          : conjugate_maximizer(spec.loss, data.y[i]) - alpha[i];
            if (da == 0.0) continue;
            alpha[i] += da;
            row.axpy(da / sigma_n, w);
        }
        // Certify on the exact w(alpha) and resynchronize the running copy.
        w = serial_primal_from_dual(data, spec, alpha);
        const double primal = serial_primal(data, spec, w);
        const double dual = serial_dual(data, spec, alpha);
        gap = primal - dual;
        if (gap <= opts.gap_tol * std::max(1.0, std::abs(primal))) {
            return ReferenceResult{primal, dual, gap, epoch, std::move(w), std::move(alpha)};
        }
    }
    std::ostringstream msg;
    msg << "reference SDCA stopped after " << opts.max_epochs << " epochs with duality gap " << gap;
    throw Error(Errc::MaxIterationsExceeded, msg.str());
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double relative_optimality(double f_t, double f_star, bool* below_reference) {
    if (!(f_star > 0.0)) throw Error(Errc::NonPositiveReference, "relative optimality needs f* > 0");
    const double r = (f_t - f_star) / f_star;
    if (below_reference) *below_reference = r < 0.0;
    if (r < 0.0) std::cerr << "warning: objective " << f_t << " is below f* = " << f_star << "; f* is not converged\n";
    return r;
}

double weak_scaling_efficiency(double t_1, double t_P) {
    if (!(t_1 > 0.0) || !(t_P > 0.0)) throw Error(Errc::NonPositiveTime, "weak scaling efficiency needs positive times");
    return t_1 / t_P * 100.0;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

double ConfigValue::number() const {
    if (!is_number()) throw Error(Errc::ConfigError, "expected a number");
    return std::get<double>(v);
}

const std::string& ConfigValue::string() const {
    if (!is_string()) throw Error(Errc::ConfigError, "expected a string");
    return std::get<std::string>(v);
}

bool ConfigValue::boolean() const {
    if (!is_bool()) throw Error(Errc::ConfigError, "expected true or false");
    return std::get<bool>(v);
}

const std::vector<ConfigValue>& ConfigValue::array() const {
    if (!is_array()) throw Error(Errc::ConfigError, "expected an array");
    return std::get<std::vector<ConfigValue>>(v);
}

namespace {

class ValueParser {
public:
    ValueParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

    ConfigValue parse_all() {
        auto v = parse();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing characters after value");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw Error(Errc::ConfigError, "line " + std::to_string(line_) + ": " + why, {std::int64_t(line_)});
    }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    ConfigValue parse() {
        skip_ws();
        if (pos_ >= s_.size()) fail("missing value");
        const char c = s_[pos_];
        if (c == '"') {
            const auto close = s_.find('"', pos_ + 1);
            if (close == std::string_view::npos) fail("unterminated string");
            ConfigValue v{std::string(s_.substr(pos_ + 1, close - pos_ - 1))};
            pos_ = close + 1;
            return v;
        }
        if (c == '[') {
            ++pos_;
            std::vector<ConfigValue> items;
            skip_ws();
            if (pos_ < s_.size() && s_[pos_] == ']') {
                ++pos_;
                return ConfigValue{std::move(items)};
            }
            while (true) {
                items.push_back(parse());
                skip_ws();
                if (pos_ >= s_.size()) fail("unterminated array");
                if (s_[pos_] == ',') {
                    ++pos_;
                    skip_ws();
                    if (pos_ < s_.size() && s_[pos_] == ']') {
                        ++pos_;
                        break;
                    }
                    continue;
                }
                if (s_[pos_] == ']') {
                    ++pos_;
                    break;
                }
                fail("expected ',' or ']' in array");
            }
            return ConfigValue{std::move(items)};
        }
        if (s_.substr(pos_, 4) == "true") {
            pos_ += 4;
            return ConfigValue{true};
        }
        if (s_.substr(pos_, 5) == "false") {
            pos_ += 5;
            return ConfigValue{false};
        }
        const std::string rest(s_.substr(pos_));
        char* end = nullptr;
        const double d = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str()) fail("cannot parse value '" + rest + "'");
        pos_ += static_cast<std::size_t>(end - rest.c_str());
        return ConfigValue{d};
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_;
};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string_view strip_comment(std::string_view s) {
    bool in_string = false;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s[k] == '"') in_string = !in_string;
        if (s[k] == '#' && !in_string) return s.substr(0, k);
    }
    return s;
}

}  // namespace

ConfigFile parse_config(std::istream& in) {
    ConfigFile cfg;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw Error(Errc::ConfigError, "line " + std::to_string(lineno) + ": malformed section header",
                            {std::int64_t(lineno)});
            cfg.sections.emplace_back(std::string(trim(line.substr(1, line.size() - 2))), ConfigSection{});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::ConfigError, "line " + std::to_string(lineno) + ": expected key = value",
                        {std::int64_t(lineno)});
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty())
            throw Error(Errc::ConfigError, "line " + std::to_string(lineno) + ": empty key", {std::int64_t(lineno)});
        if (cfg.sections.empty()) cfg.sections.emplace_back("", ConfigSection{});
        auto& sec = cfg.sections.back().second;
        if (sec.count(key))
            throw Error(Errc::ConfigError, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'",
                        {std::int64_t(lineno)});
        sec[key] = ValueParser(line.substr(eq + 1), lineno).parse_all();
    }
    return cfg;
}

ConfigFile parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ConfigError, "cannot open config '" + path + "'");
    return parse_config(in);
}

// ---------------------------------------------------------------------------
// Experiment configs
// ---------------------------------------------------------------------------

const char* solver_name(SolverKind s) {
    switch (s) {
    case SolverKind::D3ca: return "d3ca";
    case SolverKind::Radisa: return "radisa";
    case SolverKind::RadisaAvg: return "radisa-avg";
    }
    return "?";
}

SolverKind parse_solver(const std::string& name) {
    if (name == "d3ca") return SolverKind::D3ca;
    if (name == "radisa") return SolverKind::Radisa;
    if (name == "radisa-avg") return SolverKind::RadisaAvg;
    throw Error(Errc::ConfigError, "unknown solver '" + name + "'");
}

namespace {

std::vector<double> numbers(const ConfigValue& v) {
    if (v.is_number()) return {v.number()};
    std::vector<double> out;
    for (const auto& e : v.array()) out.push_back(e.number());
    return out;
}

std::size_t count(const ConfigValue& v, const std::string& key) {
    const double d = v.number();
    if (d < 0 || d != std::floor(d)) throw Error(Errc::ConfigError, "'" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(d);
}

}  // namespace

ExperimentConfig experiment_from_section(const std::string& name, const ConfigSection& section) {
    ExperimentConfig c;
    c.name = name;
    try {
        for (const auto& [key, v] : section) {
            if (key == "kind") {
                const auto& k = v.string();
                if (k == "convergence")
                    c.kind = ExperimentKind::Convergence;
                else if (k == "strong")
                    c.kind = ExperimentKind::Strong;
                else if (k == "weak")
                    c.kind = ExperimentKind::Weak;
                else
                    throw Error(Errc::ConfigError, "unknown experiment kind '" + k + "'");
            } else if (key == "solvers") {
                c.solvers.clear();
                if (v.is_string())
                    c.solvers.push_back(parse_solver(v.string()));
                else
                    for (const auto& s : v.array()) c.solvers.push_back(parse_solver(s.string()));
            } else if (key == "partitions") {
                c.partitions.clear();
                for (const auto& cell : v.array()) {
                    const auto& pq = cell.array();
                    if (pq.size() != 2) throw Error(Errc::ConfigError, "partitions entries must be [P, Q]");
                    c.partitions.emplace_back(count(pq[0], key), count(pq[1], key));
                }
            } else if (key == "lambda") {
                c.lambdas = numbers(v);
            } else if (key == "loss") {
                c.loss = parse_loss(v.string());
            } else if (key == "iters") {
                c.iters = count(v, key);
            } else if (key == "target") {
                c.target = v.number();
            } else if (key == "data") {
                c.data = v.string();
            } else if (key == "rows") {
                c.rows = count(v, key);
            } else if (key == "cols") {
                c.cols = count(v, key);
            } else if (key == "rows_per_block") {
                c.rows_per_block = count(v, key);
            } else if (key == "cols_per_block") {
                c.cols_per_block = count(v, key);
            } else if (key == "density") {
                c.densities = numbers(v);
            } else if (key == "seed") {
                c.seed = count(v, key);
            } else if (key == "shuffle_seed") {
                c.shuffle_seed = count(v, key);
            } else if (key == "gamma") {
                c.gamma = v.number();
            } else if (key == "gamma_grid") {
                c.gamma_grid = numbers(v);
            } else if (key == "batch") {
                c.batch = count(v, key);
            } else if (key == "samples") {
                c.samples = count(v, key);
            } else if (key == "scale_gamma_by_p") {
                c.scale_gamma_by_p = v.boolean();
            } else if (key == "gradient_lag") {
                c.gradient_lag = count(v, key);
            } else if (key == "local_passes") {
                c.local_passes = count(v, key);
            } else if (key == "beta_stepsize") {
                c.beta_stepsize = v.boolean();
            } else if (key == "gap_tol") {
                c.gap_tol = v.number();
            } else if (key == "threads") {
                c.threads = static_cast<int>(count(v, key));
            } else if (key == "output") {
                c.output = v.string();
            } else if (key == "efficiency_output") {
                c.efficiency_output = v.string();
            } else {
                throw Error(Errc::ConfigError, "unknown key '" + key + "'");
            }
        }
    } catch (const Error& e) {
        throw Error(Errc::ConfigError, "[" + name + "] " + e.what());
    }

    if (!section.count("kind")) throw Error(Errc::ConfigError, "[" + name + "] missing 'kind'");
    if (c.partitions.empty()) throw Error(Errc::ConfigError, "[" + name + "] no partitions given");
    for (const auto& [P, Q] : c.partitions)
        if (P * Q == 0) throw Error(Errc::ConfigError, "[" + name + "] partition counts must be positive (P*Q = 0)");
    if (c.solvers.empty()) throw Error(Errc::ConfigError, "[" + name + "] no solvers given");
    if (c.iters == 0) throw Error(Errc::ConfigError, "[" + name + "] iters must be positive");
    for (double d : c.densities)
        if (!(d > 0.0 && d <= 1.0)) throw Error(Errc::ConfigError, "[" + name + "] density must lie in (0, 1]");
    for (double l : c.lambdas)
        if (!(l > 0.0)) throw Error(Errc::ConfigError, "[" + name + "] lambda must be positive");
    if (c.data == "synthetic") {
        const bool total = c.rows > 0 && c.cols > 0;
        const bool per_block = c.rows_per_block > 0 && c.cols_per_block > 0;
        if (c.kind == ExperimentKind::Weak && !per_block)
            throw Error(Errc::ConfigError, "[" + name + "] weak scaling needs rows_per_block and cols_per_block");
        if (c.kind == ExperimentKind::Strong && !total)
            throw Error(Errc::ConfigError, "[" + name + "] strong scaling needs rows and cols");
        if (!total && !per_block) throw Error(Errc::ConfigError, "[" + name + "] synthetic data needs a size");
    } else if (c.kind == ExperimentKind::Weak) {
        throw Error(Errc::ConfigError, "[" + name + "] weak scaling generates its own data");
    }
    if (!c.target) {
        if (c.kind == ExperimentKind::Strong) c.target = 0.01;
        if (c.kind == ExperimentKind::Weak) c.target = 0.05;
    }
    return c;
}

std::vector<ExperimentConfig> load_experiments(const std::string& path) {
    const auto file = parse_config_file(path);
    std::vector<ExperimentConfig> out;
    for (const auto& [name, section] : file.sections) out.push_back(experiment_from_section(name, section));
    if (out.empty()) throw Error(Errc::ConfigError, "config '" + path + "' defines no experiments");
    return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

Clock steady_clock_seconds() {
    return [] {
        using namespace std::chrono;
        return duration<double>(steady_clock::now().time_since_epoch()).count();
    };
}

std::size_t strong_scaling_batch(std::size_t samples, std::size_t P) { return std::max<std::size_t>(1, samples / P); }

double effective_gamma(double gamma, std::size_t P, bool scale_by_p) {
    return scale_by_p ? gamma * static_cast<double>(P) : gamma;
}

TrainResult train(const PartitionedData& data, const ProblemSpec& spec, const TrainOptions& opts, const Clock& clock) {
    TrainResult out;
    const double start = clock();
    const auto on_record = [&](const IterationRecord&) { out.wall_seconds.push_back(clock() - start); };
    if (opts.solver == SolverKind::D3ca) {
        D3caConfig c;
        c.outer_iters = opts.iters;
        c.local_passes = opts.local_passes;
        c.use_beta_stepsize = opts.beta_stepsize;
        c.seed = opts.seed;
        c.threads = opts.threads;
        c.f_star = opts.f_star;
        c.target = opts.target;
        c.on_record = on_record;
        auto r = run_d3ca(data, spec, c);
        out.w = std::move(r.w);
        out.history = std::move(r.history);
    } else {
        RadisaConfig c;
        c.batch_size = opts.batch > 0 ? opts.batch : std::max<std::size_t>(1, data.n() / data.grid.P);
        c.gamma = opts.gamma;
        c.outer_iters = opts.iters;
        c.variant = opts.solver == SolverKind::RadisaAvg ? RadisaVariant::Avg : RadisaVariant::Disjoint;
        c.seed = opts.seed;
        c.gradient_lag = opts.gradient_lag;
        c.threads = opts.threads;
        c.f_star = opts.f_star;
        c.target = opts.target;
        c.on_record = on_record;
        auto r = run_radisa(data, spec, c);
        out.w = std::move(r.w);
        out.history = std::move(r.history);
    }
    return out;
}

double tune_gamma(const PartitionedData& data, const ProblemSpec& spec, TrainOptions opts,
                  const std::vector<double>& grid) {
    if (grid.empty()) throw Error(Errc::InvalidArgument, "empty gamma grid");
    opts.f_star.reset();
    opts.target.reset();
    double best = grid.front(), best_value = std::numeric_limits<double>::infinity();
    for (double gamma : grid) {
        opts.gamma = gamma;
        const auto r = train(data, spec, opts);
        double v = r.history.back().primal_value;
        if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
        if (v < best_value || (v == best_value && gamma < best)) {
            best_value = v;
            best = gamma;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Experiment drivers
// ---------------------------------------------------------------------------

std::vector<EfficiencyRow> efficiency_table(const std::vector<WeakRun>& runs) {
    std::vector<EfficiencyRow> out;
    for (const auto& r : runs) {
        const auto base = std::find_if(runs.begin(), runs.end(), [&](const WeakRun& b) {
            return b.P == 1 && b.solver == r.solver && b.Q == r.Q && b.density == r.density;
        });
        if (base == runs.end())
            throw Error(Errc::ConfigError, "weak scaling for " + r.solver + " Q=" + std::to_string(r.Q) +
                                               " has no P=1 baseline run");
        EfficiencyRow row;
        row.solver = r.solver;
        row.Q = r.Q;
        row.density = r.density;
        row.P = r.P;
        row.t_1 = base->seconds;
        row.t_P = r.seconds;
        row.efficiency = weak_scaling_efficiency(base->seconds, r.seconds);
        row.reached = base->reached && r.reached;
        out.push_back(row);
    }
    return out;
}

namespace {

std::vector<double> default_lambdas(ExperimentKind kind, SolverKind solver) {
    switch (kind) {
    case ExperimentKind::Convergence: return {1e-1, 1e-2, 1e-3};
    case ExperimentKind::Strong: return {solver == SolverKind::D3ca ? 1e-2 : 1e-3};
    case ExperimentKind::Weak: return {solver == SolverKind::D3ca ? 1.0 : 0.1};
    }
    return {};
}

Dataset load_dataset(const std::string& path) {
    if (is_cache_file(path)) return assemble(read_cache(path));
    return read_libsvm(path);
}

struct Cell {
    Dataset dataset;
    PartitionedData data;
};

class Driver {
public:
    Driver(const ExperimentConfig& cfg, const Clock& clock) : cfg_(cfg), clock_(clock) {}

    ExperimentReport run() {
        if (cfg_.kind == ExperimentKind::Weak) {
            for (double density : cfg_.densities)
                for (const auto& [P, Q] : cfg_.partitions) {
                    std::map<double, double> f_stars;
                    run_cell(synthetic(P, Q, density, true), density, f_stars);
                }
            report_.efficiency = efficiency_table(report_.weak_runs);
            return std::move(report_);
        }
        std::optional<Dataset> fixed;
        if (cfg_.data != "synthetic") {
            fixed = load_dataset(cfg_.data);
        } else if (cfg_.rows > 0 && cfg_.cols > 0) {
            fixed = assemble(synthetic_total(cfg_.densities.front()));
        }
        for (const auto& [P, Q] : cfg_.partitions) {
            if (fixed) {
                Cell cell{*fixed, partition_dataset(*fixed, P, Q, cfg_.shuffle_seed)};
                run_cell(cell, cfg_.densities.front(), fixed_f_stars_);
            } else {
                std::map<double, double> f_stars;
                run_cell(synthetic(P, Q, cfg_.densities.front(), false), cfg_.densities.front(), f_stars);
            }
        }
        return std::move(report_);
    }

private:
    PartitionedData synthetic_total(double density) const {
        SyntheticOptions o;
        o.rows_per_block = cfg_.rows;
        o.cols_per_block = cfg_.cols;
        o.density = density;
        o.seed = cfg_.seed;
        return generate_synthetic(o).data;
    }

    Cell synthetic(std::size_t P, std::size_t Q, double density, bool per_block) const {
        SyntheticOptions o;
        o.P = P;
        o.Q = Q;
        o.rows_per_block = per_block || cfg_.rows == 0 ? cfg_.rows_per_block : cfg_.rows / P;
        o.cols_per_block = per_block || cfg_.cols == 0 ? cfg_.cols_per_block : cfg_.cols / Q;
        o.density = density;
        o.seed = cfg_.seed;
        auto data = generate_synthetic(o).data;
        auto ds = assemble(data);
        if (cfg_.shuffle_seed) data = partition_dataset(ds, P, Q, cfg_.shuffle_seed);
        return Cell{std::move(ds), std::move(data)};
    }

    double f_star(const Dataset& ds, const ProblemSpec& spec) {
        ReferenceOptions ro;
        ro.gap_tol = cfg_.gap_tol;
        ro.seed = cfg_.seed;
        return reference_solve(ds, spec, ro).f_star;
    }

    // f_stars caches the reference optimum per lambda for cell.dataset.
    void run_cell(const Cell& cell, double density, std::map<double, double>& f_stars) {
        const std::size_t P = cell.data.grid.P, Q = cell.data.grid.Q;
        for (const auto solver : cfg_.solvers) {
            const auto lambdas = cfg_.lambdas.empty() ? default_lambdas(cfg_.kind, solver) : cfg_.lambdas;
            for (const double lambda : lambdas) {
                const ProblemSpec spec{cell.dataset.n(), cell.dataset.m(), lambda, cfg_.loss};
                if (!f_stars.count(lambda)) f_stars[lambda] = f_star(cell.dataset, spec);
                const double fs = f_stars[lambda];

                TrainOptions opts;
                opts.solver = solver;
                opts.iters = cfg_.iters;
                opts.local_passes = cfg_.local_passes;
                opts.beta_stepsize = cfg_.beta_stepsize;
                opts.seed = cfg_.seed;
                opts.gradient_lag = cfg_.gradient_lag;
                opts.threads = cfg_.threads;
                if (cfg_.kind == ExperimentKind::Strong)
                    opts.batch = strong_scaling_batch(cfg_.samples > 0 ? cfg_.samples : cell.dataset.n(), P);
                else
                    opts.batch = cfg_.batch;
                opts.gamma = effective_gamma(cfg_.gamma, P, cfg_.scale_gamma_by_p);
                if (solver != SolverKind::D3ca && !cfg_.gamma_grid.empty()) {
                    std::vector<double> grid;
                    for (double g : cfg_.gamma_grid) grid.push_back(effective_gamma(g, P, cfg_.scale_gamma_by_p));
                    opts.gamma = tune_gamma(cell.data, spec, opts, grid);
                    std::cerr << "[" << cfg_.name << "] " << solver_name(solver) << " P=" << P << " Q=" << Q
                              << " lambda=" << lambda << ": gamma " << opts.gamma << '\n';
                }
                opts.f_star = fs;
                opts.target = cfg_.kind == ExperimentKind::Convergence ? std::nullopt : cfg_.target;

                const auto res = train(cell.data, spec, opts, clock_);
                for (std::size_t k = 0; k < res.history.size(); ++k) {
                    const auto& rec = res.history.records[k];
                    CsvRow row;
                    row.solver = solver_name(solver);
                    row.P = P;
                    row.Q = Q;
                    row.lambda = lambda;
                    row.iter = rec.t;
                    row.rel_opt = *rec.rel_opt;
                    row.reduce_ops = rec.reduce_ops;
                    row.scalars_communicated = rec.elements_communicated;
                    row.wall_seconds = res.wall_seconds[k];
                    row.primal_value = rec.primal_value;
                    row.f_star = fs;
                    report_.rows.push_back(row);
                }
                if (cfg_.kind == ExperimentKind::Weak) {
                    const bool reached = res.history.back().rel_opt.value() <= cfg_.target.value_or(0.05);
                    report_.weak_runs.push_back(
                        WeakRun{solver_name(solver), Q, density, P, res.wall_seconds.back(), reached});
                }
            }
        }
    }

    const ExperimentConfig& cfg_;
    const Clock& clock_;
    ExperimentReport report_;
    std::map<double, double> fixed_f_stars_;
};

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, const Clock& clock) {
    auto report = Driver(config, clock).run();
    if (!config.output.empty()) {
        std::ofstream out(config.output);
        if (!out) throw Error(Errc::IoError, "cannot write '" + config.output + "'");
        write_csv(out, report.rows);
    }
    if (!config.efficiency_output.empty() && config.kind == ExperimentKind::Weak) {
        std::ofstream out(config.efficiency_output);
        if (!out) throw Error(Errc::IoError, "cannot write '" + config.efficiency_output + "'");
        write_efficiency_csv(out, report.efficiency);
    }
    return report;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
    out << "solver,P,Q,lambda,iter,rel_opt,reduce_ops,scalars_communicated,wall_seconds,primal_value,f_star\n";
    for (const auto& r : rows)
        out << r.solver << ',' << r.P << ',' << r.Q << ',' << fmt_double(r.lambda) << ',' << r.iter << ','
            << fmt_double(r.rel_opt) << ',' << r.reduce_ops << ',' << r.scalars_communicated << ','
            << fmt_double(r.wall_seconds) << ',' << fmt_double(r.primal_value) << ',' << fmt_double(r.f_star) << '\n';
}

std::vector<CsvRow> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) return {};
    const auto header = split_csv(line);
    const auto col = [&](const std::string& name) -> std::optional<std::size_t> {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto need = [&](const std::string& name) {
        const auto c = col(name);
        if (!c) throw Error(Errc::ParseError, "CSV lacks column '" + name + "'", {1});
        return *c;
    };
    const auto c_solver = need("solver"), c_p = need("P"), c_q = need("Q"), c_lambda = need("lambda"),
               c_iter = need("iter"), c_rel = need("rel_opt");
    const auto c_red = col("reduce_ops"), c_sc = col("scalars_communicated"), c_wall = col("wall_seconds"),
               c_primal = col("primal_value"), c_fstar = col("f_star");

    std::vector<CsvRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != header.size())
            throw Error(Errc::ParseError, "CSV line " + std::to_string(lineno) + " has the wrong field count",
                        {std::int64_t(lineno)});
        try {
            CsvRow r;
            r.solver = f[c_solver];
            r.P = std::stoul(f[c_p]);
            r.Q = std::stoul(f[c_q]);
            r.lambda = std::stod(f[c_lambda]);
            r.iter = std::stoul(f[c_iter]);
            r.rel_opt = std::stod(f[c_rel]);
            if (c_red) r.reduce_ops = std::stoull(f[*c_red]);
            if (c_sc) r.scalars_communicated = std::stoull(f[*c_sc]);
            if (c_wall) r.wall_seconds = std::stod(f[*c_wall]);
            if (c_primal) r.primal_value = std::stod(f[*c_primal]);
            if (c_fstar) r.f_star = std::stod(f[*c_fstar]);
            rows.push_back(r);
        } catch (const std::logic_error&) {
            throw Error(Errc::ParseError, "CSV line " + std::to_string(lineno) + " has a malformed number",
                        {std::int64_t(lineno)});
        }
    }
    return rows;
}

void write_efficiency_csv(std::ostream& out, const std::vector<EfficiencyRow>& rows) {
    out << "solver,Q,density,P,t1_seconds,tP_seconds,efficiency_percent,reached\n";
    for (const auto& r : rows)
        out << r.solver << ',' << r.Q << ',' << fmt_double(r.density) << ',' << r.P << ',' << fmt_double(r.t_1) << ','
            << fmt_double(r.t_P) << ',' << fmt_double(r.efficiency) << ',' << (r.reached ? 1 : 0) << '\n';
}

std::vector<SummaryRow> summarize(const std::vector<CsvRow>& rows, double threshold) {
    std::vector<SummaryRow> out;
    for (const auto& r : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) {
            return s.solver == r.solver && s.P == r.P && s.Q == r.Q && s.lambda == r.lambda;
        });
        if (it == out.end()) {
            SummaryRow s;
            s.solver = r.solver;
            s.P = r.P;
            s.Q = r.Q;
            s.lambda = r.lambda;
            out.push_back(s);
            it = std::prev(out.end());
        }
        it->iters = std::max(it->iters, r.iter);
        it->final_rel_opt = r.rel_opt;
        if (!it->first_iter_below && r.rel_opt <= threshold) it->first_iter_below = r.iter;
        it->reduce_ops = r.reduce_ops;
        it->scalars = r.scalars_communicated;
        it->wall_seconds = r.wall_seconds;
    }
    return out;
}

void print_summary(std::ostream& out, const std::vector<SummaryRow>& summary, double threshold) {
    out << std::left << std::setw(12) << "solver" << std::right << std::setw(4) << "P" << std::setw(4) << "Q"
        << std::setw(10) << "lambda" << std::setw(7) << "iters" << std::setw(14) << "final_relopt" << std::setw(10)
        << ("it<=" + fmt_double(threshold)).substr(0, 9) << std::setw(10) << "reduces" << std::setw(14) << "scalars"
        << std::setw(11) << "wall_s" << '\n';
    for (const auto& s : summary) {
        out << std::left << std::setw(12) << s.solver << std::right << std::setw(4) << s.P << std::setw(4) << s.Q
            << std::setw(10) << std::setprecision(3) << s.lambda << std::setw(7) << s.iters << std::setw(14)
            << std::scientific << std::setprecision(4) << s.final_rel_opt << std::defaultfloat << std::setw(10)
            << (s.first_iter_below ? std::to_string(*s.first_iter_below) : std::string("-")) << std::setw(10)
            << s.reduce_ops << std::setw(14) << s.scalars << std::setw(11) << std::fixed << std::setprecision(3)
            << s.wall_seconds << std::defaultfloat << '\n';
    }
}

}  // namespace ddopt
