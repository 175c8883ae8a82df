// One PASS/FAIL/SKIP line per acceptance criterion. Exits nonzero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ddopt/d3ca.hpp"
#include "ddopt/data_io.hpp"
#include "ddopt/engine.hpp"
#include "ddopt/harness.hpp"
#include "ddopt/losses.hpp"
#include "ddopt/partitioner.hpp"
#include "ddopt/radisa.hpp"
#include "oracles.hpp"

using namespace ddopt;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status = Status::Pass;
    std::string detail;
};

// Collects violations; the first few are kept for the report line.
class Checker {
public:
    void expect(bool ok, const std::string& what) {
        ++checks_;
        if (ok) return;
        ++failures_;
        if (failures_ <= 3) messages_.push_back(what);
    }
    std::size_t checks() const { return checks_; }
    std::size_t failures() const { return failures_; }

    Outcome outcome(const std::string& summary) const {
        if (failures_ == 0) return {Status::Pass, summary};
        std::string d = std::to_string(failures_) + " of " + std::to_string(checks_) + " checks failed";
        for (const auto& m : messages_) d += "; " + m;
        return {Status::Fail, d};
    }

private:
    std::size_t checks_ = 0, failures_ = 0;
    std::vector<std::string> messages_;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Instance {
    Dataset ds;
    PartitionedData data;
    ProblemSpec spec;
};

// Small random instance: n <= 200, m <= 50, with a valid P x Q grid.
Instance small_instance(std::uint64_t seed, LossKind loss) {
    std::mt19937_64 gen(seed * 7919);
    const std::size_t n = 10 + gen() % 191, m = 2 + gen() % 49;
    const std::size_t P = 1 + gen() % std::min<std::size_t>(4, n), Q = 1 + gen() % std::min<std::size_t>(3, m);
    const double density = 0.3 + 0.7 * static_cast<double>(gen() % 1000) / 1000.0;
    const double lambda = std::pow(10.0, -1.0 - static_cast<double>(gen() % 3));
    Instance in;
    in.ds = oracle::random_dataset(seed, n, m, density);
    in.data = partition_dataset(in.ds, P, Q);
    in.spec = ProblemSpec{n, m, lambda, loss};
    return in;
}

std::string where(std::uint64_t seed, std::size_t t) {
    return "seed " + std::to_string(seed) + " iter " + std::to_string(t);
}

// ---------------------------------------------------------------------------

Outcome duality_suite() {
    const auto t0 = std::chrono::steady_clock::now();
    Checker c;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto in = small_instance(seed, LossKind::Hinge);
        ReferenceOptions ro;
        ro.gap_tol = 1e-3;
        const auto ref = reference_solve(in.ds, in.spec, ro);
        const double d_ref = serial_dual(in.ds, in.spec, ref.alpha);

        D3caConfig dc;
        dc.outer_iters = 15;
        dc.seed = seed;
        dc.threads = 1;
        const auto d3 = run_d3ca(in.data, in.spec, dc, [&](std::size_t t, const PrimalVector&, const DualVector& a) {
            const auto flat = a.flatten();
            for (std::size_t i = 0; i < flat.size(); ++i) {
                const double b = flat[i] * in.ds.y[i];
                c.expect(b >= 0.0 && b <= 1.0, "alpha_i y_i outside [0,1] at " + where(seed, t));
            }
        });
        for (const auto& r : d3.history.records)
            c.expect(r.primal_value >= *r.dual_value - 1e-9, "d3ca F < D at " + where(seed, r.t));

        for (auto v : {RadisaVariant::Disjoint, RadisaVariant::Avg}) {
            RadisaConfig rc;
            rc.outer_iters = 15;
            rc.batch_size = std::max<std::size_t>(1, in.ds.n() / in.data.grid.P);
            rc.gamma = 0.1;
            rc.variant = v;
            rc.seed = seed;
            rc.threads = 1;
            const auto rd = run_radisa(in.data, in.spec, rc);
            for (const auto& r : rd.history.records)
                c.expect(r.primal_value >= d_ref - 1e-9, "radisa F < D at " + where(seed, r.t));
        }
    }
    const double secs = seconds_since(t0);
    c.expect(secs < 30.0, "runtime " + fmt(secs) + " s exceeds 30 s");
    return c.outcome("50 instances, " + std::to_string(c.checks()) + " checks, " + fmt(secs) + " s");
}

Outcome primal_dual_consistency() {
    Checker c;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        for (auto loss : {LossKind::Hinge, LossKind::Logistic}) {
            const auto in = small_instance(100 + seed, loss);
            const auto X = oracle::dense(in.ds);
            D3caConfig dc;
            dc.outer_iters = 15;
            dc.local_passes = 1 + seed % 3;
            dc.seed = seed;
            dc.threads = 1;
            run_d3ca(in.data, in.spec, dc, [&](std::size_t t, const PrimalVector& w, const DualVector& a) {
                const auto maintained = w.flatten();
                const auto rebuilt = primal_from_dual(a, in.data, in.spec).flatten();
                const auto independent = oracle::w_of_alpha(X, a.flatten(), in.spec.lambda);
                const double scale = std::max(1.0, oracle::norm_inf(independent));
                c.expect(oracle::max_abs_diff(maintained, rebuilt) <= 1e-9 * scale, "w != w(alpha) at " + where(seed, t));
                c.expect(oracle::max_abs_diff(maintained, independent) <= 1e-9 * scale,
                         "w != serial w(alpha) at " + where(seed, t));
            });
        }
    }
    return c.outcome("20 instances x 2 losses, " + std::to_string(c.checks()) + " checks");
}

Outcome cocoa_reduction() {
    Checker c;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto base = small_instance(200 + seed, LossKind::Hinge);
        const auto data = partition_dataset(base.ds, base.data.grid.P, 1);
        const std::size_t H = 1 + seed % 3;
        const std::size_t T = 10;
        std::vector<std::pair<std::vector<double>, std::vector<double>>> its;
        D3caConfig dc;
        dc.outer_iters = T;
        dc.local_passes = H;
        dc.seed = seed;
        dc.threads = 1;
        run_d3ca(data, base.spec, dc,
                 [&](std::size_t, const PrimalVector& w, const DualVector& a) { its.emplace_back(a.flatten(), w.flatten()); });
        const auto ref = oracle::cocoa(data, base.spec, T, H, seed);
        c.expect(ref.size() == its.size(), "iterate count differs for seed " + std::to_string(seed));
        for (std::size_t t = 0; t < std::min(ref.size(), its.size()); ++t) {
            const double d = std::max(oracle::max_abs_diff(its[t].first, ref[t].alpha),
                                      oracle::max_abs_diff(its[t].second, ref[t].w));
            worst = std::max(worst, d);
            c.expect(d <= 1e-12, "deviation " + fmt(d) + " at " + where(seed, t + 1));
        }
    }
    return c.outcome("20 instances, max deviation " + fmt(worst));
}

Outcome svrg_reduction() {
    Checker c;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto in = small_instance(300 + seed, LossKind::Logistic);
        const auto data = partition_dataset(in.ds, 1, 1);
        RadisaConfig rc;
        rc.outer_iters = 10;
        rc.batch_size = in.ds.n();
        rc.gamma = 0.1;
        rc.seed = seed;
        rc.threads = 1;
        std::vector<std::vector<double>> its;
        // the merged iterate is the single block's slice when P = Q = 1
        run_radisa(data, in.spec, rc, [&](std::size_t, const SubblockAssignment&, const std::vector<LocalSolution>& s) {
            its.push_back(s.front().values);
        });
        const auto ref = oracle::serial_svrg(in.ds, in.spec, rc.batch_size, rc.gamma, rc.outer_iters, seed);
        c.expect(its.size() == ref.size(), "iterate count differs for seed " + std::to_string(seed));
        for (std::size_t t = 0; t < std::min(its.size(), ref.size()); ++t)
            c.expect(its[t] == ref[t], "trajectory differs bitwise at " + where(seed, t + 1));
        c.expect(run_radisa(data, in.spec, rc).w.flatten() == ref.back(), "final iterate differs for seed " +
                                                                              std::to_string(seed));
    }
    return c.outcome("10 logistic instances, bitwise equal trajectories");
}

Outcome gradient_checks() {
    Checker c;
    std::mt19937_64 gen(55);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int point = 0; point < 100; ++point) {
        const std::size_t n = 5 + point % 20, m = 3 + point % 9;
        const auto ds = oracle::random_dataset(400 + point, n, m, 0.8);
        const auto X = oracle::dense(ds);
        const ProblemSpec spec{n, m, 0.01 + 0.01 * (point % 5), LossKind::Logistic};
        std::vector<double> w(m);
        for (auto& v : w) v = u(gen);
        const double h = 1e-5;
        const auto rel_err = [](const std::vector<double>& a, const std::vector<double>& b) {
            return oracle::max_abs_diff(a, b) / std::max(1e-3, oracle::norm_inf(b));
        };

        // single-observation objective f_j(w.x_j) + lambda |w|^2
        const std::size_t j = static_cast<std::size_t>(point) % n;
        const auto fj = [&](const std::vector<double>& v) {
            return oracle::loss(spec.loss, oracle::dot(X[j], v), ds.y[j]) + spec.lambda * oracle::dot(v, v);
        };
        const auto F = [&](const std::vector<double>& v) { return oracle::primal(X, ds.y, v, spec.lambda, spec.loss); };
        std::vector<double> fd_j(m), fd_F(m);
        for (std::size_t k = 0; k < m; ++k) {
            auto a = w, b = w;
            a[k] += h;
            b[k] -= h;
            fd_j[k] = (fj(a) - fj(b)) / (2.0 * h);
            fd_F[k] = (F(a) - F(b)) / (2.0 * h);
        }
        const auto sg = stochastic_gradient(w, ds.x.row(j), ds.y[j], 0, m, spec);
        const auto data = partition_dataset(ds, 1 + point % 3, 1 + point % 2);
        const auto fg = full_gradient(PrimalVector::from_flat(w, data.grid.col_bounds), data, spec).flatten();
        const double e1 = rel_err(sg, fd_j), e2 = rel_err(fg, fd_F);
        worst = std::max({worst, e1, e2});
        c.expect(e1 < 1e-5, "stochastic gradient error " + fmt(e1) + " at point " + std::to_string(point));
        c.expect(e2 < 1e-5, "full gradient error " + fmt(e2) + " at point " + std::to_string(point));
    }
    return c.outcome("100 points, max relative error " + fmt(worst));
}

Outcome svrg_anchor() {
    Checker c;
    std::mt19937_64 gen(66);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::size_t blocks = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto in = small_instance(500 + seed, seed % 2 ? LossKind::Hinge : LossKind::Logistic);
        std::vector<double> wf(in.ds.m());
        for (auto& v : wf) v = u(gen);
        const auto w = PrimalVector::from_flat(wf, in.data.grid.col_bounds);
        const auto mu = full_gradient(w, in.data, in.spec);
        const auto a = assign_subblocks(in.data.grid, seed, 1);
        for (const auto& blk : in.data.blocks) {
            ++blocks;
            const auto& sub = in.data.grid.sub_bounds[blk.q];
            const auto sb = a.subblock(blk.p, blk.q);
            for (auto [b, e] : {std::pair{sub[sb], sub[sb + 1]}, std::pair{std::size_t{0}, sub.back()}}) {
                const std::vector<double> slice(mu.blocks[blk.q].begin() + b, mu.blocks[blk.q].begin() + e);
                auto rng = rng_stream(seed, {"svrg", 1, blk.p, blk.q});
                const auto j = static_cast<std::size_t>(rng.next_index(blk.rows()));
                const auto dir =
                    svrg_direction(w.blocks[blk.q], w.blocks[blk.q], mu.blocks[blk.q], b, e, blk.x.row(j), blk.label(j),
                                   in.spec);
                c.expect(dir == slice, "direction differs from mu slice for seed " + std::to_string(seed));
            }
        }
    }
    return c.outcome("20 seeds, " + std::to_string(blocks) + " blocks, exact equality");
}

Outcome determinism() {
    Checker c;
    const std::vector<int> threads{1, 2, std::max(default_thread_count(), 8)};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto in = small_instance(600 + seed, LossKind::Hinge);
        in.data = partition_dataset(in.ds, std::min<std::size_t>(3, in.ds.n()), std::min<std::size_t>(2, in.ds.m()));
        std::map<std::string, RunHistory> base;
        for (int th : threads) {
            D3caConfig dc;
            dc.outer_iters = 10;
            dc.seed = seed;
            dc.threads = th;
            const auto d = run_d3ca(in.data, in.spec, dc).history;
            for (auto v : {RadisaVariant::Disjoint, RadisaVariant::Avg}) {
                RadisaConfig rc;
                rc.outer_iters = 10;
                rc.batch_size = 20;
                rc.gamma = 0.1;
                rc.variant = v;
                rc.seed = seed;
                rc.threads = th;
                const auto r = run_radisa(in.data, in.spec, rc).history;
                const std::string key = v == RadisaVariant::Avg ? "radisa-avg" : "radisa";
                if (th == 1)
                    base[key] = r;
                else
                    c.expect(r == base[key], key + " history differs with " + std::to_string(th) + " threads");
            }
            if (th == 1)
                base["d3ca"] = d;
            else
                c.expect(d == base["d3ca"], "d3ca history differs with " + std::to_string(th) + " threads");
        }
    }
    return c.outcome("3 solvers x 5 seeds, threads {1, 2, " + std::to_string(threads.back()) + "}");
}

Outcome partition_properties() {
    Checker c;
    for (auto [P, Q] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {2, 3}, {5, 2}, {7, 4}}) {
        const auto g = make_grid(60, 45, P, Q);
        for (std::size_t t = 1; t <= 200; ++t) {
            const auto a = assign_subblocks(g, 9, t);
            for (std::size_t q = 0; q < Q; ++q) {
                auto p = a.perm[q];
                std::sort(p.begin(), p.end());
                std::vector<std::size_t> id(P);
                for (std::size_t k = 0; k < P; ++k) id[k] = k;
                c.expect(p == id, "assignment is not a bijection at t=" + std::to_string(t));
            }
        }
    }
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto ds = oracle::random_dataset(seed, 11 + seed, 5 + seed % 7, 0.6);
        for (std::size_t P = 1; P <= 4; ++P)
            for (std::size_t Q = 1; Q <= 3; ++Q) {
                const auto back = assemble(partition_dataset(ds, P, Q));
                c.expect(back.x == ds.x && back.y == ds.y, "round trip differs for seed " + std::to_string(seed));
                const auto perm = make_shuffle(ds.n(), ds.m(), seed);
                const auto unshuffled = apply_permutation(assemble(partition_dataset(ds, P, Q, seed)), invert(perm));
                c.expect(unshuffled.x == ds.x && unshuffled.y == ds.y,
                         "shuffled round trip differs for seed " + std::to_string(seed));
            }
    }
    const auto g = make_grid(40, 40, 4, 1);
    std::map<std::vector<std::size_t>, int> counts;
    const int N = 10000;
    for (int t = 1; t <= N; ++t) ++counts[assign_subblocks(g, 2024, static_cast<std::size_t>(t)).perm[0]];
    const double p = 1.0 / 24.0, sd = std::sqrt(N * p * (1 - p));
    c.expect(counts.size() == 24, "only " + std::to_string(counts.size()) + " of 24 permutations seen");
    double worst = 0.0;
    for (const auto& [perm, k] : counts) {
        const double z = std::abs(k - N * p) / sd;
        worst = std::max(worst, z);
        c.expect(z <= 3.0, "permutation count off by " + fmt(z) + " sigma");
    }
    return c.outcome("bijections, exact round trips, uniformity max " + fmt(worst) + " sigma over 10^4 draws");
}

Outcome convergence_regime() {
    const auto t0 = std::chrono::steady_clock::now();
    SyntheticOptions o;
    o.P = 4;
    o.Q = 2;
    o.rows_per_block = 200;
    o.cols_per_block = 300;
    o.seed = 1;
    const auto data = generate_synthetic(o).data;
    const auto ds = assemble(data);
    const ProblemSpec spec{ds.n(), ds.m(), 1e-2, LossKind::Hinge};
    const double f_star = reference_solve(ds, spec).f_star;

    std::string detail = "f*=" + fmt(f_star);
    bool ok = true;
    for (auto s : {SolverKind::D3ca, SolverKind::Radisa, SolverKind::RadisaAvg}) {
        TrainOptions opts;
        opts.solver = s;
        opts.iters = 50;
        opts.seed = 1;
        if (s != SolverKind::D3ca) opts.gamma = tune_gamma(data, spec, opts, {0.1, 0.3, 1.0, 3.0});
        const auto r = train(data, spec, opts);
        const double rel = relative_optimality(r.history.back().primal_value, f_star);
        ok = ok && rel <= 1e-2;
        detail += std::string("; ") + solver_name(s) + " rel_opt@50=" + fmt(rel);
        if (s != SolverKind::D3ca) detail += " (gamma " + fmt(opts.gamma) + ")";
    }
    const double secs = seconds_since(t0);
    detail += "; " + fmt(secs) + " s";
    if (secs >= 120.0) {
        ok = false;
        detail += " exceeds 120 s";
    }
    return {ok ? Status::Pass : Status::Fail, detail};
}

Outcome table_one_counts() {
    Checker c;
    for (auto [P, Q, expect] : std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>{
             {4, 2, 48'000'000}, {5, 3, 90'000'000}, {7, 4, 168'000'000}}) {
        SyntheticOptions o;
        o.P = P;
        o.Q = Q;
        o.rows_per_block = 2000;
        o.cols_per_block = 3000;
        c.expect(o.nnz() == expect, std::to_string(o.nnz()) + " != " + std::to_string(expect));
    }
    return c.outcome("48M / 90M / 168M");
}

Outcome libsvm_ingestion() {
    const char* dir = std::getenv("DDOPT_DATA_DIR");
    if (!dir) return {Status::Skip, "DDOPT_DATA_DIR not set; real-sim and news20 files absent"};
    struct Expect {
        std::vector<std::string> names;
        std::size_t n, m;
        double sparsity_percent;
    };
    const std::vector<Expect> files{{{"real-sim", "real-sim.libsvm", "realsim"}, 72309, 20958, 0.240},
                                    {{"news20.binary", "news20", "news20.libsvm"}, 19996, 1355191, 0.030}};
    Checker c;
    std::string detail;
    for (const auto& f : files) {
        std::string path;
        for (const auto& name : f.names)
            if (std::filesystem::exists(std::filesystem::path(dir) / name)) {
                path = (std::filesystem::path(dir) / name).string();
                break;
            }
        if (path.empty()) return {Status::Skip, f.names.front() + " not found in " + std::string(dir)};
        const auto ds = read_libsvm(path);
        const double sp = 100.0 * sparsity(ds);
        c.expect(ds.n() == f.n && ds.m() == f.m, f.names.front() + " is " + std::to_string(ds.n()) + "x" +
                                                     std::to_string(ds.m()));
        c.expect(std::abs(sp - f.sparsity_percent) <= 0.001, f.names.front() + " sparsity " + fmt(sp) + "%");
        detail += f.names.front() + " " + std::to_string(ds.n()) + "x" + std::to_string(ds.m()) + " " + fmt(sp) + "% ";
    }
    return c.outcome(detail);
}

Outcome strong_scaling_smoke() {
    ExperimentConfig cfg;
    cfg.name = "strong-smoke";
    cfg.kind = ExperimentKind::Strong;
    cfg.partitions = {{2, 1}, {1, 2}, {2, 2}, {4, 2}};
    cfg.rows = 4000;
    cfg.cols = 2000;
    cfg.iters = 100;
    cfg.target = 0.01;
    cfg.gamma_grid = {0.001, 0.003, 0.01, 0.03};
    cfg.output = "acceptance_strong.csv";
    run_experiment(cfg);

    std::ifstream in(cfg.output);
    const auto rows = read_csv(in);
    Checker c;
    std::map<std::string, CsvRow> last;
    for (const auto& r : rows) {
        const std::string key = r.solver + " (" + std::to_string(r.P) + "," + std::to_string(r.Q) + ")";
        c.expect(r.reduce_ops == 2 * r.iter, key + " has " + std::to_string(r.reduce_ops) + " reductions at iter " +
                                                 std::to_string(r.iter));
        if (r.solver == "d3ca")
            c.expect(r.scalars_communicated == r.iter * ((r.Q - 1) * 4000 + (r.P - 1) * 2000),
                     key + " scalar count off at iter " + std::to_string(r.iter));
        last[key] = r;
    }
    c.expect(last.size() == 12, std::to_string(last.size()) + " of 12 cells in the CSV");
    std::string reached, missed;
    for (const auto& [key, r] : last) {
        c.expect(r.rel_opt <= 0.01, key + " rel_opt " + fmt(r.rel_opt) + " after " + std::to_string(r.iter));
        (r.rel_opt <= 0.01 ? reached : missed) += " " + key + "=" + fmt(r.rel_opt);
    }
    auto out = c.outcome("all 12 cells reach 1%, 2 reductions per iteration");
    if (out.status == Status::Fail) out.detail += "; final rel_opt:" + missed + (reached.empty() ? "" : "; reached:" + reached);
    return out;
}

Outcome weak_scaling_formula() {
    ExperimentConfig cfg;
    cfg.name = "weak-formula";
    cfg.kind = ExperimentKind::Weak;
    cfg.solvers = {SolverKind::D3ca, SolverKind::Radisa};
    cfg.partitions = {{1, 2}, {2, 2}, {4, 2}};
    cfg.rows_per_block = 40;
    cfg.cols_per_block = 10;
    cfg.densities = {0.05, 1.0};
    cfg.iters = 7;
    cfg.target = 0.05;
    cfg.gamma = 0.1;
    cfg.threads = 1;
    // injected clock: the k-th reading advances by steps[k mod 13]
    const std::vector<double> steps{0.125, 0.5, 0.375, 2.0, 0.25, 1.5, 0.75, 1.0, 3.0, 0.625, 1.25, 0.875, 4.0};
    std::size_t calls = 0;
    double now = 0.0;
    const Clock clock = [&] { return now += steps[calls++ % steps.size()]; };
    const auto report = run_experiment(cfg, clock);

    // Replay: a run reads the clock once at its start and once per row.
    struct Run {
        std::string solver;
        std::size_t P, Q;
        double seconds;
    };
    std::vector<Run> runs;
    std::size_t replay_calls = 0;
    double replay_now = 0.0;
    const auto tick = [&] { return replay_now += steps[replay_calls++ % steps.size()]; };
    double start = 0.0, last = 0.0;
    for (std::size_t k = 0; k < report.rows.size(); ++k) {
        const auto& r = report.rows[k];
        if (r.iter == 1) start = tick();
        last = tick();
        if (k + 1 == report.rows.size() || report.rows[k + 1].iter == 1) runs.push_back({r.solver, r.P, r.Q, last - start});
    }

    Checker c;
    c.expect(replay_calls == calls, "clock read " + std::to_string(calls) + " times, replay expects " +
                                        std::to_string(replay_calls));
    c.expect(runs.size() == report.efficiency.size(), "efficiency row count differs from run count");
    c.expect(report.efficiency.size() == 12, std::to_string(report.efficiency.size()) + " efficiency rows, want 12");
    for (std::size_t k = 0; k < std::min(runs.size(), report.efficiency.size()); ++k) {
        const auto& e = report.efficiency[k];
        // six runs per density: three partitions times two solvers
        const auto base = std::find_if(runs.begin(), runs.end(), [&](const Run& b) {
            return b.P == 1 && b.solver == e.solver && b.Q == e.Q &&
                   (&b - runs.data()) / 6 == static_cast<std::ptrdiff_t>(k) / 6;
        });
        c.expect(base != runs.end(), "no single-partition run for efficiency row " + std::to_string(k));
        if (base == runs.end()) continue;
        const double expect = base->seconds / runs[k].seconds * 100.0;
        c.expect(e.P == runs[k].P && e.solver == runs[k].solver, "efficiency row " + std::to_string(k) + " out of order");
        c.expect(e.t_1 == base->seconds && e.t_P == runs[k].seconds,
                 "timings of row " + std::to_string(k) + " differ from the injected clock");
        c.expect(e.efficiency == expect, "efficiency " + fmt(e.efficiency) + " != " + fmt(expect));
    }
    std::ostringstream csv;
    write_efficiency_csv(csv, report.efficiency);
    c.expect(csv.str().find("efficiency_percent") != std::string::npos, "efficiency CSV header missing");
    return c.outcome(std::to_string(report.efficiency.size()) + " rows match (t1/tP)x100 exactly");
}

}  // namespace

int main(int argc, char** argv) {
    // optional criterion ids select a subset
    std::set<int> only;
    for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "duality suite", duality_suite},
        {2, "primal-dual consistency", primal_dual_consistency},
        {3, "CoCoA reduction", cocoa_reduction},
        {4, "serial SVRG reduction", svrg_reduction},
        {5, "gradient checks", gradient_checks},
        {6, "SVRG anchor", svrg_anchor},
        {7, "determinism", determinism},
        {8, "partition properties", partition_properties},
        {9, "convergence regime", convergence_regime},
        {10, "nonzero counts", table_one_counts},
        {11, "LIBSVM ingestion", libsvm_ingestion},
        {12, "strong-scaling smoke test", strong_scaling_smoke},
        {13, "weak-scaling efficiency formula", weak_scaling_formula},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        if (!only.empty() && !only.count(cr.id)) continue;
        Outcome o;
        try {
            o = cr.run();
        } catch (const std::exception& e) {
            o = {Status::Fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
        failed += o.status == Status::Fail;
        std::cout << tag << "  " << cr.id << ". " << cr.name << ": " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
