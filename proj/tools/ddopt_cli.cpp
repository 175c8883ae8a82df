#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <limits>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "ddopt/data_io.hpp"
#include "ddopt/harness.hpp"
#include "ddopt/losses.hpp"

using namespace ddopt;

namespace {

struct DataArgs {
    std::string path;
    std::size_t rows_per_block = 200, cols_per_block = 300;
    double density = 1.0;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> shuffle_seed;

    void add(CLI::App* app) {
        app->add_option("--data", path, "LIBSVM or GOPT1 cache file (default: generate synthetic data)");
        app->add_option("--rows-per-block", rows_per_block, "synthetic rows per row partition");
        app->add_option("--cols-per-block", cols_per_block, "synthetic columns per column partition");
        app->add_option("--density", density, "synthetic fraction of nonzeros per row")->check(CLI::Range(0.0, 1.0));
        app->add_option("--data-seed", seed, "synthetic data seed");
        app->add_option("--shuffle-seed", shuffle_seed, "shuffle rows and columns before tiling");
    }

    Dataset load(std::size_t P, std::size_t Q) const {
        if (!path.empty()) return is_cache_file(path) ? assemble(read_cache(path)) : read_libsvm(path);
        SyntheticOptions o;
        o.P = P;
        o.Q = Q;
        o.rows_per_block = rows_per_block;
        o.cols_per_block = cols_per_block;
        o.density = density;
        o.seed = seed;
        return assemble(generate_synthetic(o).data);
    }
};

std::vector<CsvRow> to_rows(const std::string& solver, std::size_t P, std::size_t Q, double lambda,
                            const TrainResult& r, std::optional<double> f_star) {
    std::vector<CsvRow> rows;
    for (std::size_t k = 0; k < r.history.size(); ++k) {
        const auto& rec = r.history.records[k];
        CsvRow row;
        row.solver = solver;
        row.P = P;
        row.Q = Q;
        row.lambda = lambda;
        row.iter = rec.t;
        row.rel_opt = rec.rel_opt.value_or(std::numeric_limits<double>::quiet_NaN());
        row.reduce_ops = rec.reduce_ops;
        row.scalars_communicated = rec.elements_communicated;
        row.wall_seconds = r.wall_seconds[k];
        row.primal_value = rec.primal_value;
        row.f_star = f_star.value_or(std::numeric_limits<double>::quiet_NaN());
        rows.push_back(row);
    }
    return rows;
}

std::vector<CsvRow> read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
    return read_csv(in);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Doubly distributed optimization of linear models (D3CA, RADiSA, RADiSA-avg)"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "generate a synthetic dataset into a cache file");
    SyntheticOptions gopt;
    std::string gen_out, gen_libsvm;
    bool no_standardize = false;
    gen->add_option("--p", gopt.P, "row partitions")->check(CLI::PositiveNumber);
    gen->add_option("--q", gopt.Q, "column partitions")->check(CLI::PositiveNumber);
    gen->add_option("--rows-per-block", gopt.rows_per_block)->required();
    gen->add_option("--cols-per-block", gopt.cols_per_block)->required();
    gen->add_option("--density", gopt.density, "fraction of nonzeros per row");
    gen->add_option("--seed", gopt.seed);
    gen->add_option("--flip-prob", gopt.flip_prob);
    gen->add_flag("--no-standardize", no_standardize);
    gen->add_option("--out", gen_out, "GOPT1 cache output")->required();
    gen->add_option("--libsvm", gen_libsvm, "also write LIBSVM text");

    // train
    auto* trn = app.add_subcommand("train", "run one solver and print its trajectory as CSV");
    DataArgs tdata;
    tdata.add(trn);
    std::string solver = "d3ca", loss = "hinge", fstar_arg, train_out;
    std::size_t P = 4, Q = 2;
    double lambda = 1e-2;
    TrainOptions topt;
    std::vector<double> gamma_grid;
    std::optional<double> target;
    trn->add_option("--solver", solver)->check(CLI::IsMember({"d3ca", "radisa", "radisa-avg"}));
    trn->add_option("--p", P)->check(CLI::PositiveNumber);
    trn->add_option("--q", Q)->check(CLI::PositiveNumber);
    trn->add_option("--lambda", lambda)->check(CLI::PositiveNumber);
    trn->add_option("--loss", loss)->check(CLI::IsMember({"hinge", "logistic"}));
    trn->add_option("--iters", topt.iters);
    trn->add_option("--batch", topt.batch, "RADiSA inner steps L (default n/P)");
    trn->add_option("--gamma", topt.gamma, "RADiSA step size constant");
    trn->add_option("--gamma-grid", gamma_grid, "pick the best gamma from this list")->delimiter(',');
    trn->add_option("--local-passes", topt.local_passes, "D3CA passes H");
    trn->add_flag("--beta-stepsize", topt.beta_stepsize);
    trn->add_option("--gradient-lag", topt.gradient_lag);
    trn->add_option("--seed", topt.seed);
    trn->add_option("--threads", topt.threads);
    trn->add_option("--fstar", fstar_arg, "reference optimum: a value or 'auto'");
    trn->add_option("--target", target, "stop at this relative optimality");
    trn->add_option("--output", train_out, "CSV file (default stdout)");

    // reference
    auto* ref = app.add_subcommand("reference", "compute f* with a duality-gap certificate");
    DataArgs rdata;
    rdata.add(ref);
    double rlambda = 1e-2, gap_tol = 1e-8;
    std::string rloss = "hinge";
    std::size_t rP = 1, rQ = 1;
    ref->add_option("--lambda", rlambda)->check(CLI::PositiveNumber);
    ref->add_option("--loss", rloss)->check(CLI::IsMember({"hinge", "logistic"}));
    ref->add_option("--gap-tol", gap_tol)->check(CLI::PositiveNumber);
    ref->add_option("--p", rP, "grid used to size synthetic data")->check(CLI::PositiveNumber);
    ref->add_option("--q", rQ, "grid used to size synthetic data")->check(CLI::PositiveNumber);

    // experiment
    auto* exp = app.add_subcommand("experiment", "run config-driven sweeps");
    std::string config_path;
    std::vector<std::string> only;
    exp->add_option("config", config_path)->required()->check(CLI::ExistingFile);
    exp->add_option("--only", only, "run only these sections");

    // report
    auto* rep = app.add_subcommand("report", "summarize trajectory CSVs");
    std::vector<std::string> csvs;
    std::vector<std::string> baselines;
    double threshold = 0.01;
    rep->add_option("csv", csvs)->required()->check(CLI::ExistingFile);
    rep->add_option("--baseline", baselines, "external baseline curves in the same CSV schema")
        ->check(CLI::ExistingFile);
    rep->add_option("--threshold", threshold, "relative optimality threshold");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            gopt.standardize = !no_standardize;
            const auto data = generate_synthetic(gopt);
            write_cache(gen_out, data.data, gopt.density, gopt.seed);
            if (!gen_libsvm.empty()) {
                std::ofstream out(gen_libsvm);
                write_libsvm(assemble(data.data), out);
            }
            std::cout << "wrote " << gen_out << ": " << gopt.n() << " x " << gopt.m() << ", " << data.data.nnz()
                      << " nonzeros, " << data.flipped << " flipped labels\n";
        } else if (*trn) {
            const auto ds = tdata.load(P, Q);
            const auto data = partition_dataset(ds, P, Q, tdata.shuffle_seed);
            const ProblemSpec spec{ds.n(), ds.m(), lambda, parse_loss(loss)};
            topt.solver = parse_solver(solver);
            if (fstar_arg == "auto")
                topt.f_star = reference_solve(ds, spec).f_star;
            else if (!fstar_arg.empty())
                topt.f_star = std::stod(fstar_arg);
            topt.target = target;
            if (!gamma_grid.empty() && topt.solver != SolverKind::D3ca) {
                topt.gamma = tune_gamma(data, spec, topt, gamma_grid);
                std::cerr << "gamma " << topt.gamma << '\n';
            }
            const auto r = train(data, spec, topt);
            const auto rows = to_rows(solver, P, Q, lambda, r, topt.f_star);
            if (train_out.empty()) {
                write_csv(std::cout, rows);
            } else {
                std::ofstream out(train_out);
                if (!out) throw Error(Errc::IoError, "cannot write '" + train_out + "'");
                write_csv(out, rows);
            }
        } else if (*ref) {
            const auto ds = rdata.load(rP, rQ);
            ReferenceOptions ro;
            ro.gap_tol = gap_tol;
            const auto r = reference_solve(ds, {ds.n(), ds.m(), rlambda, parse_loss(rloss)}, ro);
            std::cout.precision(17);
            std::cout << "f_star " << r.f_star << "\ndual " << r.dual_value << "\ngap " << r.gap << "\nepochs "
                      << r.epochs << '\n';
        } else if (*exp) {
            for (const auto& cfg : load_experiments(config_path)) {
                if (!only.empty() && std::find(only.begin(), only.end(), cfg.name) == only.end()) continue;
                std::cerr << "[" << cfg.name << "] running\n";
                const auto report = run_experiment(cfg);
                std::cout << cfg.name << ": " << report.rows.size() << " rows";
                if (!cfg.output.empty()) std::cout << " -> " << cfg.output;
                if (!report.efficiency.empty()) {
                    std::cout << ", " << report.efficiency.size() << " efficiency rows";
                    if (!cfg.efficiency_output.empty()) std::cout << " -> " << cfg.efficiency_output;
                }
                std::cout << '\n';
            }
        } else if (*rep) {
            std::vector<CsvRow> rows;
            for (const auto& p : csvs) {
                auto r = read_csv_file(p);
                rows.insert(rows.end(), r.begin(), r.end());
            }
            print_summary(std::cout, summarize(rows, threshold), threshold);
            for (const auto& p : baselines) {
                std::cout << "\nbaseline " << p << '\n';
                print_summary(std::cout, summarize(read_csv_file(p), threshold), threshold);
            }
        }
    } catch (const Error& e) {
        std::cerr << "error (" << errc_name(e.code()) << "): " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
