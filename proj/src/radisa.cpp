#include "ddopt/radisa.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "ddopt/losses.hpp"

namespace ddopt {

void RadisaConfig::validate() const {
    if (batch_size < 1) throw Error(Errc::InvalidArgument, "RADiSA batch size L must be at least 1");
    if (!(gamma > 0.0)) throw Error(Errc::InvalidArgument, "RADiSA gamma must be positive");
    if (outer_iters < 1) throw Error(Errc::InvalidArgument, "RADiSA needs at least one outer iteration");
    if (gradient_lag < 1) throw Error(Errc::InvalidArgument, "gradient lag must be at least 1");
}

double step_size(double gamma, std::size_t t) {
    return gamma / (1.0 + std::sqrt(static_cast<double>(t) - 1.0));
}

PrimalVector full_gradient(const PrimalVector& w, const PartitionedData& data, const ProblemSpec& spec,
                           ClusterSim& sim) {
    const auto& g = data.grid;
    const auto margins = row_margins(w, data, sim);
    auto partial = sim.run_round([&](std::size_t k) {
        const auto& blk = data.blocks[k];
        std::vector<double> v(blk.cols(), 0.0);
        const auto& z = margins[blk.p];
        for (std::size_t i = 0; i < blk.rows(); ++i) {
            const double d = loss_eval(spec.loss, z[i], blk.label(i)).derivative;
            if (d != 0.0) blk.x.row(i).axpy(d, v);
        }
        return v;
    });
    const double nd = static_cast<double>(data.n());
    const double two_lambda = 2.0 * spec.lambda;
    PrimalVector mu;
    mu.blocks.resize(g.Q);
    for (std::size_t q = 0; q < g.Q; ++q) {
        std::vector<std::vector<double>> group;
        for (std::size_t p = 0; p < g.P; ++p) group.push_back(std::move(partial[g.worker_id(p, q)]));
        auto sum = sim.reduce_sum(std::move(group));
        for (std::size_t c = 0; c < sum.size(); ++c) sum[c] = sum[c] / nd + two_lambda * w.blocks[q][c];
        mu.blocks[q] = std::move(sum);
    }
    return mu;
}

PrimalVector full_gradient(const PrimalVector& w, const PartitionedData& data, const ProblemSpec& spec) {
    ClusterSim sim(data.grid.workers(), 1);
    return full_gradient(w, data, spec, sim);
}

namespace {

void direction_into(std::span<double> dir, std::span<const double> w, std::span<const double> wt,
                    std::span<const double> mu, std::size_t begin, std::size_t end, const RowView& row, double y,
                    const ProblemSpec& spec) {
    const double d = loss_eval(spec.loss, row.dot(w), y).derivative;
    const double dt = loss_eval(spec.loss, row.dot(wt), y).derivative;
    const double two_lambda = 2.0 * spec.lambda;
    auto k = static_cast<std::size_t>(std::lower_bound(row.index.begin(), row.index.end(), begin) - row.index.begin());
    for (std::size_t c = begin; c < end; ++c) {
        double xk = 0.0;
        if (k < row.nnz() && row.index[k] == c) xk = row.value[k++];
        dir[c - begin] = ((d * xk + two_lambda * w[c]) - (dt * xk + two_lambda * wt[c])) + mu[c];
    }
}

void check_block_args(std::span<const double> w, std::span<const double> wt, std::span<const double> mu,
                      std::size_t begin, std::size_t end) {
    if (wt.size() != w.size() || mu.size() != w.size())
        throw Error(Errc::DimensionMismatch, "SVRG block vectors differ in length");
    if (begin > end || end > w.size()) throw Error(Errc::IndexOutOfRange, "SVRG slice outside the column block");
}

}  // namespace

std::vector<double> svrg_direction(std::span<const double> w_block, std::span<const double> w_tilde_block,
                                   std::span<const double> mu_block, std::size_t begin, std::size_t end,
                                   const RowView& row, double y, const ProblemSpec& spec) {
    check_block_args(w_block, w_tilde_block, mu_block, begin, end);
    std::vector<double> dir(end - begin);
    direction_into(dir, w_block, w_tilde_block, mu_block, begin, end, row, y, spec);
    return dir;
}

std::vector<double> svrg_inner(std::span<const double> w_block, std::span<const double> w_tilde_block,
                               std::span<const double> mu_block, std::size_t begin, std::size_t end,
                               const DataBlock& block, const ProblemSpec& spec, std::size_t L, double eta,
                               RngStream rng) {
    check_block_args(w_block, w_tilde_block, mu_block, begin, end);
    if (w_block.size() != block.cols()) throw Error(Errc::DimensionMismatch, "SVRG block does not match data block");
    std::vector<double> w(w_block.begin(), w_block.end());
    std::vector<double> dir(end - begin);
    const std::size_t n_p = block.rows();
    for (std::size_t s = 0; s < L && n_p > 0; ++s) {
        const auto j = static_cast<std::size_t>(rng.next_index(n_p));
        direction_into(dir, w, w_tilde_block, mu_block, begin, end, block.x.row(j), block.label(j), spec);
        for (std::size_t c = begin; c < end; ++c) w[c] -= eta * dir[c - begin];
    }
    return {w.begin() + static_cast<std::ptrdiff_t>(begin), w.begin() + static_cast<std::ptrdiff_t>(end)};
}

PrimalVector merge_solutions(std::vector<LocalSolution> slices, const PartitionGrid& grid, RadisaVariant variant,
                             ClusterSim& sim) {
    std::vector<std::vector<LocalSolution>> by_q(grid.Q);
    for (auto& s : slices) {
        if (s.q >= grid.Q || s.p >= grid.P || s.begin > s.end || s.end > grid.cols_in(s.q) ||
            s.values.size() != s.end - s.begin)
            throw Error(Errc::DimensionMismatch, "local solution does not fit its column block");
        by_q[s.q].push_back(std::move(s));
    }

    PrimalVector w;
    w.blocks.resize(grid.Q);
    for (std::size_t q = 0; q < grid.Q; ++q) {
        auto& pieces = by_q[q];
        std::stable_sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) { return a.p < b.p; });
        if (pieces.size() != grid.P)
            throw Error(Errc::MissingSlice, "column block " + std::to_string(q) + " has " +
                                                std::to_string(pieces.size()) + " solutions, expected " +
                                                std::to_string(grid.P), {std::int64_t(q)});
        for (std::size_t k = 0; k < pieces.size(); ++k)
            if (pieces[k].p != k)
                throw Error(Errc::MissingSlice, "column block " + std::to_string(q) + " lacks a solution from row partition " +
                                                    std::to_string(k), {std::int64_t(q)});

        if (variant == RadisaVariant::Avg) {
            std::vector<std::vector<double>> group;
            for (auto& s : pieces) {
                if (s.begin != 0 || s.end != grid.cols_in(q))
                    throw Error(Errc::MissingSlice, "averaging needs whole column-block solutions", {std::int64_t(q)});
                group.push_back(std::move(s.values));
            }
            auto sum = sim.reduce_sum(std::move(group));
            const double inv = 1.0 / static_cast<double>(grid.P);
            for (double& v : sum) v *= inv;
            w.blocks[q] = std::move(sum);
            continue;
        }

        std::vector<std::vector<LocalSolution>> group;
        for (auto& s : pieces) group.push_back({std::move(s)});
        auto gathered = sim.aggregate(
            std::move(group),
            [](std::vector<LocalSolution> acc, const std::vector<LocalSolution>& rhs) {
                acc.insert(acc.end(), rhs.begin(), rhs.end());
                return acc;
            },
            [](const std::vector<LocalSolution>& v) {
                std::size_t n = 0;
                for (const auto& s : v) n += s.values.size();
                return n;
            });
        std::sort(gathered.begin(), gathered.end(),
                  [](const auto& a, const auto& b) { return std::tie(a.begin, a.end) < std::tie(b.begin, b.end); });
        const auto& sub = grid.sub_bounds[q];
        for (std::size_t k = 0; k < grid.P; ++k)
            if (gathered[k].begin != sub[k] || gathered[k].end != sub[k + 1])
                throw Error(Errc::MissingSlice, "sub-block " + std::to_string(k) + " of column block " +
                                                    std::to_string(q) + " is not covered exactly once",
                            {std::int64_t(q), std::int64_t(k)});
        auto& out = w.blocks[q];
        out.reserve(grid.cols_in(q));
        for (const auto& s : gathered) out.insert(out.end(), s.values.begin(), s.values.end());
    }
    return w;
}

PrimalVector merge_solutions(std::vector<LocalSolution> slices, const PartitionGrid& grid, RadisaVariant variant) {
    ClusterSim sim(grid.workers(), 1);
    return merge_solutions(std::move(slices), grid, variant, sim);
}

RadisaResult run_radisa(const PartitionedData& data, const ProblemSpec& spec, const RadisaConfig& config,
                        const RadisaObserver& observer) {
    spec.validate();
    config.validate();
    validate_dataset(data.blocks, data.grid);
    const auto& g = data.grid;
    if (spec.n != g.n() || spec.m != g.m()) throw Error(Errc::DimensionMismatch, "problem spec does not match data");

    ClusterSim sim(g.workers(), config.threads);
    ClusterSim monitor(g.workers(), config.threads);

    RadisaResult res;
    res.w = PrimalVector::zeros(g.col_bounds);
    PrimalVector anchor = res.w;
    PrimalVector mu;

    for (std::size_t t = 1; t <= config.outer_iters; ++t) {
        if ((t - 1) % config.gradient_lag == 0) {
            sim.begin_phase();
            mu = full_gradient(res.w, data, spec, sim);
            anchor = res.w;
        }
        const double eta = step_size(config.gamma, t);
        SubblockAssignment assignment;
        if (config.variant == RadisaVariant::Disjoint) assignment = assign_subblocks(g, config.seed, t);

        auto solutions = sim.run_round([&](std::size_t k) {
            const auto& blk = data.blocks[k];
            std::size_t begin = 0, end = blk.cols();
            if (config.variant == RadisaVariant::Disjoint) {
                const auto s = assignment.subblock(blk.p, blk.q);
                begin = g.sub_bounds[blk.q][s];
                end = g.sub_bounds[blk.q][s + 1];
            }
            auto values = svrg_inner(res.w.blocks[blk.q], anchor.blocks[blk.q], mu.blocks[blk.q], begin, end, blk,
                                     spec, config.batch_size, eta, rng_stream(config.seed, {"svrg", t, blk.p, blk.q}));
            return LocalSolution{blk.p, blk.q, begin, end, std::move(values)};
        });
        if (observer) observer(t, assignment, solutions);

        sim.begin_phase();
        res.w = merge_solutions(std::move(solutions), g, config.variant, sim);

        IterationRecord rec;
        rec.t = t;
        rec.primal_value = primal_objective(res.w, data, spec, monitor);
        if (config.f_star) rec.rel_opt = (rec.primal_value - *config.f_star) / *config.f_star;
        rec.reduce_ops = sim.counters().phases;
        rec.elements_communicated = sim.counters().scalars;
        res.history.push(rec);
        if (config.on_record) config.on_record(rec);
        if (config.target && rec.rel_opt && *rec.rel_opt <= *config.target) break;
    }
    res.counters = sim.counters();
    return res;
}

}  // namespace ddopt
