#include "ddopt/d3ca.hpp"

#include "ddopt/losses.hpp"

namespace ddopt {

void D3caConfig::validate() const {
    if (outer_iters < 1) throw Error(Errc::InvalidArgument, "D3CA needs at least one outer iteration");
    if (local_passes < 1) throw Error(Errc::InvalidArgument, "D3CA needs at least one local pass");
}

std::vector<double> local_sdca(std::span<const double> alpha_p, std::span<const double> w_q, const DataBlock& block,
                               const ProblemSpec& spec, std::size_t Q, std::size_t passes, std::size_t t,
                               bool use_beta, RngStream rng) {
    const std::size_t n_p = block.rows();
    if (alpha_p.size() != n_p || w_q.size() != block.cols())
        throw Error(Errc::DimensionMismatch, "local_sdca inputs do not match the block");
    std::vector<double> alpha(alpha_p.begin(), alpha_p.end());
    std::vector<double> w(w_q.begin(), w_q.end());
    std::vector<double> delta(n_p, 0.0);
    if (n_p == 0 || passes == 0) return delta;

    const double sigma_n = spec.sigma() * static_cast<double>(spec.n);
    const double scale = 1.0 / static_cast<double>(Q);
    const double beta = spec.lambda / static_cast<double>(t);
    const std::size_t steps = passes * n_p;
    for (std::size_t h = 0; h < steps; ++h) {
        const auto i = static_cast<std::size_t>(rng.next_index(n_p));
        const auto row = block.x.row(i);
        const double denom = use_beta ? beta : row.squared_norm();
        const double y = block.label(i);
        const double da = denom > 0.0 ? sdca_step(spec.loss, alpha[i], row.dot(w), y, sigma_n, denom, scale)
                                      : conjugate_maximizer(spec.loss, y) - alpha[i];
        if (da == 0.0) continue;
        alpha[i] += da;
        delta[i] += da;
        row.axpy(da / sigma_n, w);
    }
    return delta;
}

D3caResult run_d3ca(const PartitionedData& data, const ProblemSpec& spec, const D3caConfig& config,
                    const D3caObserver& observer) {
    spec.validate();
    config.validate();
    validate_dataset(data.blocks, data.grid);
    const auto& g = data.grid;
    if (spec.n != g.n() || spec.m != g.m()) throw Error(Errc::DimensionMismatch, "problem spec does not match data");

    ClusterSim sim(g.workers(), config.threads);
    ClusterSim monitor(g.workers(), config.threads);

    D3caResult res;
    res.alpha = DualVector::zeros(g.row_bounds);
    res.w = PrimalVector::zeros(g.col_bounds);
    const double factor = config.averaging == DualAveraging::AllWorkers ? 1.0 / static_cast<double>(g.workers())
                                                                        : 1.0 / static_cast<double>(g.Q);

    for (std::size_t t = 1; t <= config.outer_iters; ++t) {
        auto deltas = sim.run_round([&](std::size_t k) {
            const auto& blk = data.blocks[k];
            return local_sdca(res.alpha.blocks[blk.p], res.w.blocks[blk.q], blk, spec, g.Q, config.local_passes, t,
                              config.use_beta_stepsize, rng_stream(config.seed, {"sdca", t, blk.p, blk.q}));
        });

        // Dual averaging over the Q blocks sharing alpha_[p,.].
        sim.begin_phase();
        for (std::size_t p = 0; p < g.P; ++p) {
            std::vector<std::vector<double>> group;
            for (std::size_t q = 0; q < g.Q; ++q) group.push_back(std::move(deltas[g.worker_id(p, q)]));
            const auto sum = sim.reduce_sum(std::move(group));
            auto& a = res.alpha.blocks[p];
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += factor * sum[i];
        }
        check_feasible(res.alpha, data);

        // Primal recovery from the updated duals.
        sim.begin_phase();
        res.w = primal_from_dual(res.alpha, data, spec, sim);

        IterationRecord rec;
        rec.t = t;
        rec.primal_value = primal_objective(res.w, data, spec, monitor);
        rec.dual_value = dual_objective(res.alpha, data, spec, monitor);
        if (config.f_star) rec.rel_opt = (rec.primal_value - *config.f_star) / *config.f_star;
        rec.reduce_ops = sim.counters().phases;
        rec.elements_communicated = sim.counters().scalars;
        res.history.push(rec);
        if (observer) observer(t, res.w, res.alpha);
        if (config.on_record) config.on_record(rec);
        if (config.target && rec.rel_opt && *rec.rel_opt <= *config.target) break;
    }
    res.counters = sim.counters();
    return res;
}

}  // namespace ddopt
