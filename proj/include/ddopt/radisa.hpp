#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ddopt/core.hpp"
#include "ddopt/engine.hpp"
#include "ddopt/partitioner.hpp"
#include "ddopt/rng.hpp"

namespace ddopt {

enum class RadisaVariant {
    Disjoint,  // each row partition updates one sub-block; results are concatenated
    Avg,       // every block updates its whole column block; results are averaged over p
};

struct RadisaConfig {
    std::size_t batch_size = 1;  // L: inner SVRG steps per block per outer iteration
    double gamma = 1.0;          // eta_t = gamma / (1 + sqrt(t - 1))
    std::size_t outer_iters = 50;
    RadisaVariant variant = RadisaVariant::Disjoint;
    std::uint64_t seed = 1;
    std::size_t gradient_lag = 1;  // recompute the full gradient every k outer iterations
    int threads = 0;
    std::optional<double> f_star;
    std::optional<double> target;  // stop once rel_opt <= target (needs f_star)
    std::function<void(const IterationRecord&)> on_record;

    void validate() const;
};

double step_size(double gamma, std::size_t t);

// A locally optimized piece of column block q: coordinates [begin, end) of
// w_[.,q], produced by row partition p.
struct LocalSolution {
    std::size_t p = 0;
    std::size_t q = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::vector<double> values;
};

struct RadisaResult {
    PrimalVector w;
    RunHistory history;
    CommCounters counters;
};

// Called after the inner loops of outer iteration t, before merging.
using RadisaObserver =
    std::function<void(std::size_t t, const SubblockAssignment&, const std::vector<LocalSolution>&)>;

// mu = (1/n) sum_i f_i'(w^T x_i) x_i + 2 lambda w. Margins are assembled by a
// row reduction, column-slice contributions by a column reduction.
PrimalVector full_gradient(const PrimalVector& w, const PartitionedData& data, const ProblemSpec& spec,
                           ClusterSim& sim);
PrimalVector full_gradient(const PrimalVector& w, const PartitionedData& data, const ProblemSpec& spec);

// One variance-reduced direction on coordinates [begin, end) for row `row`:
//   (grad_j(w) - grad_j(w_tilde)) + mu
// where grad_j includes 2*lambda*w and both margins use only the block's columns.
std::vector<double> svrg_direction(std::span<const double> w_block, std::span<const double> w_tilde_block,
                                   std::span<const double> mu_block, std::size_t begin, std::size_t end,
                                   const RowView& row, double y, const ProblemSpec& spec);

// L SVRG steps on coordinates [begin, end) of column block w_block (the
// remaining coordinates stay fixed), sampling rows of `block` uniformly with
// replacement. Returns the updated coordinates.
std::vector<double> svrg_inner(std::span<const double> w_block, std::span<const double> w_tilde_block,
                               std::span<const double> mu_block, std::size_t begin, std::size_t end,
                               const DataBlock& block, const ProblemSpec& spec, std::size_t L, double eta,
                               RngStream rng);

// Disjoint: places each sub-block slice of the iteration's assignment (one
// per (q, sub-block), else MissingSlice). Avg: averages the P whole-block
// solutions of every column block.
PrimalVector merge_solutions(std::vector<LocalSolution> slices, const PartitionGrid& grid, RadisaVariant variant,
                             ClusterSim& sim);
PrimalVector merge_solutions(std::vector<LocalSolution> slices, const PartitionGrid& grid, RadisaVariant variant);

RadisaResult run_radisa(const PartitionedData& data, const ProblemSpec& spec, const RadisaConfig& config,
                        const RadisaObserver& observer = {});

}  // namespace ddopt
