#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ddopt/core.hpp"
#include "ddopt/engine.hpp"
#include "ddopt/rng.hpp"

namespace ddopt {

// Weight applied to the summed block updates of a row partition.
enum class DualAveraging {
    AllWorkers,    // 1 / (P*Q)
    ColumnBlocks,  // 1 / Q
};

struct D3caConfig {
    std::size_t outer_iters = 50;   // T
    std::size_t local_passes = 1;   // H: local SDCA passes over n_p per outer iteration
    bool use_beta_stepsize = false;  // denominator beta = lambda / t instead of ||x_i||^2
    std::uint64_t seed = 1;
    DualAveraging averaging = DualAveraging::AllWorkers;
    int threads = 0;  // 0: default_thread_count()
    std::optional<double> f_star;
    std::optional<double> target;  // stop once rel_opt <= target (needs f_star)
    std::function<void(const IterationRecord&)> on_record;

    void validate() const;
};

struct D3caResult {
    PrimalVector w;
    DualVector alpha;
    RunHistory history;
    CommCounters counters;
};

// Called after every outer iteration with the recovered primal and the
// averaged dual iterate.
using D3caObserver = std::function<void(std::size_t t, const PrimalVector&, const DualVector&)>;

// Local dual method run by block (p,q): passes*n_p coordinate steps on
// copies of alpha_[p,.] and w_[.,q], maximizing the local dual whose
// conjugate term is weighted by 1/Q. Returns the accumulated delta_alpha.
std::vector<double> local_sdca(std::span<const double> alpha_p, std::span<const double> w_q, const DataBlock& block,
                               const ProblemSpec& spec, std::size_t Q, std::size_t passes, std::size_t t,
                               bool use_beta, RngStream rng);

D3caResult run_d3ca(const PartitionedData& data, const ProblemSpec& spec, const D3caConfig& config,
                    const D3caObserver& observer = {});

}  // namespace ddopt
