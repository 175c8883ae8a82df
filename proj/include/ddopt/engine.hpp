#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "ddopt/core.hpp"

namespace ddopt {

struct CommCounters {
    std::uint64_t phases = 0;    // algorithm-level reduction rounds
    std::uint64_t combines = 0;  // pairwise combine calls inside trees
    std::uint64_t scalars = 0;   // scalars moved along tree edges

    bool operator==(const CommCounters&) const = default;
};

// Thread count from DDOPT_THREADS, else the OpenMP default.
int default_thread_count();

// Combines `group` through a fixed left-to-right tree of the given arity:
// consecutive runs of `arity` values are folded left to right, level by
// level, until one value remains. Only associativity is assumed. Each
// pairwise combine adds 1 to `combines` and payload(right operand) to
// `scalars`.
template <class T, class Combine, class Payload>
    requires std::invocable<Payload&, const T&>
T tree_aggregate(std::vector<T> group, Combine&& combine, Payload&& payload, std::size_t arity = 2,
                 CommCounters* counters = nullptr) {
    if (group.empty()) throw Error(Errc::EmptyGroup, "tree_aggregate over an empty group");
    if (arity < 2) throw Error(Errc::InvalidArgument, "tree arity must be at least 2");
    while (group.size() > 1) {
        std::vector<T> next;
        next.reserve((group.size() + arity - 1) / arity);
        for (std::size_t b = 0; b < group.size(); b += arity) {
            T acc = std::move(group[b]);
            for (std::size_t k = b + 1; k < std::min(b + arity, group.size()); ++k) {
                if (counters) {
                    counters->combines += 1;
                    counters->scalars += payload(group[k]);
                }
                acc = combine(std::move(acc), group[k]);
            }
            next.push_back(std::move(acc));
        }
        group = std::move(next);
    }
    return std::move(group.front());
}

template <class T, class Combine>
T tree_aggregate(std::vector<T> group, Combine&& combine, std::size_t arity = 2, CommCounters* counters = nullptr) {
    return tree_aggregate(
        std::move(group), std::forward<Combine>(combine), [](const T&) -> std::size_t { return 1; }, arity, counters);
}

// Elementwise vector sum, the combine used by every solver reduction.
std::vector<double> vector_sum(std::vector<double> acc, const std::vector<double>& rhs);

// Deterministic in-process cluster of P*Q logical workers. Worker k owns
// block (k / Q, k % Q). Rounds execute the per-worker tasks with up to
// `threads` OpenMP threads; results never depend on the thread count
// because tasks share no mutable state and every reduction runs in a fixed
// order after the barrier.
class ClusterSim {
public:
    explicit ClusterSim(std::size_t workers, int threads = 0, std::size_t reduce_arity = 2);

    std::size_t workers() const { return workers_; }
    int threads() const { return threads_; }
    std::size_t reduce_arity() const { return arity_; }
    const CommCounters& counters() const { return counters_; }
    void reset_counters() { counters_ = {}; }

    // Marks the start of one algorithm-level communication step.
    void begin_phase() { ++counters_.phases; }

    // Runs task(worker_id) once per worker and returns the results in worker
    // order. A throwing task aborts the round with TaskPanic naming the
    // lowest failing worker id.
    template <class Task>
    auto run_round(Task&& task) -> std::vector<std::invoke_result_t<Task&, std::size_t>>;

    // Tree sum of equal-length vectors; payload is the vector length.
    std::vector<double> reduce_sum(std::vector<std::vector<double>> group) {
        return tree_aggregate(
            std::move(group), vector_sum, [](const std::vector<double>& v) { return v.size(); }, arity_, &counters_);
    }

    template <class T, class Combine, class Payload>
    T aggregate(std::vector<T> group, Combine&& combine, Payload&& payload) {
        return tree_aggregate(std::move(group), std::forward<Combine>(combine), std::forward<Payload>(payload), arity_,
                              &counters_);
    }

private:
    [[noreturn]] static void rethrow_as_panic(std::size_t worker, std::exception_ptr err);

    std::size_t workers_;
    int threads_;
    std::size_t arity_;
    CommCounters counters_;
};

template <class Task>
auto ClusterSim::run_round(Task&& task) -> std::vector<std::invoke_result_t<Task&, std::size_t>> {
    using R = std::invoke_result_t<Task&, std::size_t>;
    static_assert(!std::is_void_v<R>, "round tasks must return a value");
    std::vector<std::optional<R>> slots(workers_);
    std::vector<std::exception_ptr> errors(workers_);
    const auto count = static_cast<std::int64_t>(workers_);

    if (threads_ <= 1) {
        for (std::int64_t k = 0; k < count; ++k) {
            try {
                slots[k].emplace(task(static_cast<std::size_t>(k)));
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    } else {
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads_)
        for (std::int64_t k = 0; k < count; ++k) {
            try {
                slots[k].emplace(task(static_cast<std::size_t>(k)));
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    }

    for (std::size_t k = 0; k < workers_; ++k)
        if (errors[k]) rethrow_as_panic(k, errors[k]);

    std::vector<R> out;
    out.reserve(workers_);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace ddopt
