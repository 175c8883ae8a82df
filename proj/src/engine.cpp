#include "ddopt/engine.hpp"

#include <cstdlib>

#include <omp.h>

namespace ddopt {

int default_thread_count() {
    if (const char* env = std::getenv("DDOPT_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return omp_get_max_threads();
}

std::vector<double> vector_sum(std::vector<double> acc, const std::vector<double>& rhs) {
    if (acc.size() != rhs.size()) throw Error(Errc::DimensionMismatch, "vector_sum over vectors of unequal length");
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += rhs[k];
    return acc;
}

ClusterSim::ClusterSim(std::size_t workers, int threads, std::size_t reduce_arity)
    : workers_(workers), threads_(threads > 0 ? threads : default_thread_count()), arity_(reduce_arity) {
    if (workers_ == 0) throw Error(Errc::InvalidPartitionCount, "cluster needs at least one worker");
    if (arity_ < 2) throw Error(Errc::InvalidArgument, "tree arity must be at least 2");
}

void ClusterSim::rethrow_as_panic(std::size_t worker, std::exception_ptr err) {
    std::string detail = "unknown exception";
    try {
        std::rethrow_exception(err);
    } catch (const std::exception& e) {
        detail = e.what();
    } catch (...) {
    }
    throw Error(Errc::TaskPanic, "worker " + std::to_string(worker) + " failed: " + detail,
                {static_cast<std::int64_t>(worker)});
}

}  // namespace ddopt
