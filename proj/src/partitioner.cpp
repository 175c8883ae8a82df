#include "ddopt/partitioner.hpp"

#include <numeric>
#include <utility>

#include "ddopt/rng.hpp"

namespace ddopt {

std::vector<std::size_t> even_bounds(std::size_t total, std::size_t parts) {
    std::vector<std::size_t> b(parts + 1, 0);
    const std::size_t base = total / parts, extra = total % parts;
    for (std::size_t k = 0; k < parts; ++k) b[k + 1] = b[k] + base + (k < extra ? 1 : 0);
    return b;
}

PartitionGrid make_grid(std::size_t n, std::size_t m, std::size_t P, std::size_t Q) {
    if (P < 1 || Q < 1 || P > n || Q > m)
        throw Error(Errc::InvalidPartitionCount, "need 1 <= P <= n and 1 <= Q <= m (n=" + std::to_string(n) +
                                                      ", m=" + std::to_string(m) + ", P=" + std::to_string(P) +
                                                      ", Q=" + std::to_string(Q) + ")");
    PartitionGrid g;
    g.P = P;
    g.Q = Q;
    g.row_bounds = even_bounds(n, P);
    g.col_bounds = even_bounds(m, Q);
    g.sub_bounds.reserve(Q);
    for (std::size_t q = 0; q < Q; ++q) g.sub_bounds.push_back(even_bounds(g.cols_in(q), P));
    return g;
}

SubblockAssignment assign_subblocks(const PartitionGrid& grid, std::uint64_t seed, std::size_t t) {
    SubblockAssignment a;
    a.perm.resize(grid.Q);
    for (std::size_t q = 0; q < grid.Q; ++q) {
        auto& perm = a.perm[q];
        perm.resize(grid.P);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        auto rng = rng_stream(seed, {"subblock", t, q});
        for (std::size_t i = grid.P; i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng.next_index(i));
            std::swap(perm[i - 1], perm[j]);
        }
    }
    return a;
}

}  // namespace ddopt
