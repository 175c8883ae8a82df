#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ddopt/core.hpp"

namespace ddopt {

// Contiguous near-equal split of `total` into `parts` ranges: the first
// (total mod parts) ranges get one extra element. Returns parts+1 offsets.
std::vector<std::size_t> even_bounds(std::size_t total, std::size_t parts);

// P x Q grid over an n x m dataset, with each column block further split
// into P sub-blocks by the same rule. Sub-blocks may be empty when m_q < P.
PartitionGrid make_grid(std::size_t n, std::size_t m, std::size_t P, std::size_t Q);

// For each column block q, a permutation perm[q] of {0..P-1}: row partition
// p owns sub-block perm[q][p] during one outer iteration.
struct SubblockAssignment {
    std::vector<std::vector<std::size_t>> perm;

    std::size_t subblock(std::size_t p, std::size_t q) const { return perm[q][p]; }
    bool operator==(const SubblockAssignment&) const = default;
};

// Uniformly random permutations drawn by Fisher-Yates from the stream
// (seed, "subblock", t, q).
SubblockAssignment assign_subblocks(const PartitionGrid& grid, std::uint64_t seed, std::size_t t);

}  // namespace ddopt
