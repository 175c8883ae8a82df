#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddopt/core.hpp"

namespace ddopt {

struct SyntheticOptions {
    std::size_t P = 1;
    std::size_t Q = 1;
    std::size_t rows_per_block = 1;
    std::size_t cols_per_block = 1;
    double density = 1.0;  // fraction of nonzeros per row; 1 means dense
    std::uint64_t seed = 1;
    double flip_prob = 0.1;
    bool standardize = true;

    std::size_t n() const { return P * rows_per_block; }
    std::size_t m() const { return Q * cols_per_block; }
    // Nonzeros stored per row: m when dense, else max(1, round(density * m)).
    std::size_t nnz_per_row() const;
    std::size_t nnz() const { return n() * nnz_per_row(); }
    void validate() const;
};

struct SyntheticData {
    PartitionedData data;
    std::vector<double> planted_w;
    std::size_t flipped = 0;  // labels whose sign was flipped
};

// x_i and the planted w drawn from U[-1,1]; y_i = sgn(w^T x_i) (+1 at 0),
// flipped with probability flip_prob; columns then scaled to unit variance.
// Sparse rows place nnz_per_row() nonzeros uniformly among the m features.
SyntheticData generate_synthetic(const SyntheticOptions& opts);

// LIBSVM text: `label idx:val ...`, 1-based strictly increasing indices.
// Labels in {-1,+1}, {0,1} or {1,2} are mapped to -1/+1.
Dataset read_libsvm(const std::string& path);
Dataset read_libsvm(std::istream& in);
void write_libsvm(const Dataset& data, std::ostream& out);

double sparsity(const Dataset& data);

// Scales every column to unit variance (population variance about the
// column mean, zeros included) without centering. Zero-variance columns are
// left untouched.
void standardize(Dataset& data);

struct DatasetPermutation {
    std::vector<std::size_t> rows;  // new row r holds old row rows[r]
    std::vector<std::size_t> cols;  // new column c holds old column cols[c]
};

DatasetPermutation make_shuffle(std::size_t n, std::size_t m, std::uint64_t seed);
Dataset apply_permutation(const Dataset& data, const DatasetPermutation& perm);
DatasetPermutation invert(const DatasetPermutation& perm);

// Optional seeded row/column shuffle, then contiguous tiling via make_grid.
PartitionedData partition_dataset(const Dataset& data, std::size_t P, std::size_t Q,
                                  std::optional<std::uint64_t> shuffle_seed = std::nullopt);

// Binary cache: magic "GOPT1", then n, m, P, Q (u64), density (f64), seed
// (u64), then the P*Q blocks in (p,q) row-major order. Each block stores
// rows, cols, nnz (u64), row_ptr (u64), col_idx (u32), values (f64); blocks
// with q == 0 are followed by the row partition's labels (f64).
struct CacheHeader {
    std::uint64_t n = 0;
    std::uint64_t m = 0;
    std::uint64_t P = 0;
    std::uint64_t Q = 0;
    double density = 1.0;
    std::uint64_t seed = 0;
};

void write_cache(const std::string& path, const PartitionedData& data, double density, std::uint64_t seed);
PartitionedData read_cache(const std::string& path, CacheHeader* header = nullptr);
bool is_cache_file(const std::string& path);

}  // namespace ddopt
