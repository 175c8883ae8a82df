#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddopt {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class Errc {
    InvalidArgument,
    MissingBlock,
    LabelMismatch,
    DimensionMismatch,
    InfeasibleDual,
    ZeroDenominator,
    IndexOutOfRange,
    InvalidPartitionCount,
    TaskPanic,
    EmptyGroup,
    InvalidDensity,
    ParseError,
    NonBinaryLabels,
    MaxIterationsExceeded,
    NonPositiveReference,
    NonPositiveTime,
    ConfigError,
    MissingSlice,
    IoError,
};

const char* errc_name(Errc code);

// Every failure in the library is reported as an Error. `where` carries the
// indices named by the error (block coordinates, observation index, line
// number, worker id), all 0-based except ParseError lines which are 1-based.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what, std::vector<std::int64_t> where = {});

    Errc code() const noexcept { return code_; }
    const std::vector<std::int64_t>& where() const noexcept { return where_; }

private:
    Errc code_;
    std::vector<std::int64_t> where_;
};

// ---------------------------------------------------------------------------
// Problem description
// ---------------------------------------------------------------------------

enum class LossKind { Hinge, Logistic };

const char* loss_name(LossKind loss);
LossKind parse_loss(const std::string& name);

struct ProblemSpec {
    std::size_t n = 0;
    std::size_t m = 0;
    double lambda = 0.0;
    LossKind loss = LossKind::Hinge;

    // Strong-convexity modulus of the regularizer lambda*||w||^2.
    double sigma() const { return 2.0 * lambda; }

    void validate() const;
};

// ---------------------------------------------------------------------------
// Sparse matrix in compressed row form
// ---------------------------------------------------------------------------

struct RowView {
    std::span<const std::uint32_t> index;
    std::span<const double> value;

    std::size_t nnz() const { return index.size(); }
    double dot(std::span<const double> w) const;
    double squared_norm() const;
    // w += scale * row
    void axpy(double scale, std::span<double> w) const;
};

class CsrMatrix {
public:
    CsrMatrix() : row_ptr_{0} {}
    CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
              std::vector<std::uint32_t> col_idx, std::vector<double> values);

    static CsrMatrix from_dense(std::size_t rows, std::size_t cols, std::span<const double> row_major);

    std::size_t rows() const { return row_ptr_.size() - 1; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }

    RowView row(std::size_t i) const;

    // Appends one row; indices must be strictly increasing and < cols.
    void push_row(std::span<const std::uint32_t> index, std::span<const double> value);
    void set_cols(std::size_t cols) { cols_ = cols; }

    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::uint32_t>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }

    std::vector<double> to_dense() const;

    bool operator==(const CsrMatrix&) const = default;

private:
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> col_idx_;
    std::vector<double> values_;
};

// An unpartitioned labelled dataset.
struct Dataset {
    CsrMatrix x;
    std::vector<double> y;

    std::size_t n() const { return x.rows(); }
    std::size_t m() const { return x.cols(); }
};

// ---------------------------------------------------------------------------
// Partition grid and blocks
// ---------------------------------------------------------------------------

struct PartitionGrid {
    std::size_t P = 0;
    std::size_t Q = 0;
    std::vector<std::size_t> row_bounds;               // P+1 global row offsets
    std::vector<std::size_t> col_bounds;               // Q+1 global column offsets
    std::vector<std::vector<std::size_t>> sub_bounds;  // per q, P+1 offsets local to column block q

    std::size_t n() const { return row_bounds.back(); }
    std::size_t m() const { return col_bounds.back(); }
    std::size_t workers() const { return P * Q; }
    std::size_t rows_in(std::size_t p) const { return row_bounds[p + 1] - row_bounds[p]; }
    std::size_t cols_in(std::size_t q) const { return col_bounds[q + 1] - col_bounds[q]; }
    std::size_t worker_id(std::size_t p, std::size_t q) const { return p * Q + q; }

    // Global row index -> (p, local row).
    std::pair<std::size_t, std::size_t> locate_row(std::size_t i) const;
    // Global column index -> (q, local column).
    std::pair<std::size_t, std::size_t> locate_col(std::size_t j) const;

    void validate() const;

    bool operator==(const PartitionGrid&) const = default;
};

using Labels = std::shared_ptr<const std::vector<double>>;

struct DataBlock {
    std::size_t p = 0;
    std::size_t q = 0;
    CsrMatrix x;    // n_p x m_q, local column indices
    Labels labels;  // y_[p], shared by every block of row partition p

    std::size_t rows() const { return x.rows(); }
    std::size_t cols() const { return x.cols(); }
    double label(std::size_t i) const { return (*labels)[i]; }
};

// The P*Q blocks of a dataset in (p, q) row-major order together with their grid.
struct PartitionedData {
    PartitionGrid grid;
    std::vector<DataBlock> blocks;

    const DataBlock& block(std::size_t p, std::size_t q) const { return blocks[grid.worker_id(p, q)]; }
    std::size_t n() const { return grid.n(); }
    std::size_t m() const { return grid.m(); }
    std::size_t nnz() const;
};

// Confirms the blocks tile the grid exactly and that every row partition
// carries one consistent label vector. Throws MissingBlock, LabelMismatch or
// DimensionMismatch.
void validate_dataset(std::span<const DataBlock> blocks, const PartitionGrid& grid);

// Concatenates the blocks back into a single matrix.
Dataset assemble(const PartitionedData& data);

// Slices a dataset along an existing grid.
PartitionedData split(const Dataset& data, const PartitionGrid& grid);

// ---------------------------------------------------------------------------
// Block-structured solution vectors
// ---------------------------------------------------------------------------

template <class Tag>
struct BlockVector {
    std::vector<std::vector<double>> blocks;

    BlockVector() = default;
    explicit BlockVector(std::vector<std::vector<double>> b) : blocks(std::move(b)) {}

    static BlockVector zeros(std::span<const std::size_t> bounds) {
        BlockVector v;
        v.blocks.reserve(bounds.size() - 1);
        for (std::size_t k = 0; k + 1 < bounds.size(); ++k) v.blocks.emplace_back(bounds[k + 1] - bounds[k], 0.0);
        return v;
    }

    static BlockVector from_flat(std::span<const double> flat, std::span<const std::size_t> bounds) {
        if (flat.size() != bounds.back()) throw Error(Errc::DimensionMismatch, "flat vector length does not match bounds");
        BlockVector v;
        for (std::size_t k = 0; k + 1 < bounds.size(); ++k)
            v.blocks.emplace_back(flat.begin() + bounds[k], flat.begin() + bounds[k + 1]);
        return v;
    }

    std::size_t size() const {
        std::size_t s = 0;
        for (const auto& b : blocks) s += b.size();
        return s;
    }

    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(size());
        for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
        return out;
    }

    bool matches(std::span<const std::size_t> bounds) const {
        if (blocks.size() + 1 != bounds.size()) return false;
        for (std::size_t k = 0; k < blocks.size(); ++k)
            if (blocks[k].size() != bounds[k + 1] - bounds[k]) return false;
        return true;
    }

    bool operator==(const BlockVector&) const = default;
};

struct PrimalTag {};
struct DualTag {};
using PrimalVector = BlockVector<PrimalTag>;  // Q blocks of length m_q
using DualVector = BlockVector<DualTag>;      // P blocks of length n_p

// ---------------------------------------------------------------------------
// Run history
// ---------------------------------------------------------------------------

struct IterationRecord {
    std::size_t t = 0;
    double primal_value = 0.0;
    std::optional<double> dual_value;
    std::optional<double> rel_opt;
    std::uint64_t reduce_ops = 0;
    std::uint64_t elements_communicated = 0;

    bool operator==(const IterationRecord&) const = default;
};

struct RunHistory {
    std::vector<IterationRecord> records;

    void push(IterationRecord r);
    const IterationRecord& back() const { return records.back(); }
    bool empty() const { return records.empty(); }
    std::size_t size() const { return records.size(); }

    bool operator==(const RunHistory&) const = default;
};

}  // namespace ddopt
