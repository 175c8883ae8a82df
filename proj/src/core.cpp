#include "ddopt/core.hpp"

#include <algorithm>
#include <sstream>

namespace ddopt {

const char* errc_name(Errc code) {
    switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::MissingBlock: return "MissingBlock";
    case Errc::LabelMismatch: return "LabelMismatch";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InfeasibleDual: return "InfeasibleDual";
    case Errc::ZeroDenominator: return "ZeroDenominator";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::InvalidPartitionCount: return "InvalidPartitionCount";
    case Errc::TaskPanic: return "TaskPanic";
    case Errc::EmptyGroup: return "EmptyGroup";
    case Errc::InvalidDensity: return "InvalidDensity";
    case Errc::ParseError: return "ParseError";
    case Errc::NonBinaryLabels: return "NonBinaryLabels";
    case Errc::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case Errc::NonPositiveReference: return "NonPositiveReference";
    case Errc::NonPositiveTime: return "NonPositiveTime";
    case Errc::ConfigError: return "ConfigError";
    case Errc::MissingSlice: return "MissingSlice";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& what, std::vector<std::int64_t> where)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), where_(std::move(where)) {}

const char* loss_name(LossKind loss) { return loss == LossKind::Hinge ? "hinge" : "logistic"; }

LossKind parse_loss(const std::string& name) {
    if (name == "hinge") return LossKind::Hinge;
    if (name == "logistic") return LossKind::Logistic;
    throw Error(Errc::InvalidArgument, "unknown loss '" + name + "'");
}

void ProblemSpec::validate() const {
    if (n < 1 || m < 1) throw Error(Errc::InvalidArgument, "problem needs n >= 1 and m >= 1");
    if (!(lambda > 0.0)) throw Error(Errc::InvalidArgument, "lambda must be positive");
}

// ---------------------------------------------------------------------------

double RowView::dot(std::span<const double> w) const {
    double s = 0.0;
    for (std::size_t k = 0; k < index.size(); ++k) s += value[k] * w[index[k]];
    return s;
}

double RowView::squared_norm() const {
    double s = 0.0;
    for (double v : value) s += v * v;
    return s;
}

void RowView::axpy(double scale, std::span<double> w) const {
    for (std::size_t k = 0; k < index.size(); ++k) w[index[k]] += scale * value[k];
}

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                     std::vector<std::uint32_t> col_idx, std::vector<double> values)
    : cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {
    if (row_ptr_.size() != rows + 1 || row_ptr_.front() != 0 || row_ptr_.back() != values_.size() ||
        col_idx_.size() != values_.size())
        throw Error(Errc::DimensionMismatch, "inconsistent compressed row arrays");
    for (std::size_t i = 0; i < rows; ++i) {
        if (row_ptr_[i] > row_ptr_[i + 1]) throw Error(Errc::DimensionMismatch, "row pointers must be non-decreasing");
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            if (col_idx_[k] >= cols_) throw Error(Errc::IndexOutOfRange, "column index out of range");
            if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1])
                throw Error(Errc::InvalidArgument, "column indices must be strictly increasing within a row");
        }
    }
}

CsrMatrix CsrMatrix::from_dense(std::size_t rows, std::size_t cols, std::span<const double> row_major) {
    if (row_major.size() != rows * cols) throw Error(Errc::DimensionMismatch, "dense buffer has wrong size");
    std::vector<std::size_t> ptr(rows + 1, 0);
    std::vector<std::uint32_t> idx;
    std::vector<double> val;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double v = row_major[i * cols + j];
            if (v == 0.0) continue;
            idx.push_back(static_cast<std::uint32_t>(j));
            val.push_back(v);
        }
        ptr[i + 1] = val.size();
    }
    return CsrMatrix(rows, cols, std::move(ptr), std::move(idx), std::move(val));
}

RowView CsrMatrix::row(std::size_t i) const {
    const std::size_t b = row_ptr_[i], e = row_ptr_[i + 1];
    return {std::span<const std::uint32_t>(col_idx_.data() + b, e - b), std::span<const double>(values_.data() + b, e - b)};
}

void CsrMatrix::push_row(std::span<const std::uint32_t> index, std::span<const double> value) {
    if (index.size() != value.size()) throw Error(Errc::DimensionMismatch, "row index/value length mismatch");
    for (std::size_t k = 0; k < index.size(); ++k) {
        if (index[k] >= cols_) throw Error(Errc::IndexOutOfRange, "column index out of range");
        if (k > 0 && index[k] <= index[k - 1])
            throw Error(Errc::InvalidArgument, "column indices must be strictly increasing within a row");
    }
    col_idx_.insert(col_idx_.end(), index.begin(), index.end());
    values_.insert(values_.end(), value.begin(), value.end());
    row_ptr_.push_back(values_.size());
}

std::vector<double> CsrMatrix::to_dense() const {
    std::vector<double> out(rows() * cols_, 0.0);
    for (std::size_t i = 0; i < rows(); ++i) {
        const auto r = row(i);
        for (std::size_t k = 0; k < r.nnz(); ++k) out[i * cols_ + r.index[k]] = r.value[k];
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::pair<std::size_t, std::size_t> locate(const std::vector<std::size_t>& bounds, std::size_t i) {
    if (i >= bounds.back()) throw Error(Errc::IndexOutOfRange, "global index " + std::to_string(i) + " out of range");
    const auto it = std::upper_bound(bounds.begin(), bounds.end(), i);
    const auto k = static_cast<std::size_t>(it - bounds.begin()) - 1;
    return {k, i - bounds[k]};
}

bool strictly_increasing(const std::vector<std::size_t>& b) {
    for (std::size_t k = 1; k < b.size(); ++k)
        if (b[k] <= b[k - 1]) return false;
    return true;
}

}  // namespace

std::pair<std::size_t, std::size_t> PartitionGrid::locate_row(std::size_t i) const { return locate(row_bounds, i); }
std::pair<std::size_t, std::size_t> PartitionGrid::locate_col(std::size_t j) const { return locate(col_bounds, j); }

void PartitionGrid::validate() const {
    if (P < 1 || Q < 1) throw Error(Errc::InvalidPartitionCount, "grid needs P >= 1 and Q >= 1");
    if (row_bounds.size() != P + 1 || col_bounds.size() != Q + 1 || sub_bounds.size() != Q)
        throw Error(Errc::DimensionMismatch, "grid bound arrays have the wrong length");
    if (row_bounds.front() != 0 || col_bounds.front() != 0 || !strictly_increasing(row_bounds) ||
        !strictly_increasing(col_bounds))
        throw Error(Errc::DimensionMismatch, "grid bounds must start at 0 and increase strictly");
    for (std::size_t q = 0; q < Q; ++q) {
        const auto& s = sub_bounds[q];
        if (s.size() != P + 1 || s.front() != 0 || s.back() != cols_in(q) || !std::is_sorted(s.begin(), s.end()))
            throw Error(Errc::DimensionMismatch, "sub-block bounds of column block " + std::to_string(q) + " are invalid");
    }
}

std::size_t PartitionedData::nnz() const {
    std::size_t s = 0;
    for (const auto& b : blocks) s += b.x.nnz();
    return s;
}

void validate_dataset(std::span<const DataBlock> blocks, const PartitionGrid& grid) {
    grid.validate();
    std::vector<const DataBlock*> seen(grid.workers(), nullptr);
    for (const auto& b : blocks) {
        if (b.p >= grid.P || b.q >= grid.Q)
            throw Error(Errc::DimensionMismatch, "block outside the grid", {std::int64_t(b.p), std::int64_t(b.q)});
        seen[grid.worker_id(b.p, b.q)] = &b;
    }
    for (std::size_t p = 0; p < grid.P; ++p) {
        for (std::size_t q = 0; q < grid.Q; ++q) {
            const DataBlock* b = seen[grid.worker_id(p, q)];
            const std::vector<std::int64_t> at{std::int64_t(p), std::int64_t(q)};
            if (b == nullptr)
                throw Error(Errc::MissingBlock, "block (" + std::to_string(p) + "," + std::to_string(q) + ") absent", at);
            if (b->rows() != grid.rows_in(p) || b->cols() != grid.cols_in(q) || !b->labels ||
                b->labels->size() != b->rows())
                throw Error(Errc::DimensionMismatch,
                            "block (" + std::to_string(p) + "," + std::to_string(q) + ") has wrong shape", at);
            for (double y : *b->labels)
                if (y != 1.0 && y != -1.0)
                    throw Error(Errc::LabelMismatch, "labels of row partition " + std::to_string(p) + " are not +-1",
                                {std::int64_t(p)});
            if (q > 0) {
                const DataBlock* first = seen[grid.worker_id(p, 0)];
                if (b->labels != first->labels && *b->labels != *first->labels)
                    throw Error(Errc::LabelMismatch, "labels differ across row partition " + std::to_string(p),
                                {std::int64_t(p)});
            }
        }
    }
}

Dataset assemble(const PartitionedData& data) {
    const auto& g = data.grid;
    Dataset out;
    out.x.set_cols(g.m());
    out.y.reserve(g.n());
    std::vector<std::uint32_t> idx;
    std::vector<double> val;
    for (std::size_t p = 0; p < g.P; ++p) {
        for (std::size_t i = 0; i < g.rows_in(p); ++i) {
            idx.clear();
            val.clear();
            for (std::size_t q = 0; q < g.Q; ++q) {
                const auto r = data.block(p, q).x.row(i);
                for (std::size_t k = 0; k < r.nnz(); ++k) {
                    idx.push_back(static_cast<std::uint32_t>(g.col_bounds[q] + r.index[k]));
                    val.push_back(r.value[k]);
                }
            }
            out.x.push_row(idx, val);
            out.y.push_back(data.block(p, 0).label(i));
        }
    }
    return out;
}

PartitionedData split(const Dataset& data, const PartitionGrid& grid) {
    grid.validate();
    if (data.n() != grid.n() || data.m() != grid.m() || data.y.size() != data.n())
        throw Error(Errc::DimensionMismatch, "dataset does not match grid dimensions");
    PartitionedData out{grid, {}};
    out.blocks.reserve(grid.workers());
    for (std::size_t p = 0; p < grid.P; ++p) {
        auto labels = std::make_shared<const std::vector<double>>(data.y.begin() + grid.row_bounds[p],
                                                                 data.y.begin() + grid.row_bounds[p + 1]);
        for (std::size_t q = 0; q < grid.Q; ++q) {
            DataBlock b{p, q, CsrMatrix{}, labels};
            b.x.set_cols(grid.cols_in(q));
            out.blocks.push_back(std::move(b));
        }
        std::vector<std::vector<std::uint32_t>> idx(grid.Q);
        std::vector<std::vector<double>> val(grid.Q);
        for (std::size_t i = grid.row_bounds[p]; i < grid.row_bounds[p + 1]; ++i) {
            for (auto& v : idx) v.clear();
            for (auto& v : val) v.clear();
            const auto r = data.x.row(i);
            std::size_t q = 0;
            for (std::size_t k = 0; k < r.nnz(); ++k) {
                while (r.index[k] >= grid.col_bounds[q + 1]) ++q;
                idx[q].push_back(static_cast<std::uint32_t>(r.index[k] - grid.col_bounds[q]));
                val[q].push_back(r.value[k]);
            }
            for (std::size_t qq = 0; qq < grid.Q; ++qq) out.blocks[grid.worker_id(p, qq)].x.push_row(idx[qq], val[qq]);
        }
    }
    return out;
}

void RunHistory::push(IterationRecord r) {
    if (!records.empty() && r.t <= records.back().t)
        throw Error(Errc::InvalidArgument, "run history iterations must increase strictly");
    records.push_back(std::move(r));
}

}  // namespace ddopt
