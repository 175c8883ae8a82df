#include "ddopt/losses.hpp"

#include <algorithm>
#include <cmath>

namespace ddopt {

LossEval loss_eval(LossKind loss, double z, double y) {
    const double t = y * z;
    if (loss == LossKind::Hinge) {
        if (t < 1.0) return {1.0 - t, -y};
        return {0.0, 0.0};
    }
    const double value = std::log1p(std::exp(-std::abs(t))) + std::max(0.0, -t);
    // -y * sigmoid(-t), evaluated without overflow
    const double s = t >= 0 ? std::exp(-t) / (1.0 + std::exp(-t)) : 1.0 / (1.0 + std::exp(t));
    return {value, -y * s};
}

namespace {

double xlogx(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

}  // namespace

double neg_conjugate(LossKind loss, double alpha, double y) {
    const double b = std::clamp(alpha * y, 0.0, 1.0);
    if (loss == LossKind::Hinge) return b;
    return -xlogx(b) - xlogx(1.0 - b);
}

bool dual_feasible(double alpha, double y, double tol) {
    const double b = alpha * y;
    return b >= -tol && b <= 1.0 + tol;
}

double conjugate_maximizer(LossKind loss, double y) { return loss == LossKind::Hinge ? y : 0.5 * y; }

double sdca_hinge_step(double alpha, double xw, double y, double sigma_n, double denom, double scale) {
    if (!(denom > 0.0)) throw Error(Errc::ZeroDenominator, "hinge step with non-positive denominator");
    const double b = std::clamp(sigma_n * (scale - xw * y) / denom + alpha * y, 0.0, 1.0);
    return y * b - alpha;
}

double sdca_logistic_step(double alpha, double xw, double y, double sigma_n, double denom, double scale) {
    if (!(denom > 0.0)) throw Error(Errc::ZeroDenominator, "logistic step with non-positive denominator");
    const double b0 = std::clamp(alpha * y, 0.0, 1.0);
    const double curv = denom / sigma_n;
    // d/db of scale*H(b) - y*xw*(b-b0) - curv/2*(b-b0)^2, strictly decreasing on (0,1).
    const auto slope = [&](double b) { return scale * std::log((1.0 - b) / b) - y * xw - curv * (b - b0); };
    double lo = 0.0, hi = 1.0;
    double b = (b0 > 0.0 && b0 < 1.0) ? b0 : 0.5;
    for (int it = 0; it < 200; ++it) {
        const double g = slope(b);
        if (g > 0.0)
            lo = b;
        else
            hi = b;
        const double h = -scale / (b * (1.0 - b)) - curv;
        double next = b - g / h;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const bool done = std::abs(next - b) < 1e-12;
        b = next;
        if (done || hi - lo < 1e-15) break;
    }
    return y * b - alpha;
}

double sdca_step(LossKind loss, double alpha, double xw, double y, double sigma_n, double denom, double scale) {
    return loss == LossKind::Hinge ? sdca_hinge_step(alpha, xw, y, sigma_n, denom, scale)
                                   : sdca_logistic_step(alpha, xw, y, sigma_n, denom, scale);
}

// ---------------------------------------------------------------------------

std::vector<std::vector<double>> row_margins(const PrimalVector& w, const PartitionedData& data, ClusterSim& sim) {
    const auto& g = data.grid;
    if (!w.matches(g.col_bounds)) throw Error(Errc::DimensionMismatch, "primal vector does not match column blocks");
    auto partial = sim.run_round([&](std::size_t k) {
        const auto& blk = data.blocks[k];
        std::vector<double> z(blk.rows());
        for (std::size_t i = 0; i < blk.rows(); ++i) z[i] = blk.x.row(i).dot(w.blocks[blk.q]);
        return z;
    });
    std::vector<std::vector<double>> out(g.P);
    for (std::size_t p = 0; p < g.P; ++p) {
        std::vector<std::vector<double>> group;
        for (std::size_t q = 0; q < g.Q; ++q) group.push_back(std::move(partial[g.worker_id(p, q)]));
        out[p] = sim.reduce_sum(std::move(group));
    }
    return out;
}

double squared_norm(const PrimalVector& w) {
    double s = 0.0;
    for (const auto& b : w.blocks)
        for (double v : b) s += v * v;
    return s;
}

double primal_objective(const PrimalVector& w, const PartitionedData& data, const ProblemSpec& spec, ClusterSim& sim) {
    const auto margins = row_margins(w, data, sim);
    double loss_sum = 0.0;
    for (std::size_t p = 0; p < data.grid.P; ++p) {
        const auto& y = *data.block(p, 0).labels;
        for (std::size_t i = 0; i < y.size(); ++i) loss_sum += loss_eval(spec.loss, margins[p][i], y[i]).value;
    }
    return loss_sum / static_cast<double>(data.n()) + spec.lambda * squared_norm(w);
}

double primal_objective(const PrimalVector& w, const PartitionedData& data, const ProblemSpec& spec) {
    ClusterSim sim(data.grid.workers(), 1);
    return primal_objective(w, data, spec, sim);
}

PrimalVector primal_from_dual(const DualVector& alpha, const PartitionedData& data, const ProblemSpec& spec,
                              ClusterSim& sim) {
    const auto& g = data.grid;
    if (!alpha.matches(g.row_bounds)) throw Error(Errc::DimensionMismatch, "dual vector does not match row blocks");
    auto partial = sim.run_round([&](std::size_t k) {
        const auto& blk = data.blocks[k];
        std::vector<double> v(blk.cols(), 0.0);
        const auto& a = alpha.blocks[blk.p];
        for (std::size_t i = 0; i < blk.rows(); ++i)
            if (a[i] != 0.0) blk.x.row(i).axpy(a[i], v);
        return v;
    });
    const double inv = 1.0 / (spec.sigma() * static_cast<double>(data.n()));
    PrimalVector w;
    w.blocks.resize(g.Q);
    for (std::size_t q = 0; q < g.Q; ++q) {
        std::vector<std::vector<double>> group;
        for (std::size_t p = 0; p < g.P; ++p) group.push_back(std::move(partial[g.worker_id(p, q)]));
        w.blocks[q] = sim.reduce_sum(std::move(group));
        for (double& v : w.blocks[q]) v *= inv;
    }
    return w;
}

PrimalVector primal_from_dual(const DualVector& alpha, const PartitionedData& data, const ProblemSpec& spec) {
    ClusterSim sim(data.grid.workers(), 1);
    return primal_from_dual(alpha, data, spec, sim);
}

void check_feasible(const DualVector& alpha, const PartitionedData& data, double tol) {
    const auto& g = data.grid;
    if (!alpha.matches(g.row_bounds)) throw Error(Errc::DimensionMismatch, "dual vector does not match row blocks");
    for (std::size_t p = 0; p < g.P; ++p) {
        const auto& y = *data.block(p, 0).labels;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (!dual_feasible(alpha.blocks[p][i], y[i], tol)) {
                const auto gi = static_cast<std::int64_t>(g.row_bounds[p] + i);
                throw Error(Errc::InfeasibleDual, "alpha_" + std::to_string(gi) + " * y outside [0,1]", {gi});
            }
    }
}

double dual_objective(const DualVector& alpha, const PartitionedData& data, const ProblemSpec& spec, ClusterSim& sim) {
    check_feasible(alpha, data);
    double conj_sum = 0.0;
    for (std::size_t p = 0; p < data.grid.P; ++p) {
        const auto& y = *data.block(p, 0).labels;
        for (std::size_t i = 0; i < y.size(); ++i) conj_sum += neg_conjugate(spec.loss, alpha.blocks[p][i], y[i]);
    }
    const auto w = primal_from_dual(alpha, data, spec, sim);
    return conj_sum / static_cast<double>(data.n()) - spec.lambda * squared_norm(w);
}

double dual_objective(const DualVector& alpha, const PartitionedData& data, const ProblemSpec& spec) {
    ClusterSim sim(data.grid.workers(), 1);
    return dual_objective(alpha, data, spec, sim);
}

double duality_gap(const PrimalVector& w, const DualVector& alpha, const PartitionedData& data,
                   const ProblemSpec& spec) {
    return primal_objective(w, data, spec) - dual_objective(alpha, data, spec);
}

std::vector<double> stochastic_gradient(std::span<const double> w_block, const RowView& row, double y,
                                        std::size_t begin, std::size_t end, const ProblemSpec& spec) {
    if (begin > end || end > w_block.size()) throw Error(Errc::IndexOutOfRange, "gradient slice outside the block");
    if (!row.index.empty() && row.index.back() >= w_block.size())
        throw Error(Errc::IndexOutOfRange, "row has columns outside the block");
    const double deriv = loss_eval(spec.loss, row.dot(w_block), y).derivative;
    const double two_lambda = 2.0 * spec.lambda;
    std::vector<double> g(end - begin);
    auto k = static_cast<std::size_t>(std::lower_bound(row.index.begin(), row.index.end(), begin) - row.index.begin());
    for (std::size_t c = begin; c < end; ++c) {
        double xk = 0.0;
        if (k < row.nnz() && row.index[k] == c) xk = row.value[k++];
        g[c - begin] = deriv * xk + two_lambda * w_block[c];
    }
    return g;
}

}  // namespace ddopt
