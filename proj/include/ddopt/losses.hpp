#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ddopt/core.hpp"
#include "ddopt/engine.hpp"

namespace ddopt {

// Tolerance for the conjugate-domain check 0 <= alpha*y <= 1.
inline constexpr double kDualFeasibilityTol = 1e-12;

struct LossEval {
    double value;
    double derivative;  // d f / d z; 0 at the hinge kink
};

// f(z) for label y at margin z = w^T x.
LossEval loss_eval(LossKind loss, double z, double y);

// -phi*(-alpha) on the conjugate domain alpha*y in [0,1]. Hinge: alpha*y.
// Logistic: binary entropy of alpha*y. Values outside the domain are
// clamped; callers check feasibility separately.
double neg_conjugate(LossKind loss, double alpha, double y);

// argmax over alpha of -phi*(-alpha): the exact coordinate step for a row with
// no nonzeros. Hinge: y. Logistic: y/2.
double conjugate_maximizer(LossKind loss, double y);

bool dual_feasible(double alpha, double y, double tol = kDualFeasibilityTol);

// Closed-form hinge coordinate step of SDCA:
//   delta = y * clip(sigma_n * (scale - y*xw) / denom + alpha*y, 0, 1) - alpha
// with sigma_n = 2*lambda*n, xw the (local) margin, denom = ||x_i||^2 or the
// step-size parameter beta, and scale the weight of the conjugate term in
// the local objective (1/Q inside D3CA). Throws ZeroDenominator if denom <= 0.
double sdca_hinge_step(double alpha, double xw, double y, double sigma_n, double denom, double scale = 1.0);

// Same local problem for the logistic loss, solved by safeguarded Newton
// on the 1-D optimality condition to 1e-12.
double sdca_logistic_step(double alpha, double xw, double y, double sigma_n, double denom, double scale = 1.0);

double sdca_step(LossKind loss, double alpha, double xw, double y, double sigma_n, double denom, double scale = 1.0);

// Per row partition margins w^T x_i: every block contributes x_[p,q] w_[.,q]
// and the Q partial vectors of row p are tree-summed.
std::vector<std::vector<double>> row_margins(const PrimalVector& w, const PartitionedData& data, ClusterSim& sim);

// F(w) = (1/n) sum_i f_i(w^T x_i) + lambda ||w||^2
double primal_objective(const PrimalVector& w, const PartitionedData& data, const ProblemSpec& spec, ClusterSim& sim);
double primal_objective(const PrimalVector& w, const PartitionedData& data, const ProblemSpec& spec);

// w(alpha) = (1/(2 lambda n)) sum_i alpha_i x_i. Block q sums the P partial
// products alpha_[p,.]^T x_[p,q] in a fixed tree order.
PrimalVector primal_from_dual(const DualVector& alpha, const PartitionedData& data, const ProblemSpec& spec,
                              ClusterSim& sim);
PrimalVector primal_from_dual(const DualVector& alpha, const PartitionedData& data, const ProblemSpec& spec);

// D(alpha) = (1/n) sum_i -phi*_i(-alpha_i) - lambda ||w(alpha)||^2.
// Throws InfeasibleDual (global index) outside the conjugate domain.
double dual_objective(const DualVector& alpha, const PartitionedData& data, const ProblemSpec& spec, ClusterSim& sim);
double dual_objective(const DualVector& alpha, const PartitionedData& data, const ProblemSpec& spec);

double duality_gap(const PrimalVector& w, const DualVector& alpha, const PartitionedData& data,
                   const ProblemSpec& spec);

// Gradient of f_j(w^T x_j) + lambda ||w||^2 restricted to coordinates
// [begin, end) of w_block. The margin uses only the columns of w_block.
std::vector<double> stochastic_gradient(std::span<const double> w_block, const RowView& row, double y,
                                        std::size_t begin, std::size_t end, const ProblemSpec& spec);

void check_feasible(const DualVector& alpha, const PartitionedData& data, double tol = kDualFeasibilityTol);

double squared_norm(const PrimalVector& w);

}  // namespace ddopt
