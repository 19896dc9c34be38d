#pragma once

#include <vector>

#include "treedual/convex_function.hpp"
#include "treedual/duality.hpp"
#include "treedual/extended_real.hpp"
#include "treedual/scenario_space.hpp"

namespace treedual {

/// minimize E sum_t K_t(x_t, x_t - x_{t-1}) with x_{-1} = 0; K stored per node on R^d x R^d.
struct LagrangeProblem {
    FilteredTree tree = FilteredTree::trivial();
    int d = 1;
    std::vector<ConvexFunction> K;

    void validate() const;
};

/// Integrand sum_t K_t(x_t, dx_t + u_t) with ubar = 0.
StochasticProgram lagrange_compile(const LagrangeProblem& lp);
/// inf_v { K(x, v) - v.y } at a node.
ExtendedReal hamiltonian(const LagrangeProblem& lp, int node, const Eigen::VectorXd& x, const Eigen::VectorXd& y);
/// Adapted projection of the parameter part of a dual point.
AdaptedProcess lagrange_costate(const LagrangeProblem& lp, const RandomVector& y);

struct LagrangeDualReport {
    std::vector<double> node_residuals;
    double max_residual = 0.0;
    double nonanticipativity = 0.0;
    LeafProcess p;
    bool certified = false;
};
/// Checks (E_t dy_{t+1}, y_t) in dK_t(x_t, dx_t) at every node, y_{T+1} = 0.
LagrangeDualReport lagrange_dual_residual(const LagrangeProblem& lp, const AdaptedProcess& x, const AdaptedProcess& y,
                                          double tol = 1e-6);

}  // namespace treedual
