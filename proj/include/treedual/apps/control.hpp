#pragma once

#include <vector>

#include <Eigen/Dense>

#include "treedual/convex_function.hpp"
#include "treedual/duality.hpp"
#include "treedual/scenario_space.hpp"

namespace treedual {

/// X_t - X_{t-1} = A_t X_{t-1} + B_t U_{t-1} + W_t for t >= 1, cost sum_t L_t(X_t, U_t).
/// A, B, W and L are stored per node; the root entries of A, B, W are unused.
struct ControlSystem {
    FilteredTree tree = FilteredTree::trivial();
    int N = 1;
    int M = 1;
    std::vector<Eigen::MatrixXd> A;
    std::vector<Eigen::MatrixXd> B;
    std::vector<Eigen::VectorXd> W;
    std::vector<ConvexFunction> L;

    void validate() const;
};

/// Decision x_t = (X_t, U_t); parameter slots u_t carry W_t for t = 1..T.
StochasticProgram control_compile(const ControlSystem& cs);
/// Splits a compiled decision into states and controls.
void control_split(const ControlSystem& cs, const AdaptedProcess& x, AdaptedProcess& X, AdaptedProcess& U);
AdaptedProcess control_join(const ControlSystem& cs, const AdaptedProcess& X, const AdaptedProcess& U);
/// Adapted costate (stage 0 block empty) from the parameter part of a dual point.
AdaptedProcess control_costate(const ControlSystem& cs, const RandomVector& y);

struct LqSolution {
    AdaptedProcess X;
    AdaptedProcess U;
    /// Gradient of the node value functions; empty block at stage 0.
    AdaptedProcess y;
    double value = 0.0;
};
/// Exact per-node dynamic program for quadratic stage costs whose control
/// block is positive definite. Throws std::invalid_argument otherwise.
LqSolution lq_riccati_oracle(const ControlSystem& cs);

struct ControlDualReport {
    std::vector<double> node_residuals;
    double stationarity = 0.0;
    double dynamics = 0.0;
    double nonanticipativity = 0.0;
    LeafProcess p;
    bool certified = false;
};
ControlDualReport control_dual_residual(const ControlSystem& cs, const AdaptedProcess& X, const AdaptedProcess& U,
                                        const AdaptedProcess& y, double tol = 1e-6);

}  // namespace treedual
