#pragma once

#include <vector>

#include <Eigen/Dense>

#include "treedual/convex_function.hpp"
#include "treedual/duality.hpp"
#include "treedual/scenario_space.hpp"

namespace treedual {

/// Data attached to a stage-t node; every function acts on the history
/// (x_0, ..., x_t). Inequalities are f_j <= 0 with f_j affine or max-affine.
struct MathNode {
    ConvexFunction f0 = ConvexFunction::zero(0);
    std::vector<ConvexFunction> F;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
};

/// minimize E f_0(x) subject to F(x) <= 0 and Ax = b, x adapted.
struct MathProgram {
    FilteredTree tree = FilteredTree::trivial();
    std::vector<int> dims;
    std::vector<MathNode> nodes;

    void validate() const;
    /// Number of inequality and equality slots on every path.
    [[nodiscard]] int num_inequalities() const;
    [[nodiscard]] int num_equalities() const;
};

/// Integrand f_0(x) + indicator{F(x) + u_F <= 0, Ax + u_E = b}, ubar = 0.
/// Parameter slots: all inequalities along the path in stage order, then all equalities.
StochasticProgram mathprog_compile(const MathProgram& mp);

struct MathProgKkt {
    std::vector<double> leaf_residuals;
    double stationarity = 0.0;
    double primal_feasibility = 0.0;
    double dual_cone = 0.0;
    double complementarity = 0.0;
    double nonanticipativity = 0.0;
    bool certified = false;
};
MathProgKkt mathprog_kkt(const MathProgram& mp, const AdaptedProcess& x, const LeafProcess& p, const RandomVector& y,
                         double tol = 1e-6);

}  // namespace treedual
