#pragma once

#include <vector>

#include <Eigen/Dense>

#include "treedual/convex_function.hpp"
#include "treedual/duality.hpp"
#include "treedual/scenario_space.hpp"

namespace treedual {

/// Semi-static hedging of a claim c with J traded assets (prices s per node)
/// and K static derivatives (payoffs C per leaf, premium function S).
/// The static position x_{-1} lives in the root block next to x_0.
struct HedgingProblem {
    FilteredTree tree = FilteredTree::trivial();
    int J = 1;
    int K = 0;
    std::vector<Eigen::VectorXd> s;             // per node
    Eigen::MatrixXd C;                          // leaves x K
    ConvexFunction premium = ConvexFunction::zero(0);
    std::vector<ConvexFunction> V;              // per leaf or one shared, scalar, nondecreasing
    std::vector<ConvexFunction> D;              // per node indicator on R^J, empty means unconstrained
    Eigen::VectorXd c;                          // claim per leaf

    void validate() const;
    [[nodiscard]] const ConvexFunction& loss(std::size_t leaf) const;
};

/// Stage blocks: (x_{-1}, x_0) at t = 0, x_t afterwards; x_T is pinned to 0. One parameter slot carrying c.
StochasticProgram hedging_compile(const HedgingProblem& h);

struct HedgingDualReport {
    double loss = 0.0;         // y in dV(...)
    double trading = 0.0;      // E_t[y ds_{t+1}] in N_D(x_t)
    double derivatives = 0.0;  // E[yC]/E[y] y in d(yS)(x_{-1})
    double terminal = 0.0;     // |x_T|
    double nonanticipativity = 0.0;
    LeafProcess p;
    bool certified = false;
};
/// x is the compiled decision, y the per-leaf multiplier of the claim slot.
HedgingDualReport hedging_dual_residual(const HedgingProblem& h, const AdaptedProcess& x, const RandomVector& y,
                                        double tol = 1e-6);

}  // namespace treedual
