#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "treedual/convex_function.hpp"
#include "treedual/extended_real.hpp"

namespace treedual {

/// weight * fn(M x + m)
struct Atom {
    ConvexFunction fn;
    Eigen::MatrixXd M;
    Eigen::VectorXd m;
    double weight = 1.0;
};

/// matrix x = rhs
struct Coupling {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
};

/// minimize sum_k atoms[k] subject to the couplings.
struct CompositeProgram {
    int dim = 0;
    std::vector<Atom> atoms;
    std::vector<Coupling> couplings;

    /// Throws std::invalid_argument on inconsistent dimensions.
    void validate() const;
    /// Objective value at x; +inf if a coupling is violated beyond tol.
    [[nodiscard]] ExtendedReal value(const Eigen::VectorXd& x, double tol = 1e-9) const;
};

struct SolveOptions {
    double tol = 1e-9;
    int max_iter = 200;
};

enum class SolveStatus { optimal, infeasible, unbounded, inconclusive };
std::string to_string(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::inconclusive;
    Eigen::VectorXd x;
    ExtendedReal value;
    /// One vector per coupling: sum_k w_k M_k' g_k + sum_c A_c' y_c = 0.
    std::vector<Eigen::VectorXd> multipliers;
    /// g_k in the subdifferential of atoms[k].fn at M_k x + m_k (unweighted).
    std::vector<Eigen::VectorXd> atom_subgradients;
    /// Infinity norm of the stationarity equation above.
    double stationarity = 0.0;
    /// Recession direction with negative slope when unbounded.
    Eigen::VectorXd direction;
    int iterations = 0;
};

SolveResult minimize(const CompositeProgram& prog, const SolveOptions& opts = {});

struct BruteForceResult {
    Eigen::VectorXd x;
    ExtendedReal value;
    /// Lipschitz estimate * resolution * sqrt(d).
    double bound = 0.0;
    long points = 0;
};

/// Grid search over [lo, hi]; couplings are accepted within
/// resolution * ||row||_1. Dimension at most 3.
BruteForceResult brute_force_minimize(const CompositeProgram& prog, const Eigen::VectorXd& lo,
                                      const Eigen::VectorXd& hi, double resolution);

}  // namespace treedual
