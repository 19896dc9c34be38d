#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "treedual/convex_function.hpp"
#include "treedual/extended_real.hpp"
#include "treedual/scenario_space.hpp"
#include "treedual/solver.hpp"

namespace treedual {

/// minimize E f(x, ubar) over adapted x. The integrand of leaf w acts on
/// (x_0, ..., x_T, u) with x_t of size dims[t] and u of size m.
struct StochasticProgram {
    FilteredTree tree = FilteredTree::trivial();
    std::vector<int> dims;
    int m = 0;
    /// One integrand per leaf, or a single one shared by all leaves.
    std::vector<ConvexFunction> integrands;
    RandomVector ubar;

    void validate() const;
    [[nodiscard]] int n_total() const;
    [[nodiscard]] const ConvexFunction& integrand(std::size_t leaf) const;
    /// Offset of the stage-t block inside the leaf argument.
    [[nodiscard]] int stage_offset(int t) const;
    /// (x lifted to the leaf, u).
    [[nodiscard]] Eigen::VectorXd leaf_argument(const AdaptedProcess& x, std::size_t leaf, const Eigen::VectorXd& u) const;
};

struct DualPoint {
    LeafProcess p;
    RandomVector y;
};

ExtendedReal primal_value(const StochasticProgram& sp, const AdaptedProcess& x);

struct DualValue {
    ExtendedReal value;
    /// E_t p_t = 0 within tol.
    bool feasible = false;
    double nonanticipativity = 0.0;
};
/// <ubar, y> - E f*(p, y)
DualValue dual_value(const StochasticProgram& sp, const DualPoint& dp, double tol = 1e-10);

struct KktReport {
    std::vector<double> leaf_residuals;
    double max_leaf_residual = 0.0;
    double nonanticipativity = 0.0;
    bool certified = false;
};
/// Fenchel residual of (p, y) against f at (x, ubar) on every leaf.
KktReport kkt_residual(const StochasticProgram& sp, const AdaptedProcess& x, const DualPoint& dp, double tol = 1e-6);

struct GapReport {
    ExtendedReal primal;
    ExtendedReal dual;
    ExtendedReal gap;
    bool dual_feasible = false;
};
GapReport duality_gap(const StochasticProgram& sp, const AdaptedProcess& x, const DualPoint& dp, double tol = 1e-10);

enum class CertificateStatus { certified_optimal, gap_positive, infeasible, unbounded, inconclusive };
std::string to_string(CertificateStatus s);

struct Certificate {
    CertificateStatus status = CertificateStatus::inconclusive;
    ExtendedReal primal;
    ExtendedReal dual;
    ExtendedReal gap;
    KktReport kkt;
    double tol = 1e-6;
    std::string note;
};

/// Checks a candidate pair. Thresholds are tol * max(1, |primal|).
Certificate certify(const StochasticProgram& sp, const AdaptedProcess& x, const DualPoint& dp, double tol = 1e-6);

struct StochasticSolution {
    AdaptedProcess x;
    DualPoint dual;
    Certificate certificate;
    SolveStatus solver_status = SolveStatus::inconclusive;
    /// Leaf recession direction when unbounded.
    Eigen::VectorXd direction;
};

StochasticSolution solve(const StochasticProgram& sp, double tol = 1e-6, int max_iter = 200);

/// phi(z, u) = inf { E f(x, u) : x - z adapted }. Throws std::runtime_error
/// when the inner solve is inconclusive.
ExtendedReal value_function_probe(const StochasticProgram& sp, const LeafProcess& z, const RandomVector& u);

/// The composite program behind solve and value_function_probe; variables
/// are the adapted node values in node order.
CompositeProgram build_program(const StochasticProgram& sp, const LeafProcess* z, const RandomVector& u);
/// Offsets of node blocks in the composite program variables.
std::vector<int> node_offsets(const StochasticProgram& sp);

}  // namespace treedual
