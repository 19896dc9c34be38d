#pragma once

#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace treedual {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// minimize 1/2 x'Px + q'x + r  subject to  Ax = b,  Gx <= h.
/// P must be symmetric positive semidefinite (full storage).
struct QuadraticProgram {
    SparseMatrix P;
    Eigen::VectorXd q;
    double r = 0.0;
    SparseMatrix A;
    Eigen::VectorXd b;
    SparseMatrix G;
    Eigen::VectorXd h;

    /// Empty program with n free variables and zero objective.
    static QuadraticProgram with_dim(int n);
    [[nodiscard]] int num_vars() const noexcept { return static_cast<int>(q.size()); }
};

enum class QpStatus { optimal, infeasible, unbounded, max_iterations };
std::string to_string(QpStatus s);

struct QpOptions {
    double tol = 1e-9;
    int max_iter = 150;
    bool polish = true;
    /// When false the caller guarantees the objective is bounded below on
    /// the feasible set.
    bool detect_unbounded = true;
};

/// KKT convention: Px + q + A'y + G'z = 0, z >= 0, z'(h - Gx) = 0.
struct QpResult {
    QpStatus status = QpStatus::max_iterations;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    Eigen::VectorXd z;
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double complementarity = 0.0;
    /// Direction with Pd = 0, Ad = 0, Gd <= 0, q'd < 0 when unbounded.
    Eigen::VectorXd ray;
    int iterations = 0;
    bool polished = false;
};

/// Primal-dual interior point method (Mehrotra predictor-corrector) followed
/// by an active-set polishing step. Singular P is handled by proximal point
/// iterations, which select a solution close to the origin. Deterministic.
QpResult solve_qp(const QuadraticProgram& qp, const QpOptions& opts = {});

/// Maximal violation of the KKT conditions of `qp` at (x, y, z).
struct KktResiduals {
    double primal = 0.0;
    double dual = 0.0;
    double complementarity = 0.0;
};
KktResiduals kkt_residuals(const QuadraticProgram& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& z);

SparseMatrix to_sparse(const Eigen::MatrixXd& m);

/// Dense convenience wrapper; empty matrices may be passed for absent blocks.
QpResult solve_dense(const Eigen::MatrixXd& P, const Eigen::VectorXd& q, const Eigen::MatrixXd& G,
                     const Eigen::VectorXd& h, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     const QpOptions& opts = {});

}  // namespace treedual
