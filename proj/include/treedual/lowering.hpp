#pragma once

#include <Eigen/Dense>

#include "treedual/convex_function.hpp"
#include "treedual/qp.hpp"

namespace treedual {

/// Epigraphical form of a function of the algebra:
///   f(z) = min_s { 1/2 w'Pw + q'w + r : Gw <= h, Ew = e },  w = (z, s).
struct LoweredFunction {
    int dim = 0;
    int aux = 0;
    Eigen::MatrixXd P;
    Eigen::VectorXd q;
    double r = 0.0;
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    Eigen::MatrixXd E;
    Eigen::VectorXd e;

    [[nodiscard]] int size() const noexcept { return dim + aux; }
    [[nodiscard]] bool has_quadratic() const { return P.size() > 0 && P.cwiseAbs().maxCoeff() > 0.0; }
};

LoweredFunction lower(const ConvexFunction& fn);

/// The lowered function as a QP over w.
QuadraticProgram to_qp(const LoweredFunction& lf);

/// Restriction of the lowered constraint set to the domain description:
/// the polyhedron {w : Gw <= h, Ew = e} whose projection on z is dom f.
struct LiftedDomain {
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    Eigen::MatrixXd E;
    Eigen::VectorXd e;
    int dim = 0;
    int aux = 0;
};
LiftedDomain lifted_domain(const LoweredFunction& lf);

}  // namespace treedual
