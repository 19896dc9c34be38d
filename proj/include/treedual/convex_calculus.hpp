#pragma once

#include <optional>

#include <Eigen/Dense>

#include "treedual/convex_function.hpp"
#include "treedual/extended_real.hpp"
#include "treedual/polyhedron.hpp"

namespace treedual {

struct ConjugateValue {
    ExtendedReal value;
    /// The supremum is attained (at `argmax`).
    bool attained = false;
    /// True when a closed form was used; otherwise KKT residual of the solve.
    bool closed_form = false;
    double residual = 0.0;
    Eigen::VectorXd argmax;
};

/// f*(v) = sup_x { <x,v> - f(x) }.
ConjugateValue conjugate_eval(const ConvexFunction& fn, const Eigen::VectorXd& v);
ExtendedReal conjugate(const ConvexFunction& fn, const Eigen::VectorXd& v);

/// Fenchel residual f(x) + f*(v) - <x,v>; +inf when x is outside dom f or
/// v outside dom f*. v is a subgradient at x iff the residual is <= tol.
double subdifferential_check(const ConvexFunction& fn, const Eigen::VectorXd& x, const Eigen::VectorXd& v);

/// f^inf(d). Throws std::domain_error for an empty domain.
ExtendedReal recession(const ConvexFunction& fn, const Eigen::VectorXd& dir);

/// sup { <v,x> : x in dom f }. Throws std::domain_error for an empty domain.
ExtendedReal domain_support(const ConvexFunction& fn, const Eigen::VectorXd& v);

/// Minimum-norm subgradient at x; nullopt if x is outside the domain or the
/// subdifferential is empty.
std::optional<Eigen::VectorXd> subgradient(const ConvexFunction& fn, const Eigen::VectorXd& x);

/// f* as a member of the algebra when one exists (quadratic with Q > 0,
/// affine, box, and positive scalings of these).
std::optional<ConvexFunction> conjugate_function(const ConvexFunction& fn);

/// Lifted description {w = (x, s) : ...} whose projection on the first
/// dim coordinates is dom f.
Polyhedron lifted_domain_polyhedron(const ConvexFunction& fn);
/// dom f by Fourier-Motzkin; nullopt when the row cap is exceeded.
std::optional<Polyhedron> domain_polyhedron(const ConvexFunction& fn, int row_cap = 4000);

struct GridResult {
    ExtendedReal value;
    Eigen::VectorXd argmax;
    /// L * resolution * sqrt(d), L estimated from grid differences.
    double bound = 0.0;
    long points = 0;
};

/// max over the grid lo + k * resolution (box corners included) of <x,v> - f(x).
GridResult grid_conjugate_oracle(const ConvexFunction& fn, const Eigen::VectorXd& v, const Eigen::VectorXd& lo,
                                 const Eigen::VectorXd& hi, double resolution);

struct InfConvolution {
    /// (f1 + f2)*(v).
    ExtendedReal value;
    /// y with f1*(v - y) + f2*(y) = value when attained.
    Eigen::VectorXd y;
    /// 0 in the relative core of dom f1 - dom f2.
    bool qualified = false;
    bool attained = false;
    double residual = 0.0;
};

InfConvolution inf_convolution_conjugate(const ConvexFunction& f1, const ConvexFunction& f2, const Eigen::VectorXd& v,
                                         double tol = 1e-6);

}  // namespace treedual
