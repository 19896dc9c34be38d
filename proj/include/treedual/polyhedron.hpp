#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "treedual/extended_real.hpp"

namespace treedual {

/// {x : Ax <= a, Cx = c}.
struct Polyhedron {
    Eigen::MatrixXd A;
    Eigen::VectorXd a;
    Eigen::MatrixXd C;
    Eigen::VectorXd c;

    static Polyhedron whole(int dim);
    static Polyhedron from_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
    static Polyhedron make(Eigen::MatrixXd A, Eigen::VectorXd a, Eigen::MatrixXd C, Eigen::VectorXd c, int dim);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(A.cols()); }
    [[nodiscard]] bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;
    /// Largest scaled constraint violation at x (0 inside).
    [[nodiscard]] double violation(const Eigen::VectorXd& x) const;
    [[nodiscard]] Polyhedron intersect(const Polyhedron& other) const;
    void add_inequality(const Eigen::RowVectorXd& row, double rhs);
    void add_equality(const Eigen::RowVectorXd& row, double rhs);
};

std::optional<Eigen::VectorXd> feasible_point(const Polyhedron& poly);
bool is_empty(const Polyhedron& poly);
/// sup { v'x : x in poly }; -inf when empty.
ExtendedReal support(const Polyhedron& poly, const Eigen::VectorXd& v);
/// sup { v'Lx : x in poly }.
ExtendedReal support(const Polyhedron& poly, const Eigen::MatrixXd& L, const Eigen::VectorXd& v);

/// Inequalities that hold with equality on the whole polyhedron.
struct ImplicitEqualities {
    std::vector<bool> implicit;
    /// A point strictly satisfying every other inequality.
    Eigen::VectorXd point;
    bool empty = false;
};
ImplicitEqualities implicit_equalities(const Polyhedron& poly, double tol = 1e-7);

/// Chebyshev center of the polyhedron inside its affine hull (radius capped
/// at 1); a relative interior point.
std::optional<Eigen::VectorXd> relative_interior_point(const Polyhedron& poly);

struct PosHullResult {
    bool linear = false;
    /// Polyhedral cones are always closed.
    bool closed = true;
    /// Dimension of the subspace when linear.
    int dimension = 0;
    /// Direction g in the cone with -g outside it, when not linear.
    Eigen::VectorXd witness;
};

/// Is pos(poly - anchor) a linear subspace? Throws std::invalid_argument if
/// the anchor is not in the polyhedron.
PosHullResult pos_hull_linear(const Polyhedron& poly, const Eigen::VectorXd& anchor, double tol = 1e-9);
/// Same for the image cone pos(L(poly - anchor)).
PosHullResult pos_hull_linear(const Polyhedron& poly, const Eigen::MatrixXd& L, const Eigen::VectorXd& anchor,
                              double tol = 1e-9);

/// g in pos(L(poly - anchor))?
bool cone_contains(const Polyhedron& poly, const Eigen::MatrixXd& L, const Eigen::VectorXd& anchor,
                   const Eigen::VectorXd& g, double tol = 1e-9);

/// Fourier-Motzkin elimination of all but the first `keep` coordinates.
/// Returns nullopt when the row count exceeds `row_cap`.
std::optional<Polyhedron> fm_project(const Polyhedron& poly, int keep, int row_cap = 4000);
/// H-description of L(poly).
std::optional<Polyhedron> fm_image(const Polyhedron& poly, const Eigen::MatrixXd& L, int row_cap = 4000);

/// L(inner) subset of outer, checked row by row with LPs.
/// Euclidean distance from v to the normal cone of poly at x; +inf when x is
/// outside poly by more than tol.
double normal_cone_distance(const Polyhedron& poly, const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                            double tol = 1e-7);

bool image_included(const Polyhedron& inner, const Eigen::MatrixXd& L, const Polyhedron& outer, double tol = 1e-7);

}  // namespace treedual
