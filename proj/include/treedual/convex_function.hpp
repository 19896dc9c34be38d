#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "treedual/extended_real.hpp"

namespace treedual {

namespace detail {
struct FunctionNode;
}

/// Closed proper convex function on R^d built from a finite algebra of variants.
class ConvexFunction {
public:
    /// 1/2 x'Qx + b'x + c, Q symmetric positive semidefinite.
    static ConvexFunction quadratic(Eigen::MatrixXd Q, Eigen::VectorXd b, double c = 0.0);
    static ConvexFunction affine(Eigen::VectorXd b, double c = 0.0);
    static ConvexFunction zero(int dim);
    /// Indicator of {x : Ax <= a, Cx = c}.
    static ConvexFunction polyhedron(Eigen::MatrixXd A, Eigen::VectorXd a, Eigen::MatrixXd C, Eigen::VectorXd c,
                                     int dim);
    /// max_i (B.row(i) x + c_i); at least one piece.
    static ConvexFunction max_affine(Eigen::MatrixXd B, Eigen::VectorXd c);
    static ConvexFunction sum(std::vector<ConvexFunction> terms, int dim);
    /// x -> inner(Mx + m).
    static ConvexFunction precompose(ConvexFunction inner, Eigen::MatrixXd M, Eigen::VectorXd m);
    /// lambda * fn; lambda = 0 gives the indicator of the closed domain of fn.
    static ConvexFunction scale(double lambda, ConvexFunction fn);
    /// Indicator of {lo <= x <= hi}; entries may be infinite.
    static ConvexFunction box(Eigen::VectorXd lo, Eigen::VectorXd hi);
    /// outer(inner(x)) with outer scalar and nondecreasing, inner polyhedral.
    static ConvexFunction monotone_compose(ConvexFunction outer, ConvexFunction inner);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] std::string kind() const;

    template <class T>
    [[nodiscard]] const T* as() const;

    [[nodiscard]] const detail::FunctionNode& node() const { return *node_; }

private:
    ConvexFunction(int dim, std::shared_ptr<const detail::FunctionNode> node) : dim_(dim), node_(std::move(node)) {}

    int dim_ = 0;
    std::shared_ptr<const detail::FunctionNode> node_;
};

struct Quadratic {
    Eigen::MatrixXd Q;
    Eigen::VectorXd b;
    double c = 0.0;
};
struct Affine {
    Eigen::VectorXd b;
    double c = 0.0;
};
struct IndicatorPolyhedron {
    Eigen::MatrixXd A;
    Eigen::VectorXd a;
    Eigen::MatrixXd C;
    Eigen::VectorXd c;
};
struct MaxOfAffine {
    Eigen::MatrixXd B;
    Eigen::VectorXd c;
};
struct Sum {
    std::vector<ConvexFunction> terms;
};
struct Precompose {
    ConvexFunction inner;
    Eigen::MatrixXd M;
    Eigen::VectorXd m;
};
struct Scale {
    double lambda = 1.0;
    ConvexFunction fn;
};
struct IndicatorBox {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
};
struct MonotoneCompose {
    ConvexFunction outer;
    ConvexFunction inner;
};

using FunctionVariant = std::variant<Quadratic, Affine, IndicatorPolyhedron, MaxOfAffine, Sum, Precompose, Scale,
                                     IndicatorBox, MonotoneCompose>;

namespace detail {
struct FunctionNode {
    FunctionVariant v;
};
}  // namespace detail

template <class T>
const T* ConvexFunction::as() const {
    return std::get_if<T>(&node_->v);
}

/// True if fn is finite-valued and affine-or-constant on its domain pieces,
/// i.e. its lowering has no quadratic term.
bool is_polyhedral(const ConvexFunction& fn);

/// Exact value, +inf outside the domain. Domain membership uses the absolute
/// tolerance `tol` scaled by 1 + |rhs|.
ExtendedReal evaluate(const ConvexFunction& fn, const Eigen::VectorXd& x, double tol = 1e-9);

}  // namespace treedual
