#include "treedual/convex_function.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "treedual/convex_calculus.hpp"

namespace treedual {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

bool all_finite(const MatrixXd& m) { return m.allFinite(); }

}  // namespace

ConvexFunction ConvexFunction::quadratic(MatrixXd Q, VectorXd b, double c) {
    const auto d = b.size();
    require(Q.rows() == d && Q.cols() == d, "quadratic: Q must be d x d");
    require(all_finite(Q) && b.allFinite() && std::isfinite(c), "quadratic: non-finite data");
    require((Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + Q.cwiseAbs().maxCoeff()) || d == 0,
            "quadratic: Q not symmetric");
    if (d > 0) {
        Q = 0.5 * (Q + Q.transpose());
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q, Eigen::EigenvaluesOnly);
        require(es.eigenvalues().minCoeff() >= -1e-10, "quadratic: Q not positive semidefinite");
    }
    return ConvexFunction(static_cast<int>(d),
                          std::make_shared<const detail::FunctionNode>(detail::FunctionNode{Quadratic{Q, b, c}}));
}

ConvexFunction ConvexFunction::affine(VectorXd b, double c) {
    require(b.allFinite() && std::isfinite(c), "affine: non-finite data");
    const int d = static_cast<int>(b.size());
    return ConvexFunction(d, std::make_shared<const detail::FunctionNode>(detail::FunctionNode{Affine{b, c}}));
}

ConvexFunction ConvexFunction::zero(int dim) {
    require(dim >= 0, "zero: negative dimension");
    return affine(VectorXd::Zero(dim), 0.0);
}

ConvexFunction ConvexFunction::polyhedron(MatrixXd A, VectorXd a, MatrixXd C, VectorXd c, int dim) {
    if (A.size() == 0) A.resize(a.size(), dim);
    if (C.size() == 0) C.resize(c.size(), dim);
    require(dim >= 0 && A.cols() == dim && C.cols() == dim, "polyhedron: column count must equal dim");
    require(A.rows() == a.size() && C.rows() == c.size(), "polyhedron: rhs length mismatch");
    require(all_finite(A) && a.allFinite() && all_finite(C) && c.allFinite(), "polyhedron: non-finite data");
    return ConvexFunction(
        dim, std::make_shared<const detail::FunctionNode>(detail::FunctionNode{IndicatorPolyhedron{A, a, C, c}}));
}

ConvexFunction ConvexFunction::max_affine(MatrixXd B, VectorXd c) {
    require(B.rows() >= 1, "max_affine: needs at least one piece");
    require(B.rows() == c.size(), "max_affine: offset length mismatch");
    require(all_finite(B) && c.allFinite(), "max_affine: non-finite data");
    const int d = static_cast<int>(B.cols());
    return ConvexFunction(d, std::make_shared<const detail::FunctionNode>(detail::FunctionNode{MaxOfAffine{B, c}}));
}

ConvexFunction ConvexFunction::sum(std::vector<ConvexFunction> terms, int dim) {
    for (const auto& t : terms) require(t.dim() == dim, "sum: term dimension mismatch");
    return ConvexFunction(dim, std::make_shared<const detail::FunctionNode>(detail::FunctionNode{Sum{std::move(terms)}}));
}

ConvexFunction ConvexFunction::precompose(ConvexFunction inner, MatrixXd M, VectorXd m) {
    require(M.rows() == inner.dim() && m.size() == inner.dim(), "precompose: map does not land in inner domain");
    require(all_finite(M) && m.allFinite(), "precompose: non-finite data");
    const int d = static_cast<int>(M.cols());
    return ConvexFunction(d, std::make_shared<const detail::FunctionNode>(
                                 detail::FunctionNode{Precompose{std::move(inner), std::move(M), std::move(m)}}));
}

ConvexFunction ConvexFunction::scale(double lambda, ConvexFunction fn) {
    require(std::isfinite(lambda) && lambda >= 0.0, "scale: lambda must be finite and >= 0");
    const int d = fn.dim();
    return ConvexFunction(d,
                          std::make_shared<const detail::FunctionNode>(detail::FunctionNode{Scale{lambda, std::move(fn)}}));
}

ConvexFunction ConvexFunction::box(VectorXd lo, VectorXd hi) {
    require(lo.size() == hi.size(), "box: bound length mismatch");
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        require(!std::isnan(lo(i)) && !std::isnan(hi(i)), "box: NaN bound");
        require(lo(i) != HUGE_VAL && hi(i) != -HUGE_VAL, "box: invalid infinite bound");
        require(lo(i) <= hi(i), "box: empty interval");
    }
    const int d = static_cast<int>(lo.size());
    return ConvexFunction(d, std::make_shared<const detail::FunctionNode>(detail::FunctionNode{IndicatorBox{lo, hi}}));
}

ConvexFunction ConvexFunction::monotone_compose(ConvexFunction outer, ConvexFunction inner) {
    require(outer.dim() == 1, "monotone_compose: outer must be scalar");
    require(is_polyhedral(inner), "monotone_compose: inner must be polyhedral");
    require(recession(outer, VectorXd::Constant(1, -1.0)) <= 0.0, "monotone_compose: outer must be nondecreasing");
    const int d = inner.dim();
    return ConvexFunction(d, std::make_shared<const detail::FunctionNode>(
                                 detail::FunctionNode{MonotoneCompose{std::move(outer), std::move(inner)}}));
}

std::string ConvexFunction::kind() const {
    static const char* names[] = {"quadratic", "affine", "polyhedron", "max_affine", "sum",
                                  "precompose", "scale", "box", "monotone_compose"};
    return names[node_->v.index()];
}

bool is_polyhedral(const ConvexFunction& fn) {
    if (const auto* q = fn.as<Quadratic>()) return q->Q.size() == 0 || q->Q.cwiseAbs().maxCoeff() == 0.0;
    if (const auto* s = fn.as<Sum>()) {
        for (const auto& t : s->terms)
            if (!is_polyhedral(t)) return false;
        return true;
    }
    if (const auto* p = fn.as<Precompose>()) return is_polyhedral(p->inner);
    if (const auto* s = fn.as<Scale>()) return s->lambda == 0.0 || is_polyhedral(s->fn);
    if (const auto* m = fn.as<MonotoneCompose>()) return is_polyhedral(m->outer);
    return true;
}

ExtendedReal evaluate(const ConvexFunction& fn, const VectorXd& x, double tol) {
    if (x.size() != fn.dim()) throw std::invalid_argument("evaluate: dimension mismatch");
    const auto inf = ExtendedReal::plus_infinity();
    if (const auto* q = fn.as<Quadratic>()) return 0.5 * x.dot(q->Q * x) + q->b.dot(x) + q->c;
    if (const auto* a = fn.as<Affine>()) return a->b.dot(x) + a->c;
    if (const auto* p = fn.as<IndicatorPolyhedron>()) {
        for (Eigen::Index i = 0; i < p->A.rows(); ++i)
            if (p->A.row(i).dot(x) - p->a(i) > tol * (1.0 + std::abs(p->a(i)))) return inf;
        for (Eigen::Index i = 0; i < p->C.rows(); ++i)
            if (std::abs(p->C.row(i).dot(x) - p->c(i)) > tol * (1.0 + std::abs(p->c(i)))) return inf;
        return 0.0;
    }
    if (const auto* m = fn.as<MaxOfAffine>()) return (m->B * x + m->c).maxCoeff();
    if (const auto* s = fn.as<Sum>()) {
        ExtendedReal total = 0.0;
        for (const auto& t : s->terms) {
            ExtendedReal v = evaluate(t, x, tol);
            if (v.is_plus_infinity()) return inf;
            total += v;
        }
        return total;
    }
    if (const auto* p = fn.as<Precompose>()) return evaluate(p->inner, p->M * x + p->m, tol);
    if (const auto* s = fn.as<Scale>()) {
        ExtendedReal v = evaluate(s->fn, x, tol);
        if (v.is_plus_infinity()) return inf;
        if (s->lambda == 0.0) return 0.0;
        return s->lambda * v;
    }
    if (const auto* b = fn.as<IndicatorBox>()) {
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (std::isfinite(b->lo(i)) && x(i) < b->lo(i) - tol * (1.0 + std::abs(b->lo(i)))) return inf;
            if (std::isfinite(b->hi(i)) && x(i) > b->hi(i) + tol * (1.0 + std::abs(b->hi(i)))) return inf;
        }
        return 0.0;
    }
    const auto& mc = std::get<MonotoneCompose>(fn.node().v);
    ExtendedReal inner = evaluate(mc.inner, x, tol);
    if (inner.is_plus_infinity()) return inf;
    return evaluate(mc.outer, VectorXd::Constant(1, inner.value()), tol);
}

}  // namespace treedual
