#include "treedual/polyhedron.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

#include "treedual/qp.hpp"

namespace treedual {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

namespace {

QpResult lp(const VectorXd& c, const Polyhedron& p, bool detect_unbounded) {
    QpOptions o;
    o.detect_unbounded = detect_unbounded;
    return solve_dense(MatrixXd(), c, p.A, p.a, p.C, p.c, o);
}

MatrixXd null_space(const MatrixXd& M, int n) {
    if (M.rows() == 0) return MatrixXd::Identity(n, n);
    Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullV);
    const VectorXd sv = svd.singularValues();
    int rank = 0;
    const double cut = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

int matrix_rank(const MatrixXd& M) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<MatrixXd> svd(M);
    const VectorXd sv = svd.singularValues();
    const double cut = 1e-10 * std::max(1.0, sv(0));
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++r;
    return r;
}

MatrixXd select_rows(const MatrixXd& M, const std::vector<int>& rows) {
    MatrixXd out(static_cast<Eigen::Index>(rows.size()), M.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = M.row(rows[i]);
    return out;
}

VectorXd select(const VectorXd& v, const std::vector<int>& rows) {
    VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
    return out;
}

}  // namespace

Polyhedron Polyhedron::whole(int dim) { return make(MatrixXd(0, dim), VectorXd(0), MatrixXd(0, dim), VectorXd(0), dim); }

Polyhedron Polyhedron::make(MatrixXd A, VectorXd a, MatrixXd C, VectorXd c, int dim) {
    if (A.size() == 0) A.resize(a.size(), dim);
    if (C.size() == 0) C.resize(c.size(), dim);
    if (A.cols() != dim || C.cols() != dim || A.rows() != a.size() || C.rows() != c.size())
        throw std::invalid_argument("polyhedron: inconsistent dimensions");
    return Polyhedron{std::move(A), std::move(a), std::move(C), std::move(c)};
}

Polyhedron Polyhedron::from_box(const VectorXd& lo, const VectorXd& hi) {
    const int d = static_cast<int>(lo.size());
    Polyhedron p = whole(d);
    for (int i = 0; i < d; ++i) {
        RowVectorXd e = RowVectorXd::Zero(d);
        e(i) = 1.0;
        if (std::isfinite(hi(i))) p.add_inequality(e, hi(i));
        if (std::isfinite(lo(i))) p.add_inequality(-e, -lo(i));
    }
    return p;
}

void Polyhedron::add_inequality(const RowVectorXd& row, double rhs) {
    A.conservativeResize(A.rows() + 1, Eigen::NoChange);
    a.conservativeResize(a.size() + 1);
    A.row(A.rows() - 1) = row;
    a(a.size() - 1) = rhs;
}

void Polyhedron::add_equality(const RowVectorXd& row, double rhs) {
    C.conservativeResize(C.rows() + 1, Eigen::NoChange);
    c.conservativeResize(c.size() + 1);
    C.row(C.rows() - 1) = row;
    c(c.size() - 1) = rhs;
}

double Polyhedron::violation(const VectorXd& x) const {
    double v = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) v = std::max(v, (A.row(i).dot(x) - a(i)) / (1.0 + std::abs(a(i))));
    for (Eigen::Index i = 0; i < C.rows(); ++i)
        v = std::max(v, std::abs(C.row(i).dot(x) - c(i)) / (1.0 + std::abs(c(i))));
    return v;
}

bool Polyhedron::contains(const VectorXd& x, double tol) const { return x.size() == dim() && violation(x) <= tol; }

Polyhedron Polyhedron::intersect(const Polyhedron& o) const {
    if (o.dim() != dim()) throw std::invalid_argument("intersect: dimension mismatch");
    Polyhedron p = *this;
    for (Eigen::Index i = 0; i < o.A.rows(); ++i) p.add_inequality(o.A.row(i), o.a(i));
    for (Eigen::Index i = 0; i < o.C.rows(); ++i) p.add_equality(o.C.row(i), o.c(i));
    return p;
}

std::optional<VectorXd> feasible_point(const Polyhedron& poly) {
    const QpResult r = lp(VectorXd::Zero(poly.dim()), poly, false);
    if (r.status != QpStatus::optimal) return std::nullopt;
    return r.x;
}

bool is_empty(const Polyhedron& poly) { return !feasible_point(poly).has_value(); }

ExtendedReal support(const Polyhedron& poly, const VectorXd& v) {
    if (v.size() != poly.dim()) throw std::invalid_argument("support: dimension mismatch");
    const QpResult r = lp(-v, poly, true);
    if (r.status == QpStatus::unbounded) return ExtendedReal::plus_infinity();
    if (r.status == QpStatus::infeasible) return ExtendedReal::minus_infinity();
    return v.dot(r.x);
}

ExtendedReal support(const Polyhedron& poly, const MatrixXd& L, const VectorXd& v) {
    return support(poly, VectorXd(L.transpose() * v));
}

ImplicitEqualities implicit_equalities(const Polyhedron& poly, double tol) {
    const int n = poly.dim();
    const int m = static_cast<int>(poly.A.rows());
    ImplicitEqualities out;
    out.implicit.assign(static_cast<std::size_t>(m), true);
    std::vector<int> undecided(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) undecided[i] = i;
    std::vector<VectorXd> points;
    while (!undecided.empty()) {
        const int k = static_cast<int>(undecided.size());
        Polyhedron aug = Polyhedron::whole(n + k);
        aug.A = MatrixXd::Zero(m + 2 * k, n + k);
        aug.a = VectorXd::Zero(m + 2 * k);
        aug.A.leftCols(n).topRows(m) = poly.A;
        aug.a.head(m) = poly.a;
        for (int j = 0; j < k; ++j) {
            aug.A(undecided[j], n + j) = 1.0;
            aug.A(m + j, n + j) = 1.0;
            aug.a(m + j) = 1.0;
            aug.A(m + k + j, n + j) = -1.0;
        }
        aug.C = MatrixXd::Zero(poly.C.rows(), n + k);
        aug.C.leftCols(n) = poly.C;
        aug.c = poly.c;
        VectorXd obj = VectorXd::Zero(n + k);
        obj.tail(k).setConstant(-1.0);
        const QpResult r = lp(obj, aug, false);
        if (r.status == QpStatus::infeasible) {
            out.empty = true;
            return out;
        }
        if (r.status != QpStatus::optimal) break;
        std::vector<int> rest;
        bool progress = false;
        for (int j = 0; j < k; ++j) {
            if (r.x(n + j) > tol) {
                out.implicit[undecided[j]] = false;
                progress = true;
            } else {
                rest.push_back(undecided[j]);
            }
        }
        if (!progress) break;
        points.push_back(r.x.head(n));
        undecided = std::move(rest);
    }
    if (points.empty()) {
        auto p = feasible_point(poly);
        if (!p) {
            out.empty = true;
            return out;
        }
        out.point = *p;
    } else {
        out.point = VectorXd::Zero(n);
        for (const auto& p : points) out.point += p;
        out.point /= static_cast<double>(points.size());
    }
    return out;
}

std::optional<VectorXd> relative_interior_point(const Polyhedron& poly) {
    const int n = poly.dim();
    const ImplicitEqualities ie = implicit_equalities(poly);
    if (ie.empty) return std::nullopt;
    std::vector<int> imp, free_rows;
    for (int i = 0; i < static_cast<int>(ie.implicit.size()); ++i) (ie.implicit[i] ? imp : free_rows).push_back(i);
    if (free_rows.empty()) return ie.point;
    MatrixXd Eq(poly.C.rows() + static_cast<Eigen::Index>(imp.size()), n);
    VectorXd eq(Eq.rows());
    Eq << poly.C, select_rows(poly.A, imp);
    eq << poly.c, select(poly.a, imp);
    const MatrixXd Z = null_space(Eq, n);
    Polyhedron lpp = Polyhedron::whole(n + 1);
    for (int i : free_rows) {
        RowVectorXd row(n + 1);
        row << poly.A.row(i), (poly.A.row(i) * Z).norm();
        lpp.add_inequality(row, poly.a(i));
    }
    RowVectorXd cap = RowVectorXd::Zero(n + 1);
    cap(n) = 1.0;
    lpp.add_inequality(cap, 1.0);
    for (Eigen::Index i = 0; i < Eq.rows(); ++i) {
        RowVectorXd row(n + 1);
        row << Eq.row(i), 0.0;
        lpp.add_equality(row, eq(i));
    }
    VectorXd obj = VectorXd::Zero(n + 1);
    obj(n) = -1.0;
    const QpResult r = lp(obj, lpp, false);
    if (r.status != QpStatus::optimal || r.x(n) <= 0.0) return ie.point;
    return VectorXd(r.x.head(n));
}

PosHullResult pos_hull_linear(const Polyhedron& poly, const VectorXd& anchor, double tol) {
    return pos_hull_linear(poly, MatrixXd::Identity(poly.dim(), poly.dim()), anchor, tol);
}

namespace {

Polyhedron tangent_cone(const Polyhedron& poly, const VectorXd& anchor, double tol) {
    const int n = poly.dim();
    if (anchor.size() != n || poly.violation(anchor) > tol)
        throw std::invalid_argument("pos_hull_linear: anchor is not in the polyhedron");
    Polyhedron cone = Polyhedron::whole(n);
    for (Eigen::Index i = 0; i < poly.A.rows(); ++i)
        if (poly.A.row(i).dot(anchor) - poly.a(i) >= -std::max(tol, 1e-8) * (1.0 + std::abs(poly.a(i))))
            cone.add_inequality(poly.A.row(i), 0.0);
    cone.C = poly.C;
    cone.c = VectorXd::Zero(poly.C.rows());
    return cone;
}

}  // namespace

PosHullResult pos_hull_linear(const Polyhedron& poly, const MatrixXd& L, const VectorXd& anchor, double tol) {
    if (L.cols() != poly.dim()) throw std::invalid_argument("pos_hull_linear: map dimension mismatch");
    const int n = poly.dim();
    const Polyhedron cone = tangent_cone(poly, anchor, tol);
    const ImplicitEqualities all = implicit_equalities(cone);
    Polyhedron kernel = cone;
    for (Eigen::Index i = 0; i < L.rows(); ++i) kernel.add_equality(L.row(i), 0.0);
    const ImplicitEqualities ker = implicit_equalities(kernel);

    PosHullResult res;
    res.linear = true;
    for (std::size_t i = 0; i < all.implicit.size(); ++i)
        if (!all.implicit[i] && ker.implicit[i]) res.linear = false;
    if (res.linear) {
        std::vector<int> imp;
        for (int i = 0; i < static_cast<int>(all.implicit.size()); ++i)
            if (all.implicit[i]) imp.push_back(i);
        MatrixXd Eq(cone.C.rows() + static_cast<Eigen::Index>(imp.size()), n);
        Eq << cone.C, select_rows(cone.A, imp);
        res.dimension = matrix_rank(L * null_space(Eq, n));
    } else {
        VectorXd g = L * all.point;
        const double s = g.cwiseAbs().maxCoeff();
        res.witness = s > 0 ? VectorXd(g / s) : g;
    }
    return res;
}

bool cone_contains(const Polyhedron& poly, const MatrixXd& L, const VectorXd& anchor, const VectorXd& g, double tol) {
    Polyhedron cone = tangent_cone(poly, anchor, tol);
    for (Eigen::Index i = 0; i < L.rows(); ++i) cone.add_equality(L.row(i), g(i));
    return feasible_point(cone).has_value();
}

namespace {

struct Row {
    RowVectorXd a;
    double b;
};

void normalize_row(Row& r) {
    const double s = r.a.size() ? r.a.cwiseAbs().maxCoeff() : 0.0;
    if (s > 0) {
        r.a /= s;
        r.b /= s;
    }
}

// Removes duplicate and trivial rows; returns false if a trivially violated row exists.
bool tidy(std::vector<Row>& rows) {
    std::vector<Row> out;
    for (auto& r : rows) {
        for (Eigen::Index j = 0; j < r.a.size(); ++j)
            if (std::abs(r.a(j)) < 1e-12) r.a(j) = 0.0;
        normalize_row(r);
        if (r.a.size() == 0 || r.a.cwiseAbs().maxCoeff() == 0.0) {
            if (r.b < -1e-9) return false;
            continue;
        }
        bool dup = false;
        for (auto& o : out) {
            if ((o.a - r.a).cwiseAbs().maxCoeff() <= 1e-10) {
                o.b = std::min(o.b, r.b);
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(r);
    }
    rows = std::move(out);
    return true;
}

void prune_redundant(std::vector<Row>& rows, int n) {
    std::vector<bool> keep(rows.size(), true);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Polyhedron p = Polyhedron::whole(n);
        for (std::size_t j = 0; j < rows.size(); ++j)
            if (j != i && keep[j]) p.add_inequality(rows[j].a, rows[j].b);
        // bound the LP so that redundancy is decided on a bounded set
        p.add_inequality(rows[i].a, rows[i].b + 1.0);
        const QpResult r = lp(-rows[i].a.transpose(), p, false);
        if (r.status == QpStatus::optimal && rows[i].a.dot(r.x) <= rows[i].b + 1e-9 * (1.0 + std::abs(rows[i].b)))
            keep[i] = false;
    }
    std::vector<Row> out;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (keep[i]) out.push_back(rows[i]);
    rows = std::move(out);
}

}  // namespace

std::optional<Polyhedron> fm_project(const Polyhedron& poly, int keep, int row_cap) {
    const int n = poly.dim();
    if (keep < 0 || keep > n) throw std::invalid_argument("fm_project: bad coordinate count");
    std::vector<Row> ineq, eq;
    for (Eigen::Index i = 0; i < poly.A.rows(); ++i) ineq.push_back({poly.A.row(i), poly.a(i)});
    for (Eigen::Index i = 0; i < poly.C.rows(); ++i) eq.push_back({poly.C.row(i), poly.c(i)});
    auto infeasible = [&]() {
        Polyhedron p = Polyhedron::whole(keep);
        p.add_inequality(RowVectorXd::Zero(keep), -1.0);
        return p;
    };
    if (!tidy(ineq)) return infeasible();
    for (int j = n - 1; j >= keep; --j) {
        int piv = -1;
        double best = 1e-9;
        for (int k = 0; k < static_cast<int>(eq.size()); ++k)
            if (std::abs(eq[k].a(j)) > best) {
                best = std::abs(eq[k].a(j));
                piv = k;
            }
        if (piv >= 0) {
            const Row p = eq[piv];
            eq.erase(eq.begin() + piv);
            auto substitute = [&](Row& r) {
                const double f = r.a(j) / p.a(j);
                r.a -= f * p.a;
                r.b -= f * p.b;
                r.a(j) = 0.0;
            };
            for (auto& r : eq) substitute(r);
            for (auto& r : ineq) substitute(r);
        } else {
            std::vector<Row> pos, neg, next;
            for (auto& r : ineq) {
                if (r.a(j) > 1e-12) pos.push_back(r);
                else if (r.a(j) < -1e-12) neg.push_back(r);
                else {
                    r.a(j) = 0.0;
                    next.push_back(r);
                }
            }
            for (const auto& p : pos)
                for (const auto& q : neg) {
                    Row r{p.a / p.a(j) + q.a / (-q.a(j)), p.b / p.a(j) + q.b / (-q.a(j))};
                    r.a(j) = 0.0;
                    next.push_back(r);
                }
            // eq rows with zero coefficient stay
            for (auto& r : eq) r.a(j) = 0.0;
            ineq = std::move(next);
        }
        std::vector<Row> eq_clean;
        for (auto& r : eq) {
            if (r.a.cwiseAbs().maxCoeff() <= 1e-12) {
                if (std::abs(r.b) > 1e-9 * (1.0 + std::abs(r.b))) return infeasible();
                continue;
            }
            eq_clean.push_back(r);
        }
        eq = std::move(eq_clean);
        if (!tidy(ineq)) return infeasible();
        if (ineq.size() > 40) prune_redundant(ineq, n);
        if (static_cast<int>(ineq.size()) > row_cap) return std::nullopt;
    }
    Polyhedron out = Polyhedron::whole(keep);
    for (const auto& r : ineq) out.add_inequality(r.a.head(keep), r.b);
    for (const auto& r : eq) out.add_equality(r.a.head(keep), r.b);
    return out;
}

std::optional<Polyhedron> fm_image(const Polyhedron& poly, const MatrixXd& L, int row_cap) {
    const int n = poly.dim();
    const int k = static_cast<int>(L.rows());
    Polyhedron lifted = Polyhedron::whole(k + n);
    for (Eigen::Index i = 0; i < poly.A.rows(); ++i) {
        RowVectorXd row = RowVectorXd::Zero(k + n);
        row.tail(n) = poly.A.row(i);
        lifted.add_inequality(row, poly.a(i));
    }
    for (Eigen::Index i = 0; i < poly.C.rows(); ++i) {
        RowVectorXd row = RowVectorXd::Zero(k + n);
        row.tail(n) = poly.C.row(i);
        lifted.add_equality(row, poly.c(i));
    }
    for (int i = 0; i < k; ++i) {
        RowVectorXd row = RowVectorXd::Zero(k + n);
        row(i) = 1.0;
        row.tail(n) = -L.row(i);
        lifted.add_equality(row, 0.0);
    }
    return fm_project(lifted, k, row_cap);
}

double normal_cone_distance(const Polyhedron& poly, const VectorXd& x, const VectorXd& v, double tol) {
    if (x.size() != poly.dim() || v.size() != poly.dim()) throw std::invalid_argument("normal_cone_distance: dimension mismatch");
    if (!poly.contains(x, tol)) return HUGE_VAL;
    std::vector<Eigen::Index> act;
    for (Eigen::Index i = 0; i < poly.A.rows(); ++i)
        if (poly.A.row(i).dot(x) - poly.a(i) >= -tol * (1.0 + std::abs(poly.a(i)))) act.push_back(i);
    const auto na = static_cast<Eigen::Index>(act.size());
    const Eigen::Index k = na + poly.C.rows();
    if (k == 0) return v.norm();
    MatrixXd M(k, poly.dim());
    for (Eigen::Index i = 0; i < na; ++i) M.row(i) = poly.A.row(act[i]);
    M.bottomRows(poly.C.rows()) = poly.C;
    MatrixXd G = MatrixXd::Zero(na, k);
    G.leftCols(na) = -MatrixXd::Identity(na, na);
    const QpResult r = solve_dense(M * M.transpose(), -M * v, G, VectorXd::Zero(na), MatrixXd(0, k), VectorXd(0));
    if (r.status != QpStatus::optimal) return HUGE_VAL;
    return (M.transpose() * r.x - v).norm();
}

bool image_included(const Polyhedron& inner, const MatrixXd& L, const Polyhedron& outer, double tol) {
    if (is_empty(inner)) return true;
    for (Eigen::Index i = 0; i < outer.A.rows(); ++i) {
        const ExtendedReal s = support(inner, L, outer.A.row(i).transpose());
        if (s > ExtendedReal(outer.a(i) + tol * (1.0 + std::abs(outer.a(i))))) return false;
    }
    for (Eigen::Index i = 0; i < outer.C.rows(); ++i) {
        const ExtendedReal hi = support(inner, L, outer.C.row(i).transpose());
        const ExtendedReal lo = support(inner, L, VectorXd(-outer.C.row(i).transpose()));
        const double t = tol * (1.0 + std::abs(outer.c(i)));
        if (hi > ExtendedReal(outer.c(i) + t) || lo > ExtendedReal(-outer.c(i) + t)) return false;
    }
    return true;
}

}  // namespace treedual
