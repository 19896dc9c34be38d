#include "treedual/convex_calculus.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "treedual/lowering.hpp"
#include "treedual/qp.hpp"

namespace treedual {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const ExtendedReal kPlusInf = ExtendedReal::plus_infinity();
const ExtendedReal kMinusInf = ExtendedReal::minus_infinity();

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

bool is_identity(const MatrixXd& M) {
    return M.rows() == M.cols() && (M - MatrixXd::Identity(M.rows(), M.cols())).cwiseAbs().maxCoeff() == 0.0;
}

ConjugateValue generic_conjugate(const ConvexFunction& fn, const VectorXd& v) {
    const LoweredFunction lf = lower(fn);
    QuadraticProgram qp = to_qp(lf);
    qp.q.head(lf.dim) -= v;
    const QpResult r = solve_qp(qp);
    ConjugateValue cv;
    switch (r.status) {
        case QpStatus::unbounded:
            cv.value = kPlusInf;
            break;
        case QpStatus::infeasible:
            cv.value = kMinusInf;
            break;
        case QpStatus::optimal:
        case QpStatus::max_iterations:
            cv.value = -r.objective;
            cv.argmax = r.x.head(lf.dim);
            cv.attained = r.status == QpStatus::optimal;
            cv.residual = std::max({r.primal_residual, r.dual_residual, r.complementarity});
            break;
    }
    return cv;
}

}  // namespace

ConjugateValue conjugate_eval(const ConvexFunction& fn, const VectorXd& v) {
    if (v.size() != fn.dim()) throw std::invalid_argument("conjugate: dimension mismatch");
    const int d = fn.dim();
    ConjugateValue cv;
    cv.closed_form = true;
    if (const auto* q = fn.as<Quadratic>()) {
        const VectorXd r = v - q->b;
        if (d == 0) {
            cv.value = -q->c;
            cv.attained = true;
            cv.argmax = VectorXd(0);
            return cv;
        }
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(q->Q);
        const VectorXd& lam = es.eigenvalues();
        const double cut = 1e-10 * std::max(1.0, lam.cwiseAbs().maxCoeff());
        VectorXd coef = es.eigenvectors().transpose() * r;
        for (int i = 0; i < d; ++i) coef(i) = lam(i) > cut ? coef(i) / lam(i) : 0.0;
        const VectorXd w = es.eigenvectors() * coef;
        if (inf_norm(q->Q * w - r) > 1e-9 * (1.0 + inf_norm(r))) {
            cv.value = kPlusInf;
            return cv;
        }
        cv.value = 0.5 * r.dot(w) - q->c;
        cv.argmax = w;
        cv.attained = true;
        return cv;
    }
    if (const auto* a = fn.as<Affine>()) {
        if (inf_norm(v - a->b) > 1e-12 * (1.0 + inf_norm(a->b))) {
            cv.value = kPlusInf;
            return cv;
        }
        cv.value = -a->c;
        cv.argmax = VectorXd::Zero(d);
        cv.attained = true;
        return cv;
    }
    if (const auto* b = fn.as<IndicatorBox>()) {
        ExtendedReal total = 0.0;
        VectorXd x(d);
        for (int i = 0; i < d; ++i) {
            if (v(i) > 0) {
                if (!std::isfinite(b->hi(i))) {
                    cv.value = kPlusInf;
                    return cv;
                }
                x(i) = b->hi(i);
            } else if (v(i) < 0) {
                if (!std::isfinite(b->lo(i))) {
                    cv.value = kPlusInf;
                    return cv;
                }
                x(i) = b->lo(i);
            } else {
                x(i) = std::isfinite(b->lo(i)) ? b->lo(i) : (std::isfinite(b->hi(i)) ? std::min(0.0, b->hi(i)) : 0.0);
            }
            total += v(i) * x(i);
        }
        for (int i = 0; i < d; ++i)
            if (b->lo(i) > b->hi(i)) {
                cv.value = kMinusInf;
                return cv;
            }
        cv.value = total;
        cv.argmax = x;
        cv.attained = true;
        return cv;
    }
    if (const auto* s = fn.as<Scale>(); s && s->lambda > 0.0) {
        ConjugateValue inner = conjugate_eval(s->fn, v / s->lambda);
        if (inner.value.is_finite()) inner.value = s->lambda * inner.value.value();
        return inner;
    }
    if (const auto* p = fn.as<Precompose>(); p && is_identity(p->M)) {
        ConjugateValue inner = conjugate_eval(p->inner, v);
        if (inner.value.is_finite()) inner.value = inner.value.value() - v.dot(p->m);
        if (inner.argmax.size()) inner.argmax -= p->m;
        return inner;
    }
    if (const auto* s = fn.as<Sum>(); s && s->terms.size() == 1) return conjugate_eval(s->terms.front(), v);
    return generic_conjugate(fn, v);
}

ExtendedReal conjugate(const ConvexFunction& fn, const VectorXd& v) { return conjugate_eval(fn, v).value; }

double subdifferential_check(const ConvexFunction& fn, const VectorXd& x, const VectorXd& v) {
    const ExtendedReal fx = evaluate(fn, x);
    if (!fx.is_finite()) return HUGE_VAL;
    const ExtendedReal cv = conjugate(fn, v);
    if (cv.is_plus_infinity()) return HUGE_VAL;
    if (cv.is_minus_infinity()) throw std::domain_error("subdifferential_check: improper function");
    return fx.value() + cv.value() - x.dot(v);
}

Polyhedron lifted_domain_polyhedron(const ConvexFunction& fn) {
    const LoweredFunction lf = lower(fn);
    return Polyhedron::make(lf.G, lf.h, lf.E, lf.e, lf.size());
}

std::optional<Polyhedron> domain_polyhedron(const ConvexFunction& fn, int row_cap) {
    return fm_project(lifted_domain_polyhedron(fn), fn.dim(), row_cap);
}

namespace {

bool domain_recession_contains(const ConvexFunction& fn, const VectorXd& d) {
    const LoweredFunction lf = lower(fn);
    Polyhedron cone = Polyhedron::make(lf.G, VectorXd::Zero(lf.G.rows()), lf.E, VectorXd::Zero(lf.E.rows()), lf.size());
    for (int i = 0; i < lf.dim; ++i) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(lf.size());
        row(i) = 1.0;
        cone.add_equality(row, d(i));
    }
    return feasible_point(cone).has_value();
}

ExtendedReal generic_recession(const ConvexFunction& fn, const VectorXd& d) {
    const LoweredFunction lf = lower(fn);
    const int n = lf.size();
    MatrixXd Eq(lf.P.rows() + lf.E.rows() + lf.dim, n);
    VectorXd eq = VectorXd::Zero(Eq.rows());
    Eq << lf.P, lf.E, MatrixXd::Identity(lf.dim, n);
    eq.tail(lf.dim) = d;
    const QpResult r = solve_dense(MatrixXd(), lf.q, lf.G, VectorXd::Zero(lf.G.rows()), Eq, eq);
    if (r.status == QpStatus::infeasible) return kPlusInf;
    if (r.status == QpStatus::unbounded) return kMinusInf;
    return r.objective;
}

ExtendedReal rec_impl(const ConvexFunction& fn, const VectorXd& d) {
    const double dn = inf_norm(d);
    if (const auto* q = fn.as<Quadratic>()) {
        const double scale = 1.0 + (q->Q.size() ? q->Q.cwiseAbs().maxCoeff() : 0.0);
        if (d.size() && d.dot(q->Q * d) > 1e-10 * scale * dn * dn) return kPlusInf;
        return q->b.dot(d);
    }
    if (const auto* a = fn.as<Affine>()) return a->b.dot(d);
    if (const auto* p = fn.as<IndicatorPolyhedron>()) {
        const double t = 1e-9 * (1.0 + dn);
        if (p->A.rows() && (p->A * d).maxCoeff() > t) return kPlusInf;
        if (p->C.rows() && (p->C * d).cwiseAbs().maxCoeff() > t) return kPlusInf;
        return 0.0;
    }
    if (const auto* m = fn.as<MaxOfAffine>()) return (m->B * d).maxCoeff();
    if (const auto* s = fn.as<Sum>()) {
        ExtendedReal total = 0.0;
        for (const auto& t : s->terms) {
            const ExtendedReal r = rec_impl(t, d);
            if (r.is_plus_infinity()) return kPlusInf;
            total += r;
        }
        return total;
    }
    if (const auto* p = fn.as<Precompose>()) return rec_impl(p->inner, p->M * d);
    if (const auto* s = fn.as<Scale>()) {
        if (s->lambda == 0.0) return domain_recession_contains(s->fn, d) ? ExtendedReal(0.0) : kPlusInf;
        const ExtendedReal r = rec_impl(s->fn, d);
        return r.is_finite() ? ExtendedReal(s->lambda * r.value()) : r;
    }
    if (const auto* b = fn.as<IndicatorBox>()) {
        const double t = 1e-12 * (1.0 + dn);
        for (Eigen::Index i = 0; i < d.size(); ++i) {
            if (d(i) > t && std::isfinite(b->hi(i))) return kPlusInf;
            if (d(i) < -t && std::isfinite(b->lo(i))) return kPlusInf;
        }
        return 0.0;
    }
    return generic_recession(fn, d);
}

}  // namespace

ExtendedReal recession(const ConvexFunction& fn, const VectorXd& dir) {
    if (dir.size() != fn.dim()) throw std::invalid_argument("recession: dimension mismatch");
    if (is_empty(lifted_domain_polyhedron(fn))) throw std::domain_error("recession: empty domain");
    return rec_impl(fn, dir);
}

ExtendedReal domain_support(const ConvexFunction& fn, const VectorXd& v) {
    if (v.size() != fn.dim()) throw std::invalid_argument("domain_support: dimension mismatch");
    if (fn.as<Quadratic>() || fn.as<Affine>() || fn.as<MaxOfAffine>())
        return inf_norm(v) == 0.0 ? ExtendedReal(0.0) : kPlusInf;
    if (fn.as<IndicatorBox>()) {
        const ExtendedReal s = conjugate(fn, v);
        if (s.is_minus_infinity()) throw std::domain_error("domain_support: empty domain");
        return s;
    }
    const Polyhedron lifted = lifted_domain_polyhedron(fn);
    VectorXd c = VectorXd::Zero(lifted.dim());
    c.head(fn.dim()) = v;
    const ExtendedReal s = support(lifted, c);
    if (s.is_minus_infinity()) throw std::domain_error("domain_support: empty domain");
    return s;
}

std::optional<VectorXd> subgradient(const ConvexFunction& fn, const VectorXd& x) {
    if (x.size() != fn.dim()) throw std::invalid_argument("subgradient: dimension mismatch");
    if (!evaluate(fn, x).is_finite()) return std::nullopt;
    const LoweredFunction lf = lower(fn);
    const int d = lf.dim;
    const int k = lf.aux;
    const int n = lf.size();
    VectorXd w(n);
    w.head(d) = x;
    if (k > 0) {
        const MatrixXd Pss = lf.P.bottomRightCorner(k, k);
        const VectorXd qs = lf.q.tail(k) + lf.P.bottomLeftCorner(k, d) * x;
        const MatrixXd Gs = lf.G.rightCols(k);
        const VectorXd hs = lf.h - lf.G.leftCols(d) * x;
        const MatrixXd Es = lf.E.rightCols(k);
        const VectorXd es = lf.e - lf.E.leftCols(d) * x;
        const QpResult r = solve_dense(Pss, qs, Gs, hs, Es, es);
        if (r.status != QpStatus::optimal) return std::nullopt;
        w.tail(k) = r.x;
    }
    const VectorXd c = lf.P * w + lf.q;
    std::vector<int> active;
    for (Eigen::Index i = 0; i < lf.G.rows(); ++i)
        if (lf.G.row(i).dot(w) - lf.h(i) >= -1e-7 * (1.0 + std::abs(lf.h(i)))) active.push_back(static_cast<int>(i));
    const int na = static_cast<int>(active.size());
    const int ne = static_cast<int>(lf.E.rows());
    const int m = na + ne;
    if (m == 0) {
        if (k > 0 && inf_norm(c.tail(k)) > 1e-7 * (1.0 + inf_norm(c))) return std::nullopt;
        return VectorXd(c.head(d));
    }
    MatrixXd J(n, m);
    for (int i = 0; i < na; ++i) J.col(i) = lf.G.row(active[i]).transpose();
    for (int i = 0; i < ne; ++i) J.col(na + i) = lf.E.row(i).transpose();
    const MatrixXd Jz = J.topRows(d);
    const MatrixXd Js = J.bottomRows(k);
    const VectorXd cz = c.head(d);
    MatrixXd Gl = MatrixXd::Zero(na, m);
    Gl.leftCols(na) = -MatrixXd::Identity(na, na);
    QpOptions o;
    o.detect_unbounded = false;
    const QpResult r =
        solve_dense(Jz.transpose() * Jz, Jz.transpose() * cz, Gl, VectorXd::Zero(na), Js, -c.tail(k), o);
    if (r.status != QpStatus::optimal) return std::nullopt;
    return VectorXd(Jz * r.x + cz);
}

std::optional<ConvexFunction> conjugate_function(const ConvexFunction& fn) {
    const int d = fn.dim();
    if (const auto* q = fn.as<Quadratic>()) {
        Eigen::LLT<MatrixXd> llt(q->Q);
        if (d == 0 || llt.info() != Eigen::Success) return std::nullopt;
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(q->Q, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() <= 1e-10 * std::max(1.0, es.eigenvalues().maxCoeff())) return std::nullopt;
        MatrixXd Qi = llt.solve(MatrixXd::Identity(d, d));
        Qi = 0.5 * (Qi + Qi.transpose());
        const VectorXd Qib = Qi * q->b;
        return ConvexFunction::quadratic(Qi, -Qib, 0.5 * q->b.dot(Qib) - q->c);
    }
    if (const auto* a = fn.as<Affine>()) {
        return ConvexFunction::sum({ConvexFunction::polyhedron(MatrixXd(0, d), VectorXd(0), MatrixXd::Identity(d, d), a->b, d),
                                    ConvexFunction::affine(VectorXd::Zero(d), -a->c)},
                                   d);
    }
    if (const auto* b = fn.as<IndicatorBox>()) {
        for (int i = 0; i < d; ++i)
            if (b->lo(i) > b->hi(i)) return std::nullopt;
        std::vector<ConvexFunction> terms;
        for (int i = 0; i < d; ++i) {
            MatrixXd e = MatrixXd::Zero(1, d);
            e(0, i) = 1.0;
            const bool lo = std::isfinite(b->lo(i));
            const bool hi = std::isfinite(b->hi(i));
            if (lo && hi) {
                MatrixXd B(2, 1);
                B << b->lo(i), b->hi(i);
                terms.push_back(ConvexFunction::precompose(ConvexFunction::max_affine(B, VectorXd::Zero(2)), e,
                                                           VectorXd::Zero(1)));
            } else if (lo) {
                terms.push_back(ConvexFunction::affine(b->lo(i) * e.row(0).transpose()));
                terms.push_back(ConvexFunction::polyhedron(e, VectorXd::Zero(1), MatrixXd(0, d), VectorXd(0), d));
            } else if (hi) {
                terms.push_back(ConvexFunction::affine(b->hi(i) * e.row(0).transpose()));
                terms.push_back(ConvexFunction::polyhedron(-e, VectorXd::Zero(1), MatrixXd(0, d), VectorXd(0), d));
            } else {
                terms.push_back(ConvexFunction::polyhedron(MatrixXd(0, d), VectorXd(0), e, VectorXd::Zero(1), d));
            }
        }
        return ConvexFunction::sum(std::move(terms), d);
    }
    if (const auto* s = fn.as<Scale>(); s && s->lambda > 0.0) {
        auto inner = conjugate_function(s->fn);
        if (!inner) return std::nullopt;
        return ConvexFunction::scale(
            s->lambda, ConvexFunction::precompose(*inner, MatrixXd::Identity(d, d) / s->lambda, VectorXd::Zero(d)));
    }
    return std::nullopt;
}

GridResult grid_conjugate_oracle(const ConvexFunction& fn, const VectorXd& v, const VectorXd& lo, const VectorXd& hi,
                                 double resolution) {
    const int d = fn.dim();
    if (v.size() != d || lo.size() != d || hi.size() != d) throw std::invalid_argument("grid oracle: dimension mismatch");
    if (!(resolution > 0.0)) throw std::invalid_argument("grid oracle: resolution must be positive");
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(d));
    long total = 1;
    for (int i = 0; i < d; ++i) {
        if (!std::isfinite(lo(i)) || !std::isfinite(hi(i)) || lo(i) > hi(i))
            throw std::invalid_argument("grid oracle: box must be bounded and nonempty");
        const long cnt = static_cast<long>(std::floor((hi(i) - lo(i)) / resolution + 1e-9)) + 1;
        for (long k = 0; k < cnt; ++k) axes[i].push_back(lo(i) + static_cast<double>(k) * resolution);
        if (hi(i) - axes[i].back() > 1e-12 * (1.0 + std::abs(hi(i)))) axes[i].push_back(hi(i));
        else axes[i].back() = hi(i);
        total *= static_cast<long>(axes[i].size());
        if (total > 20000000) throw std::invalid_argument("grid oracle: grid too large for resolution");
    }
    std::vector<double> values(static_cast<std::size_t>(total));
    std::vector<long> idx(static_cast<std::size_t>(d), 0);
    GridResult res;
    res.points = total;
    res.value = kMinusInf;
    VectorXd x(d);
    for (long p = 0; p < total; ++p) {
        for (int i = 0; i < d; ++i) x(i) = axes[i][idx[i]];
        const ExtendedReal f = evaluate(fn, x);
        const double val = f.is_finite() ? v.dot(x) - f.value() : -HUGE_VAL;
        values[p] = val;
        if (f.is_finite() && ExtendedReal(val) > res.value) {
            res.value = val;
            res.argmax = x;
        }
        for (int i = d - 1; i >= 0; --i) {
            if (++idx[i] < static_cast<long>(axes[i].size())) break;
            idx[i] = 0;
        }
    }
    double lip = 0.0;
    long stride = 1;
    for (int i = d - 1; i >= 0; --i) {
        const long len = static_cast<long>(axes[i].size());
        for (long p = 0; p < total; ++p) {
            const long pos = (p / stride) % len;
            if (pos + 1 >= len) continue;
            const double a = values[p];
            const double b = values[p + stride];
            if (a == -HUGE_VAL || b == -HUGE_VAL) continue;
            const double h = axes[i][pos + 1] - axes[i][pos];
            if (h > 0) lip = std::max(lip, std::abs(b - a) / h);
        }
        stride *= len;
    }
    res.bound = lip * resolution * std::sqrt(static_cast<double>(std::max(d, 1)));
    return res;
}

InfConvolution inf_convolution_conjugate(const ConvexFunction& f1, const ConvexFunction& f2, const VectorXd& v,
                                         double tol) {
    const int d = f1.dim();
    if (f2.dim() != d || v.size() != d) throw std::invalid_argument("inf_convolution_conjugate: dimension mismatch");
    const LoweredFunction l1 = lower(f1);
    const LoweredFunction l2 = lower(f2);
    const int n1 = l1.size();
    const int n2 = l2.size();
    const int n = n1 + n2;

    InfConvolution out;
    // Qualification: 0 in rcore(dom f1 - dom f2).
    Polyhedron prod = Polyhedron::whole(n);
    prod.A = MatrixXd::Zero(l1.G.rows() + l2.G.rows(), n);
    prod.A.topLeftCorner(l1.G.rows(), n1) = l1.G;
    prod.A.bottomRightCorner(l2.G.rows(), n2) = l2.G;
    prod.a.resize(prod.A.rows());
    prod.a << l1.h, l2.h;
    prod.C = MatrixXd::Zero(l1.E.rows() + l2.E.rows(), n);
    prod.C.topLeftCorner(l1.E.rows(), n1) = l1.E;
    prod.C.bottomRightCorner(l2.E.rows(), n2) = l2.E;
    prod.c.resize(prod.C.rows());
    prod.c << l1.e, l2.e;
    MatrixXd L = MatrixXd::Zero(d, n);
    L.leftCols(d) = MatrixXd::Identity(d, d);
    L.middleCols(n1, d) = -MatrixXd::Identity(d, d);
    Polyhedron meet = prod;
    for (int i = 0; i < d; ++i) meet.add_equality(L.row(i), 0.0);
    const auto anchor = feasible_point(meet);
    if (anchor) out.qualified = pos_hull_linear(prod, L, *anchor).linear;

    // (f1 + f2)*(v) with the coupling z1 = z2; its multiplier is the split.
    QuadraticProgram qp = QuadraticProgram::with_dim(n);
    MatrixXd P = MatrixXd::Zero(n, n);
    P.topLeftCorner(n1, n1) = l1.P;
    P.bottomRightCorner(n2, n2) = l2.P;
    qp.P = to_sparse(P);
    qp.q << l1.q, l2.q;
    qp.q.head(d) -= v;
    qp.r = l1.r + l2.r;
    qp.G = to_sparse(prod.A);
    qp.h = prod.a;
    MatrixXd A(prod.C.rows() + d, n);
    A << prod.C, L;
    VectorXd b(A.rows());
    b << prod.c, VectorXd::Zero(d);
    qp.A = to_sparse(A);
    qp.b = b;
    const QpResult r = solve_qp(qp);
    out.y = VectorXd::Zero(d);
    if (r.status == QpStatus::unbounded) {
        out.value = kPlusInf;
        return out;
    }
    if (r.status == QpStatus::infeasible) {
        out.value = kMinusInf;
        return out;
    }
    out.value = -r.objective;
    out.y = r.y.tail(d);
    const ExtendedReal c1 = conjugate(f1, v - out.y);
    const ExtendedReal c2 = conjugate(f2, out.y);
    if (c1.is_finite() && c2.is_finite() && r.status == QpStatus::optimal) {
        out.residual = std::abs(c1.value() + c2.value() - out.value.value());
        out.attained = out.qualified && out.residual <= tol * (1.0 + std::abs(out.value.value()));
    } else {
        out.residual = HUGE_VAL;
    }
    return out;
}

}  // namespace treedual
