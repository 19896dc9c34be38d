#include "treedual/lowering.hpp"

#include <cmath>
#include <stdexcept>

namespace treedual {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

LoweredFunction empty_lowering(int dim, int aux) {
    LoweredFunction lf;
    lf.dim = dim;
    lf.aux = aux;
    const int n = dim + aux;
    lf.P = MatrixXd::Zero(n, n);
    lf.q = VectorXd::Zero(n);
    lf.G.resize(0, n);
    lf.h.resize(0);
    lf.E.resize(0, n);
    lf.e.resize(0);
    return lf;
}

void append_rows(MatrixXd& M, VectorXd& v, const MatrixXd& rows, const VectorXd& rhs) {
    const auto old = M.rows();
    M.conservativeResize(old + rows.rows(), Eigen::NoChange);
    v.conservativeResize(old + rhs.size());
    if (rows.rows() > 0) {
        M.bottomRows(rows.rows()) = rows;
        v.tail(rhs.size()) = rhs;
    }
}

// Column selection: global w -> local w with z shared and aux placed at offset.
MatrixXd embed_columns(const MatrixXd& local, int dim, int aux_offset, int total) {
    MatrixXd out = MatrixXd::Zero(local.rows(), total);
    out.leftCols(dim) = local.leftCols(dim);
    const auto aux = local.cols() - dim;
    if (aux > 0) out.block(0, dim + aux_offset, local.rows(), aux) = local.rightCols(aux);
    return out;
}

void add_embedded(LoweredFunction& target, const LoweredFunction& part, int aux_offset) {
    const int n = target.size();
    const int d = target.dim;
    std::vector<int> map(static_cast<std::size_t>(part.size()));
    for (int i = 0; i < d; ++i) map[i] = i;
    for (int i = 0; i < part.aux; ++i) map[d + i] = d + aux_offset + i;
    for (int i = 0; i < part.size(); ++i) {
        target.q(map[i]) += part.q(i);
        for (int j = 0; j < part.size(); ++j) target.P(map[i], map[j]) += part.P(i, j);
    }
    target.r += part.r;
    append_rows(target.G, target.h, embed_columns(part.G, d, aux_offset, n), part.h);
    append_rows(target.E, target.e, embed_columns(part.E, d, aux_offset, n), part.e);
}

}  // namespace

LoweredFunction lower(const ConvexFunction& fn) {
    const int d = fn.dim();
    if (const auto* q = fn.as<Quadratic>()) {
        LoweredFunction lf = empty_lowering(d, 0);
        lf.P = q->Q;
        lf.q = q->b;
        lf.r = q->c;
        return lf;
    }
    if (const auto* a = fn.as<Affine>()) {
        LoweredFunction lf = empty_lowering(d, 0);
        lf.q = a->b;
        lf.r = a->c;
        return lf;
    }
    if (const auto* p = fn.as<IndicatorPolyhedron>()) {
        LoweredFunction lf = empty_lowering(d, 0);
        lf.G = p->A;
        lf.h = p->a;
        lf.E = p->C;
        lf.e = p->c;
        return lf;
    }
    if (const auto* m = fn.as<MaxOfAffine>()) {
        LoweredFunction lf = empty_lowering(d, 1);
        lf.q(d) = 1.0;
        lf.G.resize(m->B.rows(), d + 1);
        lf.G.leftCols(d) = m->B;
        lf.G.col(d).setConstant(-1.0);
        lf.h = -m->c;
        return lf;
    }
    if (const auto* s = fn.as<Sum>()) {
        std::vector<LoweredFunction> parts;
        int aux = 0;
        for (const auto& t : s->terms) {
            parts.push_back(lower(t));
            aux += parts.back().aux;
        }
        LoweredFunction lf = empty_lowering(d, aux);
        int off = 0;
        for (const auto& part : parts) {
            add_embedded(lf, part, off);
            off += part.aux;
        }
        return lf;
    }
    if (const auto* p = fn.as<Precompose>()) {
        const LoweredFunction in = lower(p->inner);
        const int k = p->inner.dim();
        const int n = d + in.aux;
        MatrixXd T = MatrixXd::Zero(in.size(), n);
        T.topLeftCorner(k, d) = p->M;
        if (in.aux > 0) T.bottomRightCorner(in.aux, in.aux).setIdentity();
        VectorXd t = VectorXd::Zero(in.size());
        t.head(k) = p->m;
        LoweredFunction lf;
        lf.dim = d;
        lf.aux = in.aux;
        lf.P = T.transpose() * in.P * T;
        lf.q = T.transpose() * (in.P * t + in.q);
        lf.r = in.r + 0.5 * t.dot(in.P * t) + in.q.dot(t);
        lf.G = in.G * T;
        lf.h = in.h - in.G * t;
        lf.E = in.E * T;
        lf.e = in.e - in.E * t;
        return lf;
    }
    if (const auto* s = fn.as<Scale>()) {
        LoweredFunction lf = lower(s->fn);
        lf.P *= s->lambda;
        lf.q *= s->lambda;
        lf.r *= s->lambda;
        return lf;
    }
    if (const auto* b = fn.as<IndicatorBox>()) {
        LoweredFunction lf = empty_lowering(d, 0);
        for (int i = 0; i < d; ++i) {
            if (std::isfinite(b->hi(i))) {
                MatrixXd row = MatrixXd::Zero(1, d);
                row(0, i) = 1.0;
                append_rows(lf.G, lf.h, row, VectorXd::Constant(1, b->hi(i)));
            }
            if (std::isfinite(b->lo(i))) {
                MatrixXd row = MatrixXd::Zero(1, d);
                row(0, i) = -1.0;
                append_rows(lf.G, lf.h, row, VectorXd::Constant(1, -b->lo(i)));
            }
        }
        return lf;
    }
    const auto& mc = std::get<MonotoneCompose>(fn.node().v);
    const LoweredFunction in = lower(mc.inner);
    const LoweredFunction out = lower(mc.outer);
    // w = (z, s_in, tau, s_out)
    const int n = in.size() + out.size();
    LoweredFunction lf = empty_lowering(d, n - d);
    lf.P.bottomRightCorner(out.size(), out.size()) = out.P;
    lf.q.tail(out.size()) = out.q;
    lf.r = out.r;
    MatrixXd Gi = MatrixXd::Zero(in.G.rows(), n);
    Gi.leftCols(in.size()) = in.G;
    append_rows(lf.G, lf.h, Gi, in.h);
    MatrixXd Ei = MatrixXd::Zero(in.E.rows(), n);
    Ei.leftCols(in.size()) = in.E;
    append_rows(lf.E, lf.e, Ei, in.e);
    MatrixXd epi = MatrixXd::Zero(1, n);
    epi.leftCols(in.size()) = in.q.transpose();
    epi(0, in.size()) = -1.0;
    append_rows(lf.G, lf.h, epi, VectorXd::Constant(1, -in.r));
    MatrixXd Go = MatrixXd::Zero(out.G.rows(), n);
    Go.rightCols(out.size()) = out.G;
    append_rows(lf.G, lf.h, Go, out.h);
    MatrixXd Eo = MatrixXd::Zero(out.E.rows(), n);
    Eo.rightCols(out.size()) = out.E;
    append_rows(lf.E, lf.e, Eo, out.e);
    return lf;
}

QuadraticProgram to_qp(const LoweredFunction& lf) {
    QuadraticProgram qp = QuadraticProgram::with_dim(lf.size());
    qp.P = to_sparse(lf.P);
    qp.q = lf.q;
    qp.r = lf.r;
    qp.G = to_sparse(lf.G);
    qp.h = lf.h;
    qp.A = to_sparse(lf.E);
    qp.b = lf.e;
    return qp;
}

LiftedDomain lifted_domain(const LoweredFunction& lf) { return {lf.G, lf.h, lf.E, lf.e, lf.dim, lf.aux}; }

}  // namespace treedual
