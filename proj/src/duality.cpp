#include "treedual/duality.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "treedual/convex_calculus.hpp"

namespace treedual {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(CertificateStatus s) {
    switch (s) {
        case CertificateStatus::certified_optimal: return "certified-optimal";
        case CertificateStatus::gap_positive: return "gap-positive";
        case CertificateStatus::infeasible: return "infeasible";
        case CertificateStatus::unbounded: return "unbounded";
        case CertificateStatus::inconclusive: return "inconclusive";
    }
    return "unknown";
}

void StochasticProgram::validate() const {
    if (static_cast<int>(dims.size()) != tree.horizon() + 1)
        throw std::invalid_argument("stochastic program: dims must have one entry per stage");
    for (int d : dims)
        if (d < 0) throw std::invalid_argument("stochastic program: negative stage dimension");
    if (m < 0) throw std::invalid_argument("stochastic program: negative parameter dimension");
    if (integrands.size() != 1 && integrands.size() != tree.num_leaves())
        throw std::invalid_argument("stochastic program: need one integrand per leaf or a shared one");
    for (const auto& f : integrands)
        if (f.dim() != n_total() + m) throw std::invalid_argument("stochastic program: integrand dimension mismatch");
    if (ubar.values.rows() != static_cast<Eigen::Index>(tree.num_leaves()) || ubar.dim() != m)
        throw std::invalid_argument("stochastic program: ubar must be num_leaves x m");
}

int StochasticProgram::n_total() const { return std::accumulate(dims.begin(), dims.end(), 0); }

const ConvexFunction& StochasticProgram::integrand(std::size_t leaf) const {
    return integrands.size() == 1 ? integrands.front() : integrands.at(leaf);
}

int StochasticProgram::stage_offset(int t) const { return std::accumulate(dims.begin(), dims.begin() + t, 0); }

VectorXd StochasticProgram::leaf_argument(const AdaptedProcess& x, std::size_t leaf, const VectorXd& u) const {
    VectorXd w(n_total() + m);
    for (int t = 0; t <= tree.horizon(); ++t) w.segment(stage_offset(t), dims[t]) = x.at(tree.ancestor(leaf, t));
    w.tail(m) = u;
    return w;
}

namespace {

void check_adapted(const StochasticProgram& sp, const AdaptedProcess& x) {
    if (x.values.size() != sp.tree.size()) throw std::invalid_argument("adapted process: one value per node required");
    for (std::size_t n = 0; n < sp.tree.size(); ++n)
        if (x.values[n].size() != sp.dims[sp.tree.time(n)])
            throw std::invalid_argument("adapted process: stage dimension mismatch");
}

void check_dual(const StochasticProgram& sp, const DualPoint& dp) {
    if (dp.p.dims != sp.dims || dp.p.values.rows() != static_cast<Eigen::Index>(sp.tree.num_leaves()))
        throw std::invalid_argument("dual point: p has wrong shape");
    if (dp.y.dim() != sp.m || dp.y.values.rows() != static_cast<Eigen::Index>(sp.tree.num_leaves()))
        throw std::invalid_argument("dual point: y has wrong shape");
}

}  // namespace

ExtendedReal primal_value(const StochasticProgram& sp, const AdaptedProcess& x) {
    sp.validate();
    check_adapted(sp, x);
    ExtendedReal total = 0.0;
    for (std::size_t l = 0; l < sp.tree.num_leaves(); ++l) {
        const ExtendedReal v = evaluate(sp.integrand(l), sp.leaf_argument(x, l, sp.ubar.at(l)));
        if (v.is_plus_infinity()) return v;
        total += sp.tree.leaf_prob(l) * v;
    }
    return total;
}

DualValue dual_value(const StochasticProgram& sp, const DualPoint& dp, double tol) {
    sp.validate();
    check_dual(sp, dp);
    DualValue out;
    out.nonanticipativity = nonanticipativity_residual(sp.tree, dp.p);
    out.feasible = out.nonanticipativity <= tol;
    ExtendedReal total = inner_product(sp.tree, sp.ubar, dp.y);
    const int n = sp.n_total();
    for (std::size_t l = 0; l < sp.tree.num_leaves(); ++l) {
        VectorXd v(n + sp.m);
        v.head(n) = dp.p.at(l);
        v.tail(sp.m) = dp.y.at(l);
        const ExtendedReal c = conjugate(sp.integrand(l), v);
        if (c.is_plus_infinity()) {
            out.value = ExtendedReal::minus_infinity();
            return out;
        }
        total += -(sp.tree.leaf_prob(l) * c);
    }
    out.value = total;
    return out;
}

KktReport kkt_residual(const StochasticProgram& sp, const AdaptedProcess& x, const DualPoint& dp, double tol) {
    sp.validate();
    check_adapted(sp, x);
    check_dual(sp, dp);
    KktReport rep;
    const int n = sp.n_total();
    for (std::size_t l = 0; l < sp.tree.num_leaves(); ++l) {
        VectorXd v(n + sp.m);
        v.head(n) = dp.p.at(l);
        v.tail(sp.m) = dp.y.at(l);
        const double r = subdifferential_check(sp.integrand(l), sp.leaf_argument(x, l, sp.ubar.at(l)), v);
        rep.leaf_residuals.push_back(r);
        rep.max_leaf_residual = std::max(rep.max_leaf_residual, std::abs(r));
    }
    rep.nonanticipativity = nonanticipativity_residual(sp.tree, dp.p);
    rep.certified = rep.max_leaf_residual <= tol && rep.nonanticipativity <= tol;
    return rep;
}

GapReport duality_gap(const StochasticProgram& sp, const AdaptedProcess& x, const DualPoint& dp, double tol) {
    GapReport g;
    g.primal = primal_value(sp, x);
    const DualValue dv = dual_value(sp, dp, tol);
    g.dual = dv.value;
    g.dual_feasible = dv.feasible;
    if (g.primal.is_plus_infinity() || g.dual.is_minus_infinity()) g.gap = ExtendedReal::plus_infinity();
    else g.gap = g.primal - g.dual;
    return g;
}

Certificate certify(const StochasticProgram& sp, const AdaptedProcess& x, const DualPoint& dp, double tol) {
    Certificate c;
    c.tol = tol;
    const GapReport g = duality_gap(sp, x, dp, std::min(tol, 1e-9));
    c.primal = g.primal;
    c.dual = g.dual;
    c.gap = g.gap;
    const double scale = g.primal.is_finite() ? std::max(1.0, std::abs(g.primal.value())) : 1.0;
    c.kkt = kkt_residual(sp, x, dp, tol * scale);
    if (!g.primal.is_finite()) {
        c.status = CertificateStatus::gap_positive;
        c.note = "primal point outside the domain";
        return c;
    }
    const bool gap_ok = g.gap.is_finite() && std::abs(g.gap.value()) <= tol * scale;
    const bool na_ok = c.kkt.nonanticipativity <= tol;
    if (gap_ok && na_ok && c.kkt.certified) {
        c.status = CertificateStatus::certified_optimal;
    } else {
        c.status = CertificateStatus::gap_positive;
        if (!na_ok) c.note = "shadow price not orthogonal to adapted processes";
        else if (!gap_ok) c.note = "duality gap above tolerance";
        else c.note = "scenario-wise subgradient condition violated";
    }
    return c;
}

std::vector<int> node_offsets(const StochasticProgram& sp) {
    std::vector<int> off(sp.tree.size());
    int acc = 0;
    for (std::size_t n = 0; n < sp.tree.size(); ++n) {
        off[n] = acc;
        acc += sp.dims[sp.tree.time(n)];
    }
    return off;
}

CompositeProgram build_program(const StochasticProgram& sp, const LeafProcess* z, const RandomVector& u) {
    sp.validate();
    const std::vector<int> off = node_offsets(sp);
    int total = 0;
    for (std::size_t n = 0; n < sp.tree.size(); ++n) total += sp.dims[sp.tree.time(n)];
    const int nx = sp.n_total();
    CompositeProgram prog;
    prog.dim = total;
    for (std::size_t l = 0; l < sp.tree.num_leaves(); ++l) {
        MatrixXd M = MatrixXd::Zero(nx + sp.m, total);
        for (int t = 0; t <= sp.tree.horizon(); ++t) {
            const int node = sp.tree.ancestor(l, t);
            M.block(sp.stage_offset(t), off[node], sp.dims[t], sp.dims[t]).setIdentity();
        }
        VectorXd shift = VectorXd::Zero(nx + sp.m);
        if (z) shift.head(nx) = z->at(l);
        shift.tail(sp.m) = u.at(l);
        prog.atoms.push_back({sp.integrand(l), M, shift, sp.tree.leaf_prob(l)});
    }
    return prog;
}

StochasticSolution solve(const StochasticProgram& sp, double tol, int max_iter) {
    const CompositeProgram prog = build_program(sp, nullptr, sp.ubar);
    SolveOptions so;
    so.tol = std::min(1e-9, tol * 1e-3);
    so.max_iter = max_iter;
    const SolveResult res = minimize(prog, so);

    StochasticSolution out;
    out.solver_status = res.status;
    out.x = AdaptedProcess::zeros(sp.tree, sp.dims);
    out.dual.p = LeafProcess::zeros(sp.tree, sp.dims);
    out.dual.y = RandomVector::zeros(sp.tree, sp.m);
    out.certificate.tol = tol;
    if (res.status == SolveStatus::infeasible) {
        out.certificate.status = CertificateStatus::infeasible;
        out.certificate.primal = ExtendedReal::plus_infinity();
        out.certificate.note = "no adapted point in the domain";
        return out;
    }
    if (res.status == SolveStatus::unbounded) {
        out.certificate.status = CertificateStatus::unbounded;
        out.certificate.primal = ExtendedReal::minus_infinity();
        out.certificate.note = "recession direction with negative slope";
        out.direction = res.direction;
        return out;
    }
    const std::vector<int> off = node_offsets(sp);
    for (std::size_t n = 0; n < sp.tree.size(); ++n)
        out.x.values[n] = res.x.segment(off[n], sp.dims[sp.tree.time(n)]);
    const int nx = sp.n_total();
    LeafProcess q = LeafProcess::zeros(sp.tree, sp.dims);
    for (std::size_t l = 0; l < sp.tree.num_leaves(); ++l) {
        const VectorXd& g = res.atom_subgradients[l];
        q.values.row(static_cast<Eigen::Index>(l)) = g.head(nx).transpose();
        out.dual.y.values.row(static_cast<Eigen::Index>(l)) = g.tail(sp.m).transpose();
    }
    out.dual.p = shadow_price_projection(sp.tree, q);
    out.certificate = certify(sp, out.x, out.dual, tol);
    if (res.status == SolveStatus::inconclusive && out.certificate.status != CertificateStatus::certified_optimal) {
        out.certificate.status = CertificateStatus::inconclusive;
        out.certificate.note = "iteration limit reached";
    }
    return out;
}

ExtendedReal value_function_probe(const StochasticProgram& sp, const LeafProcess& z, const RandomVector& u) {
    if (z.dims != sp.dims || z.values.rows() != static_cast<Eigen::Index>(sp.tree.num_leaves()))
        throw std::invalid_argument("value_function_probe: z has wrong shape");
    if (u.dim() != sp.m || u.values.rows() != static_cast<Eigen::Index>(sp.tree.num_leaves()))
        throw std::invalid_argument("value_function_probe: u has wrong shape");
    const SolveResult res = minimize(build_program(sp, &z, u));
    switch (res.status) {
        case SolveStatus::optimal: return res.value;
        case SolveStatus::infeasible: return ExtendedReal::plus_infinity();
        case SolveStatus::unbounded: return ExtendedReal::minus_infinity();
        case SolveStatus::inconclusive: break;
    }
    throw std::runtime_error("value_function_probe: inner solve inconclusive");
}

}  // namespace treedual
