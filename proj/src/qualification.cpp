#include "treedual/qualification.hpp"

#include <random>
#include <stdexcept>

#include "treedual/convex_calculus.hpp"
#include "treedual/qp.hpp"

namespace treedual {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Substitutes u = u0 in a leaf domain over (x, u, s); the result lives on (x, s).
Polyhedron fix_u(const Polyhedron& q, int nx, int m, const VectorXd& u0) {
    const int k = q.dim() - nx - m;
    auto cut = [&](const MatrixXd& M) {
        MatrixXd out(M.rows(), nx + k);
        out << M.leftCols(nx), M.rightCols(k);
        return out;
    };
    return Polyhedron::make(cut(q.A), q.a - q.A.middleCols(nx, m) * u0, cut(q.C), q.c - q.C.middleCols(nx, m) * u0,
                            nx + k);
}

// Fixes the first `count` coordinates to `values`; the result lives on the rest.
Polyhedron fix_prefix(const Polyhedron& q, int count, const VectorXd& values) {
    const int rest = q.dim() - count;
    return Polyhedron::make(q.A.rightCols(rest), q.a - q.A.leftCols(count) * values, q.C.rightCols(rest),
                            q.c - q.C.leftCols(count) * values, rest);
}

MatrixXd leaf_selector(const StochasticProgram& sp, std::size_t leaf, const std::vector<int>& off, int total) {
    MatrixXd M = MatrixXd::Zero(sp.n_total(), total);
    for (int t = 0; t <= sp.tree.horizon(); ++t)
        M.block(sp.stage_offset(t), off[sp.tree.ancestor(leaf, t)], sp.dims[t], sp.dims[t]).setIdentity();
    return M;
}

}  // namespace

Polyhedron leaf_domain(const StochasticProgram& sp, std::size_t leaf) {
    return lifted_domain_polyhedron(sp.integrand(leaf));
}

std::optional<AdaptedProcess> strictly_feasible_candidate(const StochasticProgram& sp) {
    sp.validate();
    const std::vector<int> off = node_offsets(sp);
    int total = 0;
    for (std::size_t n = 0; n < sp.tree.size(); ++n) total += sp.dims[sp.tree.time(n)];
    const int nx = sp.n_total();
    std::vector<Polyhedron> fixed;
    int aux_total = 0;
    for (std::size_t l = 0; l < sp.tree.num_leaves(); ++l) {
        fixed.push_back(fix_u(leaf_domain(sp, l), nx, sp.m, sp.ubar.at(l)));
        aux_total += fixed.back().dim() - nx;
    }
    const int n = total + aux_total;
    Polyhedron big = Polyhedron::whole(n);
    int aux_off = total;
    for (std::size_t l = 0; l < sp.tree.num_leaves(); ++l) {
        const Polyhedron& f = fixed[l];
        const int k = f.dim() - nx;
        const MatrixXd S = leaf_selector(sp, l, off, total);
        for (Eigen::Index i = 0; i < f.A.rows(); ++i) {
            Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
            row.head(total) = f.A.row(i).head(nx) * S;
            row.segment(aux_off, k) = f.A.row(i).tail(k);
            big.add_inequality(row, f.a(i));
        }
        for (Eigen::Index i = 0; i < f.C.rows(); ++i) {
            Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
            row.head(total) = f.C.row(i).head(nx) * S;
            row.segment(aux_off, k) = f.C.row(i).tail(k);
            big.add_equality(row, f.c(i));
        }
        aux_off += k;
    }
    const ImplicitEqualities ie = implicit_equalities(big);
    if (ie.empty) return std::nullopt;
    AdaptedProcess x = AdaptedProcess::zeros(sp.tree, sp.dims);
    for (std::size_t nd = 0; nd < sp.tree.size(); ++nd) x.values[nd] = ie.point.segment(off[nd], sp.dims[sp.tree.time(nd)]);
    return x;
}

StrictFeasibilityReport check_strict_feasibility(const StochasticProgram& sp, const AdaptedProcess* anchor) {
    sp.validate();
    StrictFeasibilityReport rep;
    if (anchor) {
        rep.anchor = *anchor;
    } else {
        auto cand = strictly_feasible_candidate(sp);
        if (!cand) {
            rep.holds = false;
            rep.detail = "no adapted x with (x, ubar) in dom Ef";
            return rep;
        }
        rep.anchor = *cand;
    }
    const int nx = sp.n_total();
    for (std::size_t l = 0; l < sp.tree.num_leaves(); ++l) {
        const Polyhedron q = leaf_domain(sp, l);
        const VectorXd xu = sp.leaf_argument(rep.anchor, l, sp.ubar.at(l));
        const int k = q.dim() - nx - sp.m;
        const auto s = feasible_point(fix_prefix(q, nx + sp.m, xu));
        if (!s) {
            rep.holds = false;
            rep.failing_leaf = static_cast<int>(l);
            rep.failing_generator = VectorXd::Zero(nx + sp.m);
            rep.detail = "anchor outside the domain at leaf " + std::to_string(l);
            return rep;
        }
        VectorXd w(q.dim());
        w << xu, *s;
        MatrixXd L = MatrixXd::Zero(nx + sp.m, q.dim());
        L.leftCols(nx + sp.m).setIdentity();
        (void)k;
        const PosHullResult ph = pos_hull_linear(q, L, w, 1e-7);
        if (!ph.linear) {
            rep.holds = false;
            rep.failing_leaf = static_cast<int>(l);
            rep.failing_generator = ph.witness;
            rep.detail = "pos(dom f - anchor) is not a subspace at leaf " + std::to_string(l);
            return rep;
        }
    }
    rep.holds = true;
    rep.detail = "pos(dom Ef - anchor) is a closed subspace";
    return rep;
}

Rec1Report check_rec1(const StochasticProgram& sp) {
    sp.validate();
    Rec1Report rep;
    if (sp.m == 0) {
        rep.holds = true;
        rep.detail = "no parameter coordinates";
        return rep;
    }
    const int nx = sp.n_total();
    bool all_cross = true;
    for (std::size_t l = 0; l < sp.tree.num_leaves(); ++l) {
        const Polyhedron q = leaf_domain(sp, l);
        const VectorXd u0 = sp.ubar.at(l);
        const Polyhedron sl = fix_u(q, nx, sp.m, u0);
        const auto xs = feasible_point(sl);
        if (!xs) {
            rep.holds = false;
            rep.failing_leaf = static_cast<int>(l);
            rep.witness = u0;
            rep.detail = "ubar outside dom_u f at leaf " + std::to_string(l);
            return rep;
        }
        VectorXd w(q.dim());
        w << xs->head(nx), u0, xs->tail(q.dim() - nx - sp.m);
        MatrixXd L = MatrixXd::Zero(sp.m, q.dim());
        L.middleCols(nx, sp.m).setIdentity();
        const PosHullResult ph = pos_hull_linear(q, L, w, 1e-7);
        // Cross-check through an explicit projection when few variables are eliminated.
        const int eliminated = q.dim() - sp.m;
        if (eliminated <= 6) {
            const auto proj = fm_image(q, L);
            if (proj) {
                const bool fm_linear = pos_hull_linear(*proj, u0, 1e-7).linear;
                if (fm_linear != ph.linear) {
                    rep.inconclusive = true;
                    rep.failing_leaf = static_cast<int>(l);
                    rep.detail = "projection routes disagree at leaf " + std::to_string(l);
                    return rep;
                }
            } else {
                all_cross = false;
            }
        } else {
            all_cross = false;
        }
        if (!ph.linear) {
            rep.holds = false;
            rep.failing_leaf = static_cast<int>(l);
            rep.witness = ph.witness;
            rep.detail = "pos(dom_u f - ubar) is not a subspace at leaf " + std::to_string(l);
            rep.cross_checked = all_cross;
            return rep;
        }
    }
    rep.holds = true;
    rep.cross_checked = all_cross;
    rep.detail = "pos(dom_u Ef - ubar) is a closed subspace";
    return rep;
}

Rec2Report check_rec2(const StochasticProgram& sp, int samples, unsigned seed, const std::vector<LeafProcess>& extra) {
    sp.validate();
    Rec2Report rep;
    const int nx = sp.n_total();
    const int T = sp.tree.horizon();
    std::vector<Polyhedron> slices;
    for (std::size_t l = 0; l < sp.tree.num_leaves(); ++l)
        slices.push_back(fix_u(leaf_domain(sp, l), nx, sp.m, sp.ubar.at(l)));

    std::vector<LeafProcess> pts = extra;
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal(0.0, 3.0);
    for (int k = 0; k < samples; ++k) {
        LeafProcess z = LeafProcess::zeros(sp.tree, sp.dims);
        bool ok = true;
        for (std::size_t l = 0; l < sp.tree.num_leaves() && ok; ++l) {
            const Polyhedron& s = slices[l];
            const int n = s.dim();
            VectorXd target(nx);
            for (int i = 0; i < nx; ++i) target(i) = normal(rng);
            MatrixXd P = MatrixXd::Zero(n, n);
            P.topLeftCorner(nx, nx).setIdentity();
            VectorXd q = VectorXd::Zero(n);
            q.head(nx) = -target;
            const QpResult r = solve_dense(P, q, s.A, s.a, s.C, s.c);
            if (r.status != QpStatus::optimal) {
                ok = false;
                break;
            }
            z.values.row(static_cast<Eigen::Index>(l)) = r.x.head(nx).transpose();
        }
        if (!ok) {
            rep.inconclusive = true;
            rep.detail = "no feasible point to sample";
            return rep;
        }
        pts.push_back(z);
    }
    rep.samples = static_cast<int>(pts.size());
    if (T == 0) {
        rep.holds = true;
        rep.detail = "single stage, holds vacuously";
        return rep;
    }
    if (pts.empty()) {
        rep.inconclusive = true;
        rep.detail = "empty sampler";
        return rep;
    }
    for (const auto& z : pts) {
        for (int t = 0; t < T; ++t) {
            const int prefix = sp.stage_offset(t + 1);
            LeafProcess cz = z;
            for (int s = 0; s <= t; ++s) {
                const RandomVector e = conditional_expectation(sp.tree, z.stage(s), t);
                for (std::size_t l = 0; l < sp.tree.num_leaves(); ++l) cz.set_block(l, s, e.at(l));
            }
            for (std::size_t l = 0; l < sp.tree.num_leaves(); ++l) {
                const VectorXd fixed = cz.at(l).head(prefix);
                if (!feasible_point(fix_prefix(slices[l], prefix, fixed))) {
                    rep.holds = false;
                    rep.failing_stage = t;
                    rep.failing_leaf = static_cast<int>(l);
                    rep.witness = z;
                    rep.detail = "E_t z^t has no feasible extension at stage " + std::to_string(t) + ", leaf " +
                                 std::to_string(l);
                    return rep;
                }
            }
        }
    }
    rep.holds = true;
    rep.detail = "holds on " + std::to_string(rep.samples) + " sampled feasible points";
    return rep;
}

BoundedRecourseReport check_bounded_recourse(const StochasticProgram& sp, double radius) {
    sp.validate();
    if (!(radius > 0.0)) throw std::invalid_argument("check_bounded_recourse: radius must be positive");
    BoundedRecourseReport rep;
    rep.radius = radius;
    const int nx = sp.n_total();
    const int T = sp.tree.horizon();
    std::vector<Polyhedron> sr;
    for (std::size_t l = 0; l < sp.tree.num_leaves(); ++l) {
        Polyhedron s = fix_u(leaf_domain(sp, l), nx, sp.m, sp.ubar.at(l));
        for (int i = 0; i < nx; ++i) {
            Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(s.dim());
            e(i) = 1.0;
            s.add_inequality(e, radius);
            s.add_inequality(-e, radius);
        }
        if (is_empty(s)) {
            rep.inconclusive = true;
            rep.detail = "S_r empty at leaf " + std::to_string(l) + "; try a larger radius";
            return rep;
        }
        sr.push_back(std::move(s));
    }
    for (int t = 0; t < T; ++t) {
        const int keep = sp.stage_offset(t + 1);
        for (int node : sp.tree.stage_nodes(t)) {
            const auto& leaves = sp.tree.leaves_under(node);
            if (leaves.size() < 2) continue;
            std::vector<Polyhedron> proj;
            for (int l : leaves) {
                auto p = fm_project(sr[l], keep);
                if (!p) {
                    rep.inconclusive = true;
                    rep.detail = "projection row cap exceeded";
                    return rep;
                }
                proj.push_back(std::move(*p));
            }
            const MatrixXd L0 = MatrixXd::Identity(keep, sr[leaves[0]].dim());
            for (std::size_t j = 1; j < leaves.size(); ++j) {
                const MatrixXd Lj = MatrixXd::Identity(keep, sr[leaves[j]].dim());
                const bool fwd = image_included(sr[leaves[0]], L0, proj[j]);
                const bool bwd = image_included(sr[leaves[j]], Lj, proj[0]);
                if (!fwd || !bwd) {
                    rep.holds = false;
                    rep.failing_node = sp.tree.node(node).id;
                    rep.failing_stage = t;
                    rep.detail = "stage-" + std::to_string(t) + " projections of S_r differ below node " +
                                 std::to_string(rep.failing_node);
                    return rep;
                }
            }
        }
    }
    rep.holds = true;
    rep.detail = "S_r is adapted; polyhedral selections stay in dom Ef";
    return rep;
}

QualificationReport qualify(const StochasticProgram& sp, const QualificationOptions& opts,
                            const AdaptedProcess* solution) {
    QualificationReport q;
    q.strict_feasibility = check_strict_feasibility(sp);
    q.rec1 = check_rec1(sp);
    std::vector<LeafProcess> extra;
    if (solution) extra.push_back(lift(sp.tree, *solution));
    q.rec2 = check_rec2(sp, opts.samples, opts.seed, extra);
    q.bounded_recourse = check_bounded_recourse(sp, opts.radius);
    return q;
}

}  // namespace treedual
