#include "treedual/apps/hedging.hpp"

#include <cmath>
#include <stdexcept>

#include "treedual/convex_calculus.hpp"

namespace treedual {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const ConvexFunction& HedgingProblem::loss(std::size_t leaf) const { return V.size() == 1 ? V.front() : V.at(leaf); }

void HedgingProblem::validate() const {
    const auto nl = static_cast<Eigen::Index>(tree.num_leaves());
    if (J < 0 || K < 0) throw std::invalid_argument("hedging: negative dimension");
    if (s.size() != tree.size()) throw std::invalid_argument("hedging: one price vector per node required");
    for (const auto& v : s)
        if (v.size() != J) throw std::invalid_argument("hedging: price vectors must have J entries");
    if (C.rows() != nl || C.cols() != K) throw std::invalid_argument("hedging: C must be leaves x K");
    if (premium.dim() != K) throw std::invalid_argument("hedging: premium must act on R^K");
    if (K > 0) {
        const ExtendedReal s0 = evaluate(premium, VectorXd::Zero(K));
        if (!s0.is_finite() || std::abs(s0.value()) > 1e-12) throw std::invalid_argument("hedging: premium must vanish at 0");
    }
    if (V.size() != 1 && V.size() != tree.num_leaves()) throw std::invalid_argument("hedging: one loss per leaf or a shared one");
    for (const auto& v : V) {
        if (v.dim() != 1) throw std::invalid_argument("hedging: loss must be scalar");
        if (K > 0 && !premium.as<Affine>() && recession(v, VectorXd::Constant(1, -1.0)) > ExtendedReal(0.0))
            throw std::invalid_argument("hedging: loss must be nondecreasing when the premium is not affine");
    }
    if (!D.empty()) {
        if (D.size() != tree.size()) throw std::invalid_argument("hedging: one constraint set per node required");
        for (const auto& d : D) {
            if (d.dim() != J) throw std::invalid_argument("hedging: constraint sets live in R^J");
            const ExtendedReal z = evaluate(d, VectorXd::Zero(J));
            if (!z.is_finite() || z.value() != 0.0) throw std::invalid_argument("hedging: constraint sets must be indicators containing 0");
        }
    }
    if (c.size() != nl) throw std::invalid_argument("hedging: claim needs one value per leaf");
}

namespace {

int block_dim(const HedgingProblem& h, int t) { return t == 0 ? h.K + h.J : h.J; }
int offset_of(const HedgingProblem& h, int t) { return t == 0 ? h.K : h.K + h.J * t; }

}  // namespace

StochasticProgram hedging_compile(const HedgingProblem& h) {
    h.validate();
    const FilteredTree& tree = h.tree;
    const int T = tree.horizon();
    const int J = h.J;
    const int K = h.K;
    const int nx = K + J * (T + 1);
    const int n = nx + 1;
    StochasticProgram sp;
    sp.tree = tree;
    for (int t = 0; t <= T; ++t) sp.dims.push_back(block_dim(h, t));
    sp.m = 1;
    sp.ubar = RandomVector(MatrixXd(h.c));
    const bool affine_premium = K == 0 || h.premium.as<Affine>() != nullptr;
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        // z = u - sum_t x_t . ds_{t+1} - C x_{-1} (+ S(x_{-1}))
        VectorXd row = VectorXd::Zero(n);
        row(nx) = 1.0;
        row.head(K) = -h.C.row(static_cast<Eigen::Index>(l)).transpose();
        for (int t = 0; t < T; ++t) {
            const VectorXd ds = h.s[tree.ancestor(l, t + 1)] - h.s[tree.ancestor(l, t)];
            row.segment(offset_of(h, t), J) = -ds;
        }
        double shift = 0.0;
        std::vector<ConvexFunction> terms;
        if (affine_premium) {
            if (K > 0) {
                const auto* a = h.premium.as<Affine>();
                row.head(K) += a->b;
                shift = a->c;
            }
            terms.push_back(ConvexFunction::precompose(h.loss(l), row.transpose(), VectorXd::Constant(1, shift)));
        } else {
            MatrixXd Sel = MatrixXd::Zero(K, n);
            Sel.leftCols(K).setIdentity();
            const ConvexFunction inner = ConvexFunction::sum(
                {ConvexFunction::affine(row), ConvexFunction::precompose(h.premium, Sel, VectorXd::Zero(K))}, n);
            terms.push_back(ConvexFunction::monotone_compose(h.loss(l), inner));
        }
        for (int t = 0; t < T && !h.D.empty(); ++t) {
            MatrixXd Sel = MatrixXd::Zero(J, n);
            Sel.middleCols(offset_of(h, t), J).setIdentity();
            terms.push_back(ConvexFunction::precompose(h.D[tree.ancestor(l, t)], Sel, VectorXd::Zero(J)));
        }
        if (J > 0) {
            MatrixXd E = MatrixXd::Zero(J, n);
            E.middleCols(offset_of(h, T), J).setIdentity();
            terms.push_back(ConvexFunction::polyhedron(MatrixXd(0, n), VectorXd(0), E, VectorXd::Zero(J), n));
        }
        sp.integrands.push_back(ConvexFunction::sum(std::move(terms), n));
    }
    return sp;
}

HedgingDualReport hedging_dual_residual(const HedgingProblem& h, const AdaptedProcess& x, const RandomVector& y,
                                        double tol) {
    h.validate();
    const FilteredTree& tree = h.tree;
    const int T = tree.horizon();
    const int J = h.J;
    const int K = h.K;
    if (y.dim() != 1) throw std::invalid_argument("hedging residual: y must be scalar");
    HedgingDualReport rep;
    const VectorXd xm1 = x.at(tree.root()).head(K);
    auto pos = [&](int node) -> VectorXd {
        const int t = tree.time(node);
        return t == 0 ? VectorXd(x.at(node).tail(J)) : VectorXd(x.at(node));
    };
    auto ds = [&](std::size_t l, int t) -> VectorXd { return h.s[tree.ancestor(l, t + 1)] - h.s[tree.ancestor(l, t)]; };

    double Ey = 0.0;
    VectorXd EyC = VectorXd::Zero(K);
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        const double yl = y.values(static_cast<Eigen::Index>(l), 0);
        Ey += tree.leaf_prob(l) * yl;
        EyC += tree.leaf_prob(l) * yl * h.C.row(static_cast<Eigen::Index>(l)).transpose();
    }
    const ExtendedReal Sx = K > 0 ? evaluate(h.premium, xm1) : ExtendedReal(0.0);
    const VectorXd frac = Ey != 0.0 ? VectorXd(EyC / Ey) : VectorXd(VectorXd::Zero(K));

    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        const double yl = y.values(static_cast<Eigen::Index>(l), 0);
        if (!Sx.is_finite()) {
            rep.loss = HUGE_VAL;
        } else {
            double z = h.c(static_cast<Eigen::Index>(l)) - h.C.row(static_cast<Eigen::Index>(l)).dot(xm1) + Sx.value();
            for (int t = 0; t < T; ++t) z -= pos(tree.ancestor(l, t)).dot(ds(l, t));
            rep.loss = std::max(rep.loss, std::abs(subdifferential_check(h.loss(l), VectorXd::Constant(1, z),
                                                                          VectorXd::Constant(1, yl))));
        }
        if (K > 0) {
            const double r = yl < 0.0 ? HUGE_VAL
                                      : subdifferential_check(ConvexFunction::scale(yl, h.premium), xm1, frac * yl);
            rep.derivatives = std::max(rep.derivatives, std::abs(r));
        }
    }
    // Trading condition per node, t < T.
    std::vector<VectorXd> Eyds(tree.size(), VectorXd::Zero(J));
    for (int t = 0; t < T; ++t) {
        for (int n : tree.stage_nodes(t)) {
            for (int l : tree.leaves_under(n))
                Eyds[n] += tree.leaf_prob(l) * y.values(l, 0) * ds(static_cast<std::size_t>(l), t);
            Eyds[n] /= tree.prob(n);
            const Polyhedron dn = h.D.empty() ? Polyhedron::whole(J) : *domain_polyhedron(h.D[n]);
            rep.trading = std::max(rep.trading, normal_cone_distance(dn, pos(n), Eyds[n]));
        }
    }
    for (int n : tree.stage_nodes(T))
        if (J > 0) rep.terminal = std::max(rep.terminal, pos(n).cwiseAbs().maxCoeff());

    std::vector<int> dims;
    for (int t = 0; t <= T; ++t) dims.push_back(block_dim(h, t));
    rep.p = LeafProcess::zeros(tree, dims);
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        const double yl = y.values(static_cast<Eigen::Index>(l), 0);
        for (int t = 0; t < T; ++t) {
            VectorXd blk = VectorXd::Zero(block_dim(h, t));
            blk.tail(J) = Eyds[tree.ancestor(l, t)] - yl * ds(l, t);
            if (t == 0) blk.head(K) = frac * yl - yl * h.C.row(static_cast<Eigen::Index>(l)).transpose();
            rep.p.set_block(l, t, blk);
        }
        if (T == 0 && K > 0) {
            VectorXd blk = VectorXd::Zero(block_dim(h, 0));
            blk.head(K) = frac * yl - yl * h.C.row(static_cast<Eigen::Index>(l)).transpose();
            rep.p.set_block(l, 0, blk);
        }
    }
    rep.nonanticipativity = nonanticipativity_residual(tree, rep.p);
    rep.certified = rep.loss <= tol && rep.trading <= tol && rep.derivatives <= tol && rep.terminal <= tol &&
                    rep.nonanticipativity <= tol;
    return rep;
}

}  // namespace treedual
