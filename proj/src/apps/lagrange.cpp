#include "treedual/apps/lagrange.hpp"

#include <cmath>
#include <stdexcept>

#include "treedual/convex_calculus.hpp"

namespace treedual {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void LagrangeProblem::validate() const {
    if (d <= 0) throw std::invalid_argument("lagrange problem: d must be positive");
    if (K.size() != tree.size()) throw std::invalid_argument("lagrange problem: one K per node required");
    for (const auto& k : K)
        if (k.dim() != 2 * d) throw std::invalid_argument("lagrange problem: K must act on R^d x R^d");
}

StochasticProgram lagrange_compile(const LagrangeProblem& lp) {
    lp.validate();
    const FilteredTree& tree = lp.tree;
    const int T = tree.horizon();
    const int d = lp.d;
    const int nx = d * (T + 1);
    const int n = 2 * nx;
    StochasticProgram sp;
    sp.tree = tree;
    sp.dims.assign(T + 1, d);
    sp.m = nx;
    sp.ubar = RandomVector::zeros(tree, nx);
    const MatrixXd I = MatrixXd::Identity(d, d);
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        std::vector<ConvexFunction> terms;
        for (int t = 0; t <= T; ++t) {
            MatrixXd S = MatrixXd::Zero(2 * d, n);
            S.block(0, t * d, d, d) = I;
            S.block(d, t * d, d, d) = I;
            if (t > 0) S.block(d, (t - 1) * d, d, d) = -I;
            S.block(d, nx + t * d, d, d) = I;
            terms.push_back(ConvexFunction::precompose(lp.K[tree.ancestor(l, t)], S, VectorXd::Zero(2 * d)));
        }
        sp.integrands.push_back(ConvexFunction::sum(std::move(terms), n));
    }
    return sp;
}

ExtendedReal hamiltonian(const LagrangeProblem& lp, int node, const VectorXd& x, const VectorXd& y) {
    lp.validate();
    const int d = lp.d;
    if (x.size() != d || y.size() != d) throw std::invalid_argument("hamiltonian: dimension mismatch");
    MatrixXd S = MatrixXd::Zero(2 * d, d);
    S.bottomRows(d).setIdentity();
    VectorXd shift = VectorXd::Zero(2 * d);
    shift.head(d) = x;
    return -conjugate(ConvexFunction::precompose(lp.K.at(node), S, shift), y);
}

AdaptedProcess lagrange_costate(const LagrangeProblem& lp, const RandomVector& y) {
    const int T = lp.tree.horizon();
    LeafProcess q = LeafProcess::zeros(lp.tree, std::vector<int>(T + 1, lp.d));
    q.values = y.values;
    return adapted_projection(lp.tree, q);
}

LagrangeDualReport lagrange_dual_residual(const LagrangeProblem& lp, const AdaptedProcess& x, const AdaptedProcess& y,
                                          double tol) {
    lp.validate();
    const FilteredTree& tree = lp.tree;
    const int T = tree.horizon();
    const int d = lp.d;
    LagrangeDualReport rep;
    rep.node_residuals.assign(tree.size(), 0.0);
    auto mean_next = [&](int n) -> VectorXd {
        VectorXd acc = VectorXd::Zero(d);
        for (int c : tree.children(n)) acc += tree.prob(c) / tree.prob(n) * y.at(c);
        return acc;
    };
    for (std::size_t n = 0; n < tree.size(); ++n) {
        const int node = static_cast<int>(n);
        const VectorXd prev = tree.time(node) == 0 ? VectorXd::Zero(d) : VectorXd(x.at(tree.parent(node)));
        VectorXd z(2 * d), v(2 * d);
        z << x.at(n), x.at(n) - prev;
        v << mean_next(node) - y.at(n), y.at(n);
        const double r = subdifferential_check(lp.K[n], z, v);
        rep.node_residuals[n] = r;
        rep.max_residual = std::max(rep.max_residual, std::abs(r));
    }
    rep.p = LeafProcess::zeros(tree, std::vector<int>(T + 1, d));
    for (std::size_t l = 0; l < tree.num_leaves(); ++l)
        for (int t = 0; t < T; ++t) {
            const int n = tree.ancestor(l, t);
            rep.p.set_block(l, t, mean_next(n) - y.at(tree.ancestor(l, t + 1)));
        }
    rep.nonanticipativity = nonanticipativity_residual(tree, rep.p);
    rep.certified = rep.max_residual <= tol && rep.nonanticipativity <= tol;
    return rep;
}

}  // namespace treedual
