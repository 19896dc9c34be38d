#include "treedual/apps/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace treedual {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void RewardProcess::validate() const {
    if (R.size() != static_cast<Eigen::Index>(tree.size()))
        throw std::invalid_argument("reward process: one value per node required");
    if (!R.allFinite()) throw std::invalid_argument("reward process: values must be finite");
}

bool is_stopping_time(const FilteredTree& tree, const StoppingTime& tau) {
    if (tau.stage.size() != tree.num_leaves()) return false;
    const int T = tree.horizon();
    for (int s : tau.stage)
        if (s < 0 || s > T + 1) return false;
    for (int t = 0; t <= T; ++t) {
        for (int node : tree.stage_nodes(t)) {
            const auto& leaves = tree.leaves_under(node);
            const bool first = tau.stage[leaves.front()] <= t;
            for (int l : leaves)
                if ((tau.stage[l] <= t) != first) return false;
        }
    }
    return true;
}

double stopping_value(const RewardProcess& rp, const StoppingTime& tau) {
    rp.validate();
    double v = 0.0;
    for (std::size_t l = 0; l < rp.tree.num_leaves(); ++l) {
        const int s = tau.stage.at(l);
        if (s <= rp.tree.horizon()) v += rp.tree.leaf_prob(l) * rp.R(rp.tree.ancestor(l, s));
    }
    return v;
}

namespace {

double child_mean(const FilteredTree& tree, int node, const VectorXd& v) {
    double acc = 0.0;
    for (int c : tree.children(node)) acc += tree.prob(c) * v(c);
    return acc / tree.prob(node);
}

}  // namespace

VectorXd snell_envelope(const RewardProcess& rp) {
    rp.validate();
    const FilteredTree& tree = rp.tree;
    VectorXd S(tree.size());
    for (int t = tree.horizon(); t >= 0; --t) {
        for (int n : tree.stage_nodes(t)) {
            const double cont = t == tree.horizon() ? 0.0 : child_mean(tree, n, S);
            S(n) = std::max(rp.R(n), cont);
        }
    }
    return S;
}

double snell_value(const RewardProcess& rp) { return std::max(snell_envelope(rp)(rp.tree.root()), 0.0); }

StoppingTime optimal_stopping_time(const RewardProcess& rp, double tol) {
    const VectorXd S = snell_envelope(rp);
    const FilteredTree& tree = rp.tree;
    const int T = tree.horizon();
    StoppingTime tau;
    tau.stage.assign(tree.num_leaves(), T + 1);
    if (S(tree.root()) <= 0.0) return tau;
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        for (int t = 0; t <= T; ++t) {
            const int n = tree.ancestor(l, t);
            if (rp.R(n) >= S(n) - tol * std::max(1.0, std::abs(S(n)))) {
                tau.stage[l] = t;
                break;
            }
        }
    }
    return tau;
}

namespace {

// Values E[R_tau 1_{node}] of every stopping time started at `node`, given it has not stopped before.
std::vector<double> enumerate_values(const RewardProcess& rp, int node, double cap) {
    const FilteredTree& tree = rp.tree;
    std::vector<double> out{tree.prob(node) * rp.R(node)};
    const auto& kids = tree.children(node);
    if (kids.empty()) {
        out.push_back(0.0);
        return out;
    }
    std::vector<std::vector<double>> lists;
    double combos = 1.0;
    for (int c : kids) {
        lists.push_back(enumerate_values(rp, c, cap));
        combos *= static_cast<double>(lists.back().size());
    }
    if (combos > cap) throw std::length_error("exhaustive stopping oracle: too many stopping times");
    std::vector<std::size_t> idx(lists.size(), 0);
    for (;;) {
        double s = 0.0;
        for (std::size_t k = 0; k < lists.size(); ++k) s += lists[k][idx[k]];
        out.push_back(s);
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == lists[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
    }
    return out;
}

}  // namespace

StoppingOracle exhaustive_stopping_oracle(const RewardProcess& rp, double cap) {
    rp.validate();
    const FilteredTree& tree = rp.tree;
    const int root = tree.root();
    StoppingOracle res;
    res.value = tree.prob(root) * rp.R(root);
    res.count = 1.0;
    const auto& kids = tree.children(root);
    if (kids.empty()) {
        res.value = std::max(res.value, 0.0);
        res.count = 2.0;
        return res;
    }
    // The root level is streamed rather than materialized.
    std::vector<std::vector<double>> lists;
    double combos = 1.0;
    for (int c : kids) {
        lists.push_back(enumerate_values(rp, c, cap));
        combos *= static_cast<double>(lists.back().size());
    }
    if (combos > cap) throw std::length_error("exhaustive stopping oracle: too many stopping times");
    std::vector<std::size_t> idx(lists.size(), 0);
    for (;;) {
        double s = 0.0;
        for (std::size_t k = 0; k < lists.size(); ++k) s += lists[k][idx[k]];
        res.value = std::max(res.value, s);
        res.count += 1.0;
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == lists[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
    }
    res.value /= tree.prob(root);
    return res;
}

StoppingDual stopping_dual(const RewardProcess& rp) {
    const VectorXd S = snell_envelope(rp);
    const FilteredTree& tree = rp.tree;
    const int T = tree.horizon();
    StoppingDual d;
    d.y = VectorXd::Zero(tree.size());
    d.p = LeafProcess::zeros(tree, std::vector<int>(T + 1, 1));
    if (S(tree.root()) <= 0.0) return d;
    for (int t = 0; t <= T; ++t) {
        for (int n : tree.stage_nodes(t)) {
            if (t == 0) {
                d.y(n) = S(n);
                continue;
            }
            const int par = tree.parent(n);
            d.y(n) = d.y(par) + S(n) - child_mean(tree, par, S);
        }
    }
    d.value = d.y(tree.root());
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        const double yT = d.y(tree.leaf_node(l));
        for (int t = 0; t <= T; ++t) d.p.set_block(l, t, VectorXd::Constant(1, yT - d.y(tree.ancestor(l, t))));
    }
    return d;
}

StoppingReport verify_stopping_certificate(const RewardProcess& rp, const StoppingTime& tau, const VectorXd& y,
                                           double tol) {
    rp.validate();
    const FilteredTree& tree = rp.tree;
    if (y.size() != static_cast<Eigen::Index>(tree.size()))
        throw std::invalid_argument("stopping certificate: one martingale value per node required");
    const int T = tree.horizon();
    StoppingReport rep;
    rep.measurable = is_stopping_time(tree, tau);
    for (std::size_t n = 0; n < tree.size(); ++n) {
        if (tree.time(n) < T) rep.martingale = std::max(rep.martingale, std::abs(child_mean(tree, n, y) - y(n)));
        rep.dominance = std::max(rep.dominance, rp.R(n) - y(n));
        rep.nonnegativity = std::max(rep.nonnegativity, -y(n));
    }
    if (rep.measurable) {
        for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
            const int s = tau.stage[l];
            const double gap = s <= T ? rp.R(tree.ancestor(l, s)) - y(tree.ancestor(l, s)) : -y(tree.leaf_node(l));
            rep.slackness = std::max(rep.slackness, std::abs(gap));
        }
    }
    rep.certified = rep.measurable && rep.martingale <= tol && rep.dominance <= tol && rep.nonnegativity <= tol &&
                    rep.slackness <= tol;
    return rep;
}

StochasticProgram ros_compile(const RewardProcess& rp) {
    rp.validate();
    const FilteredTree& tree = rp.tree;
    const int T = tree.horizon();
    const int n = T + 1;
    StochasticProgram sp;
    sp.tree = tree;
    sp.dims.assign(n, 1);
    sp.m = 1;
    MatrixXd A = MatrixXd::Zero(n + 1, n + 1);
    A.topLeftCorner(n, n) = -MatrixXd::Identity(n, n);
    A.row(n).setOnes();
    const ConvexFunction dom = ConvexFunction::polyhedron(A, VectorXd::Zero(n + 1), MatrixXd(0, n + 1), VectorXd(0), n + 1);
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        VectorXd b = VectorXd::Zero(n + 1);
        for (int t = 0; t <= T; ++t) b(t) = -rp.R(tree.ancestor(l, t));
        sp.integrands.push_back(ConvexFunction::sum({ConvexFunction::affine(b), dom}, n + 1));
    }
    sp.ubar = RandomVector::constant(tree, VectorXd::Constant(1, -1.0));
    return sp;
}

DualPoint ros_dual_point(const RewardProcess& rp, const StoppingDual& dual) {
    DualPoint dp;
    dp.p = dual.p;
    dp.y = RandomVector::zeros(rp.tree, 1);
    for (std::size_t l = 0; l < rp.tree.num_leaves(); ++l) dp.y.values(static_cast<Eigen::Index>(l), 0) = dual.y(rp.tree.leaf_node(l));
    return dp;
}

StoppingTime stopping_time_from_relaxation(const RewardProcess& rp, const AdaptedProcess& x, double tol) {
    const FilteredTree& tree = rp.tree;
    const int T = tree.horizon();
    StoppingTime tau;
    tau.stage.assign(tree.num_leaves(), T + 1);
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        for (int t = 0; t <= T; ++t) {
            if (x.at(tree.ancestor(l, t))(0) > tol) {
                tau.stage[l] = t;
                break;
            }
        }
    }
    return tau;
}

}  // namespace treedual
