#include "treedual/apps/control.hpp"

#include <cmath>
#include <stdexcept>

#include "treedual/convex_calculus.hpp"

namespace treedual {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void ControlSystem::validate() const {
    const std::size_t n = tree.size();
    if (N <= 0 || M < 0) throw std::invalid_argument("control system: bad dimensions");
    if (A.size() != n || B.size() != n || W.size() != n || L.size() != n)
        throw std::invalid_argument("control system: A, B, W, L need one entry per node");
    for (std::size_t i = 0; i < n; ++i) {
        if (L[i].dim() != N + M) throw std::invalid_argument("control system: stage cost must act on (X, U)");
        if (static_cast<int>(i) == tree.root()) continue;
        if (A[i].rows() != N || A[i].cols() != N) throw std::invalid_argument("control system: A must be N x N");
        if (B[i].rows() != N || B[i].cols() != M) throw std::invalid_argument("control system: B must be N x M");
        if (W[i].size() != N) throw std::invalid_argument("control system: W must have N entries");
    }
}

StochasticProgram control_compile(const ControlSystem& cs) {
    cs.validate();
    const FilteredTree& tree = cs.tree;
    const int T = tree.horizon();
    const int n = cs.N + cs.M;
    const int nx = n * (T + 1);
    const int m = T * cs.N;
    StochasticProgram sp;
    sp.tree = tree;
    sp.dims.assign(T + 1, n);
    sp.m = m;
    sp.ubar = RandomVector::zeros(tree, m);
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        std::vector<ConvexFunction> terms;
        for (int t = 0; t <= T; ++t) {
            MatrixXd S = MatrixXd::Zero(n, nx + m);
            S.middleCols(t * n, n).setIdentity();
            terms.push_back(ConvexFunction::precompose(cs.L[tree.ancestor(l, t)], S, VectorXd::Zero(n)));
        }
        if (T > 0) {
            MatrixXd C = MatrixXd::Zero(m, nx + m);
            for (int t = 1; t <= T; ++t) {
                const int node = tree.ancestor(l, t);
                const int r = (t - 1) * cs.N;
                C.block(r, t * n, cs.N, cs.N).setIdentity();
                C.block(r, (t - 1) * n, cs.N, cs.N) = -(MatrixXd::Identity(cs.N, cs.N) + cs.A[node]);
                C.block(r, (t - 1) * n + cs.N, cs.N, cs.M) = -cs.B[node];
                C.block(r, nx + r, cs.N, cs.N) = -MatrixXd::Identity(cs.N, cs.N);
                sp.ubar.values.row(static_cast<Eigen::Index>(l)).segment(r, cs.N) = cs.W[node].transpose();
            }
            terms.push_back(ConvexFunction::polyhedron(MatrixXd(0, nx + m), VectorXd(0), C, VectorXd::Zero(m), nx + m));
        }
        sp.integrands.push_back(ConvexFunction::sum(std::move(terms), nx + m));
    }
    return sp;
}

void control_split(const ControlSystem& cs, const AdaptedProcess& x, AdaptedProcess& X, AdaptedProcess& U) {
    const int T = cs.tree.horizon();
    X = AdaptedProcess::zeros(cs.tree, std::vector<int>(T + 1, cs.N));
    U = AdaptedProcess::zeros(cs.tree, std::vector<int>(T + 1, cs.M));
    for (std::size_t i = 0; i < cs.tree.size(); ++i) {
        X.values[i] = x.at(i).head(cs.N);
        U.values[i] = x.at(i).tail(cs.M);
    }
}

AdaptedProcess control_join(const ControlSystem& cs, const AdaptedProcess& X, const AdaptedProcess& U) {
    const int T = cs.tree.horizon();
    AdaptedProcess x = AdaptedProcess::zeros(cs.tree, std::vector<int>(T + 1, cs.N + cs.M));
    for (std::size_t i = 0; i < cs.tree.size(); ++i) x.values[i] << X.at(i), U.at(i);
    return x;
}

AdaptedProcess control_costate(const ControlSystem& cs, const RandomVector& y) {
    const FilteredTree& tree = cs.tree;
    const int T = tree.horizon();
    std::vector<int> dims(T + 1, cs.N);
    dims[0] = 0;
    LeafProcess q = LeafProcess::zeros(tree, dims);
    for (std::size_t l = 0; l < tree.num_leaves(); ++l)
        for (int t = 1; t <= T; ++t) q.set_block(l, t, y.at(l).segment((t - 1) * cs.N, cs.N));
    return adapted_projection(tree, q);
}

namespace {

struct Quad {
    MatrixXd H;
    VectorXd g;
    double c = 0.0;
};

}  // namespace

LqSolution lq_riccati_oracle(const ControlSystem& cs) {
    cs.validate();
    const FilteredTree& tree = cs.tree;
    const int T = tree.horizon();
    const int N = cs.N;
    const int M = cs.M;
    const std::size_t nn = tree.size();
    std::vector<Quad> V(nn);                 // value function in X
    std::vector<MatrixXd> gain(nn);          // U = gain X + offset
    std::vector<VectorXd> offset(nn);
    for (int t = T; t >= 0; --t) {
        for (int n : tree.stage_nodes(t)) {
            const auto* q = cs.L[n].as<Quadratic>();
            if (!q) throw std::invalid_argument("lq oracle: stage costs must be quadratic");
            Quad J{q->Q, q->b, q->c};
            for (int ch : tree.children(n)) {
                const double pi = tree.prob(ch) / tree.prob(n);
                MatrixXd F(N, N + M);
                F << MatrixXd::Identity(N, N) + cs.A[ch], cs.B[ch];
                const Quad& Vc = V[ch];
                J.H += pi * F.transpose() * Vc.H * F;
                J.g += pi * F.transpose() * (Vc.H * cs.W[ch] + Vc.g);
                J.c += pi * (0.5 * cs.W[ch].dot(Vc.H * cs.W[ch]) + Vc.g.dot(cs.W[ch]) + Vc.c);
            }
            const MatrixXd Huu = J.H.bottomRightCorner(M, M);
            const MatrixXd Hux = J.H.bottomLeftCorner(M, N);
            if (M > 0) {
                Eigen::LLT<MatrixXd> llt(Huu);
                if (llt.info() != Eigen::Success || Huu.diagonal().minCoeff() <= 0.0)
                    throw std::invalid_argument("lq oracle: control cost must be positive definite");
                gain[n] = -llt.solve(Hux);
                offset[n] = -llt.solve(J.g.tail(M));
            } else {
                gain[n] = MatrixXd::Zero(0, N);
                offset[n] = VectorXd::Zero(0);
            }
            MatrixXd P(N + M, N);
            P << MatrixXd::Identity(N, N), gain[n];
            VectorXd o(N + M);
            o << VectorXd::Zero(N), offset[n];
            V[n].H = P.transpose() * J.H * P;
            V[n].H = 0.5 * (V[n].H + V[n].H.transpose());
            V[n].g = P.transpose() * (J.H * o + J.g);
            V[n].c = 0.5 * o.dot(J.H * o) + J.g.dot(o) + J.c;
        }
    }
    LqSolution sol;
    sol.X = AdaptedProcess::zeros(tree, std::vector<int>(T + 1, N));
    sol.U = AdaptedProcess::zeros(tree, std::vector<int>(T + 1, M));
    std::vector<int> ydims(T + 1, N);
    ydims[0] = 0;
    sol.y = AdaptedProcess::zeros(tree, ydims);
    const int root = tree.root();
    const Quad& V0 = V[root];
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(V0.H);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-10 * scale)
        throw std::invalid_argument("lq oracle: initial value function is not convex");
    const Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(V0.H);
    const VectorXd X0 = -cod.solve(V0.g);
    if ((V0.H * X0 + V0.g).norm() > 1e-8 * std::max(1.0, V0.g.norm()))
        throw std::invalid_argument("lq oracle: problem is unbounded below");
    for (int t = 0; t <= T; ++t) {
        for (int n : tree.stage_nodes(t)) {
            if (t == 0) {
                sol.X.values[n] = X0;
            } else {
                const int par = tree.parent(n);
                sol.X.values[n] = sol.X.at(par) + cs.A[n] * sol.X.at(par) + cs.B[n] * sol.U.at(par) + cs.W[n];
                sol.y.values[n] = V[n].H * sol.X.at(n) + V[n].g;
            }
            sol.U.values[n] = gain[n] * sol.X.at(n) + offset[n];
        }
    }
    sol.value = 0.5 * X0.dot(V0.H * X0) + V0.g.dot(X0) + V0.c;
    return sol;
}

ControlDualReport control_dual_residual(const ControlSystem& cs, const AdaptedProcess& X, const AdaptedProcess& U,
                                        const AdaptedProcess& y, double tol) {
    cs.validate();
    const FilteredTree& tree = cs.tree;
    const int T = tree.horizon();
    const int N = cs.N;
    const int M = cs.M;
    ControlDualReport rep;
    rep.node_residuals.assign(tree.size(), 0.0);
    auto yv = [&](int node) -> VectorXd { return tree.time(node) == 0 ? VectorXd::Zero(N) : VectorXd(y.at(node)); };
    // w(child) = (dy + A' y, B' y) evaluated along the edge into `child`.
    auto w_edge = [&](int node, int child) {
        VectorXd w(N + M);
        const VectorXd yc = yv(child);
        w.head(N) = yc - yv(node) + cs.A[child].transpose() * yc;
        w.tail(M) = cs.B[child].transpose() * yc;
        return w;
    };
    for (std::size_t n = 0; n < tree.size(); ++n) {
        VectorXd ew = VectorXd::Zero(N + M);
        if (tree.time(n) == T) {
            ew.head(N) = -yv(static_cast<int>(n));
        } else {
            for (int ch : tree.children(n)) ew += tree.prob(ch) / tree.prob(n) * w_edge(static_cast<int>(n), ch);
        }
        VectorXd z(N + M);
        z << X.at(n), U.at(n);
        const double r = subdifferential_check(cs.L[n], z, -ew);
        rep.node_residuals[n] = r;
        rep.stationarity = std::max(rep.stationarity, std::abs(r));
        if (tree.time(n) > 0) {
            const int par = tree.parent(n);
            const VectorXd d = X.at(n) - X.at(par) - cs.A[n] * X.at(par) - cs.B[n] * U.at(par) - cs.W[n];
            rep.dynamics = std::max(rep.dynamics, d.cwiseAbs().maxCoeff());
        }
    }
    rep.p = LeafProcess::zeros(tree, std::vector<int>(T + 1, N + M));
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        for (int t = 0; t < T; ++t) {
            const int n = tree.ancestor(l, t);
            VectorXd ew = VectorXd::Zero(N + M);
            for (int ch : tree.children(n)) ew += tree.prob(ch) / tree.prob(n) * w_edge(n, ch);
            rep.p.set_block(l, t, w_edge(n, tree.ancestor(l, t + 1)) - ew);
        }
    }
    rep.nonanticipativity = nonanticipativity_residual(tree, rep.p);
    rep.certified = rep.stationarity <= tol && rep.dynamics <= tol && rep.nonanticipativity <= tol;
    return rep;
}

}  // namespace treedual
