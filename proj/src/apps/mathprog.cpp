#include "treedual/apps/mathprog.hpp"

#include <cmath>
#include <stdexcept>

#include "treedual/convex_calculus.hpp"

namespace treedual {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

int history_dim(const MathProgram& mp, int t) {
    int s = 0;
    for (int k = 0; k <= t; ++k) s += mp.dims[k];
    return s;
}

// Rows (B, c) with f_j(x) = max_i B_i x + c_i.
void pieces(const ConvexFunction& f, MatrixXd& B, VectorXd& c) {
    if (const auto* a = f.as<Affine>()) {
        B = a->b.transpose();
        c = VectorXd::Constant(1, a->c);
    } else if (const auto* m = f.as<MaxOfAffine>()) {
        B = m->B;
        c = m->c;
    } else {
        throw std::invalid_argument("math program: inequality functions must be affine or max-affine");
    }
}

}  // namespace

void MathProgram::validate() const {
    if (static_cast<int>(dims.size()) != tree.horizon() + 1)
        throw std::invalid_argument("math program: dims must have one entry per stage");
    if (nodes.size() != tree.size()) throw std::invalid_argument("math program: one entry per node required");
    for (int t = 0; t <= tree.horizon(); ++t) {
        const auto& sn = tree.stage_nodes(t);
        const int h = history_dim(*this, t);
        for (int n : sn) {
            const MathNode& nd = nodes[n];
            if (nd.f0.dim() != h) throw std::invalid_argument("math program: f0 must act on the history");
            for (const auto& f : nd.F) {
                if (f.dim() != h) throw std::invalid_argument("math program: inequality must act on the history");
                MatrixXd B;
                VectorXd c;
                pieces(f, B, c);
            }
            if (nd.A.rows() != nd.b.size() || (nd.A.rows() > 0 && nd.A.cols() != h))
                throw std::invalid_argument("math program: A must be rows x history and match b");
            if (nd.F.size() != nodes[sn.front()].F.size() || nd.A.rows() != nodes[sn.front()].A.rows())
                throw std::invalid_argument("math program: constraint counts must agree within a stage");
        }
    }
}

int MathProgram::num_inequalities() const {
    int s = 0;
    for (int t = 0; t <= tree.horizon(); ++t) s += static_cast<int>(nodes[tree.stage_nodes(t).front()].F.size());
    return s;
}

int MathProgram::num_equalities() const {
    int s = 0;
    for (int t = 0; t <= tree.horizon(); ++t) s += static_cast<int>(nodes[tree.stage_nodes(t).front()].A.rows());
    return s;
}

StochasticProgram mathprog_compile(const MathProgram& mp) {
    mp.validate();
    const FilteredTree& tree = mp.tree;
    const int T = tree.horizon();
    const int nx = history_dim(mp, T);
    const int li = mp.num_inequalities();
    const int le = mp.num_equalities();
    const int n = nx + li + le;
    StochasticProgram sp;
    sp.tree = tree;
    sp.dims = mp.dims;
    sp.m = li + le;
    sp.ubar = RandomVector::zeros(tree, sp.m);
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        std::vector<ConvexFunction> terms;
        std::vector<Eigen::RowVectorXd> arow, crow;
        std::vector<double> arhs, crhs;
        int ui = nx, ue = nx + li;
        for (int t = 0; t <= T; ++t) {
            const MathNode& nd = mp.nodes[tree.ancestor(l, t)];
            const int h = history_dim(mp, t);
            MatrixXd S = MatrixXd::Zero(h, n);
            S.leftCols(h).setIdentity();
            terms.push_back(ConvexFunction::precompose(nd.f0, S, VectorXd::Zero(h)));
            for (const auto& f : nd.F) {
                MatrixXd B;
                VectorXd c;
                pieces(f, B, c);
                for (Eigen::Index i = 0; i < B.rows(); ++i) {
                    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
                    r.head(h) = B.row(i);
                    r(ui) = 1.0;
                    arow.push_back(r);
                    arhs.push_back(-c(i));
                }
                ++ui;
            }
            for (Eigen::Index i = 0; i < nd.A.rows(); ++i) {
                Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
                r.head(h) = nd.A.row(i);
                r(ue++) = 1.0;
                crow.push_back(r);
                crhs.push_back(nd.b(i));
            }
        }
        if (!arow.empty() || !crow.empty()) {
            MatrixXd A(arow.size(), n), C(crow.size(), n);
            for (std::size_t i = 0; i < arow.size(); ++i) A.row(static_cast<Eigen::Index>(i)) = arow[i];
            for (std::size_t i = 0; i < crow.size(); ++i) C.row(static_cast<Eigen::Index>(i)) = crow[i];
            terms.push_back(ConvexFunction::polyhedron(A, Eigen::Map<VectorXd>(arhs.data(), arhs.size()), C,
                                                       Eigen::Map<VectorXd>(crhs.data(), crhs.size()), n));
        }
        sp.integrands.push_back(ConvexFunction::sum(std::move(terms), n));
    }
    return sp;
}

MathProgKkt mathprog_kkt(const MathProgram& mp, const AdaptedProcess& x, const LeafProcess& p, const RandomVector& y,
                         double tol) {
    mp.validate();
    const FilteredTree& tree = mp.tree;
    const int T = tree.horizon();
    const int nx = history_dim(mp, T);
    const int li = mp.num_inequalities();
    const int le = mp.num_equalities();
    if (y.dim() != li + le) throw std::invalid_argument("math program kkt: y has wrong size");
    MathProgKkt rep;
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        VectorXd xl(nx);
        for (int t = 0; t <= T; ++t) xl.segment(history_dim(mp, t) - mp.dims[t], mp.dims[t]) = x.at(tree.ancestor(l, t));
        const VectorXd yl = y.at(l);
        std::vector<ConvexFunction> terms;
        double comp = 0.0;
        int ui = 0, ue = li;
        for (int t = 0; t <= T; ++t) {
            const MathNode& nd = mp.nodes[tree.ancestor(l, t)];
            const int h = history_dim(mp, t);
            MatrixXd S = MatrixXd::Zero(h, nx);
            S.leftCols(h).setIdentity();
            const VectorXd xh = xl.head(h);
            terms.push_back(ConvexFunction::precompose(nd.f0, S, VectorXd::Zero(h)));
            for (const auto& f : nd.F) {
                const double yj = yl(ui++);
                const double fv = evaluate(f, xh).value();
                rep.primal_feasibility = std::max(rep.primal_feasibility, fv);
                rep.dual_cone = std::max(rep.dual_cone, -yj);
                comp += yj * fv;
                if (yj > 0.0) terms.push_back(ConvexFunction::scale(yj, ConvexFunction::precompose(f, S, VectorXd::Zero(h))));
            }
            for (Eigen::Index i = 0; i < nd.A.rows(); ++i) {
                const double yj = yl(ue++);
                const double hv = nd.A.row(i).dot(xh) - nd.b(i);
                rep.primal_feasibility = std::max(rep.primal_feasibility, std::abs(hv));
                comp += yj * hv;
                VectorXd g = VectorXd::Zero(nx);
                g.head(h) = yj * nd.A.row(i).transpose();
                terms.push_back(ConvexFunction::affine(g, -yj * nd.b(i)));
            }
        }
        rep.complementarity = std::max(rep.complementarity, std::abs(comp));
        const double r = subdifferential_check(ConvexFunction::sum(std::move(terms), nx), xl, p.at(l));
        rep.leaf_residuals.push_back(r);
        rep.stationarity = std::max(rep.stationarity, std::abs(r));
    }
    rep.nonanticipativity = nonanticipativity_residual(tree, p);
    rep.certified = rep.stationarity <= tol && rep.primal_feasibility <= tol && rep.dual_cone <= tol &&
                    rep.complementarity <= tol && rep.nonanticipativity <= tol;
    return rep;
}

}  // namespace treedual
