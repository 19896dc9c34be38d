#include "treedual/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCholesky>

namespace treedual {

using Eigen::VectorXd;

QuadraticProgram QuadraticProgram::with_dim(int n) {
    QuadraticProgram qp;
    qp.P.resize(n, n);
    qp.q = VectorXd::Zero(n);
    qp.A.resize(0, n);
    qp.b.resize(0);
    qp.G.resize(0, n);
    qp.h.resize(0);
    return qp;
}

std::string to_string(QpStatus s) {
    switch (s) {
        case QpStatus::optimal: return "optimal";
        case QpStatus::infeasible: return "infeasible";
        case QpStatus::unbounded: return "unbounded";
        case QpStatus::max_iterations: return "max_iterations";
    }
    return "unknown";
}

SparseMatrix to_sparse(const Eigen::MatrixXd& m) {
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != 0.0) trip.emplace_back(static_cast<int>(i), static_cast<int>(j), m(i, j));
    SparseMatrix s(m.rows(), m.cols());
    s.setFromTriplets(trip.begin(), trip.end());
    return s;
}

QpResult solve_dense(const Eigen::MatrixXd& P, const VectorXd& q, const Eigen::MatrixXd& G, const VectorXd& h,
                     const Eigen::MatrixXd& A, const VectorXd& b, const QpOptions& opts) {
    const int n = static_cast<int>(q.size());
    QuadraticProgram qp = QuadraticProgram::with_dim(n);
    qp.q = q;
    if (P.size() > 0) qp.P = to_sparse(P);
    if (G.rows() > 0) {
        qp.G = to_sparse(G);
        qp.h = h;
    }
    if (A.rows() > 0) {
        qp.A = to_sparse(A);
        qp.b = b;
    }
    return solve_qp(qp, opts);
}

namespace {

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

SparseMatrix identity(int n) {
    SparseMatrix I(n, n);
    I.setIdentity();
    return I;
}

SparseMatrix vstack(const SparseMatrix& top, const SparseMatrix& bottom) {
    SparseMatrix out(top.rows() + bottom.rows(), top.cols());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(top.nonZeros() + bottom.nonZeros()));
    for (int k = 0; k < top.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(top, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < bottom.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(bottom, k); it; ++it)
            trip.emplace_back(static_cast<int>(it.row() + top.rows()), it.col(), it.value());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

// Regularized quasi-definite KKT system [H + rho I, C'; C, -delta I] with
// iterative refinement against the unregularized matrix.
class KktSystem {
public:
    KktSystem(const SparseMatrix& H, const SparseMatrix& C, double rho, double delta)
        : n_(static_cast<int>(H.rows())), k_(static_cast<int>(C.rows())) {
        for (int attempt = 0; attempt < 6; ++attempt) {
            rho_ = rho;
            delta_ = delta;
            assemble(H, C);
            ldlt_.compute(K_);
            if (ldlt_.info() == Eigen::Success) {
                ok_ = true;
                return;
            }
            rho *= 100.0;
            delta *= 100.0;
        }
    }

    [[nodiscard]] bool ok() const noexcept { return ok_; }

    VectorXd solve(const VectorXd& rhs, int refinements = 3) const {
        VectorXd sol = ldlt_.solve(rhs);
        double prev = std::numeric_limits<double>::infinity();
        for (int i = 0; i < refinements; ++i) {
            VectorXd res = rhs - apply_unregularized(sol);
            const double nr = inf_norm(res);
            if (!(nr < prev) || nr <= 1e-15 * (1.0 + inf_norm(rhs))) break;
            prev = nr;
            VectorXd corr = ldlt_.solve(res);
            if (!corr.allFinite()) break;
            sol += corr;
        }
        return sol;
    }

private:
    void assemble(const SparseMatrix& H, const SparseMatrix& C) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(H.nonZeros() + 2 * C.nonZeros() + n_ + k_));
        for (int j = 0; j < H.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(H, j); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
        for (int j = 0; j < C.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(C, j); it; ++it) {
                trip.emplace_back(static_cast<int>(n_ + it.row()), it.col(), it.value());
                trip.emplace_back(it.col(), static_cast<int>(n_ + it.row()), it.value());
            }
        for (int i = 0; i < n_; ++i) trip.emplace_back(i, i, rho_);
        for (int i = 0; i < k_; ++i) trip.emplace_back(n_ + i, n_ + i, -delta_);
        K_.resize(n_ + k_, n_ + k_);
        K_.setFromTriplets(trip.begin(), trip.end());
    }

    VectorXd apply_unregularized(const VectorXd& v) const {
        VectorXd out = K_ * v;
        out.head(n_) -= rho_ * v.head(n_);
        out.tail(k_) += delta_ * v.tail(k_);
        return out;
    }

    int n_;
    int k_;
    double rho_ = 0.0;
    double delta_ = 0.0;
    bool ok_ = false;
    SparseMatrix K_;
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt_;
};

struct Scaled {
    SparseMatrix P;
    VectorXd q;
    SparseMatrix A;
    VectorXd b;
    SparseMatrix G;
    VectorXd h;
    VectorXd a_scale;  // multiplier rescaling for equality rows
    VectorXd g_scale;
    int n_user_ineq = 0;
    bool infeasible_row = false;
};

// Drops zero rows and normalizes the remaining ones to unit infinity norm.
Scaled normalize(const QuadraticProgram& qp, std::vector<int>& a_rows, std::vector<int>& g_rows) {
    Scaled s;
    s.P = qp.P;
    s.q = qp.q;
    const int n = qp.num_vars();
    auto process = [&](const SparseMatrix& M, const VectorXd& rhs, bool equality, SparseMatrix& out,
                       VectorXd& out_rhs, VectorXd& scale, std::vector<int>& kept) {
        SparseMatrix Mr = M;  // column major; compute row norms
        VectorXd rn = VectorXd::Zero(M.rows());
        for (int j = 0; j < Mr.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(Mr, j); it; ++it)
                rn(it.row()) = std::max(rn(it.row()), std::abs(it.value()));
        std::vector<int> map(static_cast<std::size_t>(M.rows()), -1);
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            if (rn(i) == 0.0) {
                const double tol = 1e-12 * (1.0 + std::abs(rhs(i)));
                if (equality ? std::abs(rhs(i)) > tol : rhs(i) < -tol) s.infeasible_row = true;
                continue;
            }
            map[i] = static_cast<int>(kept.size());
            kept.push_back(static_cast<int>(i));
        }
        std::vector<Eigen::Triplet<double>> trip;
        for (int j = 0; j < Mr.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(Mr, j); it; ++it)
                if (map[it.row()] >= 0) trip.emplace_back(map[it.row()], it.col(), it.value() / rn(it.row()));
        out.resize(static_cast<Eigen::Index>(kept.size()), n);
        out.setFromTriplets(trip.begin(), trip.end());
        out_rhs.resize(static_cast<Eigen::Index>(kept.size()));
        scale.resize(static_cast<Eigen::Index>(kept.size()));
        for (std::size_t i = 0; i < kept.size(); ++i) {
            out_rhs(static_cast<Eigen::Index>(i)) = rhs(kept[i]) / rn(kept[i]);
            scale(static_cast<Eigen::Index>(i)) = 1.0 / rn(kept[i]);
        }
    };
    process(qp.A, qp.b, true, s.A, s.b, s.a_scale, a_rows);
    process(qp.G, qp.h, false, s.G, s.h, s.g_scale, g_rows);
    s.n_user_ineq = static_cast<int>(s.G.rows());
    return s;
}

bool positive_definite(const SparseMatrix& P) {
    if (P.rows() == 0) return true;
    Eigen::SimplicialLLT<SparseMatrix> llt(P);
    if (llt.info() != Eigen::Success) return false;
    // Reject numerically singular factors.
    VectorXd d = llt.matrixL().toDense().diagonal();
    const double dmax = d.cwiseAbs().maxCoeff();
    return d.cwiseAbs().minCoeff() > 1e-7 * std::max(1.0, dmax);
}

struct IpmOutcome {
    VectorXd x, y, z, s;
    int iterations = 0;
    bool converged = false;
    bool diverged = false;
};

IpmOutcome run_ipm(const Scaled& pr, double tol, int max_iter) {
    const int n = static_cast<int>(pr.q.size());
    const int p = static_cast<int>(pr.A.rows());
    const int m = static_cast<int>(pr.G.rows());
    const double rho = 1e-9;
    const double delta = 1e-9;

    IpmOutcome out;
    const SparseMatrix Gt = pr.G.transpose();
    const SparseMatrix At = pr.A.transpose();

    // Initial point: least squares fit of the inequalities.
    {
        SparseMatrix H = pr.P + SparseMatrix(Gt * pr.G);
        KktSystem kkt(H, pr.A, std::max(rho, 1e-8), std::max(delta, 1e-8));
        VectorXd rhs(n + p);
        rhs.head(n) = -pr.q + Gt * pr.h;
        rhs.tail(p) = pr.b;
        VectorXd sol = kkt.ok() ? kkt.solve(rhs) : VectorXd::Zero(n + p);
        if (!sol.allFinite()) sol.setZero();
        out.x = sol.head(n);
        out.y = VectorXd::Zero(p);
    }
    out.s = pr.h - pr.G * out.x;
    out.z = VectorXd::Ones(m);
    if (m > 0) {
        const double ds = std::max(-1.5 * out.s.minCoeff(), 0.0);
        out.s.array() += ds;
        out.s = out.s.cwiseMax(1e-2);
        const double sz = out.s.dot(out.z);
        out.s.array() += 0.5 * sz / out.z.sum();
        out.z.array() += 0.5 * sz / out.s.sum();
    }

    const double q_norm = inf_norm(pr.q);
    VectorXd best_x = out.x, best_y = out.y, best_z = out.z, best_s = out.s;
    double best_merit = std::numeric_limits<double>::infinity();

    for (int it = 0; it <= max_iter; ++it) {
        out.iterations = it;
        const VectorXd Px = pr.P * out.x;
        const VectorXd rd = Px + pr.q + At * out.y + Gt * out.z;
        const VectorXd rp = pr.A * out.x - pr.b;
        const VectorXd ri = pr.G * out.x + out.s - pr.h;
        const double pobj = 0.5 * out.x.dot(Px) + pr.q.dot(out.x);
        double pres = 0.0;
        for (int i = 0; i < p; ++i) pres = std::max(pres, std::abs(rp(i)) / (1.0 + std::abs(pr.b(i))));
        for (int i = 0; i < m; ++i) pres = std::max(pres, std::abs(ri(i)) / (1.0 + std::abs(pr.h(i))));
        const double dres = inf_norm(rd) / (1.0 + std::max(q_norm, inf_norm(Px)));
        const double gap = m > 0 ? out.s.dot(out.z) / (1.0 + std::abs(pobj)) : 0.0;
        double merit = std::max({pres, dres, gap});
        if (!std::isfinite(pres) || !std::isfinite(dres) || !std::isfinite(gap) || !out.x.allFinite() ||
            !out.y.allFinite() || !out.z.allFinite()) {
            out.diverged = true;
            break;
        }
        if (merit < best_merit) {
            best_merit = merit;
            best_x = out.x;
            best_y = out.y;
            best_z = out.z;
            best_s = out.s;
        }
        if (pres <= tol && dres <= tol && gap <= tol) {
            out.converged = true;
            return out;
        }
        if (inf_norm(out.x) > 1e13 || (m > 0 && inf_norm(out.z) > 1e13)) {
            out.diverged = true;
            break;
        }
        if (it == max_iter) break;

        const VectorXd W = m > 0 ? VectorXd(out.z.cwiseQuotient(out.s)) : VectorXd();
        SparseMatrix H = pr.P;
        if (m > 0) {
            SparseMatrix WG = W.asDiagonal() * pr.G;
            H += SparseMatrix(Gt * WG);
        }
        KktSystem kkt(H, pr.A, rho, delta);
        if (!kkt.ok()) break;

        auto newton = [&](const VectorXd& rc, VectorXd& dx, VectorXd& dy, VectorXd& dz, VectorXd& ds) {
            VectorXd t = m > 0 ? VectorXd((rc + out.z.cwiseProduct(ri)).cwiseQuotient(out.s)) : VectorXd();
            VectorXd rhs(n + p);
            rhs.head(n) = -rd;
            if (m > 0) rhs.head(n) -= Gt * t;
            rhs.tail(p) = -rp;
            VectorXd sol = kkt.solve(rhs);
            dx = sol.head(n);
            dy = sol.tail(p);
            if (m > 0) {
                VectorXd Gdx = pr.G * dx;
                dz = t + W.cwiseProduct(Gdx);
                ds = -ri - Gdx;
            }
        };
        auto max_step = [&](const VectorXd& ds, const VectorXd& dz) {
            double a = 1.0;
            for (int i = 0; i < m; ++i) {
                if (ds(i) < 0) a = std::min(a, -out.s(i) / ds(i));
                if (dz(i) < 0) a = std::min(a, -out.z(i) / dz(i));
            }
            return a;
        };

        VectorXd dx, dy, dz, ds;
        if (m == 0) {
            newton(VectorXd(), dx, dy, dz, ds);
            out.x += dx;
            out.y += dy;
            continue;
        }
        const double mu = out.s.dot(out.z) / m;
        VectorXd rc = -out.s.cwiseProduct(out.z);
        newton(rc, dx, dy, dz, ds);
        const double a_aff = max_step(ds, dz);
        const double mu_aff = (out.s + a_aff * ds).dot(out.z + a_aff * dz) / m;
        const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
        rc = rc - ds.cwiseProduct(dz) + VectorXd::Constant(m, sigma * mu);
        newton(rc, dx, dy, dz, ds);
        const double a = std::min(1.0, 0.99 * max_step(ds, dz));
        out.x += a * dx;
        out.y += a * dy;
        out.z += a * dz;
        out.s += a * ds;
    }

    out.x = best_x;
    out.y = best_y;
    out.z = best_z;
    out.s = best_s;
    out.converged = best_merit <= 1e-7;
    return out;
}

struct Kkt {
    double primal, dual, comp;
};

Kkt scaled_kkt(const Scaled& pr, const VectorXd& x, const VectorXd& y, const VectorXd& z) {
    const VectorXd Px = pr.P * x;
    Kkt k{0.0, 0.0, 0.0};
    const VectorXd rp = pr.A * x - pr.b;
    for (Eigen::Index i = 0; i < rp.size(); ++i) k.primal = std::max(k.primal, std::abs(rp(i)) / (1.0 + std::abs(pr.b(i))));
    const VectorXd g = pr.G * x - pr.h;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        k.primal = std::max(k.primal, std::max(g(i), 0.0) / (1.0 + std::abs(pr.h(i))));
        k.comp = std::max(k.comp, std::abs(z(i) * g(i)));
        k.dual = std::max(k.dual, std::max(-z(i), 0.0));
    }
    const VectorXd rd = Px + pr.q + pr.A.transpose() * y + pr.G.transpose() * z;
    k.dual = std::max(k.dual, inf_norm(rd) / (1.0 + std::max(inf_norm(pr.q), inf_norm(Px))));
    return k;
}

// Solves the equality-constrained KKT system on the estimated active set.
bool polish(const Scaled& pr, VectorXd& x, VectorXd& y, VectorXd& z, const VectorXd& s, double tol) {
    const int n = static_cast<int>(x.size());
    const int p = static_cast<int>(pr.A.rows());
    const int m = static_cast<int>(pr.G.rows());
    std::vector<int> active;
    for (int i = 0; i < pr.n_user_ineq; ++i)
        if (z(i) > s(i)) active.push_back(i);
    std::vector<Eigen::Triplet<double>> trip;
    SparseMatrix GI(static_cast<Eigen::Index>(active.size()), n);
    {
        const SparseMatrix Gr = SparseMatrix(pr.G.transpose());  // columns are rows of G
        for (std::size_t k = 0; k < active.size(); ++k)
            for (SparseMatrix::InnerIterator it(Gr, active[k]); it; ++it)
                trip.emplace_back(static_cast<int>(k), it.row(), it.value());
        GI.setFromTriplets(trip.begin(), trip.end());
    }
    const SparseMatrix C = vstack(pr.A, GI);
    const double rho = 1e-7;
    KktSystem kkt(pr.P, C, rho, 1e-7);
    if (!kkt.ok()) return false;
    const int k = static_cast<int>(C.rows());
    VectorXd rhs(n + k);
    rhs.head(n) = -pr.q;
    rhs.segment(n, p) = pr.b;
    for (std::size_t i = 0; i < active.size(); ++i) rhs(n + p + static_cast<Eigen::Index>(i)) = pr.h(active[i]);
    // Proximal start: regularized solve around the IPM point, then refinement.
    VectorXd rhs_reg = rhs;
    rhs_reg.head(n) += rho * x;
    VectorXd sol = kkt.solve(rhs_reg, 0);
    for (int rep = 0; rep < 25; ++rep) {
        // refine towards the unregularized system
        VectorXd K0sol(n + k);
        K0sol.head(n) = pr.P * sol.head(n) + C.transpose() * sol.tail(k);
        K0sol.tail(k) = C * sol.head(n);
        VectorXd res = rhs - K0sol;
        if (inf_norm(res) <= 1e-14 * (1.0 + inf_norm(rhs))) break;
        sol += kkt.solve(res, 0);
    }
    if (!sol.allFinite()) return false;
    VectorXd xp = sol.head(n);
    VectorXd yp = sol.segment(n, p);
    VectorXd zp = VectorXd::Zero(m);
    for (std::size_t i = 0; i < active.size(); ++i) {
        const double v = sol(n + p + static_cast<Eigen::Index>(i));
        if (v < -1e-9) return false;
        zp(active[i]) = std::max(v, 0.0);
    }
    const Kkt before = scaled_kkt(pr, x, y, z);
    const Kkt after = scaled_kkt(pr, xp, yp, zp);
    const double mb = std::max({before.primal, before.dual, before.comp});
    const double ma = std::max({after.primal, after.dual, after.comp});
    if (!(ma <= std::max(mb, tol))) return false;
    x = xp;
    y = yp;
    z = zp;
    return true;
}

// Returns min q'd over the recession directions with |d_i| <= 1.
double recession_slope(const Scaled& pr, VectorXd& dir, double tol) {
    const int n = static_cast<int>(pr.q.size());
    QuadraticProgram lp = QuadraticProgram::with_dim(n);
    lp.q = pr.q;
    lp.A = vstack(pr.P, pr.A);
    lp.b = VectorXd::Zero(lp.A.rows());
    SparseMatrix box(2 * n, n);
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < n; ++i) {
        trip.emplace_back(2 * i, i, 1.0);
        trip.emplace_back(2 * i + 1, i, -1.0);
    }
    box.setFromTriplets(trip.begin(), trip.end());
    lp.G = vstack(pr.G, box);
    lp.h = VectorXd::Zero(lp.G.rows());
    lp.h.tail(2 * n).setOnes();
    QpOptions o;
    o.tol = tol;
    o.detect_unbounded = false;
    QpResult r = solve_qp(lp, o);
    dir = r.x;
    return r.status == QpStatus::optimal || r.status == QpStatus::max_iterations ? r.objective : 0.0;
}

// Phase one: minimal total violation of the constraints.
double infeasibility(const Scaled& pr, double tol) {
    const int n = static_cast<int>(pr.q.size());
    const int p = static_cast<int>(pr.A.rows());
    const int m = pr.n_user_ineq;
    const int nv = n + 2 * p + m;
    QuadraticProgram lp = QuadraticProgram::with_dim(nv);
    lp.q.tail(2 * p + m).setOnes();
    std::vector<Eigen::Triplet<double>> ta, tg;
    for (int j = 0; j < pr.A.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(pr.A, j); it; ++it) ta.emplace_back(it.row(), it.col(), it.value());
    for (int i = 0; i < p; ++i) {
        ta.emplace_back(i, n + i, 1.0);
        ta.emplace_back(i, n + p + i, -1.0);
    }
    lp.A.resize(p, nv);
    lp.A.setFromTriplets(ta.begin(), ta.end());
    lp.b = pr.b;
    for (int j = 0; j < pr.G.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(pr.G, j); it; ++it)
            if (it.row() < m) tg.emplace_back(it.row(), it.col(), it.value());
    for (int i = 0; i < m; ++i) tg.emplace_back(i, n + 2 * p + i, -1.0);
    for (int i = 0; i < 2 * p + m; ++i) tg.emplace_back(m + i, n + i, -1.0);
    lp.G.resize(m + 2 * p + m, nv);
    lp.G.setFromTriplets(tg.begin(), tg.end());
    lp.h = VectorXd::Zero(m + 2 * p + m);
    lp.h.head(m) = pr.h.head(m);
    QpOptions o;
    o.tol = tol;
    o.detect_unbounded = false;
    QpResult r = solve_qp(lp, o);
    return r.objective;
}

}  // namespace

KktResiduals kkt_residuals(const QuadraticProgram& qp, const VectorXd& x, const VectorXd& y, const VectorXd& z) {
    KktResiduals k;
    const VectorXd Px = qp.P * x;
    const VectorXd rp = qp.A * x - qp.b;
    k.primal = inf_norm(rp);
    const VectorXd g = qp.G * x - qp.h;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        k.primal = std::max(k.primal, std::max(g(i), 0.0));
        k.complementarity = std::max(k.complementarity, std::abs(z(i) * g(i)));
        k.dual = std::max(k.dual, std::max(-z(i), 0.0));
    }
    k.dual = std::max(k.dual, inf_norm(Px + qp.q + qp.A.transpose() * y + qp.G.transpose() * z));
    return k;
}

QpResult solve_qp(const QuadraticProgram& qp, const QpOptions& opts) {
    const int n = qp.num_vars();
    if (qp.P.rows() != n || qp.P.cols() != n || qp.A.cols() != n || qp.G.cols() != n || qp.A.rows() != qp.b.size() ||
        qp.G.rows() != qp.h.size())
        throw std::invalid_argument("solve_qp: inconsistent dimensions");

    QpResult res;
    std::vector<int> a_rows, g_rows;
    Scaled pr = normalize(qp, a_rows, g_rows);
    auto finish_objective = [&]() { res.objective = 0.5 * res.x.dot(qp.P * res.x) + qp.q.dot(res.x) + qp.r; };
    if (pr.infeasible_row) {
        res.status = QpStatus::infeasible;
        res.x = VectorXd::Zero(n);
        res.y = VectorXd::Zero(qp.A.rows());
        res.z = VectorXd::Zero(qp.G.rows());
        res.objective = std::numeric_limits<double>::infinity();
        return res;
    }

    const bool pd = positive_definite(pr.P);
    if (opts.detect_unbounded && !pd && inf_norm(pr.q) > 0.0) {
        VectorXd dir;
        const double slope = recession_slope(pr, dir, opts.tol);
        if (slope < -1e-7 * (1.0 + inf_norm(pr.q))) {
            if (infeasibility(pr, opts.tol) > 1e-7) {
                res.status = QpStatus::infeasible;
            } else {
                res.status = QpStatus::unbounded;
                res.ray = dir;
            }
            res.x = VectorXd::Zero(n);
            res.y = VectorXd::Zero(qp.A.rows());
            res.z = VectorXd::Zero(qp.G.rows());
            res.objective = res.status == QpStatus::unbounded ? -std::numeric_limits<double>::infinity()
                                                              : std::numeric_limits<double>::infinity();
            return res;
        }
    }

    IpmOutcome ipm;
    auto core = [&](const Scaled& work) {
        ipm = run_ipm(work, opts.tol, opts.max_iter);
        res.iterations += ipm.iterations;
        if (!ipm.converged) {
            static thread_local int phase_one_depth = 0;
            bool infeasible = false;
            if (phase_one_depth == 0) {
                ++phase_one_depth;
                try {
                    infeasible = infeasibility(pr, opts.tol) > 1e-7;
                } catch (...) {
                    --phase_one_depth;
                    throw;
                }
                --phase_one_depth;
            }
            return infeasible ? QpStatus::infeasible : QpStatus::max_iterations;
        }
        if (opts.polish) res.polished = polish(work, ipm.x, ipm.y, ipm.z, ipm.s, opts.tol);
        return QpStatus::optimal;
    };

    if (pd) {
        res.status = core(pr);
    } else {
        // Proximal point iterations: each subproblem is strictly convex.
        Scaled sub = pr;
        double pmax = 0.0;
        for (int j = 0; j < pr.P.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(pr.P, j); it; ++it) pmax = std::max(pmax, std::abs(it.value()));
        const double eps = 1e-6 * std::max(1.0, pmax);
        sub.P = pr.P + eps * identity(n);
        VectorXd xk = VectorXd::Zero(n);
        for (int k = 0; k < 60; ++k) {
            sub.q = pr.q - eps * xk;
            res.status = core(sub);
            if (res.status != QpStatus::optimal) break;
            const double step = inf_norm(ipm.x - xk);
            xk = ipm.x;
            const Kkt kk = scaled_kkt(pr, ipm.x, ipm.y, ipm.z);
            if (std::max({kk.primal, kk.dual, kk.comp}) <= opts.tol || step <= 1e-13 * (1.0 + inf_norm(xk))) break;
        }
        if (res.status == QpStatus::optimal && opts.polish) res.polished = polish(pr, ipm.x, ipm.y, ipm.z, ipm.s, opts.tol);
    }

    const VectorXd& x = ipm.x;
    const VectorXd& y = ipm.y;
    const VectorXd& z = ipm.z;

    // Undo the row scaling.
    res.x = x;
    res.y = VectorXd::Zero(qp.A.rows());
    res.z = VectorXd::Zero(qp.G.rows());
    for (std::size_t i = 0; i < a_rows.size(); ++i)
        res.y(a_rows[i]) = y(static_cast<Eigen::Index>(i)) * pr.a_scale(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < g_rows.size(); ++i)
        res.z(g_rows[i]) = z(static_cast<Eigen::Index>(i)) * pr.g_scale(static_cast<Eigen::Index>(i));
    finish_objective();
    if (res.status == QpStatus::infeasible) res.objective = std::numeric_limits<double>::infinity();
    if (res.status == QpStatus::unbounded) res.objective = -std::numeric_limits<double>::infinity();
    const KktResiduals k = kkt_residuals(qp, res.x, res.y, res.z);
    res.primal_residual = k.primal;
    res.dual_residual = k.dual;
    res.complementarity = k.complementarity;
    return res;
}

}  // namespace treedual
