#include "treedual/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "treedual/convex_calculus.hpp"
#include "treedual/lowering.hpp"
#include "treedual/qp.hpp"

namespace treedual {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::inconclusive: return "inconclusive";
    }
    return "unknown";
}

void CompositeProgram::validate() const {
    if (dim < 0) throw std::invalid_argument("composite program: negative dimension");
    if (atoms.empty()) throw std::invalid_argument("composite program: needs at least one atom");
    for (const auto& a : atoms) {
        if (a.M.rows() != a.fn.dim() || a.M.cols() != dim || a.m.size() != a.fn.dim())
            throw std::invalid_argument("composite program: atom map dimension mismatch");
        if (!(a.weight > 0.0) || !std::isfinite(a.weight))
            throw std::invalid_argument("composite program: atom weight must be positive");
    }
    for (const auto& c : couplings)
        if (c.matrix.cols() != dim || c.matrix.rows() != c.rhs.size())
            throw std::invalid_argument("composite program: coupling dimension mismatch");
}

ExtendedReal CompositeProgram::value(const VectorXd& x, double tol) const {
    for (const auto& c : couplings)
        for (Eigen::Index i = 0; i < c.rhs.size(); ++i)
            if (std::abs(c.matrix.row(i).dot(x) - c.rhs(i)) > tol * (1.0 + std::abs(c.rhs(i))))
                return ExtendedReal::plus_infinity();
    ExtendedReal total = 0.0;
    for (const auto& a : atoms) {
        const ExtendedReal v = evaluate(a.fn, a.M * x + a.m, tol);
        if (v.is_plus_infinity()) return v;
        total += a.weight * v;
    }
    return total;
}

SolveResult minimize(const CompositeProgram& prog, const SolveOptions& opts) {
    prog.validate();
    if (!(opts.tol > 0.0)) throw std::invalid_argument("minimize: tol must be positive");
    const int d = prog.dim;
    std::vector<LoweredFunction> low;
    std::vector<int> aux_off;
    int n = d;
    for (const auto& a : prog.atoms) {
        low.push_back(lower(a.fn));
        aux_off.push_back(n);
        n += low.back().aux;
    }
    std::vector<Eigen::Triplet<double>> tp, tg, ta;
    VectorXd q = VectorXd::Zero(n);
    double r = 0.0;
    std::vector<double> h, b;
    std::vector<int> g_start, e_start;
    // Local w_k = T_k x_global + t_k with T_k = [M 0; 0 I] on (x, s_k).
    for (std::size_t k = 0; k < low.size(); ++k) {
        const auto& lf = low[k];
        const auto& at = prog.atoms[k];
        const int nk = lf.size();
        const int dk = lf.dim;
        MatrixXd T = MatrixXd::Zero(nk, n);
        T.block(0, 0, dk, d) = at.M;
        if (lf.aux > 0) T.block(dk, aux_off[k], lf.aux, lf.aux).setIdentity();
        VectorXd t = VectorXd::Zero(nk);
        t.head(dk) = at.m;
        const SparseMatrix Ts = to_sparse(T);
        const SparseMatrix Pk = at.weight * SparseMatrix(Ts.transpose() * (to_sparse(lf.P) * Ts));
        for (int j = 0; j < Pk.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(Pk, j); it; ++it) tp.emplace_back(it.row(), it.col(), it.value());
        q += at.weight * (Ts.transpose() * (lf.P * t + lf.q));
        r += at.weight * (lf.r + 0.5 * t.dot(lf.P * t) + lf.q.dot(t));
        const SparseMatrix GT = to_sparse(lf.G) * Ts;
        const VectorXd hk = lf.h - lf.G * t;
        g_start.push_back(static_cast<int>(h.size()));
        for (int j = 0; j < GT.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(GT, j); it; ++it)
                tg.emplace_back(static_cast<int>(h.size() + it.row()), it.col(), it.value());
        for (Eigen::Index i = 0; i < hk.size(); ++i) h.push_back(hk(i));
        const SparseMatrix ET = to_sparse(lf.E) * Ts;
        const VectorXd ek = lf.e - lf.E * t;
        e_start.push_back(static_cast<int>(b.size()));
        for (int j = 0; j < ET.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(ET, j); it; ++it)
                ta.emplace_back(static_cast<int>(b.size() + it.row()), it.col(), it.value());
        for (Eigen::Index i = 0; i < ek.size(); ++i) b.push_back(ek(i));
    }
    std::vector<int> c_start;
    for (const auto& c : prog.couplings) {
        c_start.push_back(static_cast<int>(b.size()));
        for (Eigen::Index i = 0; i < c.matrix.rows(); ++i) {
            for (int j = 0; j < d; ++j)
                if (c.matrix(i, j) != 0.0) ta.emplace_back(static_cast<int>(b.size()), j, c.matrix(i, j));
            b.push_back(c.rhs(i));
        }
    }
    QuadraticProgram qp = QuadraticProgram::with_dim(n);
    qp.P.setFromTriplets(tp.begin(), tp.end());
    qp.q = q;
    qp.r = r;
    qp.G.resize(static_cast<Eigen::Index>(h.size()), n);
    qp.G.setFromTriplets(tg.begin(), tg.end());
    qp.h = Eigen::Map<VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
    qp.A.resize(static_cast<Eigen::Index>(b.size()), n);
    qp.A.setFromTriplets(ta.begin(), ta.end());
    qp.b = Eigen::Map<VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));

    QpOptions qo;
    qo.tol = opts.tol;
    qo.max_iter = opts.max_iter;
    const QpResult res = solve_qp(qp, qo);

    SolveResult out;
    out.iterations = res.iterations;
    out.x = res.x.head(d);
    switch (res.status) {
        case QpStatus::infeasible:
            out.status = SolveStatus::infeasible;
            out.value = ExtendedReal::plus_infinity();
            return out;
        case QpStatus::unbounded: {
            out.direction = res.ray.head(d);
            out.value = ExtendedReal::minus_infinity();
            // Confirm with the recession functions of the atoms.
            ExtendedReal slope = 0.0;
            bool ok = true;
            for (const auto& a : prog.atoms) {
                const ExtendedReal s = recession(a.fn, a.M * out.direction);
                if (s.is_plus_infinity()) ok = false;
                else slope += a.weight * s;
                if (!ok) break;
            }
            for (const auto& c : prog.couplings)
                if (c.matrix.rows() && (c.matrix * out.direction).cwiseAbs().maxCoeff() > 1e-7) ok = false;
            out.status = ok && slope < ExtendedReal(-1e-9) ? SolveStatus::unbounded : SolveStatus::inconclusive;
            return out;
        }
        case QpStatus::max_iterations:
            out.status = SolveStatus::inconclusive;
            break;
        case QpStatus::optimal:
            out.status = SolveStatus::optimal;
            break;
    }
    out.value = res.objective;
    for (std::size_t c = 0; c < prog.couplings.size(); ++c)
        out.multipliers.push_back(res.y.segment(c_start[c], prog.couplings[c].rhs.size()));
    VectorXd stat = VectorXd::Zero(d);
    for (std::size_t k = 0; k < low.size(); ++k) {
        const auto& lf = low[k];
        const auto& at = prog.atoms[k];
        VectorXd w(lf.size());
        w.head(lf.dim) = at.M * out.x + at.m;
        if (lf.aux > 0) w.tail(lf.aux) = res.x.segment(aux_off[k], lf.aux);
        VectorXd g = lf.P * w + lf.q;
        if (lf.G.rows()) g += lf.G.transpose() * res.z.segment(g_start[k], lf.G.rows()) / at.weight;
        if (lf.E.rows()) g += lf.E.transpose() * res.y.segment(e_start[k], lf.E.rows()) / at.weight;
        out.atom_subgradients.push_back(g.head(lf.dim));
        stat += at.weight * at.M.transpose() * g.head(lf.dim);
    }
    for (std::size_t c = 0; c < prog.couplings.size(); ++c) stat += prog.couplings[c].matrix.transpose() * out.multipliers[c];
    out.stationarity = stat.size() ? stat.cwiseAbs().maxCoeff() : 0.0;
    return out;
}

BruteForceResult brute_force_minimize(const CompositeProgram& prog, const VectorXd& lo, const VectorXd& hi,
                                      double resolution) {
    prog.validate();
    const int d = prog.dim;
    if (d > 3) throw std::invalid_argument("brute_force_minimize: dimension too large");
    if (lo.size() != d || hi.size() != d) throw std::invalid_argument("brute_force_minimize: box dimension mismatch");
    if (!(resolution > 0.0)) throw std::invalid_argument("brute_force_minimize: resolution must be positive");
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(d));
    long total = 1;
    for (int i = 0; i < d; ++i) {
        if (!std::isfinite(lo(i)) || !std::isfinite(hi(i)) || lo(i) > hi(i))
            throw std::invalid_argument("brute_force_minimize: box must be bounded and nonempty");
        const long cnt = static_cast<long>(std::floor((hi(i) - lo(i)) / resolution + 1e-9)) + 1;
        for (long k = 0; k < cnt; ++k) axes[i].push_back(lo(i) + static_cast<double>(k) * resolution);
        if (hi(i) - axes[i].back() > 1e-12 * (1.0 + std::abs(hi(i)))) axes[i].push_back(hi(i));
        else axes[i].back() = hi(i);
        total *= static_cast<long>(axes[i].size());
        if (total > 20000000) throw std::invalid_argument("brute_force_minimize: grid too large for resolution");
    }
    CompositeProgram free = prog;
    free.couplings.clear();
    BruteForceResult res;
    res.points = total;
    res.value = ExtendedReal::plus_infinity();
    std::vector<long> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> values(static_cast<std::size_t>(total));
    VectorXd x(d);
    for (long p = 0; p < total; ++p) {
        for (int i = 0; i < d; ++i) x(i) = axes[i][idx[i]];
        bool ok = true;
        for (const auto& c : prog.couplings)
            for (Eigen::Index i = 0; i < c.rhs.size() && ok; ++i)
                if (std::abs(c.matrix.row(i).dot(x) - c.rhs(i)) > resolution * c.matrix.row(i).lpNorm<1>() + 1e-12)
                    ok = false;
        const ExtendedReal v = ok ? free.value(x) : ExtendedReal::plus_infinity();
        values[p] = v.to_double();
        if (v < res.value) {
            res.value = v;
            res.x = x;
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
            const double c = values[p + stride];
            if (a == HUGE_VAL || c == HUGE_VAL) continue;
            lip = std::max(lip, std::abs(c - a) / (axes[i][pos + 1] - axes[i][pos]));
        }
        stride *= len;
    }
    res.bound = lip * resolution * std::sqrt(static_cast<double>(std::max(d, 1)));
    return res;
}

}  // namespace treedual
