#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "treedual/apps/control.hpp"
#include "treedual/apps/hedging.hpp"
#include "treedual/apps/lagrange.hpp"
#include "treedual/apps/mathprog.hpp"
#include "treedual/apps/stopping.hpp"
#include "treedual/cli.hpp"
#include "treedual/convex_calculus.hpp"
#include "treedual/io.hpp"
#include "treedual/qualification.hpp"

using namespace treedual;
using namespace treedual::testing;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_abs(const MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// ---------------------------------------------------------------------------

Verdict conditional_expectation_algebra() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(1001);
    double worst = 0.0;
    int trees = 0;
    for (; trees < 100; ++trees) {
        const FilteredTree tree = random_tree(rng, 5, 3);
        if (!validate_tree(tree, 1e-12).empty()) return {false, "generator produced an invalid tree"};
        const int L = static_cast<int>(tree.num_leaves());
        const RandomVector a(random_matrix(rng, L, 2)), b(random_matrix(rng, L, 2));
        for (int t = 0; t <= tree.horizon(); ++t) {
            const RandomVector Ea = conditional_expectation(tree, a, t);
            const RandomVector Eb = conditional_expectation(tree, b, t);
            worst = std::max(worst, max_abs(conditional_expectation(tree, Ea, t).values - Ea.values));
            worst = std::max(worst, std::abs(inner_product(tree, Ea, b) - inner_product(tree, a, Eb)));
            for (int s = 0; s <= t; ++s)
                worst = std::max(worst, max_abs(conditional_expectation(tree, Ea, s).values -
                                                 conditional_expectation(tree, a, s).values));
            // an F_t-measurable scalar factor comes out of E_t
            const RandomVector c = conditional_expectation(tree, RandomVector(random_matrix(rng, L, 1)), t);
            RandomVector ca = a;
            for (int l = 0; l < L; ++l) ca.values.row(l) *= c.values(l, 0);
            RandomVector cEa = Ea;
            for (int l = 0; l < L; ++l) cEa.values.row(l) *= c.values(l, 0);
            worst = std::max(worst, max_abs(conditional_expectation(tree, ca, t).values - cEa.values));
            // constants are fixed
            const RandomVector one = RandomVector::constant(tree, VectorXd::Constant(1, 2.5));
            worst = std::max(worst, max_abs(conditional_expectation(tree, one, t).values - one.values));
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-12 && secs < 5.0,
            fmt("%d trees, max violation %.2e (limit 1e-12), %.2f s (limit 5 s)", trees, worst, secs)};
}

// ---------------------------------------------------------------------------

Verdict convex_calculus_identities() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(2002);
    int samples = 0, grid_checks = 0, grid_skipped = 0, fails = 0;
    double fenchel = HUGE_VAL, biconj = 0.0, rec = 0.0, grid_excess = 0.0;
    std::string first;
    auto note = [&](const std::string& s) {
        ++fails;
        if (first.empty()) first = s;
    };
    const int per_variant = 112;
    for (auto var : kAllVariants) {
        for (int k = 0; k < per_variant; ++k, ++samples) {
            const int d = uniform_int(rng, 1, 2);
            const bool bounded = k % 3 == 0;
            const ConvexFunction f = random_function(rng, var, d, bounded);
            const VectorXd x = domain_point(f, rng);
            const ExtendedReal fxe = evaluate(f, x);
            if (!fxe.is_finite()) {
                note(variant_name(var) + ": sampled domain point has infinite value");
                continue;
            }
            const double fx = fxe.value();

            const VectorXd v = random_vector(rng, d, 2.0);
            const ExtendedReal fs = conjugate(f, v);
            if (!fs.is_plus_infinity()) {
                const double r = fx + fs.value() - x.dot(v);
                fenchel = std::min(fenchel, r);
                if (r < -1e-6) note(variant_name(var) + ": Fenchel inequality");
            }

            // f**(x) = f(x): the Fenchel equality holds at a subgradient
            const auto g = subgradient(f, x);
            if (!g) {
                note(variant_name(var) + ": no subgradient at a domain point");
                continue;
            }
            const double r = subdifferential_check(f, x, *g);
            biconj = std::max(biconj, r);
            if (!(r <= 1e-6)) note(variant_name(var) + ": biconjugate");

            // (f*)^inf(dir) against the support function of dom f
            VectorXd dir = random_vector(rng, d, 1.0);
            dir /= dir.norm();
            const ExtendedReal sigma = domain_support(f, dir);
            const ExtendedReal c1 = conjugate(f, *g + 1e3 * dir);
            const ExtendedReal c2 = conjugate(f, *g + 2e3 * dir);
            if (sigma.is_finite()) {
                if (!c1.is_finite() || !c2.is_finite()) {
                    note(variant_name(var) + ": conjugate infinite along a direction of finite support");
                } else {
                    const double slope = (c2.value() - c1.value()) / 1e3;
                    const double err = std::abs(slope - sigma.value()) / std::max(1.0, std::abs(sigma.value()));
                    rec = std::max(rec, err);
                    if (err > 1e-6) note(variant_name(var) + ": recession identity");
                }
            } else {
                const bool grows = c2.is_plus_infinity() || (c1.is_finite() && (c2.value() - c1.value()) / 1e3 > 10.0);
                if (!grows) note(variant_name(var) + ": conjugate bounded along a direction of infinite support");
            }

            if (bounded && k % 6 == 0) {
                const double res = d == 1 ? 1e-3 : 2e-2;
                VectorXd lo(d), hi(d);
                bool thin = false;
                for (int i = 0; i < d; ++i) {
                    const VectorXd e = VectorXd::Unit(d, i);
                    hi(i) = domain_support(f, e).value();
                    lo(i) = -domain_support(f, -e).value();
                    thin = thin || hi(i) - lo(i) < 20 * res;
                }
                if (thin || !fs.is_finite()) {
                    ++grid_skipped;
                    continue;
                }
                const GridResult gr = grid_conjugate_oracle(f, v, lo, hi, res);
                ++grid_checks;
                if (!gr.value.is_finite()) {
                    ++grid_skipped;
                    --grid_checks;
                    continue;
                }
                const double exact = fs.value();
                const double below = exact - gr.value.value();
                grid_excess = std::max(grid_excess, std::max(-below, below - gr.bound));
                if (below < -1e-7 || below > gr.bound + 1e-7) note(variant_name(var) + ": grid oracle");
            }
        }
    }
    const double secs = seconds_since(t0);
    return {fails == 0 && secs < 60.0,
            fmt("%d samples over 9 variants, %d grid checks (%d thin domains skipped); min Fenchel residual %.1e, biconjugate residual %.1e, "
                "recession error %.1e, grid excess %.1e, %d failures%s%s, %.1f s",
                samples, grid_checks, grid_skipped, fenchel, biconj, rec, grid_excess, fails, first.empty() ? "" : " first: ", first.c_str(), secs)};
}

// ---------------------------------------------------------------------------

Verdict inf_convolution_attainment() {
    Rng rng(3003);
    int qualified = 0, tried = 0;
    double value_err = 0.0, attain_err = 0.0;
    const Variant finite_kinds[] = {Variant::quadratic, Variant::max_affine, Variant::precompose, Variant::scale,
                                    Variant::monotone_compose};
    while (qualified < 50 && tried < 400) {
        ++tried;
        const int d = uniform_int(rng, 1, 2);
        const ConvexFunction f1 = random_function(rng, kAllVariants[uniform_int(rng, 0, 8)], d, tried % 2 == 0);
        const ConvexFunction f2 = random_function(rng, finite_kinds[uniform_int(rng, 0, 4)], d, tried % 3 == 0);
        const VectorXd v = random_vector(rng, d, 1.0);
        const InfConvolution ic = inf_convolution_conjugate(f1, f2, v);
        if (!ic.qualified) continue;
        const ExtendedReal direct = conjugate(ConvexFunction::sum({f1, f2}, d), v);
        if (!direct.is_finite() || !ic.value.is_finite()) {
            if (direct.is_plus_infinity() && ic.value.is_plus_infinity()) continue;
            return {false, fmt("instance %d: inf-convolution %s vs direct %s", tried, ic.value.to_string().c_str(),
                               direct.to_string().c_str())};
        }
        ++qualified;
        value_err = std::max(value_err, std::abs(ic.value.value() - direct.value()));
        const ExtendedReal split = conjugate(f1, v - ic.y) + conjugate(f2, ic.y);
        const double a = split.is_finite() ? std::abs(split.value() - direct.value()) : HUGE_VAL;
        attain_err = std::max(attain_err, a);
    }
    return {qualified >= 50 && value_err <= 1e-5 && attain_err <= 1e-5,
            fmt("%d qualified instances (of %d drawn), max value error %.1e, max attainment error %.1e (limit 1e-5)",
                qualified, tried, value_err, attain_err)};
}

// ---------------------------------------------------------------------------

struct CorpusEntry {
    std::string label;
    StochasticProgram sp;
};

std::vector<CorpusEntry> build_corpus(int random_programs) {
    Rng rng(4004);
    std::vector<CorpusEntry> c;
    for (int k = 0; k < random_programs; ++k) c.push_back({fmt("program-%d", k % kProgramFamilies), random_program(rng, k % kProgramFamilies)});
    for (int k = 0; k < 60; ++k) c.push_back({"stopping", ros_compile(random_reward(rng, random_tree(rng, 3, 2)))});
    for (int k = 0; k < 40; ++k)
        c.push_back({"control", control_compile(random_lq(rng, random_tree(rng, 2, 2), uniform_int(rng, 1, 2), uniform_int(rng, 1, 2)))});
    for (int k = 0; k < 40; ++k) c.push_back({"lagrange", lagrange_compile(random_lagrange(rng, random_tree(rng, 2, 2), uniform_int(rng, 1, 2)))});
    for (int k = 0; k < 40; ++k) c.push_back({"hedging", hedging_compile(random_hedging(rng, random_tree(rng, 2, 2)))});
    for (const auto& e : std::filesystem::directory_iterator(data_dir() + "/instances"))
        c.push_back({"golden " + e.path().stem().string(), compile(load_instance(e.path().string()))});
    return c;
}

Verdict weak_duality(const std::vector<CorpusEntry>& corpus, const std::vector<StochasticSolution>& sols) {
    Rng rng(5005);
    int checks = 0, violations = 0;
    double worst = -HUGE_VAL;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const StochasticProgram& sp = corpus[i].sp;
        if (!sols[i].certificate.primal.is_finite()) continue;
        const ExtendedReal primal = primal_value(sp, sols[i].x);
        std::vector<DualPoint> duals{sols[i].dual};
        for (int r = 0; r < 3; ++r) {
            LeafProcess q = LeafProcess::zeros(sp.tree, sp.dims);
            q.values = random_matrix(rng, static_cast<int>(sp.tree.num_leaves()), q.total_dim(), 2.0);
            duals.push_back({shadow_price_projection(sp.tree, q),
                             RandomVector(random_matrix(rng, static_cast<int>(sp.tree.num_leaves()), sp.m, 2.0))});
        }
        for (const auto& dp : duals) {
            const ExtendedReal d = dual_value(sp, dp).value;
            ++checks;
            if (d.is_minus_infinity()) continue;
            const double excess = d.value() - primal.value();
            worst = std::max(worst, excess);
            if (excess > 1e-9) {
                ++violations;
                std::fprintf(stderr, "weak duality: %s primal %.17g dual %.17g solver-dual %d\n", corpus[i].label.c_str(),
                             primal.value(), d.value(), &dp == &duals.front());
            }
        }
    }
    return {violations == 0 && corpus.size() >= 500,
            fmt("%zu instances, %d primal/dual pairs, max dual - primal %.2e (limit 1e-9), %d violations", corpus.size(),
                checks, worst, violations)};
}

Verdict strong_duality(const std::vector<CorpusEntry>& corpus, const std::vector<StochasticSolution>& sols) {
    int qualified = 0, failed = 0, unqualified = 0, inconclusive = 0, without_bounded = 0;
    double gap = 0.0, kkt = 0.0;
    std::string first;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const StochasticProgram& sp = corpus[i].sp;
        QualificationOptions qo;
        qo.samples = 4;
        const QualificationReport q = qualify(sp, qo, sols[i].certificate.primal.is_finite() ? &sols[i].x : nullptr);
        const bool any_inc = q.strict_feasibility.inconclusive || q.rec1.inconclusive || q.rec2.inconclusive;
        const bool ok = q.strict_feasibility.holds && q.rec1.holds && q.rec2.holds;
        if (ok && !q.bounded_recourse.holds) ++without_bounded;
        if (!ok) {
            (any_inc ? inconclusive : unqualified) += 1;
            continue;
        }
        ++qualified;
        const Certificate& c = sols[i].certificate;
        const double scale = c.primal.is_finite() ? std::max(1.0, std::abs(c.primal.value())) : 1.0;
        const double g = c.gap.is_finite() ? std::abs(c.gap.value()) / scale : HUGE_VAL;
        const double r = std::max(c.kkt.max_leaf_residual / scale, c.kkt.nonanticipativity);
        gap = std::max(gap, g);
        kkt = std::max(kkt, r);
        if (!(g <= 1e-6 && r <= 1e-6)) {
            ++failed;
            if (first.empty()) first = corpus[i].label + " (" + to_string(c.status) + ")";
        }
    }
    return {failed == 0 && qualified > 0,
            fmt("%d qualified instances (%d of them without bounded recourse; %d not qualified, %d inconclusive): max relative gap %.1e, max KKT residual "
                "%.1e (limit 1e-6), %d failures%s%s",
                qualified, without_bounded, unqualified, inconclusive, gap, kkt, failed, first.empty() ? "" : " first: ", first.c_str())};
}

// ---------------------------------------------------------------------------

Verdict stopping_duality() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(6006);
    double worst = 0.0;
    int certified = 0, n = 0;
    double enumerated = 0;
    for (; n < 200; ++n) {
        const RewardProcess rp = random_reward(rng, random_tree(rng, 3, 3));
        const double snell = snell_value(rp);
        const StoppingOracle ex = exhaustive_stopping_oracle(rp);
        const StoppingDual dual = stopping_dual(rp);
        enumerated += ex.count;
        worst = std::max({worst, std::abs(snell - ex.value), std::abs(snell - dual.y(rp.tree.root()))});
        if (verify_stopping_certificate(rp, optimal_stopping_time(rp), dual.y, 1e-9).certified) ++certified;
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-9 && certified == n && secs < 30.0,
            fmt("%d reward processes (T <= 3, branching <= 3, %.2e stopping times enumerated), max discrepancy %.1e "
                "(limit 1e-9), %d/%d certificates, %.1f s",
                n, enumerated, worst, certified, n, secs)};
}

// ---------------------------------------------------------------------------

Verdict lq_oracle() {
    Rng rng(7007);
    double value_err = 0.0, residual = 0.0;
    int agree = 0, n = 0;
    for (; n < 50; ++n) {
        const ControlSystem cs = random_lq(rng, random_tree(rng, 3, 2), uniform_int(rng, 1, 2), uniform_int(rng, 1, 2));
        const LqSolution lq = lq_riccati_oracle(cs);
        const StochasticSolution s = solve(control_compile(cs));
        if (!s.certificate.primal.is_finite()) continue;
        const double e = std::abs(s.certificate.primal.value() - lq.value) / std::max(1.0, std::abs(lq.value));
        const ControlDualReport rep = control_dual_residual(cs, lq.X, lq.U, lq.y, 1e-6);
        value_err = std::max(value_err, e);
        residual = std::max({residual, rep.stationarity, rep.dynamics});
        if (e <= 1e-6 && rep.certified) ++agree;
    }
    return {agree == n, fmt("%d random LQ trees (N, M <= 2, T <= 3): max relative value error %.1e, max costate "
                            "residual %.1e (limit 1e-6), %d/%d agree",
                            n, value_err, residual, agree, n)};
}

// ---------------------------------------------------------------------------

Verdict reduced_dual_prices() {
    Rng rng(8008);
    int checked = 0, bad = 0;
    double worst = 0.0;
    auto check = [&](const FilteredTree& tree, const LeafProcess& p) {
        const double r = nonanticipativity_residual(tree, p);
        worst = std::max(worst, r);
        ++checked;
        if (!is_nonanticipativity_dual(tree, p, 1e-10)) ++bad;
    };
    for (int k = 0; k < 60; ++k) {
        const RewardProcess rp = random_reward(rng, random_tree(rng, 3, 3));
        check(rp.tree, stopping_dual(rp).p);
    }
    for (int k = 0; k < 30; ++k) {
        const ControlSystem cs = random_lq(rng, random_tree(rng, 2, 3), uniform_int(rng, 1, 2), uniform_int(rng, 1, 2));
        const LqSolution lq = lq_riccati_oracle(cs);
        check(cs.tree, control_dual_residual(cs, lq.X, lq.U, lq.y).p);
        const StochasticSolution s = solve(control_compile(cs));
        AdaptedProcess X, U;
        control_split(cs, s.x, X, U);
        check(cs.tree, control_dual_residual(cs, X, U, control_costate(cs, s.dual.y)).p);
    }
    for (int k = 0; k < 30; ++k) {
        const LagrangeProblem lp = random_lagrange(rng, random_tree(rng, 2, 3), uniform_int(rng, 1, 2));
        const StochasticSolution s = solve(lagrange_compile(lp));
        check(lp.tree, lagrange_dual_residual(lp, s.x, lagrange_costate(lp, s.dual.y)).p);
    }
    for (int k = 0; k < 30; ++k) {
        const HedgingProblem h = random_hedging(rng, random_tree(rng, 2, 3));
        const StochasticSolution s = solve(hedging_compile(h));
        check(h.tree, hedging_dual_residual(h, s.x, s.dual.y).p);
    }
    for (const auto& e : std::filesystem::directory_iterator(data_dir() + "/instances")) {
        const Instance inst = load_instance(e.path().string());
        const StochasticSolution s = solve(compile(inst));
        check(inst.tree, s.dual.p);
        if (inst.stopping) check(inst.tree, stopping_dual(*inst.stopping).p);
        if (inst.hedging) check(inst.tree, hedging_dual_residual(*inst.hedging, s.x, s.dual.y).p);
        if (inst.lagrange) check(inst.tree, lagrange_dual_residual(*inst.lagrange, s.x, lagrange_costate(*inst.lagrange, s.dual.y)).p);
    }
    return {bad == 0, fmt("%d reconstructed shadow prices (stopping, control, Lagrange, hedging, golden), max |E_t p_t| "
                          "%.1e (limit 1e-10), %d failures",
                          checked, worst, bad)};
}

// ---------------------------------------------------------------------------

Verdict counterexample_detection() {
    const StochasticProgram bad = compile(load_instance(data_dir() + "/instances/nonadapted.json"));
    const StochasticProgram good = compile(load_instance(data_dir() + "/instances/adapted.json"));
    const BoundedRecourseReport b = check_bounded_recourse(bad, 10.0);
    const BoundedRecourseReport g = check_bounded_recourse(good, 10.0);
    const bool flagged = !b.holds && !b.inconclusive && b.failing_node >= 0;
    return {flagged && g.holds,
            fmt("non-adapted instance: %s at node %d, stage %d; adapted instance: %s", flagged ? "flagged" : "NOT flagged",
                b.failing_node, b.failing_stage, g.holds ? "passes" : (g.inconclusive ? "inconclusive" : "fails"))};
}

// ---------------------------------------------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Verdict cli_round_trip() {
    const auto dir = std::filesystem::temp_directory_path() / "treedual_acceptance";
    std::filesystem::create_directories(dir);
    int total = 0, ok = 0;
    std::string first;
    for (const auto& e : std::filesystem::directory_iterator(data_dir() + "/instances")) {
        ++total;
        const std::string in = e.path().string();
        const std::string a = (dir / (e.path().stem().string() + ".1.json")).string();
        const std::string b = (dir / (e.path().stem().string() + ".2.json")).string();
        std::ostringstream out, err;
        const int s1 = cli::run({"treedual", "solve", "--in", in, "--out", a}, out, err);
        const int s2 = cli::run({"treedual", "solve", "--in", in, "--out", b}, out, err);
        const int c = cli::run({"treedual", "certify", "--in", in, "--cert", a}, out, err);
        const bool same = slurp(a) == slurp(b) && !slurp(a).empty();
        if (s1 == 0 && s2 == 0 && c == 0 && same) {
            ++ok;
        } else if (first.empty()) {
            first = fmt(" first failure: %s (solve %d/%d, certify %d, identical %d)", e.path().stem().c_str(), s1, s2, c,
                        same ? 1 : 0);
        }
    }
    return {ok == total && total > 0,
            fmt("%d/%d golden instances solve, re-certify with exit 0 and give byte-identical certificates%s", ok, total,
                first.c_str())};
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, std::function<Verdict()>>> criteria;
    criteria.emplace_back("conditional expectation algebra", conditional_expectation_algebra);
    criteria.emplace_back("convex calculus identities", convex_calculus_identities);
    criteria.emplace_back("conjugate of a sum is attained", inf_convolution_attainment);

    std::vector<CorpusEntry> corpus;
    std::vector<StochasticSolution> sols;
    auto ensure_corpus = [&] {
        if (!corpus.empty()) return;
        corpus = build_corpus(330);
        for (const auto& e : corpus) sols.push_back(solve(e.sp));
    };
    criteria.emplace_back("weak duality", [&] {
        ensure_corpus();
        return weak_duality(corpus, sols);
    });
    criteria.emplace_back("strong duality under qualification", [&] {
        ensure_corpus();
        return strong_duality(corpus, sols);
    });
    criteria.emplace_back("stopping duality", stopping_duality);
    criteria.emplace_back("LQ control oracle", lq_oracle);
    criteria.emplace_back("reduced-dual shadow prices", reduced_dual_prices);
    criteria.emplace_back("qualification counterexample", counterexample_detection);
    criteria.emplace_back("CLI round trip", cli_round_trip);

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            if (std::getenv("TREEDUAL_RETHROW")) throw;
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failed;
        std::printf("%s %2zu %-36s %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed == 0 ? 0 : 1;
}
