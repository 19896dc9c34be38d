#include <catch_amalgamated.hpp>

#include "generators.hpp"
#include "treedual/convex_calculus.hpp"
#include "treedual/solver.hpp"

using namespace treedual;
using namespace treedual::testing;
using Catch::Approx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd v1(double a) { return VectorXd::Constant(1, a); }

CompositeProgram single(const ConvexFunction& f) {
    CompositeProgram p;
    p.dim = f.dim();
    p.atoms.push_back({f, MatrixXd::Identity(f.dim(), f.dim()), VectorXd::Zero(f.dim()), 1.0});
    return p;
}

}  // namespace

TEST_CASE("smooth minimum") {
    const SolveResult r = minimize(single(ConvexFunction::quadratic(MatrixXd::Identity(1, 1), v1(-1), 0.5)));
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.x(0) == Approx(1.0));
    CHECK(r.value.value() == Approx(0.0).margin(1e-9));
}

TEST_CASE("active constraint multiplier") {
    // 1/2 x^2 + indicator{x >= 1}
    CompositeProgram p;
    p.dim = 1;
    p.atoms.push_back({ConvexFunction::quadratic(MatrixXd::Identity(1, 1), v1(0)), MatrixXd::Identity(1, 1), v1(0), 1.0});
    p.atoms.push_back({ConvexFunction::box(v1(1), v1(HUGE_VAL)), MatrixXd::Identity(1, 1), v1(0), 1.0});
    const SolveResult r = minimize(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.x(0) == Approx(1.0));
    CHECK(r.atom_subgradients[1](0) == Approx(-1.0));
    CHECK(r.stationarity <= 1e-8);
    for (std::size_t k = 0; k < p.atoms.size(); ++k)
        CHECK(subdifferential_check(p.atoms[k].fn, r.x, r.atom_subgradients[k]) <= 2e-9);
}

TEST_CASE("coupling multipliers") {
    // min 1/2|x|^2 s.t. x1 + x2 = 2
    CompositeProgram p = single(ConvexFunction::quadratic(MatrixXd::Identity(2, 2), VectorXd::Zero(2)));
    p.couplings.push_back({MatrixXd::Ones(1, 2), v1(2)});
    const SolveResult r = minimize(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.x(0) == Approx(1.0));
    REQUIRE(r.multipliers.size() == 1);
    CHECK(r.multipliers[0](0) == Approx(-1.0));
}

TEST_CASE("unbounded and infeasible programs") {
    const SolveResult u = minimize(single(ConvexFunction::affine(v1(-1))));
    CHECK(u.status == SolveStatus::unbounded);
    CHECK(u.direction(0) > 0);
    CompositeProgram p;
    p.dim = 1;
    p.atoms.push_back({ConvexFunction::box(v1(0), v1(1)), MatrixXd::Identity(1, 1), v1(0), 1.0});
    p.atoms.push_back({ConvexFunction::box(v1(2), v1(3)), MatrixXd::Identity(1, 1), v1(0), 1.0});
    CHECK(minimize(p).status == SolveStatus::infeasible);
    CHECK(brute_force_minimize(p, v1(-1), v1(4), 1e-3).value.is_plus_infinity());
}

TEST_CASE("grid search examples") {
    const BruteForceResult a = brute_force_minimize(
        single(ConvexFunction::sum({ConvexFunction::quadratic(MatrixXd::Identity(1, 1), v1(0)), ConvexFunction::box(v1(-1), v1(1))}, 1)),
        v1(-1), v1(1), 1e-3);
    CHECK(a.x(0) == Approx(0.0).margin(1e-3));
    MatrixXd B(2, 1);
    B << 1, -1;
    const BruteForceResult b =
        brute_force_minimize(single(ConvexFunction::max_affine(B, (VectorXd(2) << -0.3, 0.3).finished())), v1(-2), v1(2), 1e-3);
    CHECK(b.x(0) == Approx(0.3).margin(1e-3));
    CHECK_THROWS(brute_force_minimize(single(ConvexFunction::zero(4)), VectorXd::Zero(4), VectorXd::Ones(4), 0.1));
}

TEST_CASE("random quadratic over a polytope agrees with the grid") {
    Rng rng(31);
    for (int k = 0; k < 10; ++k) {
        const int d = uniform_int(rng, 1, 2);
        const VectorXd x0 = random_vector(rng, d);
        const MatrixXd A = random_matrix(rng, d + 2, d);
        VectorXd a = A * x0;
        for (int i = 0; i < a.size(); ++i) a(i) += uniform(rng, 0.2, 1.0);
        const ConvexFunction f = ConvexFunction::sum({ConvexFunction::quadratic(random_psd(rng, d, 0.0), random_vector(rng, d)),
                                                      ConvexFunction::polyhedron(A, a, MatrixXd(0, d), VectorXd(0), d),
                                                      ConvexFunction::box(VectorXd::Constant(d, -2), VectorXd::Constant(d, 2))},
                                                     d);
        const CompositeProgram p = single(f);
        const SolveResult r = minimize(p);
        REQUIRE(r.status == SolveStatus::optimal);
        const BruteForceResult g = brute_force_minimize(p, VectorXd::Constant(d, -2), VectorXd::Constant(d, 2), d == 1 ? 1e-4 : 2e-3);
        REQUIRE(g.value.is_finite());
        CHECK(r.value.value() <= g.value.value() + 1e-9);
        CHECK(g.value.value() - r.value.value() <= g.bound + 1e-6);
    }
}

TEST_CASE("minimize is deterministic") {
    Rng rng(2);
    const ConvexFunction f = random_function(rng, Variant::sum, 3, true);
    const SolveResult a = minimize(single(f)), b = minimize(single(f));
    CHECK(a.x == b.x);
    CHECK(a.atom_subgradients == b.atom_subgradients);
}
