#include <catch_amalgamated.hpp>

#include "generators.hpp"
#include "treedual/apps/control.hpp"

using namespace treedual;
using namespace treedual::testing;
using Catch::Approx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ControlSystem scalar(const FilteredTree& tree, double a, double b, std::vector<double> w, double qx, double ru,
                     double lin0 = 0.0) {
    ControlSystem cs;
    cs.tree = tree;
    cs.N = cs.M = 1;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        cs.A.push_back(MatrixXd::Constant(1, 1, a));
        cs.B.push_back(MatrixXd::Constant(1, 1, b));
        cs.W.push_back(VectorXd::Constant(1, w[i]));
        VectorXd g = VectorXd::Zero(2);
        if (static_cast<int>(i) == tree.root()) g(0) = lin0;
        cs.L.push_back(ConvexFunction::quadratic((MatrixXd(2, 2) << qx, 0, 0, ru).finished(), g));
    }
    return cs;
}

FilteredTree two_leaf() { return FilteredTree({{0, -1, 0, 1.0}, {1, 0, 1, 0.5}, {2, 0, 1, 0.5}}); }

}  // namespace

TEST_CASE("zero data gives the zero trajectory") {
    const ControlSystem cs = scalar(two_leaf(), 0, 0, {0, 0, 0}, 1, 1);
    const LqSolution lq = lq_riccati_oracle(cs);
    CHECK(lq.value == Approx(0.0).margin(1e-12));
    const StochasticSolution s = solve(control_compile(cs));
    REQUIRE(s.certificate.status == CertificateStatus::certified_optimal);
    CHECK(s.certificate.primal.value() == Approx(0.0).margin(1e-9));
}

TEST_CASE("two-stage scalar problem by hand") {
    // min 1/2 X0^2 - X0 + 1/2 U0^2 + 1/2 X1^2 + 1/2 U1^2 with X1 = 2 X0 + U0 (A = 1, B = 1)
    const FilteredTree tree({{0, -1, 0, 1.0}, {1, 0, 1, 1.0}});
    const ControlSystem cs = scalar(tree, 1, 1, {0, 0}, 1, 1, -1.0);
    const LqSolution lq = lq_riccati_oracle(cs);
    // U1 = 0, U0 = -X0, 3 X0 = 1
    CHECK(lq.X.at(0)(0) == Approx(1.0 / 3.0));
    CHECK(lq.U.at(0)(0) == Approx(-1.0 / 3.0));
    CHECK(lq.X.at(1)(0) == Approx(1.0 / 3.0));
    CHECK(lq.U.at(1)(0) == Approx(0.0).margin(1e-12));
    CHECK(lq.value == Approx(-1.0 / 6.0));
    const StochasticSolution s = solve(control_compile(cs));
    CHECK(s.certificate.primal.value() == Approx(lq.value));
}

TEST_CASE("control without effect stays at zero") {
    const ControlSystem cs = scalar(two_leaf(), 0.2, 0.0, {0, 1, -1}, 1, 1);
    const LqSolution lq = lq_riccati_oracle(cs);
    for (const auto& u : lq.U.values) CHECK(u.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("stochastic noise: oracle, solver and costates agree") {
    const ControlSystem cs = scalar(two_leaf(), 0.1, 1.0, {0, 1.0, -0.5}, 1, 1, -1.0);
    const LqSolution lq = lq_riccati_oracle(cs);
    const StochasticSolution s = solve(control_compile(cs));
    REQUIRE(s.certificate.status == CertificateStatus::certified_optimal);
    CHECK(s.certificate.primal.value() == Approx(lq.value).margin(1e-6));
    const ControlDualReport rep = control_dual_residual(cs, lq.X, lq.U, lq.y);
    CHECK(rep.certified);
    CHECK(is_nonanticipativity_dual(cs.tree, rep.p));
    AdaptedProcess X, U;
    control_split(cs, s.x, X, U);
    CHECK(control_dual_residual(cs, X, U, control_costate(cs, s.dual.y)).certified);
    const AdaptedProcess joined = control_join(cs, X, U);
    for (std::size_t n = 0; n < cs.tree.size(); ++n) CHECK(joined.at(n) == s.x.at(n));
}

TEST_CASE("wrong costates and wrong dynamics are rejected") {
    const ControlSystem cs = scalar(two_leaf(), 0.1, 1.0, {0, 1.0, -0.5}, 1, 1, -1.0);
    const LqSolution lq = lq_riccati_oracle(cs);
    AdaptedProcess zero = lq.y;
    for (auto& v : zero.values) v.setZero();
    CHECK_FALSE(control_dual_residual(cs, lq.X, lq.U, zero).certified);
    ControlSystem other = cs;
    for (auto& a : other.A) a(0, 0) += 0.5;
    const ControlDualReport r = control_dual_residual(other, lq.X, lq.U, lq.y);
    CHECK(r.dynamics > 1e-6);
}

TEST_CASE("random multivariate instances") {
    Rng rng(77);
    for (int k = 0; k < 8; ++k) {
        const ControlSystem cs = random_lq(rng, random_tree(rng, 2, 2), 2, 1 + k % 2);
        const LqSolution lq = lq_riccati_oracle(cs);
        const StochasticSolution s = solve(control_compile(cs));
        REQUIRE(s.certificate.status == CertificateStatus::certified_optimal);
        CHECK(s.certificate.primal.value() == Approx(lq.value).margin(1e-6));
        CHECK(control_dual_residual(cs, lq.X, lq.U, lq.y).certified);
    }
}

TEST_CASE("non-quadratic costs are refused by the oracle") {
    ControlSystem cs = scalar(two_leaf(), 0, 1, {0, 0, 0}, 1, 1);
    cs.L[1] = ConvexFunction::zero(2);
    CHECK_THROWS_AS(lq_riccati_oracle(cs), std::invalid_argument);
}
