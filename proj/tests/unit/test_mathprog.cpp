#include <catch_amalgamated.hpp>

#include "generators.hpp"
#include "treedual/apps/mathprog.hpp"
#include "treedual/io.hpp"
#include "treedual/solver.hpp"

using namespace treedual;
using Catch::Approx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
VectorXd v1(double a) { return VectorXd::Constant(1, a); }
}  // namespace

TEST_CASE("deterministic inequality") {
    MathProgram mp;
    mp.dims = {1};
    MathNode nd;
    nd.f0 = ConvexFunction::quadratic(MatrixXd::Constant(1, 1, 2.0), v1(0));
    nd.F = {ConvexFunction::affine(v1(1), 1.0)};
    nd.A = MatrixXd(0, 1);
    nd.b = VectorXd(0);
    mp.nodes = {nd};
    const StochasticSolution s = solve(mathprog_compile(mp));
    REQUIRE(s.certificate.status == CertificateStatus::certified_optimal);
    CHECK(s.x.at(0)(0) == Approx(-1.0));
    CHECK(s.dual.y.values(0, 0) == Approx(2.0));
    CHECK(s.dual.p.values.cwiseAbs().maxCoeff() <= 1e-9);
    const MathProgKkt k = mathprog_kkt(mp, s.x, s.dual.p, s.dual.y);
    CHECK(k.certified);
    RandomVector wrong = s.dual.y;
    wrong.values(0, 0) = -1.0;
    const MathProgKkt bad = mathprog_kkt(mp, s.x, s.dual.p, wrong);
    CHECK_FALSE(bad.certified);
    CHECK(bad.dual_cone > 0.0);
}

TEST_CASE("deterministic equality") {
    const double a = 2.0;
    MathProgram mp;
    mp.dims = {1};
    MathNode nd;
    nd.f0 = ConvexFunction::quadratic(MatrixXd::Identity(1, 1), v1(0));
    nd.A = MatrixXd::Constant(1, 1, a);
    nd.b = v1(1);
    mp.nodes = {nd};
    const StochasticSolution s = solve(mathprog_compile(mp));
    REQUIRE(s.certificate.status == CertificateStatus::certified_optimal);
    CHECK(s.x.at(0)(0) == Approx(1.0 / a));
    // the multiplier prices Ax - b, so its sign is opposite to the textbook b - Ax convention
    CHECK(s.dual.y.values(0, 0) == Approx(-1.0 / (a * a)));
    CHECK(mathprog_kkt(mp, s.x, s.dual.p, s.dual.y).certified);
}

TEST_CASE("golden two-stage program agrees with grid search") {
    const Instance inst = load_instance(testing::data_dir() + "/instances/mathprog.json");
    const StochasticProgram sp = compile(inst);
    const StochasticSolution s = solve(sp);
    REQUIRE(s.certificate.status == CertificateStatus::certified_optimal);
    CHECK(mathprog_kkt(*inst.mathprog, s.x, s.dual.p, s.dual.y).certified);
    const CompositeProgram prog = build_program(sp, nullptr, sp.ubar);
    REQUIRE(prog.dim == 3);
    const BruteForceResult g = brute_force_minimize(prog, VectorXd::Constant(3, -2), VectorXd::Constant(3, 2), 0.04);
    REQUIRE(g.value.is_finite());
    CHECK(s.certificate.primal.value() <= g.value.value() + 1e-9);
    CHECK(g.value.value() - s.certificate.primal.value() <= g.bound + 1e-6);
}

TEST_CASE("inconsistent node data is rejected") {
    MathProgram mp;
    mp.tree = FilteredTree({{0, -1, 0, 1.0}, {1, 0, 1, 0.5}, {2, 0, 1, 0.5}});
    mp.dims = {1, 1};
    MathNode root;
    root.f0 = ConvexFunction::zero(1);
    root.A = MatrixXd(0, 1);
    root.b = VectorXd(0);
    MathNode leaf;
    leaf.f0 = ConvexFunction::zero(2);
    leaf.A = MatrixXd(0, 2);
    leaf.b = VectorXd(0);
    MathNode other = leaf;
    other.F = {ConvexFunction::affine(VectorXd::Ones(2))};
    mp.nodes = {root, leaf, other};
    CHECK_THROWS_AS(mp.validate(), std::invalid_argument);
}
