#include <catch_amalgamated.hpp>

#include "treedual/io.hpp"
#include "treedual/qualification.hpp"
#include "generators.hpp"

using namespace treedual;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// dom f = {x <= 0} on a one-leaf tree
StochasticProgram halfline() {
    StochasticProgram sp;
    sp.dims = {1};
    sp.integrands = {ConvexFunction::sum({ConvexFunction::quadratic(MatrixXd::Identity(1, 1), VectorXd::Zero(1)),
                                          ConvexFunction::box(VectorXd::Constant(1, -HUGE_VAL), VectorXd::Zero(1))},
                                         1)};
    sp.ubar = RandomVector::zeros(sp.tree, 0);
    return sp;
}

// dom f = {(x, u) : u = x, 0 <= x <= 1}
StochasticProgram diagonal(double ubar) {
    StochasticProgram sp;
    sp.dims = {1};
    sp.m = 1;
    MatrixXd C(1, 2);
    C << 1, -1;
    MatrixXd A(2, 2);
    A << 1, 0, -1, 0;
    sp.integrands = {ConvexFunction::polyhedron(A, (VectorXd(2) << 1, 0).finished(), C, VectorXd::Zero(1), 2)};
    sp.ubar = RandomVector::constant(sp.tree, VectorXd::Constant(1, ubar));
    return sp;
}

StochasticProgram golden(const std::string& name) {
    return compile(load_instance(testing::data_dir() + "/instances/" + name + ".json"));
}

}  // namespace

TEST_CASE("strict feasibility") {
    StochasticProgram free = halfline();
    free.integrands = {ConvexFunction::quadratic(MatrixXd::Identity(1, 1), VectorXd::Zero(1))};
    CHECK(check_strict_feasibility(free).holds);

    const StochasticProgram sp = halfline();
    AdaptedProcess inner = AdaptedProcess::zeros(sp.tree, sp.dims);
    inner.values[0](0) = -1;
    CHECK(check_strict_feasibility(sp, &inner).holds);
    const AdaptedProcess edge = AdaptedProcess::zeros(sp.tree, sp.dims);
    const StrictFeasibilityReport r = check_strict_feasibility(sp, &edge);
    CHECK_FALSE(r.holds);
    CHECK(r.failing_leaf == 0);
    REQUIRE(r.failing_generator.size() == 1);
    CHECK(r.failing_generator(0) < 0);
    CHECK(check_strict_feasibility(sp).holds);
}

TEST_CASE("parameter domain linearity") {
    CHECK(check_rec1(diagonal(0.5)).holds);
    const Rec1Report r = check_rec1(diagonal(0.0));
    CHECK_FALSE(r.holds);
    CHECK_FALSE(r.inconclusive);
    CHECK(r.cross_checked);
    const StochasticProgram stop = golden("reward");
    CHECK(check_rec1(stop).holds);
}

TEST_CASE("conditional recourse") {
    CHECK(check_rec2(halfline()).holds);
    CHECK(check_rec2(golden("adapted")).holds);
    const Rec2Report r = check_rec2(golden("nonadapted"));
    CHECK_FALSE(r.holds);
    CHECK(r.failing_stage == 0);
}

TEST_CASE("bounded recourse on the adapted and non-adapted instances") {
    const BoundedRecourseReport good = check_bounded_recourse(golden("adapted"), 10.0);
    CHECK(good.holds);
    const StochasticProgram bad = golden("nonadapted");
    const BoundedRecourseReport r = check_bounded_recourse(bad, 10.0);
    CHECK_FALSE(r.holds);
    CHECK_FALSE(r.inconclusive);
    CHECK(r.failing_stage == 0);
    CHECK(r.failing_node == bad.tree.node(bad.tree.root()).id);
    CHECK(check_bounded_recourse(halfline(), 10.0).holds);
}

TEST_CASE("radius below the feasible set is inconclusive") {
    StochasticProgram sp = halfline();
    sp.integrands = {ConvexFunction::box(VectorXd::Constant(1, 5), VectorXd::Constant(1, 6))};
    const BoundedRecourseReport r = check_bounded_recourse(sp, 1.0);
    CHECK(r.inconclusive);
}

TEST_CASE("full qualification of the golden programs") {
    for (const char* name : {"two_leaf", "adapted", "reward", "lagrange", "hedging"}) {
        const QualificationReport q = qualify(golden(name));
        INFO(name);
        CHECK(q.strict_feasibility.holds);
        CHECK(q.rec1.holds);
        CHECK(q.rec2.holds);
        CHECK(q.bounded_recourse.holds);
    }
}

TEST_CASE("noisy dynamics truncate to a non-adapted set but still certify") {
    const StochasticProgram sp = golden("lq");
    const QualificationReport q = qualify(sp);
    CHECK(q.strict_feasibility.holds);
    CHECK_FALSE(q.bounded_recourse.holds);
    CHECK(q.bounded_recourse.failing_stage == 0);
    CHECK(solve(sp).certificate.status == CertificateStatus::certified_optimal);
}
