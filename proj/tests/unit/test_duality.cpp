#include <catch_amalgamated.hpp>

#include "generators.hpp"
#include "treedual/duality.hpp"

using namespace treedual;
using namespace treedual::testing;
using Catch::Approx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

FilteredTree two_leaf() { return FilteredTree({{0, -1, 0, 1.0}, {1, 0, 1, 0.5}, {2, 0, 1, 0.5}}); }

StochasticProgram half_square_program(const FilteredTree& tree) {
    StochasticProgram sp;
    sp.tree = tree;
    sp.dims.assign(tree.horizon() + 1, 0);
    sp.dims[0] = 1;
    sp.integrands = {ConvexFunction::quadratic(MatrixXd::Identity(1, 1), VectorXd::Zero(1))};
    sp.ubar = RandomVector::zeros(tree, 0);
    return sp;
}

// 1/2 x^2 + indicator{x >= u}, x at the root
StochasticProgram threshold_program() {
    StochasticProgram sp;
    sp.tree = two_leaf();
    sp.dims = {1, 0};
    sp.m = 1;
    MatrixXd A(1, 2);
    A << -1, 1;
    sp.integrands = {ConvexFunction::sum({ConvexFunction::quadratic((MatrixXd(2, 2) << 1, 0, 0, 0).finished(), VectorXd::Zero(2)),
                                          ConvexFunction::polyhedron(A, VectorXd::Zero(1), MatrixXd(0, 2), VectorXd(0), 2)},
                                         2)};
    sp.ubar = RandomVector((MatrixXd(2, 1) << -1, 1).finished());
    return sp;
}

AdaptedProcess root_value(const StochasticProgram& sp, double v) {
    AdaptedProcess x = AdaptedProcess::zeros(sp.tree, sp.dims);
    x.values[sp.tree.root()](0) = v;
    return x;
}

}  // namespace

TEST_CASE("primal values") {
    const StochasticProgram sp = half_square_program(two_leaf());
    CHECK(primal_value(sp, root_value(sp, 0)).value() == 0.0);
    CHECK(primal_value(sp, root_value(sp, 2)).value() == Approx(2.0));
    const StochasticProgram th = threshold_program();
    CHECK(primal_value(th, root_value(th, 0)).is_plus_infinity());
}

TEST_CASE("dual value and nonanticipativity flag") {
    StochasticProgram sp = half_square_program(FilteredTree::trivial());
    DualPoint dp{LeafProcess::zeros(sp.tree, sp.dims), RandomVector::zeros(sp.tree, 0)};
    CHECK(dual_value(sp, dp).value.value() == 0.0);
    CHECK(dual_value(sp, dp).feasible);

    const StochasticProgram two = half_square_program(two_leaf());
    DualPoint bad{LeafProcess::zeros(two.tree, two.dims), RandomVector::zeros(two.tree, 0)};
    bad.p.values.setConstant(1.0);
    const DualValue dv = dual_value(two, bad);
    CHECK_FALSE(dv.feasible);
    CHECK(dv.value.value() == Approx(-0.5));
}

TEST_CASE("KKT residual equals the Fenchel gap") {
    const StochasticProgram sp = half_square_program(two_leaf());
    const DualPoint dp{LeafProcess::zeros(sp.tree, sp.dims), RandomVector::zeros(sp.tree, 0)};
    const KktReport at_opt = kkt_residual(sp, root_value(sp, 0), dp);
    CHECK(at_opt.certified);
    const KktReport off = kkt_residual(sp, root_value(sp, 0.1), dp);
    CHECK(off.max_leaf_residual == Approx(0.005));
    CHECK_FALSE(off.certified);
}

TEST_CASE("solve the threshold program") {
    const StochasticProgram sp = threshold_program();
    const StochasticSolution s = solve(sp);
    REQUIRE(s.certificate.status == CertificateStatus::certified_optimal);
    CHECK(s.x.at(0)(0) == Approx(1.0));
    CHECK(s.certificate.primal.value() == Approx(0.5));
    CHECK(is_nonanticipativity_dual(sp.tree, s.dual.p));
    // only the binding leaf carries a price on u
    CHECK(s.dual.y.values(0, 0) == Approx(0.0).margin(1e-8));
    CHECK(s.dual.y.values(1, 0) == Approx(2.0));
    const DualPoint zero{LeafProcess::zeros(sp.tree, sp.dims), RandomVector::zeros(sp.tree, 1)};
    const GapReport g = duality_gap(sp, s.x, zero);
    CHECK(g.gap.value() == Approx(0.5));
    CHECK(duality_gap(sp, root_value(sp, 0), s.dual).gap.is_plus_infinity());
    CHECK(value_function_probe(sp, LeafProcess::zeros(sp.tree, sp.dims), sp.ubar).value() == Approx(0.5));
}

TEST_CASE("unbounded and infeasible programs") {
    StochasticProgram sp = half_square_program(two_leaf());
    sp.integrands = {ConvexFunction::affine(VectorXd::Constant(1, -1))};
    CHECK(solve(sp).certificate.status == CertificateStatus::unbounded);
    sp.integrands = {ConvexFunction::sum({ConvexFunction::box(VectorXd::Constant(1, 0), VectorXd::Constant(1, 1)),
                                          ConvexFunction::box(VectorXd::Constant(1, 2), VectorXd::Constant(1, 3))},
                                         1)};
    CHECK(solve(sp).certificate.status == CertificateStatus::infeasible);
}

TEST_CASE("weak duality on random dual points") {
    Rng rng(17);
    for (int k = 0; k < 30; ++k) {
        const StochasticProgram sp = random_program(rng, k % kProgramFamilies);
        const StochasticSolution s = solve(sp);
        REQUIRE(s.certificate.primal.is_finite());
        LeafProcess q = LeafProcess::zeros(sp.tree, sp.dims);
        q.values = random_matrix(rng, static_cast<int>(sp.tree.num_leaves()), q.total_dim(), 3.0);
        const DualPoint dp{shadow_price_projection(sp.tree, q),
                           RandomVector(random_matrix(rng, static_cast<int>(sp.tree.num_leaves()), sp.m, 3.0))};
        const ExtendedReal d = dual_value(sp, dp).value;
        CHECK(d <= s.certificate.primal + 1e-9);
    }
}

TEST_CASE("certificates of random programs") {
    Rng rng(23);
    for (int k = 0; k < 24; ++k) {
        const StochasticProgram sp = random_program(rng, k % kProgramFamilies);
        const StochasticSolution s = solve(sp);
        INFO("family " << k % kProgramFamilies << " note " << s.certificate.note);
        CHECK(s.certificate.status == CertificateStatus::certified_optimal);
        const Certificate again = certify(sp, s.x, s.dual);
        CHECK(again.status == s.certificate.status);
    }
}
