#include <catch_amalgamated.hpp>

#include "generators.hpp"
#include "treedual/polyhedron.hpp"

using namespace treedual;
using namespace treedual::testing;
using Catch::Approx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
VectorXd v1(double a) { return VectorXd::Constant(1, a); }
}  // namespace

TEST_CASE("support and feasibility") {
    const Polyhedron box = Polyhedron::from_box(VectorXd::Zero(2), VectorXd::Ones(2));
    CHECK(support(box, (VectorXd(2) << 1, 2).finished()).value() == Approx(3.0));
    CHECK(box.contains(VectorXd::Constant(2, 0.5)));
    Polyhedron empty = box;
    empty.add_inequality((Eigen::RowVectorXd(2) << 1, 1).finished(), -1.0);
    CHECK(is_empty(empty));
    CHECK(support(empty, VectorXd::Ones(2)).is_minus_infinity());
    CHECK(support(Polyhedron::whole(1), v1(1)).is_plus_infinity());
}

TEST_CASE("positive hull linearity") {
    const Polyhedron seg = Polyhedron::from_box(v1(0), v1(2));
    CHECK(pos_hull_linear(seg, v1(1)).linear);
    const PosHullResult r = pos_hull_linear(seg, v1(0));
    CHECK_FALSE(r.linear);
    REQUIRE(r.witness.size() == 1);
    CHECK(r.witness(0) > 0);
    CHECK_THROWS_AS(pos_hull_linear(seg, v1(3)), std::invalid_argument);

    Polyhedron line = Polyhedron::from_box(VectorXd::Constant(2, -1), VectorXd::Constant(2, 1));
    line.add_equality((Eigen::RowVectorXd(2) << 1, -1).finished(), 0.0);
    const PosHullResult l = pos_hull_linear(line, VectorXd::Zero(2));
    CHECK(l.linear);
    CHECK(l.dimension == 1);
}

TEST_CASE("implicit equalities and relative interior") {
    MatrixXd A(3, 2);
    A << 1, 0, -1, 0, 0, 1;
    const Polyhedron p = Polyhedron::make(A, (VectorXd(3) << 0, 0, 1).finished(), MatrixXd(0, 2), VectorXd(0), 2);
    const ImplicitEqualities ie = implicit_equalities(p);
    CHECK(ie.implicit[0]);
    CHECK(ie.implicit[1]);
    CHECK_FALSE(ie.implicit[2]);
    const auto ri = relative_interior_point(p);
    REQUIRE(ri);
    CHECK((*ri)(0) == Approx(0.0).margin(1e-9));
    CHECK((*ri)(1) < 1.0 - 1e-6);
}

TEST_CASE("Fourier-Motzkin projection matches support values") {
    Rng rng(12);
    for (int k = 0; k < 15; ++k) {
        const int n = uniform_int(rng, 2, 4);
        const VectorXd x0 = random_vector(rng, n);
        const MatrixXd A = random_matrix(rng, n + 3, n);
        VectorXd a = A * x0;
        for (int i = 0; i < a.size(); ++i) a(i) += uniform(rng, 0.1, 1.0);
        Polyhedron p = Polyhedron::make(A, a, MatrixXd(0, n), VectorXd(0), n)
                           .intersect(Polyhedron::from_box(VectorXd::Constant(n, -3), VectorXd::Constant(n, 3)));
        const auto proj = fm_project(p, 1);
        REQUIRE(proj);
        MatrixXd L = MatrixXd::Zero(1, n);
        L(0, 0) = 1;
        for (double s : {-1.0, 1.0}) CHECK(support(*proj, v1(s)).value() == Approx(support(p, L, v1(s)).value()).margin(1e-7));
        CHECK(image_included(p, L, *proj));
    }
}

TEST_CASE("normal cone distance") {
    const Polyhedron seg = Polyhedron::from_box(v1(-1), v1(1));
    CHECK(normal_cone_distance(seg, v1(1), v1(5)) == Approx(0.0).margin(1e-9));
    CHECK(normal_cone_distance(seg, v1(1), v1(-2)) == Approx(2.0));
    CHECK(normal_cone_distance(seg, v1(0), v1(0.5)) == Approx(0.5));
    CHECK(std::isinf(normal_cone_distance(seg, v1(2), v1(0))));
}
