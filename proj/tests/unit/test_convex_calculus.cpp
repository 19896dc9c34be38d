#include <catch_amalgamated.hpp>

#include <cmath>

#include "generators.hpp"
#include "treedual/convex_calculus.hpp"

using namespace treedual;
using namespace treedual::testing;
using Catch::Approx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
VectorXd v1(double a) { return VectorXd::Constant(1, a); }
ConvexFunction half_square() { return ConvexFunction::quadratic(MatrixXd::Identity(1, 1), VectorXd::Zero(1)); }
ConvexFunction interval(double lo, double hi) { return ConvexFunction::box(v1(lo), v1(hi)); }
ConvexFunction absval() {
    MatrixXd B(2, 1);
    B << 1, -1;
    return ConvexFunction::max_affine(B, VectorXd::Zero(2));
}
}  // namespace

TEST_CASE("conjugates of the basic examples") {
    CHECK(conjugate(half_square(), v1(3)).value() == Approx(4.5));
    CHECK(conjugate(interval(-1, 1), v1(-2)).value() == Approx(2.0));
    CHECK(conjugate(ConvexFunction::sum({half_square(), interval(-1, 1)}, 1), v1(3)).value() == Approx(2.5));
    CHECK(conjugate(absval(), v1(0.5)).value() == Approx(0.0).margin(1e-12));
    CHECK(conjugate(absval(), v1(1.5)).is_plus_infinity());
    CHECK(conjugate(ConvexFunction::affine(v1(2), 5), v1(2)).value() == Approx(-5.0));
    CHECK(conjugate(ConvexFunction::affine(v1(2), 5), v1(1)).is_plus_infinity());
    CHECK(conjugate(ConvexFunction::scale(2.0, half_square()), v1(2)).value() == Approx(1.0));
}

TEST_CASE("subdifferential membership by the Fenchel residual") {
    CHECK(subdifferential_check(half_square(), v1(3), v1(3)) == Approx(0.0).margin(1e-12));
    CHECK(subdifferential_check(interval(-1, 1), v1(1), v1(5)) == Approx(0.0).margin(1e-12));
    CHECK(subdifferential_check(half_square(), v1(3), v1(0)) == Approx(4.5));
    CHECK(std::isinf(subdifferential_check(interval(-1, 1), v1(2), v1(0))));
    const auto g = subgradient(absval(), v1(0));
    REQUIRE(g);
    CHECK((*g)(0) == Approx(0.0).margin(1e-9));
    CHECK_FALSE(subgradient(interval(-1, 1), v1(3)));
}

TEST_CASE("recession and domain support") {
    CHECK(recession(half_square(), v1(1)).is_plus_infinity());
    CHECK(recession(interval(-1, 1), v1(1)).is_plus_infinity());
    CHECK(recession(interval(-1, 1), v1(0)).value() == 0.0);
    CHECK(recession(ConvexFunction::affine(v1(2), 5), v1(3)).value() == Approx(6.0));
    CHECK(recession(absval(), v1(-2)).value() == Approx(2.0));
    CHECK(domain_support(interval(-1, 1), v1(2)).value() == Approx(2.0));
    CHECK(domain_support(half_square(), v1(1)).is_plus_infinity());
    CHECK(domain_support(half_square(), v1(0)).value() == 0.0);
    CHECK(domain_support(ConvexFunction::sum({half_square(), interval(0, 2)}, 1), v1(1)).value() == Approx(2.0));
    const ConvexFunction empty = ConvexFunction::sum({interval(0, 1), interval(2, 3)}, 1);
    CHECK_THROWS_AS(recession(empty, v1(1)), std::domain_error);
}

TEST_CASE("closed-form conjugate functions") {
    const auto c = conjugate_function(ConvexFunction::quadratic(MatrixXd::Constant(1, 1, 2.0), v1(1.0), 0.5));
    REQUIRE(c);
    for (double v : {-2.0, 0.0, 1.5})
        CHECK(evaluate(*c, v1(v)).value() == Approx(conjugate(ConvexFunction::quadratic(MatrixXd::Constant(1, 1, 2.0), v1(1.0), 0.5), v1(v)).value()));
    CHECK_FALSE(conjugate_function(absval()));
}

TEST_CASE("grid oracle") {
    const GridResult a = grid_conjugate_oracle(half_square(), v1(3), v1(-10), v1(10), 1e-3);
    CHECK(a.value.value() == Approx(4.5).margin(1e-2));
    const GridResult b = grid_conjugate_oracle(interval(-1, 1), v1(-2), v1(-1), v1(1), 1e-3);
    CHECK(b.value.value() == Approx(2.0).margin(1e-12));
    const GridResult c = grid_conjugate_oracle(absval(), v1(0.5), v1(-5), v1(5), 1e-3);
    CHECK(c.value.value() == Approx(0.0).margin(1e-3));
}

TEST_CASE("inf-convolution formula for the conjugate of a sum") {
    const InfConvolution a = inf_convolution_conjugate(half_square(), ConvexFunction::zero(1), v1(2));
    CHECK(a.value.value() == Approx(2.0));
    CHECK(a.y(0) == Approx(0.0).margin(1e-6));
    const InfConvolution b = inf_convolution_conjugate(interval(-1, 1), interval(0, 2), v1(1));
    CHECK(b.qualified);
    CHECK(b.value.value() == Approx(1.0));
    const InfConvolution c = inf_convolution_conjugate(half_square(), interval(0, 2), v1(3));
    CHECK(c.attained);
    // min_y 1/2 (3 - y)^2 + 2 max(y, 0) is attained at y = 1
    CHECK(c.value.value() == Approx(4.0));
    CHECK(c.y(0) == Approx(1.0).margin(1e-6));
}

TEST_CASE("Fenchel inequality and equality on random variants") {
    Rng rng(21);
    for (auto var : kAllVariants) {
        for (int k = 0; k < 10; ++k) {
            const int d = uniform_int(rng, 1, 2);
            const ConvexFunction f = random_function(rng, var, d, false);
            const VectorXd x = domain_point(f, rng);
            const VectorXd v = random_vector(rng, d, 2.0);
            const ExtendedReal fx = evaluate(f, x);
            const ExtendedReal fs = conjugate(f, v);
            INFO(variant_name(var));
            if (!fs.is_plus_infinity()) CHECK(fx.value() + fs.value() - x.dot(v) >= -1e-7);
            const auto g = subgradient(f, x);
            if (g) CHECK(subdifferential_check(f, x, *g) <= 1e-6);
        }
    }
}

TEST_CASE("lifted and projected domains agree") {
    Rng rng(8);
    for (int k = 0; k < 10; ++k) {
        const ConvexFunction f = random_function(rng, Variant::sum, 2, true);
        const auto dom = domain_polyhedron(f);
        REQUIRE(dom);
        for (int j = 0; j < 20; ++j) {
            const VectorXd x = random_vector(rng, 2, 2.5);
            CHECK(dom->contains(x, 1e-7) == evaluate(f, x, 1e-7).is_finite());
        }
    }
}
