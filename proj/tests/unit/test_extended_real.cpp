#include <catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "treedual/extended_real.hpp"

using treedual::ExtendedReal;

TEST_CASE("finite arithmetic and ordering") {
    ExtendedReal a = 2.0, b = -0.5;
    CHECK((a + b).value() == 1.5);
    CHECK((a - b).value() == 2.5);
    CHECK((3.0 * b).value() == -1.5);
    CHECK(b < a);
    CHECK(a <= a);
    CHECK(max(a, b) == a);
    CHECK(min(a, b) == b);
}

TEST_CASE("infinities absorb finite values") {
    const auto inf = ExtendedReal::plus_infinity();
    const auto ninf = ExtendedReal::minus_infinity();
    CHECK((inf + 5.0).is_plus_infinity());
    CHECK((ninf + 5.0).is_minus_infinity());
    CHECK((-inf).is_minus_infinity());
    CHECK((2.0 * inf).is_plus_infinity());
    CHECK(ninf < -1e300);
    CHECK(1e300 < inf);
    CHECK(inf.to_double() == HUGE_VAL);
    CHECK_THROWS_AS(inf.value(), std::domain_error);
}

TEST_CASE("undefined operations are rejected") {
    const auto inf = ExtendedReal::plus_infinity();
    CHECK_THROWS_AS(inf + ExtendedReal::minus_infinity(), std::domain_error);
    CHECK_THROWS(0.0 * ExtendedReal(1.0));
    CHECK_THROWS(-1.0 * inf);
    CHECK_THROWS(ExtendedReal::from_double(std::nan("")));
    CHECK(ExtendedReal::from_double(-HUGE_VAL).is_minus_infinity());
}

TEST_CASE("printing") {
    CHECK(ExtendedReal::plus_infinity().to_string() == "+inf");
    CHECK(ExtendedReal::minus_infinity().to_string() == "-inf");
    CHECK(ExtendedReal(1.5).to_string() == "1.5");
}
