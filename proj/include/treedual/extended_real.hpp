#pragma once

#include <iosfwd>
#include <string>

namespace treedual {

/// A value in [-inf, +inf]. Sums containing +inf are +inf, except that
/// (+inf) + (-inf) is rejected with std::domain_error.
class ExtendedReal {
public:
    enum class Kind { finite, plus_infinity, minus_infinity };

    constexpr ExtendedReal() = default;
    constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit from double is intended

    static constexpr ExtendedReal plus_infinity() { return ExtendedReal(Kind::plus_infinity); }
    static constexpr ExtendedReal minus_infinity() { return ExtendedReal(Kind::minus_infinity); }
    /// Maps +-HUGE_VAL to the corresponding infinity. NaN is rejected.
    static ExtendedReal from_double(double v);

    [[nodiscard]] constexpr Kind kind() const noexcept { return kind_; }
    [[nodiscard]] constexpr bool is_finite() const noexcept { return kind_ == Kind::finite; }
    [[nodiscard]] constexpr bool is_plus_infinity() const noexcept { return kind_ == Kind::plus_infinity; }
    [[nodiscard]] constexpr bool is_minus_infinity() const noexcept { return kind_ == Kind::minus_infinity; }

    /// Finite value; throws std::domain_error when infinite.
    [[nodiscard]] double value() const;
    /// Finite value, or +-HUGE_VAL.
    [[nodiscard]] double to_double() const noexcept;

    ExtendedReal operator-() const noexcept;
    ExtendedReal& operator+=(const ExtendedReal& other);

    friend ExtendedReal operator+(ExtendedReal a, const ExtendedReal& b) { return a += b; }
    friend ExtendedReal operator-(ExtendedReal a, const ExtendedReal& b) { return a += -b; }
    /// Scaling by a strictly positive factor. Zero or negative factors throw.
    friend ExtendedReal operator*(double lambda, const ExtendedReal& a);

    friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) noexcept;
    friend bool operator<(const ExtendedReal& a, const ExtendedReal& b) noexcept;
    friend bool operator<=(const ExtendedReal& a, const ExtendedReal& b) noexcept { return !(b < a); }
    friend bool operator>(const ExtendedReal& a, const ExtendedReal& b) noexcept { return b < a; }
    friend bool operator>=(const ExtendedReal& a, const ExtendedReal& b) noexcept { return !(a < b); }

    [[nodiscard]] std::string to_string() const;

private:
    constexpr explicit ExtendedReal(Kind k) : kind_(k) {}

    Kind kind_ = Kind::finite;
    double value_ = 0.0;
};

ExtendedReal max(const ExtendedReal& a, const ExtendedReal& b) noexcept;
ExtendedReal min(const ExtendedReal& a, const ExtendedReal& b) noexcept;

std::ostream& operator<<(std::ostream& os, const ExtendedReal& v);

}  // namespace treedual
