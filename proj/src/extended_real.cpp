#include "treedual/extended_real.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace treedual {

ExtendedReal ExtendedReal::from_double(double v) {
    if (std::isnan(v)) throw std::domain_error("ExtendedReal: NaN");
    if (std::isinf(v)) return v > 0 ? plus_infinity() : minus_infinity();
    return ExtendedReal(v);
}

double ExtendedReal::value() const {
    if (kind_ != Kind::finite) throw std::domain_error("ExtendedReal::value on infinite value");
    return value_;
}

double ExtendedReal::to_double() const noexcept {
    switch (kind_) {
        case Kind::plus_infinity: return HUGE_VAL;
        case Kind::minus_infinity: return -HUGE_VAL;
        default: return value_;
    }
}

ExtendedReal ExtendedReal::operator-() const noexcept {
    switch (kind_) {
        case Kind::plus_infinity: return minus_infinity();
        case Kind::minus_infinity: return plus_infinity();
        default: return ExtendedReal(-value_);
    }
}

ExtendedReal& ExtendedReal::operator+=(const ExtendedReal& other) {
    if ((kind_ == Kind::plus_infinity && other.kind_ == Kind::minus_infinity) ||
        (kind_ == Kind::minus_infinity && other.kind_ == Kind::plus_infinity)) {
        throw std::domain_error("ExtendedReal: (+inf) + (-inf) is undefined");
    }
    if (kind_ != Kind::finite) return *this;
    if (other.kind_ != Kind::finite) {
        kind_ = other.kind_;
        value_ = 0.0;
        return *this;
    }
    value_ += other.value_;
    return *this;
}

ExtendedReal operator*(double lambda, const ExtendedReal& a) {
    if (!(lambda > 0.0)) throw std::domain_error("ExtendedReal: scaling factor must be positive");
    if (!a.is_finite()) return a;
    return ExtendedReal(lambda * a.value_);
}

bool operator==(const ExtendedReal& a, const ExtendedReal& b) noexcept {
    if (a.kind_ != b.kind_) return false;
    return a.kind_ != ExtendedReal::Kind::finite || a.value_ == b.value_;
}

bool operator<(const ExtendedReal& a, const ExtendedReal& b) noexcept {
    return a.to_double() < b.to_double();
}

ExtendedReal max(const ExtendedReal& a, const ExtendedReal& b) noexcept { return a < b ? b : a; }
ExtendedReal min(const ExtendedReal& a, const ExtendedReal& b) noexcept { return b < a ? b : a; }

std::string ExtendedReal::to_string() const {
    if (is_plus_infinity()) return "+inf";
    if (is_minus_infinity()) return "-inf";
    std::ostringstream os;
    os.precision(17);
    os << value_;
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const ExtendedReal& v) { return os << v.to_string(); }

}  // namespace treedual
