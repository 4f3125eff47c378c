#include "credo/interval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "credo/errors.hpp"

namespace credo {

Interval::Interval(double l, double h) : lo(l), hi(h) {
    if (!(l <= h)) {
        throw ValidationError("empty interval [" + std::to_string(l) + ", " +
                              std::to_string(h) + "]");
    }
}

Interval Interval::operator+(const Interval& o) const { return {lo + o.lo, hi + o.hi}; }

Interval Interval::operator-(const Interval& o) const { return {lo - o.hi, hi - o.lo}; }

Interval Interval::operator-() const { return {-hi, -lo}; }

Interval Interval::operator*(const Interval& o) const {
    const double a = lo * o.lo, b = lo * o.hi, c = hi * o.lo, d = hi * o.hi;
    return {std::min(std::min(a, b), std::min(c, d)),
            std::max(std::max(a, b), std::max(c, d))};
}

Interval Interval::operator/(const Interval& o) const {
    if (o.lo <= 0.0 && o.hi >= 0.0) throw ZeroDivisionInterval{};
    return *this * Interval(1.0 / o.hi, 1.0 / o.lo);
}

std::string Interval::str() const {
    std::ostringstream os;
    os << "[" << lo << ", " << hi << "]";
    return os.str();
}

Interval sqr(const Interval& x) {
    const double a = x.lo * x.lo, b = x.hi * x.hi;
    if (x.lo >= 0.0) return {a, b};
    if (x.hi <= 0.0) return {b, a};
    return {0.0, std::max(a, b)};
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kHalfPi = 1.5707963267948966192313216916398;

// whether some point pi/2 + 2k*pi (peak = true) or -pi/2 + 2k*pi lies in [a,b]
bool hits_extremum(double a, double b, bool peak) {
    const double target = peak ? kHalfPi : -kHalfPi;
    const double k = std::ceil((a - target) / kTwoPi);
    return target + k * kTwoPi <= b;
}

}  // namespace

Interval sin(const Interval& x) {
    if (x.width() >= kTwoPi) return {-1.0, 1.0};
    const double sa = std::sin(x.lo), sb = std::sin(x.hi);
    double lo = std::min(sa, sb), hi = std::max(sa, sb);
    if (hits_extremum(x.lo, x.hi, true)) hi = 1.0;
    if (hits_extremum(x.lo, x.hi, false)) lo = -1.0;
    return {lo, hi};
}

namespace {

// whether 2k*pi (peak = true) or pi + 2k*pi lies in [a, b]
bool hits_cos_extremum(double a, double b, bool peak) {
    const double target = peak ? 0.0 : 3.14159265358979323846;
    const double k = std::ceil((a - target) / kTwoPi);
    return target + k * kTwoPi <= b;
}

}  // namespace

Interval cos(const Interval& x) {
    if (x.width() >= kTwoPi) return {-1.0, 1.0};
    const double ca = std::cos(x.lo), cb = std::cos(x.hi);
    double lo = std::min(ca, cb), hi = std::max(ca, cb);
    if (hits_cos_extremum(x.lo, x.hi, true)) hi = 1.0;
    if (hits_cos_extremum(x.lo, x.hi, false)) lo = -1.0;
    return {lo, hi};
}

Interval sat(const Interval& x, double lo_bound, double hi_bound) {
    auto clamp = [&](double v) { return std::min(std::max(v, lo_bound), hi_bound); };
    return {clamp(x.lo), clamp(x.hi)};
}

Interval hull(const Interval& a, const Interval& b) {
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

}  // namespace credo
