#pragma once

#include <string>
#include <vector>

namespace credo {

// Closed real interval [lo, hi]. Arithmetic follows plain interval rules in
// real semantics (no directed rounding); certification margins downstream
// absorb double-precision slop. Division by an interval containing zero
// throws ZeroDivisionInterval, which callers turn into an undecided box.
struct ZeroDivisionInterval {};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double l, double h);
    static Interval point(double v) { return Interval(v, v); }

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double v) const { return lo <= v && v <= hi; }

    Interval operator+(const Interval& o) const;
    Interval operator-(const Interval& o) const;
    Interval operator-() const;
    Interval operator*(const Interval& o) const;
    Interval operator/(const Interval& o) const;  // throws ZeroDivisionInterval

    std::string str() const;
};

Interval sqr(const Interval& x);
Interval sin(const Interval& x);
Interval cos(const Interval& x);
// clamp to [lo_bound, hi_bound] applied endpoint-wise
Interval sat(const Interval& x, double lo_bound, double hi_bound);

Interval hull(const Interval& a, const Interval& b);

// Axis-aligned box: one interval per scalar coordinate.
using Box = std::vector<Interval>;

}  // namespace credo
