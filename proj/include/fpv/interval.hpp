#pragma once

#include <stdexcept>
#include <string>

#include "fpv/rational.hpp"

namespace fpv {

// Raised when an interval operation cannot guarantee containment
// (division by an interval spanning zero, sqrt of a negative range, ...).
// Callers in the analyzer map these to alarms.
struct ContainmentFault : std::runtime_error {
    explicit ContainmentFault(const std::string& what) : std::runtime_error(what) {}
};

// Closed interval with exact rational endpoints, lo <= hi.
struct Interval {
    Rat lo, hi;

    Interval() = default;
    Interval(Rat point) : lo(point), hi(point) {}
    Interval(Rat l, Rat h) : lo(std::move(l)), hi(std::move(h)) {
        if (hi < lo) throw std::invalid_argument("Interval: lo > hi");
    }

    Rat width() const { return hi - lo; }
    bool is_point() const { return lo == hi; }
    bool contains(const Rat& x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool contains_zero() const { return lo.sign() <= 0 && hi.sign() >= 0; }

    // max |x| over the interval
    Rat max_abs() const { return max(lo.abs(), hi.abs()); }
    // min |x| over the interval (0 if it spans zero)
    Rat min_abs() const { return contains_zero() ? Rat(0) : min(lo.abs(), hi.abs()); }

    Interval widened(const Rat& e) const { return Interval(lo - e, hi + e); }

    std::string to_string() const { return "[" + lo.to_string() + ", " + hi.to_string() + "]"; }
};

Interval iv_add(const Interval& a, const Interval& b);
Interval iv_sub(const Interval& a, const Interval& b);
Interval iv_neg(const Interval& a);
Interval iv_fabs(const Interval& a);
Interval iv_mul(const Interval& a, const Interval& b);
// Throws ContainmentFault if 0 in b.
Interval iv_div(const Interval& a, const Interval& b);
// Exact rational power; e < 0 requires 0 not in a.
Interval iv_pow_int(const Interval& a, long e);

Interval iv_hull(const Interval& a, const Interval& b);
bool iv_intersects(const Interval& a, const Interval& b);

}  // namespace fpv
