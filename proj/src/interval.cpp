#include "fpv/interval.hpp"

#include <algorithm>

namespace fpv {

Interval iv_add(const Interval& a, const Interval& b) {
    return Interval(a.lo + b.lo, a.hi + b.hi);
}

Interval iv_sub(const Interval& a, const Interval& b) {
    return Interval(a.lo - b.hi, a.hi - b.lo);
}

Interval iv_neg(const Interval& a) { return Interval(-a.hi, -a.lo); }

Interval iv_fabs(const Interval& a) {
    if (a.lo.sign() >= 0) return a;
    if (a.hi.sign() <= 0) return iv_neg(a);
    return Interval(Rat(0), a.max_abs());
}

Interval iv_mul(const Interval& a, const Interval& b) {
    Rat p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    return Interval(min(min(p1, p2), min(p3, p4)), max(max(p1, p2), max(p3, p4)));
}

Interval iv_div(const Interval& a, const Interval& b) {
    if (b.contains_zero()) throw ContainmentFault("division by interval containing zero");
    Interval inv(Rat(1) / b.hi, Rat(1) / b.lo);
    return iv_mul(a, inv);
}

Interval iv_pow_int(const Interval& a, long e) {
    if (e == 0) return Interval(Rat(1));
    if (e < 0) {
        if (a.contains_zero()) throw ContainmentFault("negative power of interval containing zero");
        return iv_div(Interval(Rat(1)), iv_pow_int(a, -e));
    }
    if (e % 2 == 1) return Interval(a.lo.pow_int(e), a.hi.pow_int(e));
    // even power: image is [min|x|^e, max|x|^e]
    return Interval(a.min_abs().pow_int(e), a.max_abs().pow_int(e));
}

Interval iv_hull(const Interval& a, const Interval& b) {
    return Interval(min(a.lo, b.lo), max(a.hi, b.hi));
}

bool iv_intersects(const Interval& a, const Interval& b) {
    return !(a.hi < b.lo || b.hi < a.lo);
}

}  // namespace fpv
