#include "fpv/transcendental.hpp"

#include <mpfr.h>

#include <stdexcept>

namespace fpv {

namespace {

struct MpfrFloat {
    mpfr_t v;
    explicit MpfrFloat(long prec) { mpfr_init2(v, static_cast<mpfr_prec_t>(prec)); }
    ~MpfrFloat() { mpfr_clear(v); }
    MpfrFloat(const MpfrFloat&) = delete;
    MpfrFloat& operator=(const MpfrFloat&) = delete;
};

Rat rat_of_mpfr(const mpfr_t x) {
    if (!mpfr_number_p(x)) throw std::range_error("rat_of_mpfr: non-finite");
    mpq_class q;
    mpfr_get_q(q.get_mpq_t(), x);
    return Rat(q);
}

using MpfrUnary = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);

// Enclosure for a monotone increasing function.
Interval increasing_enclosure(MpfrUnary f, const Interval& a, long p) {
    MpfrFloat t(p), r(p);
    mpfr_set_q(t.v, a.lo.raw().get_mpq_t(), MPFR_RNDD);
    f(r.v, t.v, MPFR_RNDD);
    Rat lo = rat_of_mpfr(r.v);
    mpfr_set_q(t.v, a.hi.raw().get_mpq_t(), MPFR_RNDU);
    f(r.v, t.v, MPFR_RNDU);
    Rat hi = rat_of_mpfr(r.v);
    return Interval(min(lo, hi), max(lo, hi));
}

// sin or cos over [a.lo, a.hi] via endpoint evaluation plus critical-point
// detection against an enclosure of pi at working precision. Endpoint values
// are widened by the argument-rounding slack (both functions are 1-Lipschitz).
Interval periodic_enclosure(bool is_sin, const Interval& a, long p) {
    MpfrFloat pi(p);
    mpfr_const_pi(pi.v, MPFR_RNDD);
    Rat pi_lo = rat_of_mpfr(pi.v);
    mpfr_const_pi(pi.v, MPFR_RNDU);
    Rat pi_hi = rat_of_mpfr(pi.v);
    const Interval full(Rat(-1), Rat(1));
    if (a.width() >= pi_hi * 2) return full;

    bool force_hi = false, force_lo = false;
    const Rat hp_lo = pi_lo / 2, hp_hi = pi_hi / 2;  // pi/2 enclosure
    // integer k with k*(pi/2) possibly inside [lo, hi]
    Rat q1 = a.lo / hp_lo, q2 = a.lo / hp_hi, q3 = a.hi / hp_lo, q4 = a.hi / hp_hi;
    mpz_class kmin = min(q1, q2).ceil() - 1;
    mpz_class kmax = max(q3, q4).floor() + 1;
    if (kmax - kmin > 16) return full;  // only possible with a degenerate pi enclosure
    for (mpz_class k = kmin; k <= kmax; k = k + 1) {
        Rat r_k(k);
        Interval crit = k >= 0 ? Interval(r_k * hp_lo, r_k * hp_hi)
                               : Interval(r_k * hp_hi, r_k * hp_lo);
        if (!iv_intersects(crit, a)) continue;
        long m = mpz_class(((k % 4) + 4) % 4).get_si();
        if (is_sin) {
            if (m == 1) force_hi = true;
            if (m == 3) force_lo = true;
        } else {
            if (m == 0) force_hi = true;
            if (m == 2) force_lo = true;
        }
    }

    auto endpoint = [&](const Rat& x) {
        MpfrFloat t(p), r(p);
        mpfr_set_q(t.v, x.raw().get_mpq_t(), MPFR_RNDN);
        if (is_sin) mpfr_sin(r.v, t.v, MPFR_RNDD); else mpfr_cos(r.v, t.v, MPFR_RNDD);
        Rat lo = rat_of_mpfr(r.v);
        if (is_sin) mpfr_sin(r.v, t.v, MPFR_RNDU); else mpfr_cos(r.v, t.v, MPFR_RNDU);
        Rat hi = rat_of_mpfr(r.v);
        Rat slack = Rat::pow2(2 - p) * max(Rat(1), x.abs());
        return Interval(lo - slack, hi + slack);
    };
    Interval at_lo = endpoint(a.lo);
    Interval at_hi = endpoint(a.hi);
    Rat lo = min(at_lo.lo, at_hi.lo);
    Rat hi = max(at_lo.hi, at_hi.hi);
    if (force_lo) lo = Rat(-1);
    if (force_hi) hi = Rat(1);
    // exact image is within [-1, 1]
    return Interval(max(lo, Rat(-1)), min(hi, Rat(1)));
}

}  // namespace

const char* transc_name(TranscOp op) {
    switch (op) {
        case TranscOp::Sqrt: return "sqrt";
        case TranscOp::Cbrt: return "cbrt";
        case TranscOp::Exp: return "exp";
        case TranscOp::Log: return "log";
        case TranscOp::Sin: return "sin";
        case TranscOp::Cos: return "cos";
    }
    return "?";
}

Interval iv_sqrt(const Interval& a, long precision_bits) {
    if (a.lo.sign() < 0) throw ContainmentFault("sqrt of interval with negative lower bound");
    return increasing_enclosure(mpfr_sqrt, a, precision_bits + 32);
}

Interval iv_cbrt(const Interval& a, long precision_bits) {
    return increasing_enclosure(mpfr_cbrt, a, precision_bits + 32);
}

Interval iv_exp(const Interval& a, long precision_bits) {
    return increasing_enclosure(mpfr_exp, a, precision_bits + 32);
}

Interval iv_log(const Interval& a, long precision_bits) {
    if (a.lo.sign() <= 0) throw ContainmentFault("log of interval with non-positive lower bound");
    return increasing_enclosure(mpfr_log, a, precision_bits + 32);
}

Interval iv_sin(const Interval& a, long precision_bits) {
    return periodic_enclosure(true, a, precision_bits + 32);
}

Interval iv_cos(const Interval& a, long precision_bits) {
    return periodic_enclosure(false, a, precision_bits + 32);
}

Interval iv_transcendental(TranscOp op, const Interval& a, long precision_bits) {
    switch (op) {
        case TranscOp::Sqrt: return iv_sqrt(a, precision_bits);
        case TranscOp::Cbrt: return iv_cbrt(a, precision_bits);
        case TranscOp::Exp: return iv_exp(a, precision_bits);
        case TranscOp::Log: return iv_log(a, precision_bits);
        case TranscOp::Sin: return iv_sin(a, precision_bits);
        case TranscOp::Cos: return iv_cos(a, precision_bits);
    }
    throw std::logic_error("iv_transcendental: bad op");
}

}  // namespace fpv
