#include "fpv/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fpv {

Rat::Rat(const mpz_class& num, const mpz_class& den) {
    if (sgn(den) == 0) throw std::invalid_argument("Rat: zero denominator");
    v_ = mpq_class(num, den);
    v_.canonicalize();
}

Rat Rat::of_double(double d) {
    if (!std::isfinite(d)) throw std::invalid_argument("Rat::of_double: non-finite");
    mpq_class q;
    mpq_set_d(q.get_mpq_t(), d);  // exact
    return Rat(q);
}

Rat Rat::pow2(long e) {
    mpq_class q;
    if (e >= 0) {
        mpz_class n = 1;
        mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
        q = n;
    } else {
        mpz_class d = 1;
        mpz_mul_2exp(d.get_mpz_t(), d.get_mpz_t(), static_cast<mp_bitcnt_t>(-e));
        q = mpq_class(1, d);
    }
    return Rat(q);
}

std::optional<Rat> Rat::parse(const std::string& text) {
    if (text.empty()) return std::nullopt;
    // rational form p/q
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        std::string ns = text.substr(0, slash), ds = text.substr(slash + 1);
        if (ns.empty() || ds.empty()) return std::nullopt;
        try {
            mpz_class n(ns, 10), d(ds, 10);
            if (sgn(d) == 0) return std::nullopt;
            return Rat(n, d);
        } catch (const std::invalid_argument&) {
            return std::nullopt;
        }
    }
    // decimal form [+-]digits[.digits][(e|E)[+-]digits]
    size_t i = 0;
    bool neg = false;
    if (text[i] == '+' || text[i] == '-') { neg = text[i] == '-'; ++i; }
    std::string digits;
    long frac_len = 0;
    bool any = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        digits += text[i++];
        any = true;
    }
    if (i < text.size() && text[i] == '.') {
        ++i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            digits += text[i++];
            ++frac_len;
            any = true;
        }
    }
    if (!any) return std::nullopt;
    long exp10 = 0;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) { eneg = text[i] == '-'; ++i; }
        if (i >= text.size()) return std::nullopt;
        long e = 0;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            e = e * 10 + (text[i] - '0');
            if (e > 1000000) return std::nullopt;
            ++i;
        }
        exp10 = eneg ? -e : e;
    }
    if (i != text.size()) return std::nullopt;
    mpz_class mant(digits.empty() ? "0" : digits, 10);
    if (neg) mant = -mant;
    long e = exp10 - frac_len;
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
    if (e >= 0) return Rat(mpz_class(mant * p10));
    return Rat(mant, p10);
}

Rat Rat::pow_int(long e) const {
    if (e == 0) return Rat(1);
    bool inv = e < 0;
    unsigned long k = static_cast<unsigned long>(inv ? -e : e);
    if (inv && is_zero()) throw std::domain_error("Rat::pow_int: 0^negative");
    mpz_class n, d;
    mpz_pow_ui(n.get_mpz_t(), num().get_mpz_t(), k);
    mpz_pow_ui(d.get_mpz_t(), den().get_mpz_t(), k);
    return inv ? Rat(d, n) : Rat(n, d);
}

mpz_class Rat::floor() const {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), num().get_mpz_t(), den().get_mpz_t());
    return q;
}

mpz_class Rat::ceil() const {
    mpz_class q;
    mpz_cdiv_q(q.get_mpz_t(), num().get_mpz_t(), den().get_mpz_t());
    return q;
}

namespace {

long bitlen(const mpz_class& z) {
    return static_cast<long>(mpz_sizeinbase(z.get_mpz_t(), 2));
}

// a/d scaled by 2^shift, rounded to nearest integer, ties to even.
mpz_class scaled_round_even(const mpz_class& a, const mpz_class& d, long shift) {
    mpz_class n = a, dd = d;
    if (shift >= 0)
        mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
    else
        mpz_mul_2exp(dd.get_mpz_t(), dd.get_mpz_t(), static_cast<mp_bitcnt_t>(-shift));
    mpz_class q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), dd.get_mpz_t());
    mpz_class r2 = r * 2;
    int c = cmp(r2, dd);
    if (c > 0 || (c == 0 && mpz_odd_p(q.get_mpz_t())))
        q += 1;
    return q;
}

}  // namespace

double Rat::to_double_nearest() const {
    int s = sign();
    if (s == 0) return 0.0;
    mpz_class a = num();
    if (s < 0) a = -a;
    const mpz_class d = den();

    // Locate e with 2^e <= a/d < 2^(e+1).
    long e = bitlen(a) - bitlen(d);
    {
        // compare a/d against 2^e
        mpz_class lhs = a, rhs = d;
        if (e >= 0)
            mpz_mul_2exp(rhs.get_mpz_t(), rhs.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
        else
            mpz_mul_2exp(lhs.get_mpz_t(), lhs.get_mpz_t(), static_cast<mp_bitcnt_t>(-e));
        if (lhs < rhs) e -= 1;
    }

    if (e > 1024) return s > 0 ? HUGE_VAL : -HUGE_VAL;
    if (e < -1080) return s > 0 ? 0.0 : -0.0;

    mpz_class m;
    long exp2;  // value = m * 2^exp2
    if (e >= -1022) {
        m = scaled_round_even(a, d, 52 - e);
        exp2 = e - 52;
        // carry: m == 2^53
        mpz_class lim = 1;
        mpz_mul_2exp(lim.get_mpz_t(), lim.get_mpz_t(), 53);
        if (m == lim) { m >>= 1; exp2 += 1; }
        if (exp2 + 52 > 1023) return s > 0 ? HUGE_VAL : -HUGE_VAL;
    } else {
        // subnormal quantum 2^-1074
        m = scaled_round_even(a, d, 1074);
        exp2 = -1074;
        if (sgn(m) == 0) return s > 0 ? 0.0 : -0.0;
    }
    double md = mpz_get_d(m.get_mpz_t());  // m < 2^53, exact
    double r = std::ldexp(md, static_cast<int>(exp2));
    if (std::isinf(r)) return s > 0 ? HUGE_VAL : -HUGE_VAL;
    return s > 0 ? r : -r;
}

double Rat::to_double_down() const {
    double d = to_double_nearest();
    if (std::isinf(d)) {
        if (d > 0) return std::numeric_limits<double>::max();
        return -HUGE_VAL;
    }
    if (Rat::of_double(d) <= *this) return d;
    return std::nextafter(d, -HUGE_VAL);
}

double Rat::to_double_up() const {
    double d = to_double_nearest();
    if (std::isinf(d)) {
        if (d < 0) return -std::numeric_limits<double>::max();
        return HUGE_VAL;
    }
    if (Rat::of_double(d) >= *this) return d;
    return std::nextafter(d, HUGE_VAL);
}

std::string Rat::to_string() const {
    if (is_integer()) return num().get_str();
    // exact decimal when den = 2^a 5^b, capped to keep output short
    mpz_class d = den();
    long twos = mpz_scan1(d.get_mpz_t(), 0);
    mpz_class rest = d >> static_cast<mp_bitcnt_t>(twos);
    long fives = 0;
    while (mpz_divisible_ui_p(rest.get_mpz_t(), 5)) {
        mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), 5);
        ++fives;
    }
    long decimals = twos > fives ? twos : fives;
    if (rest == 1 && decimals <= 40) {
        mpz_class p10;
        mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(decimals));
        mpz_class scaled = num() * (p10 / den());
        bool neg = sgn(scaled) < 0;
        mpz_class mag = neg ? mpz_class(-scaled) : scaled;
        std::string digits = mag.get_str();
        if (static_cast<long>(digits.size()) <= decimals)
            digits = std::string(decimals + 1 - digits.size(), '0') + digits;
        std::string out = digits.substr(0, digits.size() - decimals) + "." +
                          digits.substr(digits.size() - decimals);
        return (neg ? "-" : "") + out;
    }
    return num().get_str() + "/" + den().get_str();
}

std::string Rat::to_sci(int sig_digits) const {
    if (is_zero()) return "0";
    if (sig_digits < 1) sig_digits = 1;
    mpz_class a = num();
    bool neg = sign() < 0;
    if (neg) a = -a;
    const mpz_class d = den();
    // decimal exponent: largest k with 10^k <= a/d
    long approx = static_cast<long>((bitlen(a) - bitlen(d)) * 0.30103) ;
    auto cmp_pow10 = [&](long k) {
        // sign of a/d - 10^k
        mpz_class lhs = a, rhs = d, p;
        mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(k < 0 ? -k : k));
        if (k >= 0) rhs *= p; else lhs *= p;
        return cmp(lhs, rhs);
    };
    long k = approx;
    while (cmp_pow10(k) < 0) --k;
    while (cmp_pow10(k + 1) >= 0) ++k;
    // digits = round(a/d * 10^(sig-1-k))
    long shift = sig_digits - 1 - k;
    mpz_class n = a, dd = d, p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
    if (shift >= 0) n *= p; else dd *= p;
    mpz_class q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), dd.get_mpz_t());
    if (cmp(mpz_class(r * 2), dd) >= 0) q += 1;
    std::string digits = q.get_str();
    if (static_cast<long>(digits.size()) > sig_digits) {  // rounding carried to an extra digit
        digits = digits.substr(0, sig_digits);
        ++k;
    }
    std::ostringstream os;
    if (neg) os << '-';
    os << digits[0];
    if (digits.size() > 1) os << '.' << digits.substr(1);
    os << 'e' << (k >= 0 ? "+" : "") << k;
    return os.str();
}

}  // namespace fpv
