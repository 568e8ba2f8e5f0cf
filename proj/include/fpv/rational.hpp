#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

namespace fpv {

// Exact rational scalar. Always canonical: den > 0, gcd(|num|, den) = 1.
class Rat {
public:
    Rat() : v_(0) {}
    Rat(int n) : v_(n) {}
    Rat(long n) : v_(static_cast<signed long>(n)) {}
    Rat(const mpz_class& n) : v_(n) {}
    Rat(const mpq_class& q) : v_(q) { v_.canonicalize(); }
    Rat(const mpz_class& num, const mpz_class& den);

    // Exact value of a finite binary64 (no rounding).
    static Rat of_double(double d);
    // Parses "123", "-4.5", "6.02e23", "1/10". Returns nullopt on malformed input.
    static std::optional<Rat> parse(const std::string& text);
    static Rat pow2(long e);  // 2^e, e may be negative

    const mpq_class& raw() const { return v_; }
    mpz_class num() const { return v_.get_num(); }
    mpz_class den() const { return v_.get_den(); }

    bool is_zero() const { return sgn(v_) == 0; }
    bool is_integer() const { return v_.get_den() == 1; }
    int sign() const { return sgn(v_); }

    Rat operator-() const { return Rat(mpq_class(-v_)); }
    Rat abs() const { return sign() < 0 ? -*this : *this; }

    friend Rat operator+(const Rat& a, const Rat& b) { return Rat(mpq_class(a.v_ + b.v_)); }
    friend Rat operator-(const Rat& a, const Rat& b) { return Rat(mpq_class(a.v_ - b.v_)); }
    friend Rat operator*(const Rat& a, const Rat& b) { return Rat(mpq_class(a.v_ * b.v_)); }
    friend Rat operator/(const Rat& a, const Rat& b) { return Rat(mpq_class(a.v_ / b.v_)); }

    Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
    Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
    Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }

    friend bool operator==(const Rat& a, const Rat& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Rat& a, const Rat& b) { return a.v_ != b.v_; }
    friend bool operator<(const Rat& a, const Rat& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Rat& a, const Rat& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Rat& a, const Rat& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Rat& a, const Rat& b) { return a.v_ >= b.v_; }

    Rat pow_int(long e) const;  // e < 0 requires nonzero value

    // Correctly rounded binary64, round-to-nearest-even; overflow gives +/-inf.
    double to_double_nearest() const;
    // Largest double <= value (assumes value within double range after rounding).
    double to_double_down() const;
    // Smallest double >= value.
    double to_double_up() const;

    // floor/ceil to integer
    mpz_class floor() const;
    mpz_class ceil() const;

    // Exact text: integer, exact finite decimal, or "num/den".
    std::string to_string() const;
    // Scientific notation with the given significant digits (not exact).
    std::string to_sci(int sig_digits = 3) const;

private:
    mpq_class v_;
};

inline const Rat& min(const Rat& a, const Rat& b) { return b < a ? b : a; }
inline const Rat& max(const Rat& a, const Rat& b) { return a < b ? b : a; }

}  // namespace fpv
