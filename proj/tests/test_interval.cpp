#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fpv/interval.hpp"

using namespace fpv;

namespace {

Rat rat_in(const Interval& iv, std::mt19937_64& rng) {
    // rational convex combination with denominator 2^20
    Rat t(mpz_class(rng() % (1 << 20)), mpz_class(1 << 20));
    return iv.lo + (iv.hi - iv.lo) * t;
}

Interval random_interval(std::mt19937_64& rng) {
    auto draw = [&]() {
        long num = static_cast<long>(rng() % 2001) - 1000;
        long den = static_cast<long>(rng() % 64) + 1;
        return Rat(mpz_class(num), mpz_class(den));
    };
    Rat a = draw(), b = draw();
    return a <= b ? Interval(a, b) : Interval(b, a);
}

}  // namespace

TEST_CASE("worked examples") {
    Interval m = iv_mul(Interval(Rat(1), Rat(2)), Interval(Rat(-3), Rat(4)));
    CHECK(m.lo == Rat(-6));
    CHECK(m.hi == Rat(8));

    CHECK_THROWS_AS(iv_div(Interval(Rat(1)), Interval(Rat(-1), Rat(1))), ContainmentFault);

    Interval p = iv_pow_int(Interval(Rat(-2), Rat(3)), 2);
    CHECK(p.lo == Rat(0));
    CHECK(p.hi == Rat(9));

    Interval f = iv_fabs(Interval(Rat(-5), Rat(2)));
    CHECK(f.lo == Rat(0));
    CHECK(f.hi == Rat(5));

    CHECK(Interval(Rat(2), Rat(3)).min_abs() == Rat(2));
    CHECK(Interval(Rat(-4), Rat(-2)).min_abs() == Rat(2));
    CHECK(Interval(Rat(-1), Rat(2)).min_abs() == Rat(0));
}

TEST_CASE("containment under fuzzed points") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 10000; ++i) {
        Interval a = random_interval(rng), b = random_interval(rng);
        Rat x = rat_in(a, rng), y = rat_in(b, rng);
        CHECK(iv_add(a, b).contains(x + y));
        CHECK(iv_sub(a, b).contains(x - y));
        CHECK(iv_mul(a, b).contains(x * y));
        CHECK(iv_neg(a).contains(-x));
        CHECK(iv_fabs(a).contains(x.abs()));
        if (!b.contains_zero()) CHECK(iv_div(a, b).contains(x / y));
        long e = static_cast<long>(rng() % 5);
        if (e > 0 || !a.contains_zero()) CHECK(iv_pow_int(a, e).contains(x.pow_int(e)));
    }
}

TEST_CASE("inclusion monotonicity") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 5000; ++i) {
        Interval a2 = random_interval(rng), b2 = random_interval(rng);
        // shrink to random sub-intervals
        Rat alo = rat_in(a2, rng), ahi = rat_in(a2, rng);
        Rat blo = rat_in(b2, rng), bhi = rat_in(b2, rng);
        Interval a = alo <= ahi ? Interval(alo, ahi) : Interval(ahi, alo);
        Interval b = blo <= bhi ? Interval(blo, bhi) : Interval(bhi, blo);
        CHECK(iv_add(a2, b2).contains(iv_add(a, b)));
        CHECK(iv_sub(a2, b2).contains(iv_sub(a, b)));
        CHECK(iv_mul(a2, b2).contains(iv_mul(a, b)));
        if (!b2.contains_zero()) CHECK(iv_div(a2, b2).contains(iv_div(a, b)));
    }
}

TEST_CASE("constructor rejects inverted endpoints") {
    CHECK_THROWS(Interval(Rat(2), Rat(1)));
}
