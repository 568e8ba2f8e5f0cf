#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "fpv/float_bits.hpp"
#include "fpv/fpcore.hpp"
#include "fpv/sampling.hpp"

using namespace fpv;

namespace {

FpCoreProgram parse_one(const std::string& text) {
    auto r = parse_fpcore(text);
    REQUIRE(r.programs.size() == 1);
    return r.programs[0];
}

}  // namespace

TEST_CASE("degenerate range yields a constant stream") {
    Precondition pre{{{"x", Interval(Rat(1), Rat(1))}}};
    auto pts = sample_inputs(pre, SamplePlan{100, 5});
    REQUIRE(pts.size() == 100);
    for (auto& p : pts) CHECK(p.at("x") == 1.0);
}

TEST_CASE("same seed reproduces the identical point list") {
    Precondition pre{{{"x", Interval(Rat(1), Rat(2))}, {"y", Interval(Rat(-1), Rat(1))}}};
    auto a = sample_inputs(pre, SamplePlan{512, 77});
    auto b = sample_inputs(pre, SamplePlan{512, 77});
    CHECK(a == b);
    auto c = sample_inputs(pre, SamplePlan{512, 78});
    CHECK(a != c);
}

TEST_CASE("ordinals are uniform across 16 bins (chi-squared)") {
    Precondition pre{{{"x", Interval(Rat(1), Rat(2))}}};
    const long n = 100000;
    auto pts = sample_inputs(pre, SamplePlan{n, 1234});
    std::int64_t lo = ordinal_of(1.0), hi = ordinal_of(2.0);
    long double span = static_cast<long double>(hi - lo) + 1;
    std::vector<long> bins(16, 0);
    for (auto& p : pts) {
        std::int64_t o = ordinal_of(p.at("x"));
        REQUIRE(o >= lo);
        REQUIRE(o <= hi);
        auto bin = static_cast<size_t>((o - lo) / span * 16);
        bins[std::min<size_t>(bin, 15)]++;
    }
    double expect = static_cast<double>(n) / 16.0;
    double chi2 = 0;
    for (long b : bins) chi2 += (b - expect) * (b - expect) / expect;
    // 15 degrees of freedom, p > 0.001
    CHECK(chi2 < 37.697);
}

TEST_CASE("empty float range is rejected") {
    // (2^-1074, 2^-1074 * 1.5) exclusive of any representable value is not
    // constructible with closed rational endpoints; use an interval strictly
    // between adjacent floats instead
    Rat lo = Rat::pow2(-1074) * Rat(mpz_class(5), mpz_class(4));
    Rat hi = Rat::pow2(-1074) * Rat(mpz_class(7), mpz_class(4));
    Precondition pre{{{"x", Interval(lo, hi)}}};
    CHECK_THROWS(sample_inputs(pre, SamplePlan{1, 1}));
}

TEST_CASE("constant program measures zero bits of error") {
    FpCoreProgram p = default_precondition(parse_one("(FPCore () 2.5)"), {});
    SampledError s = measure_error(p, SamplePlan{64, 3});
    CHECK(s.n_valid == 64);
    CHECK(s.avg_bits == 0.0);
    CHECK(s.max_abs == Rat(0));
}

TEST_CASE("benign cancellation region stays under one bit") {
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= 1 x 2) (- (+ x 1) x))");
    SampledError s = measure_error(p, SamplePlan{10000, 17});
    CHECK(s.n_valid == 10000);
    // fl(x+1) can round (a half-ulp tie), so the region is near-exact but not
    // exact: strictly below 1 bit on average
    CHECK(s.avg_bits < 1.0);
}

TEST_CASE("catastrophic cancellation measures many bits") {
    FpCoreProgram p =
        parse_one("(FPCore (x) :pre (<= 1 x 10000000000) (- (sqrt (+ x 1)) (sqrt x)))");
    SampledError s = measure_error(p, SamplePlan{4096, 21});
    CHECK(s.n_valid > 0);
    CHECK(s.avg_bits >= 10.0);
}

TEST_CASE("invalid points are excluded and counted") {
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= 0 x 1) (/ 1 x))");
    // x = 0 is representable inside the range; 1/0 is invalid there
    SampledError s = measure_error(p, SamplePlan{2048, 9});
    CHECK(s.n_total == 2048);
    CHECK(s.n_valid + s.n_inconclusive + s.n_invalid() == s.n_total);
    CHECK(s.n_valid > 0);
}

TEST_CASE("sampled result is bit-identical across runs") {
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= 1 x 2) (* x x))");
    SampledError a = measure_error(p, SamplePlan{4096, 123});
    SampledError b = measure_error(p, SamplePlan{4096, 123});
    CHECK(std::memcmp(&a.avg_bits, &b.avg_bits, sizeof(double)) == 0);
    CHECK(a.max_abs == b.max_abs);
    CHECK(a.n_valid == b.n_valid);
}

TEST_CASE("average bits is invariant under argument commutation") {
    FpCoreProgram p = parse_one("(FPCore (x y) :pre (and (<= 1 x 2) (<= 1 y 2)) (+ x y))");
    FpCoreProgram q = parse_one("(FPCore (x y) :pre (and (<= 1 x 2) (<= 1 y 2)) (+ y x))");
    SampledError a = measure_error(p, SamplePlan{4096, 55});
    SampledError b = measure_error(q, SamplePlan{4096, 55});
    CHECK(a.avg_bits == b.avg_bits);
    CHECK(a.max_abs == b.max_abs);
}

TEST_CASE("seed derivation separates benchmarks deterministically") {
    CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
}
