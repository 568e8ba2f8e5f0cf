#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mpfr.h>

#include <bit>
#include <cmath>

#include "fpv/eval_f64.hpp"
#include "fpv/eval_real.hpp"
#include "fpv/fpcore.hpp"

using namespace fpv;

namespace {

ExprPtr body_of(const std::string& text) {
    auto r = parse_fpcore(text);
    REQUIRE(r.programs.size() == 1);
    return r.programs[0].body;
}

}  // namespace

TEST_CASE("rational expressions evaluate exactly") {
    ExprPtr e = body_of("(FPCore (x) (+ x 1))");
    RealEvalResult r = eval_real(e, {{"x", Rat(mpz_class(1), mpz_class(3))}}, 64);
    REQUIRE(r.status == RealEvalStatus::Exact);
    CHECK(r.enclosure->is_point());
    CHECK(r.enclosure->lo == Rat(mpz_class(4), mpz_class(3)));
}

TEST_CASE("sqrt(2) enclosure is tight and contains the 512-bit reference") {
    ExprPtr e = body_of("(FPCore (x) (sqrt x))");
    RealEvalResult r = eval_real(e, {{"x", Rat(2)}}, 64);
    REQUIRE(r.status == RealEvalStatus::Exact);
    CHECK(r.enclosure->width() < Rat::pow2(-64) * Rat(2));

    mpfr_t t;
    mpfr_init2(t, 512);
    mpfr_sqrt_ui(t, 2, MPFR_RNDN);
    mpq_class q;
    mpfr_get_q(q.get_mpq_t(), t);
    mpfr_clear(t);
    CHECK(r.enclosure->lo <= Rat(q));
    CHECK(r.enclosure->hi >= Rat(q) - Rat::pow2(-500));
}

TEST_CASE("division by exact zero is a domain violation") {
    ExprPtr e = body_of("(FPCore (x) (/ 1 (- x 1)))");
    RealEvalResult r = eval_real(e, {{"x", Rat(1)}}, 64);
    CHECK(r.status == RealEvalStatus::DomainViolation);
}

TEST_CASE("let evaluates with parallel bindings") {
    ExprPtr e = body_of("(FPCore (x) (let ((a (+ x 1)) (b (* x 2))) (* a b)))");
    RealEvalResult r = eval_real(e, {{"x", Rat(3)}}, 64);
    REQUIRE(r.status == RealEvalStatus::Exact);
    CHECK(r.enclosure->lo == Rat(24));
}

TEST_CASE("integer pow stays exact; fractional pow uses exp/log") {
    ExprPtr e = body_of("(FPCore (x) (pow x 3))");
    RealEvalResult r = eval_real(e, {{"x", Rat(mpz_class(1), mpz_class(2))}}, 64);
    REQUIRE(r.status == RealEvalStatus::Exact);
    CHECK(r.enclosure->lo == Rat(mpz_class(1), mpz_class(8)));

    ExprPtr f = body_of("(FPCore (x) (pow x 0.5))");
    RealEvalResult rf = eval_real(f, {{"x", Rat(4)}}, 64);
    REQUIRE(rf.status == RealEvalStatus::Exact);
    CHECK(rf.enclosure->contains(Rat(2)));
    RealEvalResult neg = eval_real(f, {{"x", Rat(-4)}}, 64);
    CHECK(neg.status == RealEvalStatus::DomainViolation);
}

TEST_CASE("binary64 evaluation: canonical bit patterns") {
    ExprPtr e = body_of("(FPCore () (+ 0.1 0.2))");
    F64Result r = eval_f64(e, {});
    CHECK(std::bit_cast<std::uint64_t>(r.value) == 0x3FD3333333333334ull);
    CHECK(r.valid);
}

TEST_CASE("division by exact float zero is invalid") {
    ExprPtr e = body_of("(FPCore (x) (/ 1 (- x 1)))");
    F64Result r = eval_f64(e, {{"x", 1.0}});
    CHECK(std::isinf(r.value));
    CHECK(!r.valid);
}

TEST_CASE("x - x is exactly zero") {
    ExprPtr e = body_of("(FPCore (x) (- x x))");
    for (double v : {1.0, 3.141592653589793, 1e300, 5e-324}) {
        F64Result r = eval_f64(e, {{"x", v}});
        CHECK(r.value == 0.0);
        CHECK(r.valid);
    }
}

TEST_CASE("if takes the float branch") {
    ExprPtr e = body_of("(FPCore (x) (if (< x 1) (+ x 1) (- x 1)))");
    CHECK(eval_f64(e, {{"x", 0.5}}).value == 1.5);
    CHECK(eval_f64(e, {{"x", 2.0}}).value == 1.0);
}

TEST_CASE("rounded oracle agrees with correctly rounded library calls") {
    ExprPtr e = body_of("(FPCore (x) (sqrt x))");
    for (double v : {2.0, 3.0, 10.5, 12345.6789}) {
        RoundedReal r = eval_real_rounded(e, {{"x", Rat::of_double(v)}});
        REQUIRE(r.value.has_value());
        CHECK(*r.value == std::sqrt(v));  // IEEE sqrt is correctly rounded
    }
    ExprPtr pole = body_of("(FPCore (x) (/ 1 (- x 1)))");
    RoundedReal r = eval_real_rounded(pole, {{"x", Rat(1)}});
    CHECK(!r.value.has_value());
    CHECK(r.domain_violation);
}

TEST_CASE("rounded oracle resolves conditionals on exact comparisons") {
    ExprPtr e = body_of("(FPCore (x) (if (< x 1) (+ x 1) (- x 1)))");
    RoundedReal lo = eval_real_rounded(e, {{"x", Rat(mpz_class(1), mpz_class(2))}});
    CHECK(*lo.value == 1.5);
    RoundedReal hi = eval_real_rounded(e, {{"x", Rat(2)}});
    CHECK(*hi.value == 1.0);
}
