#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "fpv/analysis.hpp"
#include "fpv/eval_f64.hpp"
#include "fpv/eval_real.hpp"
#include "fpv/fpcore.hpp"
#include "fpv/sampling.hpp"

using namespace fpv;

namespace {

FpCoreProgram parse_one(const std::string& text) {
    auto r = parse_fpcore(text);
    REQUIRE(r.programs.size() == 1);
    return r.programs[0];
}

std::vector<FpCoreProgram> load_fixture(const std::string& name) {
    std::ifstream in(std::string(FPV_FIXTURE_DIR) + "/" + name);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_fpcore(ss.str()).programs;
}

}  // namespace

TEST_CASE("input rule: single variable") {
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= 1 x 2) x)");
    AnalysisParams params;
    AnalysisOutcome o = analyze_ia(p, params);
    REQUIRE(o.is_bound());
    // e = u * maxAbs([1,2]) + d, exactly
    CHECK(o.bound->abs_err == Rat::pow2(-53) * Rat(2) + Rat::pow2(-1075));
    CHECK(o.range->lo == Rat(1));
    CHECK(o.range->hi == Rat(2));
}

TEST_CASE("add rule without input rounding") {
    FpCoreProgram p = parse_one("(FPCore (x y) :pre (and (<= 1 x 2) (<= 1 y 2)) (+ x y))");
    AnalysisParams params;
    params.inputs_rounded = false;
    AnalysisOutcome o = analyze_ia(p, params);
    REQUIRE(o.is_bound());
    CHECK(o.bound->abs_err == Rat::pow2(-53) * Rat(4) + Rat::pow2(-1075));
}

TEST_CASE("constant rule uses the exact rounding gap") {
    FpCoreProgram p = parse_one("(FPCore () 0.1)");
    FpCoreProgram ranged = default_precondition(p, {});
    AnalysisOutcome o = analyze_ia(ranged, AnalysisParams{});
    REQUIRE(o.is_bound());
    Rat gap = (Rat::of_double(0.1) - Rat(mpz_class(1), mpz_class(10))).abs();
    CHECK(o.bound->abs_err == gap);
    CHECK(gap.sign() > 0);

    FpCoreProgram exact = default_precondition(parse_one("(FPCore () 2.5)"), {});
    AnalysisOutcome oe = analyze_ia(exact, AnalysisParams{});
    REQUIRE(oe.is_bound());
    CHECK(oe.bound->abs_err == Rat(0));
}

TEST_CASE("alarm taxonomy with offending paths") {
    AnalysisParams params;
    {
        AnalysisOutcome o = analyze_ia(parse_one("(FPCore (x) :pre (<= 0 x 2) (/ 1 (- x 1)))"),
                                       params);
        REQUIRE(o.is_alarm());
        CHECK(o.alarm->kind == AlarmKind::Div0);
        CHECK(o.alarm->path.empty());  // the division is the root
    }
    {
        AnalysisOutcome o = analyze_ia(parse_one("(FPCore (x) :pre (<= -1 x 1) (sqrt x))"),
                                       params);
        REQUIRE(o.is_alarm());
        CHECK(o.alarm->kind == AlarmKind::SqrtNeg);
    }
    {
        AnalysisOutcome o = analyze_ia(parse_one("(FPCore (x) :pre (<= 1 x 2) (pow x 0.5))"),
                                       params);
        REQUIRE(o.is_alarm());
        CHECK(o.alarm->kind == AlarmKind::NonIntPow);
    }
    {
        AnalysisOutcome o = analyze_ia(
            parse_one("(FPCore (x) :pre (<= 0 x 2) (+ 1 (if (< x 1) x (- x 1))))"), params);
        REQUIRE(o.is_alarm());
        CHECK(o.alarm->kind == AlarmKind::CondUnsupported);
        CHECK(o.alarm->path == ExprPath{1});
    }
    {
        AnalysisOutcome o = analyze_ia(parse_one("(FPCore (x) :pre (<= -1 x 1) (cbrt x))"),
                                       params);
        REQUIRE(o.is_alarm());
        CHECK(o.alarm->kind == AlarmKind::CbrtSingular);
    }
    {
        AnalysisOutcome o = analyze_ia(parse_one("(FPCore (x) :pre (<= 0 x 1) (tan x))"),
                                       params);
        REQUIRE(o.is_alarm());
        CHECK(o.alarm->kind == AlarmKind::FnUnsupported);
    }
    {
        AnalysisOutcome o = analyze_ia(parse_one("(FPCore (x) :pre (<= 0.5 x 2) (log x))"),
                                       params);
        REQUIRE(o.is_bound());
        AnalysisOutcome bad = analyze_ia(parse_one("(FPCore (x) :pre (<= 0 x 2) (log x))"),
                                         params);
        REQUIRE(bad.is_alarm());
        CHECK(bad.alarm->kind == AlarmKind::LogDomain);
    }
}

TEST_CASE("integer pow expands to repeated multiplication") {
    AnalysisParams params;
    FpCoreProgram via_pow = parse_one("(FPCore (x) :pre (<= 1 x 2) (pow x 3))");
    FpCoreProgram via_mul = parse_one("(FPCore (x) :pre (<= 1 x 2) (* (* x x) x))");
    AnalysisOutcome a = analyze_ia(via_pow, params);
    AnalysisOutcome b = analyze_ia(via_mul, params);
    REQUIRE(a.is_bound());
    REQUIRE(b.is_bound());
    CHECK(a.bound->abs_err == b.bound->abs_err);

    FpCoreProgram negative = parse_one("(FPCore (x) :pre (<= 1 x 2) (pow x -2))");
    AnalysisOutcome n = analyze_ia(negative, params);
    REQUIRE(n.is_bound());

    FpCoreProgram zero_base = parse_one("(FPCore (x) :pre (<= -1 x 1) (pow x -2))");
    AnalysisOutcome z = analyze_ia(zero_base, params);
    REQUIRE(z.is_alarm());
    CHECK(z.alarm->kind == AlarmKind::Div0);
}

TEST_CASE("subdivision tightens the dependency problem strictly") {
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= 0 x 1) (- (* x x) x))");
    AnalysisParams params;
    AnalysisOutcome ia = analyze_ia(p, params);
    AnalysisOutcome sub = analyze_subdiv(p, params);
    REQUIRE(ia.is_bound());
    REQUIRE(sub.is_bound());
    CHECK(sub.bound->abs_err < ia.bound->abs_err);
    CHECK(ia.range->contains(*sub.range));
}

TEST_CASE("subdivision alarms if any box alarms") {
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= 0 x 2) (/ 1 (- x 1)))");
    AnalysisOutcome o = analyze_subdiv(p, AnalysisParams{});
    REQUIRE(o.is_alarm());
    CHECK(o.alarm->kind == AlarmKind::Div0);
}

TEST_CASE("subdivision never exceeds plain interval analysis") {
    for (auto& file : {"calibration.fpcore", "crafted.fpcore"}) {
        for (auto& p : load_fixture(file)) {
            AnalysisParams params;
            AnalysisOutcome ia = analyze_ia(p, params);
            AnalysisOutcome sub = analyze_subdiv(p, params);
            if (!ia.is_bound() || !sub.is_bound()) continue;
            CAPTURE(p.name);
            CHECK(sub.bound->abs_err <= ia.bound->abs_err);
        }
    }
}

TEST_CASE("box budget coarsens the smallest ranges first") {
    std::vector<Rat> widths{Rat(100), Rat(10), Rat(1)};
    auto counts = subdivision_counts(widths, 8, 64);
    CHECK(counts[0] == 8);
    CHECK(counts[1] * counts[2] * counts[0] <= 64);
    CHECK(counts[0] >= counts[1]);
    CHECK(counts[1] >= counts[2]);
    auto tiny = subdivision_counts(widths, 8, 1);
    CHECK(tiny == std::vector<int>{1, 1, 1});
    // six variables at k=8 must fit 4096 boxes
    std::vector<Rat> six(6, Rat(1));
    auto c6 = subdivision_counts(six, 8, 4096);
    long prod = 1;
    for (int c : c6) prod *= c;
    CHECK(prod <= 4096);
    CHECK(prod > 2048);
}

TEST_CASE("portfolio is the pointwise minimum of its members") {
    for (auto& p : load_fixture("calibration.fpcore")) {
        AnalysisParams params;
        AnalysisOutcome ia = analyze_ia(p, params);
        AnalysisOutcome sub = analyze_subdiv(p, params);
        AnalysisOutcome port = analyze_portfolio(p, params);
        CAPTURE(p.name);
        if (ia.is_bound() || sub.is_bound()) {
            REQUIRE(port.is_bound());
            Rat expect = ia.is_bound() && sub.is_bound()
                             ? min(ia.bound->abs_err, sub.bound->abs_err)
                             : (ia.is_bound() ? ia.bound->abs_err : sub.bound->abs_err);
            CHECK(port.bound->abs_err == expect);
        }
    }
}

TEST_CASE("portfolio prefers any bound over an alarm") {
    // whole-range analysis cannot keep the error-widened denominator away
    // from zero, but each subdivision box can
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= 1e-16 x 2) (/ 1 x))");
    AnalysisParams params;
    AnalysisOutcome ia = analyze_ia(p, params);
    AnalysisOutcome sub = analyze_subdiv(p, params);
    REQUIRE(ia.is_alarm());
    CHECK(ia.alarm->kind == AlarmKind::Div0);
    REQUIRE(sub.is_bound());
    AnalysisOutcome port = analyze_portfolio(p, params);
    REQUIRE(port.is_bound());
    CHECK(port.bound->abs_err == sub.bound->abs_err);
}

TEST_CASE("doubling the unit roundoff never tightens the bound") {
    std::mt19937_64 rng(31);
    auto programs = load_fixture("calibration.fpcore");
    for (auto& p : programs) {
        AnalysisParams a;
        AnalysisParams b;
        b.unit_roundoff = a.unit_roundoff * Rat(2);
        AnalysisOutcome oa = analyze_ia(p, a);
        AnalysisOutcome ob = analyze_ia(p, b);
        if (!oa.is_bound() || !ob.is_bound()) continue;
        CAPTURE(p.name);
        CHECK(oa.bound->abs_err <= ob.bound->abs_err);
    }
    // fuzzed random scalings on one fixture
    FpCoreProgram p = parse_one("(FPCore (x y) :pre (and (<= 1 x 2) (<= -1 y 3)) "
                                "(* (+ x y) (- x y)))");
    for (int i = 0; i < 50; ++i) {
        AnalysisParams a;
        long k = static_cast<long>(rng() % 10) + 1;
        AnalysisParams b;
        b.unit_roundoff = a.unit_roundoff * Rat::pow2(k);
        AnalysisOutcome oa = analyze_ia(p, a);
        AnalysisOutcome ob = analyze_ia(p, b);
        REQUIRE(oa.is_bound());
        REQUIRE(ob.is_bound());
        CHECK(oa.bound->abs_err <= ob.bound->abs_err);
    }
}

TEST_CASE("soundness: sampled error never exceeds the proven bound") {
    // trimmed fuzz here; the acceptance suite runs the full 10^5-sample check
    for (auto& file : {"calibration.fpcore", "crafted.fpcore"}) {
        for (auto& p : load_fixture(file)) {
            AnalysisParams params;
            AnalysisOutcome port = analyze_portfolio(p, params);
            if (!port.is_bound()) continue;
            SamplePlan plan{400, derive_seed(9, p.name)};
            SampledError s = measure_error(p, plan);
            CAPTURE(p.name);
            CHECK(s.n_valid > 0);
            CHECK(s.max_abs <= port.bound->abs_err);
        }
    }
}

TEST_CASE("analysis times out cooperatively") {
    // a deadline already expired forces an immediate timeout
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= 0 x 1) (* x x))");
    AnalysisParams params;
    Deadline d = Deadline::after_ms(1);
    while (!d.expired()) {}
    AnalysisOutcome o = analyze_subdiv(p, params, d);
    CHECK(o.is_timeout());
    // every member timing out makes the portfolio a timeout
    AnalysisOutcome port =
        analyze_portfolio(p, params, {AnalysisMode::IA, AnalysisMode::Subdiv}, d);
    CHECK(port.is_timeout());
}

TEST_CASE("range_eval produces sound ranges for guards") {
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= 1 x 2) (+ x 1))");
    Interval r = range_eval(p.body, p.precondition->ranges, 128);
    CHECK(r.lo == Rat(2));
    CHECK(r.hi == Rat(3));
    CHECK_THROWS_AS(range_eval(parse_one("(FPCore (x) :pre (<= -1 x 1) (/ 1 x))").body,
                               Precondition{{{"x", Interval(Rat(-1), Rat(1))}}}.ranges, 128),
                    ContainmentFault);
}
