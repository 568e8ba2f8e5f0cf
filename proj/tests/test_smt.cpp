#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "fpv/fpcore.hpp"
#include "fpv/smt.hpp"

using namespace fpv;

namespace {

FpCoreProgram parse_one(const std::string& text) {
    auto r = parse_fpcore(text);
    REQUIRE(r.programs.size() == 1);
    return r.programs[0];
}

}  // namespace

TEST_CASE("script format contract") {
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= 1 x 2) (+ x 1))");
    std::string script = emit_smt_query(p, Interval(Rat(2), Rat(3)), TightenSide::Hi,
                                        Rat(mpz_class(7), mpz_class(2)));
    CHECK(script.rfind("(set-logic QF_NRA)", 0) == 0);
    CHECK(script.find("(declare-const x Real)") != std::string::npos);
    CHECK(script.find("(assert (and (>= x 1.0) (<= x 2.0)))") != std::string::npos);
    CHECK(script.find("(check-sat)") != std::string::npos);
    // hi side asserts the expression exceeds the probe
    CHECK(script.find("(assert (> (+ x 1.0) (/ 7.0 2.0)))") != std::string::npos);
}

TEST_CASE("lo side flips the comparison") {
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= 1 x 2) (+ x 1))");
    std::string script =
        emit_smt_query(p, Interval(Rat(2), Rat(3)), TightenSide::Lo, Rat(mpz_class(5), mpz_class(2)));
    CHECK(script.find("(assert (< (+ x 1.0) (/ 5.0 2.0)))") != std::string::npos);
}

TEST_CASE("sqrt is encoded exactly through an auxiliary variable") {
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= 1 x 2) (sqrt x))");
    std::string script = emit_smt_query(p, Interval(Rat(1), Rat(2)), TightenSide::Hi, Rat(2));
    CHECK(script.find("(declare-const _sqrt0 Real)") != std::string::npos);
    CHECK(script.find("(= (* _sqrt0 _sqrt0) x)") != std::string::npos);
    CHECK(script.find("(>= _sqrt0 0.0)") != std::string::npos);
}

TEST_CASE("transcendental subterms relax to interval-bounded variables") {
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= 0 x 1) (exp x))");
    std::string script = emit_smt_query(p, Interval(Rat(1), Rat(3)), TightenSide::Hi, Rat(3));
    CHECK(script.find("(declare-const _t0 Real)") != std::string::npos);
    CHECK(script.find("(>= _t0 ") != std::string::npos);
    CHECK(script.find("(<= _t0 ") != std::string::npos);
    CHECK(script.find("exp") == std::string::npos);  // no uninterpreted calls survive
}

TEST_CASE("let bindings become defined constants") {
    FpCoreProgram p =
        parse_one("(FPCore (x) :pre (<= 1 x 2) (let ((a (+ x 1))) (* a a)))");
    std::string script = emit_smt_query(p, Interval(Rat(4), Rat(9)), TightenSide::Hi, Rat(10));
    CHECK(script.find("(declare-const _let0 Real)") != std::string::npos);
    CHECK(script.find("(= _let0 (+ x 1.0))") != std::string::npos);
    CHECK(script.find("(* _let0 _let0)") != std::string::npos);
}

TEST_CASE("negative rationals render with the unary minus form") {
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= -2 x -1) (* x 0.5))");
    std::string script = emit_smt_query(p, Interval(Rat(-2), Rat(0)), TightenSide::Lo, Rat(-3));
    CHECK(script.find("(- 2.0)") != std::string::npos);
    CHECK(script.find("(- 3.0)") != std::string::npos);
}

TEST_CASE("solver round trip when z3 is installed") {
    // purely optional: the pipeline never requires an external solver
    if (std::system("command -v z3 >/dev/null 2>&1") != 0) return;
    FpCoreProgram p = parse_one("(FPCore (x) :pre (<= 1 x 2) (+ x 1))");
    auto unsat = run_smt_solver(
        "z3", emit_smt_query(p, Interval(Rat(2), Rat(3)), TightenSide::Hi,
                             Rat(mpz_class(7), mpz_class(2))));
    REQUIRE(unsat.has_value());
    CHECK(*unsat == SolverVerdict::Unsat);
    auto sat = run_smt_solver(
        "z3", emit_smt_query(p, Interval(Rat(2), Rat(3)), TightenSide::Hi,
                             Rat(mpz_class(5), mpz_class(2))));
    REQUIRE(sat.has_value());
    CHECK(*sat == SolverVerdict::Sat);
}
