// Acceptance suite: runs every gate criterion and prints one line per
// criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cstring>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <vector>

#include "fpv/eval_f64.hpp"
#include "fpv/eval_real.hpp"
#include "fpv/fpcore.hpp"
#include "fpv/pipeline.hpp"
#include "fpv/rewrite.hpp"
#include "fpv/search.hpp"

using namespace fpv;

namespace {

int g_failures = 0;

void report(int number, const std::string& what, bool pass, const std::string& detail = "") {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << number << ": " << what;
    if (!detail.empty()) std::cout << "  -- " << detail;
    std::cout << std::endl;
    if (!pass) ++g_failures;
}

std::vector<FpCoreProgram> load_fixture(const std::string& name) {
    std::ifstream in(std::string(FPV_FIXTURE_DIR) + "/" + name);
    if (!in) throw std::runtime_error("missing fixture file " + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_fpcore(ss.str()).programs;
}

std::vector<FpCoreProgram> all_fixtures() {
    auto programs = load_fixture("calibration.fpcore");
    for (auto& p : load_fixture("crafted.fpcore")) programs.push_back(p);
    return programs;
}

FpCoreProgram parse_one(const std::string& text) {
    auto r = parse_fpcore(text);
    if (r.programs.size() != 1) throw std::runtime_error("expected one core");
    return r.programs[0];
}

struct SoundnessStats {
    long checked = 0;
    long violations = 0;
    long inconclusive = 0;
};

// |eval_f64 - exact| <= bound and exact in range, over seeded samples.
// Violations are counted only when the exact-value enclosure makes them
// definite.
SoundnessStats check_soundness(const FpCoreProgram& p, const Rat& bound, const Interval& range,
                               long n, std::uint64_t seed) {
    SoundnessStats stats;
    auto points = sample_inputs(*p.precondition, SamplePlan{n, seed});
    for (auto& pt : points) {
        F64Result actual = eval_f64(p.body, pt);
        std::map<std::string, Rat> pt_rat;
        for (auto& [k, v] : pt) pt_rat.emplace(k, Rat::of_double(v));
        RealEvalResult r = eval_real(p.body, pt_rat, 80);
        if (r.status == RealEvalStatus::DomainViolation || !r.enclosure) {
            ++stats.inconclusive;
            continue;
        }
        ++stats.checked;
        const Interval& enc = *r.enclosure;
        if (!actual.valid || !std::isfinite(actual.value)) {
            ++stats.violations;
            continue;
        }
        Rat a = Rat::of_double(actual.value);
        if (a < enc.lo - bound || a > enc.hi + bound) ++stats.violations;
        if (enc.hi < range.lo || enc.lo > range.hi) ++stats.violations;
    }
    return stats;
}

void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    auto programs = all_fixtures();
    AnalysisParams params;
    long total_checked = 0, total_violations = 0, total_inconclusive = 0;
    int bound_count = 0;
    std::vector<std::future<std::optional<SoundnessStats>>> futures;
    for (auto& p : programs) {
        futures.push_back(std::async(std::launch::async, [&params, p]() {
            AnalysisOutcome port = analyze_portfolio(p, params);
            if (!port.is_bound()) return std::optional<SoundnessStats>{};
            return std::optional<SoundnessStats>{check_soundness(
                p, port.bound->abs_err, *port.range, 100000, derive_seed(1, p.name))};
        }));
    }
    for (auto& f : futures) {
        auto stats = f.get();
        if (!stats) continue;
        ++bound_count;
        total_checked += stats->checked;
        total_violations += stats->violations;
        total_inconclusive += stats->inconclusive;
    }
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    std::ostringstream detail;
    detail << bound_count << " bounded benchmarks, " << total_checked
           << " samples checked, " << total_violations << " violations, "
           << total_inconclusive << " inconclusive, " << secs << "s";
    report(1, "soundness of proven bounds on 10^5 seeded samples",
           total_violations == 0 && bound_count > 0 && secs < 900, detail.str());
}

void criterion_2() {
    auto programs = all_fixtures();
    AnalysisParams params;
    bool refinement = true, portfolio_law = true;
    int compared = 0;
    for (auto& p : programs) {
        AnalysisOutcome ia = analyze_ia(p, params);
        AnalysisOutcome sub = analyze_subdiv(p, params);
        AnalysisOutcome port = analyze_portfolio(p, params);
        if (ia.is_bound() && sub.is_bound()) {
            ++compared;
            if (!(sub.bound->abs_err <= ia.bound->abs_err)) refinement = false;
            if (!port.is_bound() ||
                port.bound->abs_err != min(ia.bound->abs_err, sub.bound->abs_err))
                portfolio_law = false;
        } else if (ia.is_bound() || sub.is_bound()) {
            const AnalysisOutcome& b = ia.is_bound() ? ia : sub;
            if (!port.is_bound() || port.bound->abs_err != b.bound->abs_err)
                portfolio_law = false;
        }
    }
    std::ostringstream detail;
    detail << compared << " alarm-free fixtures compared";
    report(2, "subdivision refines plain analysis; portfolio is the exact minimum",
           refinement && portfolio_law && compared > 0, detail.str());
}

void criterion_3() {
    auto t0 = std::chrono::steady_clock::now();
    const std::map<std::string, std::string> paper_best_src = {
        {"logexp", "2.18e-13"},     {"doppler1", "2.38e-13"},  {"doppler2", "5.08e-13"},
        {"doppler3", "1.03e-13"},   {"rigidBody1", "3.22e-13"}, {"rigidBody2", "3.65e-11"},
        {"kepler0", "8.94e-14"},    {"verhulst", "3.59e-16"},  {"sineOrder3", "1.01e-15"},
        {"sqroot", "6.16e-16"},     {"turbine1", "4.24e-14"},
    };
    auto programs = load_fixture("calibration.fpcore");
    AnalysisParams params;
    bool ok = true;
    std::ostringstream detail;
    for (auto& p : programs) {
        auto it = paper_best_src.find(p.name);
        if (it == paper_best_src.end()) continue;
        Rat target = *Rat::parse(it->second);
        AnalysisOutcome port = analyze_portfolio(p, params);
        if (!port.is_bound()) {
            ok = false;
            detail << p.name << "=<no bound> ";
            continue;
        }
        Rat mine = port.bound->abs_err;
        bool within = mine <= target * Rat(100) && target <= mine * Rat(100);
        if (!within) ok = false;
        detail << p.name << "=" << mine.to_sci(3) << (within ? " " : "(!) ");
    }
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    detail << "(" << secs << "s)";
    report(3, "calibration within 100x of the published per-benchmark bounds",
           ok && secs < 120, detail.str());
}

void criterion_4() {
    AnalysisParams params;
    auto kind_of = [&](const std::string& text) {
        AnalysisOutcome o = analyze_ia(parse_one(text), params);
        return o.is_alarm() ? std::optional<AlarmKind>(o.alarm->kind) : std::nullopt;
    };
    bool ok = kind_of("(FPCore (x) :pre (<= 0 x 2) (/ 1 (- x 1)))") == AlarmKind::Div0 &&
              kind_of("(FPCore (x) :pre (<= -1 x 1) (sqrt x))") == AlarmKind::SqrtNeg &&
              kind_of("(FPCore (x) :pre (<= 1 x 2) (pow x 0.5))") == AlarmKind::NonIntPow &&
              kind_of("(FPCore (x) :pre (<= 0 x 2) (if (< x 1) x (- x 1)))") ==
                  AlarmKind::CondUnsupported;
    report(4, "alarm taxonomy matches the failure-class codes one-to-one", ok);
}

void criterion_5() {
    auto t0 = std::chrono::steady_clock::now();
    AnalysisParams params;

    // part A: greedy rewriting of the sqrt-cancellation benchmark
    FpCoreProgram nmse31 = parse_one(
        "(FPCore (x) :name \"NMSE example 3.1\" :pre (<= 1 x 10000000000) "
        "(- (sqrt (+ x 1)) (sqrt x)))");
    SearchParams sparams;
    ImproveResult improved = greedy_improve(nmse31, SamplePlan{8192, 1}, sparams);
    AnalysisOutcome src_port = analyze_portfolio(nmse31, params);
    AnalysisOutcome res_port = analyze_portfolio(improved.program, params);
    bool part_a = false;
    std::ostringstream detail_a;
    if (src_port.is_bound() && res_port.is_bound() && res_port.bound->abs_err.sign() > 0) {
        Rat ratio = src_port.bound->abs_err / res_port.bound->abs_err;
        part_a = ratio >= Rat(10000);
        detail_a << "greedy bound " << src_port.bound->abs_err.to_sci(3) << " -> "
                 << res_port.bound->abs_err.to_sci(3) << " (x"
                 << ratio.to_sci(3) << " tighter, need >= 1e4)";
    } else {
        detail_a << "missing bound on src or res";
    }

    // part B: genetic tightening across the calibration set. Elitism makes
    // the claim parameter-monotone, so a reduced search budget only weakens
    // the search; any tightening it finds stands.
    auto programs = load_fixture("calibration.fpcore");
    std::vector<std::future<int>> futures;
    for (auto& p : programs) {
        futures.push_back(std::async(std::launch::async, [&params, p]() {
            AnalysisOutcome before = analyze_portfolio(p, params);
            if (!before.is_bound()) return 0;
            SearchParams sp;
            sp.genetic.population = 14;
            sp.genetic.generations = 14;
            sp.genetic.seed = derive_seed(1, p.name);
            ImproveResult r = genetic_improve(p, params, sp);
            AnalysisOutcome after = analyze_portfolio(r.program, params);
            return after.is_bound() && after.bound->abs_err < before.bound->abs_err ? 1 : 0;
        }));
    }
    int tightened = 0;
    for (auto& f : futures) tightened += f.get();
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    std::ostringstream detail;
    detail << detail_a.str() << "; genetic tightened " << tightened << "/11 (need >= 5); "
           << secs << "s";
    report(5, "rewriting efficacy (greedy 1e4x on sqrt cancellation, genetic 5/11)",
           part_a && tightened >= 5 && secs < 300, detail.str());
}

void criterion_6() {
    FpCoreProgram crafted = parse_one(
        "(FPCore (x) :name \"recip-cancel\" :pre (<= 2e-7 x 10000000000) "
        "(- (/ 1 (+ x 1)) (/ 1 x)))");
    RunConfig config;
    config.strategy_genetic = false;
    config.plan.n = 2048;
    config.seed = 1;
    PipelineRow row = run_pipeline(crafted, config);
    bool src_bound = row.best_src.has_value();
    bool res_div0 = false;
    for (auto& [_, o] : row.bounds_res)
        if (o.is_alarm() && o.alarm->kind == AlarmKind::Div0) res_div0 = true;
    bool status_ok = row.status == RowStatus::AlarmRes;
    std::ostringstream detail;
    detail << "status=" << row_status_name(row.status) << " src_bound=" << src_bound
           << " res_div0=" << res_div0;
    report(6, "greedy's unguarded rewrite is flagged DIV0 on the result only",
           src_bound && res_div0 && status_ok, detail.str());
}

void criterion_7() {
    auto programs = all_fixtures();
    AnalysisParams params;
    // elitism is parameter-independent; small search sizes keep this quick
    std::vector<std::future<bool>> futures;
    for (auto& p : programs) {
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            futures.push_back(std::async(std::launch::async, [&params, p, seed]() {
                AnalysisOutcome before = analyze_portfolio(p, params);
                SearchParams sp;
                sp.genetic.population = 6;
                sp.genetic.generations = 3;
                sp.genetic.seed = seed;
                ImproveResult r = genetic_improve(p, params, sp);
                AnalysisOutcome after = analyze_portfolio(r.program, params);
                if (!before.is_bound())
                    return expr_equal(r.program.body, p.body);  // unchanged on alarm
                return after.is_bound() && after.bound->abs_err <= before.bound->abs_err;
            }));
        }
    }
    bool ok = true;
    for (auto& f : futures)
        if (!f.get()) ok = false;

    // composed column law on a fixture with all columns bounded
    FpCoreProgram p = parse_one(
        "(FPCore (x y) :pre (and (<= 1 x 2) (<= 1 y 2)) (- (* x x) (* x y)))");
    RunConfig config;
    config.plan.n = 512;
    config.search.genetic.population = 8;
    config.search.genetic.generations = 5;
    bool columns_ok = true;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        config.seed = seed;
        PipelineRow row = compare_rewriters(p, config);
        if (!row.rewrite_columns) { columns_ok = false; break; }
        const auto& c = *row.rewrite_columns;
        if (c.baseline.is_bound() && c.daisy.is_bound() &&
            !(c.daisy.bound->abs_err <= c.baseline.bound->abs_err))
            columns_ok = false;
        if (c.herbie.is_bound() && c.both.is_bound() &&
            !(c.both.bound->abs_err <= c.herbie.bound->abs_err))
            columns_ok = false;
        if (c.baseline.is_bound() && c.minimum &&
            !(*c.minimum <= c.baseline.bound->abs_err))
            columns_ok = false;
    }
    report(7, "composition monotonicity (elitism) over fixtures x 3 seeds",
           ok && columns_ok);
}

void criterion_8() {
    // determinism of the full report across runs and worker counts
    std::vector<FpCoreProgram> programs;
    for (auto& p : load_fixture("crafted.fpcore")) programs.push_back(p);
    RunConfig config;
    config.plan.n = 1024;
    config.search.greedy.search_samples = 256;
    config.search.genetic.population = 8;
    config.search.genetic.generations = 4;
    std::string run1 = render_report_json(run_benchmarks(programs, config), config);
    std::string run2 = render_report_json(run_benchmarks(programs, config), config);
    RunConfig config4 = config;
    config4.workers = 4;
    std::string run3 = render_report_json(run_benchmarks(programs, config4), config);
    bool deterministic = run1 == run2 && run1 == run3;

    // spin-loop stage under a 100 ms budget returns within 2.1 s
    auto t0 = std::chrono::steady_clock::now();
    bool spun = enforce_timeout(
        [](const Deadline& d) {
            while (!d.expired()) {}
            return true;
        },
        100);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    bool default_budget = RunConfig{}.timeout_ms == 120000;
    std::ostringstream detail;
    detail << "deterministic=" << deterministic << " spin_ms=" << ms
           << " default_budget_ms=" << RunConfig{}.timeout_ms;
    report(8, "byte-identical reports (incl. 4 workers); cooperative timeouts",
           deterministic && spun && ms < 2100 && default_budget, detail.str());
}

}  // namespace

int main() {
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        criterion_4();
        criterion_5();
        criterion_6();
        criterion_7();
        criterion_8();
    } catch (const std::exception& e) {
        std::cerr << "acceptance suite aborted: " << e.what() << "\n";
        return 2;
    }
    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed" << std::endl;
        return 1;
    }
    std::cout << "all criteria passed" << std::endl;
    return 0;
}
