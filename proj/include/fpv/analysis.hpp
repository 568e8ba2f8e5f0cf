#pragma once

#include <chrono>
#include <optional>
#include <set>
#include <string>

#include "fpv/expr.hpp"
#include "fpv/interval.hpp"

namespace fpv {

enum class AlarmKind {
    Div0,
    SqrtNeg,
    LogDomain,
    NonIntPow,
    CondUnsupported,
    CbrtSingular,
    FnUnsupported,
};

// Canonical enum names (used in JSON).
const char* alarm_name(AlarmKind k);
// Table cell codes: DIV0, SQRTNEG, LOG, POW, COND, CBRT, FN.
const char* alarm_cell_code(AlarmKind k);

struct ErrorBound {
    Rat abs_err;
};

struct Alarm {
    AlarmKind kind;
    ExprPath path;
};

struct AnalysisOutcome {
    enum class Kind { Bound, Alarm, Timeout };
    Kind kind;
    std::optional<ErrorBound> bound;  // Bound only
    std::optional<Interval> range;    // Bound only: real range of the result
    std::optional<Alarm> alarm;       // Alarm only

    bool is_bound() const { return kind == Kind::Bound; }
    bool is_alarm() const { return kind == Kind::Alarm; }
    bool is_timeout() const { return kind == Kind::Timeout; }

    static AnalysisOutcome make_bound(Rat err, Interval r);
    static AnalysisOutcome make_alarm(AlarmKind k, ExprPath path);
    static AnalysisOutcome make_timeout();
};

struct AnalysisParams {
    Rat unit_roundoff = Rat::pow2(-53);
    Rat denormal_term = Rat::pow2(-1075);
    Rat lib_factor = Rat(2);  // multiplies unit_roundoff for transcendental calls
    long precision_bits = 128;
    bool inputs_rounded = true;
    int subdiv_per_var = 8;
    long max_boxes = 4096;
    long time_budget_ms = 120000;
    // subdivision boxes evaluated in parallel; the reported alarm is always
    // the smallest-index box, so results are schedule-independent. 0 = auto.
    int box_workers = 0;
};

// Cooperative deadline polled by long-running stages.
class Deadline {
public:
    static Deadline unlimited() { return Deadline(); }
    static Deadline after_ms(long ms) {
        if (ms <= 0) throw std::invalid_argument("Deadline: budget must be positive");
        Deadline d;
        d.unlimited_ = false;
        d.end_ = std::chrono::steady_clock::now() + std::chrono::milliseconds(ms);
        return d;
    }
    bool expired() const {
        return !unlimited_ && std::chrono::steady_clock::now() >= end_;
    }

private:
    Deadline() = default;
    bool unlimited_ = true;
    std::chrono::steady_clock::time_point end_{};
};

enum class AnalysisMode { IA, Subdiv };

// Plain interval analysis over the whole precondition box.
AnalysisOutcome analyze_ia(const FpCoreProgram& program, const AnalysisParams& params);
AnalysisOutcome analyze_ia(const FpCoreProgram& program, const AnalysisParams& params,
                           const Deadline& deadline);

// Interval analysis refined over per-variable subdivisions.
AnalysisOutcome analyze_subdiv(const FpCoreProgram& program, const AnalysisParams& params);
AnalysisOutcome analyze_subdiv(const FpCoreProgram& program, const AnalysisParams& params,
                               const Deadline& deadline);

// Tightest bound over the selected modes; each member is sound, so the
// minimum is. Equal bounds keep the cheaper member's result (IA first).
AnalysisOutcome analyze_portfolio(const FpCoreProgram& program, const AnalysisParams& params,
                                  const std::set<AnalysisMode>& modes = {AnalysisMode::IA,
                                                                         AnalysisMode::Subdiv});
AnalysisOutcome analyze_portfolio(const FpCoreProgram& program, const AnalysisParams& params,
                                  const std::set<AnalysisMode>& modes, const Deadline& deadline);

// Interval range of an expression under variable ranges (no rounding model).
// Throws ContainmentFault on domain faults. Used by rewrite guards and the
// SMT relaxation.
Interval range_eval(const ExprPtr& expr, const std::map<std::string, Interval>& env,
                    long precision_bits);

// Per-variable subdivision counts honoring the box budget: every variable
// starts at k and the smallest-range variables are coarsened first.
std::vector<int> subdivision_counts(const std::vector<Rat>& widths, int k, long max_boxes);

}  // namespace fpv
