#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fpv/analysis.hpp"
#include "fpv/expr.hpp"
#include "fpv/sampling.hpp"
#include "fpv/search.hpp"

namespace fpv {

enum class RowStatus { Ok, AlarmSrc, AlarmRes, TimeoutImprove, TimeoutAnalyze };
const char* row_status_name(RowStatus s);

// Per-strategy rewriting comparison (baseline / genetic / greedy / composed).
struct RewriteColumns {
    AnalysisOutcome baseline, daisy, herbie, both;
    std::optional<Rat> minimum;  // min over the three strategy columns' bounds
    std::string final_program;   // argmin program text (keep-best, baseline included)
};

struct PipelineRow {
    std::string name;
    RowStatus status = RowStatus::Ok;
    std::string src_text, res_text;  // emitted FPCore; res empty if improve timed out
    std::optional<SampledError> sampled_src, sampled_res;
    std::map<std::string, AnalysisOutcome> bounds_src, bounds_res;  // keys: "ia", "subdiv"
    std::optional<Rat> best_src, best_res;
    std::optional<Rat> improvement_ratio;  // best_res / best_src
    std::optional<RewriteColumns> rewrite_columns;
};

struct RunConfig {
    long timeout_ms = 120000;  // per stage
    std::uint64_t seed = 1;
    SamplePlan plan;
    AnalysisParams analysis;
    SearchParams search;
    bool strategy_greedy = true;
    bool strategy_genetic = true;
    std::string smt_solver;  // optional external solver path; empty = off
    int workers = 1;
};

// Runs a stage under a budget; the stage polls the deadline cooperatively.
// Budget must be positive.
template <typename F>
auto enforce_timeout(F&& stage, long budget_ms) {
    if (budget_ms <= 0) throw std::invalid_argument("enforce_timeout: budget must be positive");
    return stage(Deadline::after_ms(budget_ms));
}

// Fig-style per-benchmark flow: greedy improvement, dynamic measurement of
// both versions, static analyses of both versions, bests and ratio.
PipelineRow run_pipeline(const FpCoreProgram& program, const RunConfig& config);

// Adds the rewriting-strategy columns (baseline / daisy / herbie / both /
// minimum) on top of run_pipeline's fields.
PipelineRow compare_rewriters(const FpCoreProgram& program, const RunConfig& config);

// Batch driver; rows are ordered by input order and per-benchmark randomness
// derives from (config.seed, name), so worker count never changes results.
std::vector<PipelineRow> run_benchmarks(const std::vector<FpCoreProgram>& programs,
                                        const RunConfig& config);

// json is the canonical lossless form; csv/markdown mirror the table layouts
// with TO / DIV0 / SQRTNEG / POW / COND cell codes.
std::string render_report(const std::vector<PipelineRow>& rows, const std::string& format);
std::string render_report_json(const std::vector<PipelineRow>& rows, const RunConfig& config);

// Rebuilds rows from the canonical json form (for `fpv report`).
std::vector<PipelineRow> rows_from_json(const std::string& json_text);

std::string summarize(const std::vector<PipelineRow>& rows);

}  // namespace fpv
