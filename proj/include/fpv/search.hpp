#pragma once

#include <cstdint>
#include <optional>

#include "fpv/analysis.hpp"
#include "fpv/expr.hpp"
#include "fpv/rewrite.hpp"
#include "fpv/sampling.hpp"

namespace fpv {

struct GreedyParams {
    int max_iters = 8;
    int neighbor_cap = 1000;
    double min_gain_bits = 0.1;
    long search_samples = 512;  // sample count used during the search itself
};

struct GeneticParams {
    int population = 30;
    int generations = 30;
    int tournament = 4;
    int elite = 2;
    int mutation_attempts_per_child = 3;
    std::uint64_t seed = 1;
};

struct SearchParams {
    GreedyParams greedy;
    GeneticParams genetic;
};

struct ImproveResult {
    FpCoreProgram program;
    bool timed_out = false;
    std::optional<Alarm> input_alarm;  // genetic: the input itself alarms (no fitness signal)
    bool no_valid_samples = false;     // greedy: the sample set gave no signal
};

// Herbie-style greedy descent over unguarded rewrites, scored by average
// bits-of-error on one fixed seeded sample set. The output never scores worse
// than the input on that set.
ImproveResult greedy_improve(const FpCoreProgram& program, const SamplePlan& plan,
                             const SearchParams& params,
                             const Deadline& deadline = Deadline::unlimited());

// Daisy-style genetic search over guarded rewrites with the sound portfolio
// bound as fitness (alarms score as infinity). Elitism keeps the input in the
// population, so the output bound never exceeds the input bound.
ImproveResult genetic_improve(const FpCoreProgram& program, const AnalysisParams& analysis,
                              const SearchParams& params,
                              const Deadline& deadline = Deadline::unlimited());

}  // namespace fpv
