#include "fpv/search.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "fpv/fpcore.hpp"

namespace fpv {

namespace {

struct Scored {
    ExprPtr expr;
    double bits;
    int nodes;
    std::string text;

    bool better_than(const Scored& o) const {
        if (bits != o.bits) return bits < o.bits;
        if (nodes != o.nodes) return nodes < o.nodes;
        return text < o.text;
    }
};

}  // namespace

ImproveResult greedy_improve(const FpCoreProgram& program, const SamplePlan& plan,
                             const SearchParams& params,
                             const Deadline& deadline) {
    if (!program.precondition)
        throw std::invalid_argument("greedy_improve requires a precondition");
    const GreedyParams& gp = params.greedy;
    SamplePlan search_plan{gp.search_samples, plan.seed};
    auto points = sample_inputs(*program.precondition, search_plan);

    auto score = [&](const ExprPtr& e) {
        SampledError s = measure_on_points(e, points, search_plan.seed);
        return s.no_valid_samples() ? std::numeric_limits<double>::infinity() : s.avg_bits;
    };

    ImproveResult result;
    result.program = program;
    Scored cur{program.body, score(program.body), node_count(program.body),
               emit_expr(program.body)};
    if (cur.bits == std::numeric_limits<double>::infinity()) {
        result.no_valid_samples = true;
        return result;
    }

    for (int iter = 0; iter < gp.max_iters; ++iter) {
        if (deadline.expired()) {
            result.timed_out = true;
            return result;
        }
        auto frontier = neighbors(cur.expr, rules_db(), RewriteMode::Unguarded,
                                  *program.precondition, gp.neighbor_cap);
        std::optional<Scored> best;
        for (auto& cand : frontier) {
            if (deadline.expired()) {
                result.timed_out = true;
                return result;
            }
            Scored s{cand, score(cand), node_count(cand), emit_expr(cand)};
            if (!best || s.better_than(*best)) best = std::move(s);
        }
        if (!best || !(cur.bits - best->bits > gp.min_gain_bits)) break;
        cur = *best;
    }
    result.program.body = cur.expr;
    return result;
}

namespace {

// Fitness of a candidate body under the sound portfolio bound. Alarms and
// timeouts rank behind every bound.
struct Fitness {
    bool is_bound = false;
    Rat err;
    int nodes = 0;
    std::string text;

    bool better_than(const Fitness& o) const {
        if (is_bound != o.is_bound) return is_bound;
        if (is_bound && err != o.err) return err < o.err;
        if (nodes != o.nodes) return nodes < o.nodes;
        return text < o.text;
    }
};

}  // namespace

ImproveResult genetic_improve(const FpCoreProgram& program, const AnalysisParams& analysis,
                              const SearchParams& params,
                              const Deadline& deadline) {
    if (!program.precondition)
        throw std::invalid_argument("genetic_improve requires a precondition");
    const GeneticParams& gp = params.genetic;
    if (gp.population < gp.elite || gp.elite < 1)
        throw std::invalid_argument("genetic_improve: population >= elite >= 1 required");

    ImproveResult result;
    result.program = program;

    std::unordered_map<std::string, AnalysisOutcome> memo;
    auto analyze_body = [&](const ExprPtr& body, const std::string& text) -> const AnalysisOutcome& {
        auto it = memo.find(text);
        if (it != memo.end()) return it->second;
        FpCoreProgram candidate = program;
        candidate.body = body;
        AnalysisOutcome out =
            analyze_portfolio(candidate, analysis, {AnalysisMode::IA, AnalysisMode::Subdiv},
                              deadline);
        return memo.emplace(text, std::move(out)).first->second;
    };
    auto fitness = [&](const ExprPtr& body) {
        std::string text = emit_expr(body);
        const AnalysisOutcome& out = analyze_body(body, text);
        Fitness f;
        f.nodes = node_count(body);
        f.text = std::move(text);
        if (out.is_bound()) {
            f.is_bound = true;
            f.err = out.bound->abs_err;
        }
        return f;
    };

    Fitness input_fit = fitness(program.body);
    if (!input_fit.is_bound) {
        const AnalysisOutcome& out = analyze_body(program.body, emit_expr(program.body));
        if (out.is_alarm()) result.input_alarm = out.alarm;
        if (out.is_timeout()) result.timed_out = true;
        return result;  // no fitness signal; input returned unchanged
    }

    Rng rng(gp.seed);
    auto random_mutation = [&](const ExprPtr& e) -> std::optional<ExprPtr> {
        auto frontier =
            neighbors(e, rules_db(), RewriteMode::Guarded, *program.precondition, 1000);
        for (int attempt = 0; attempt < gp.mutation_attempts_per_child; ++attempt) {
            if (frontier.empty()) return std::nullopt;
            ExprPtr pick = frontier[rng.below(frontier.size())];
            if (!expr_equal(pick, e)) return pick;
        }
        return std::nullopt;
    };

    std::vector<ExprPtr> pop{program.body};
    while (static_cast<int>(pop.size()) < gp.population) {
        auto m = random_mutation(program.body);
        pop.push_back(m ? *m : program.body);
    }

    ExprPtr best_ever = program.body;
    Fitness best_fit = input_fit;

    for (int gen = 0; gen < gp.generations; ++gen) {
        if (deadline.expired()) {
            result.timed_out = true;
            break;
        }
        std::vector<Fitness> fits;
        fits.reserve(pop.size());
        for (auto& e : pop) fits.push_back(fitness(e));
        // rank indices by fitness
        std::vector<size_t> order(pop.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
            if (fits[i].better_than(fits[j])) return true;
            if (fits[j].better_than(fits[i])) return false;
            return i < j;
        });
        if (fits[order[0]].better_than(best_fit)) {
            best_fit = fits[order[0]];
            best_ever = pop[order[0]];
        }

        std::vector<ExprPtr> next;
        next.reserve(pop.size());
        for (int i = 0; i < gp.elite && i < static_cast<int>(order.size()); ++i)
            next.push_back(pop[order[i]]);
        while (static_cast<int>(next.size()) < gp.population) {
            // tournament selection
            size_t winner = rng.below(pop.size());
            for (int i = 1; i < gp.tournament; ++i) {
                size_t challenger = rng.below(pop.size());
                if (fits[challenger].better_than(fits[winner])) winner = challenger;
            }
            auto child = random_mutation(pop[winner]);
            next.push_back(child ? *child : pop[winner]);
        }
        pop = std::move(next);
    }
    // final population sweep
    if (!result.timed_out) {
        for (auto& e : pop) {
            Fitness f = fitness(e);
            if (f.better_than(best_fit)) {
                best_fit = f;
                best_ever = e;
            }
        }
    }

    result.program.body = best_ever;
    return result;
}

}  // namespace fpv
