#include "fpv/sampling.hpp"

#include <cmath>
#include <stdexcept>

#include "fpv/eval_f64.hpp"
#include "fpv/eval_real.hpp"
#include "fpv/float_bits.hpp"

namespace fpv {

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    if (n == 1) return 0;
    // rejection sampling over the largest multiple of n
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = next();
    } while (v >= limit);
    return v % n;
}

std::uint64_t derive_seed(std::uint64_t global_seed, const std::string& name) {
    // FNV-1a over the name, mixed with the global seed (splitmix64 finalizer)
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::uint64_t z = global_seed + 0x9E3779B97F4A7C15ull + h;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::vector<std::map<std::string, double>> sample_inputs(const Precondition& precond,
                                                         const SamplePlan& plan) {
    if (plan.n < 1) throw std::invalid_argument("sample_inputs: n must be >= 1");
    struct VarOrd {
        std::string name;
        std::int64_t lo, hi;
    };
    std::vector<VarOrd> vars;
    for (auto& [name, range] : precond.ranges) {
        double flo = range.lo.to_double_up();
        double fhi = range.hi.to_double_down();
        if (!(flo <= fhi))
            throw std::runtime_error("sample_inputs: no representable value in range of '" +
                                     name + "'");
        vars.push_back({name, ordinal_of(flo), ordinal_of(fhi)});
    }
    Rng rng(plan.seed);
    std::vector<std::map<std::string, double>> out;
    out.reserve(static_cast<size_t>(plan.n));
    for (long i = 0; i < plan.n; ++i) {
        std::map<std::string, double> pt;
        for (auto& v : vars) {
            std::uint64_t span = static_cast<std::uint64_t>(v.hi - v.lo) + 1;
            std::int64_t ord = v.lo + static_cast<std::int64_t>(rng.below(span));
            pt[v.name] = double_of_ordinal(ord);
        }
        out.push_back(std::move(pt));
    }
    return out;
}

SampledError measure_on_points(const ExprPtr& body,
                               const std::vector<std::map<std::string, double>>& points,
                               std::uint64_t seed) {
    SampledError out;
    out.seed = seed;
    out.n_total = static_cast<long>(points.size());
    out.max_abs = Rat(0);
    double bits_sum = 0.0;
    for (const auto& pt : points) {
        F64Result actual = eval_f64(body, pt);

        std::map<std::string, Rat> pt_rat;
        for (auto& [k, v] : pt) pt_rat.emplace(k, Rat::of_double(v));

        // resolve conditionals, then enclose the exact value tightly enough
        // that round-to-nearest is unambiguous
        ExprPtr e = body;
        bool cond_undecided = false;
        while (auto* in = std::get_if<IfNode>(&e->node)) {
            auto taken = eval_cond_real(in->cond, pt_rat);
            if (!taken) { cond_undecided = true; break; }
            e = *taken ? in->then_branch : in->else_branch;
        }
        if (cond_undecided || contains_if(e)) {
            ++out.n_inconclusive;
            continue;
        }

        std::optional<double> ideal;
        std::optional<Interval> enclosure;
        bool violation = false;
        for (long target = 80; target <= kRealEvalMaxBits; target *= 2) {
            RealEvalResult r = eval_real(e, pt_rat, target);
            if (r.status == RealEvalStatus::DomainViolation) { violation = true; break; }
            if (!r.enclosure) break;
            double lo = r.enclosure->lo.to_double_nearest();
            double hi = r.enclosure->hi.to_double_nearest();
            if (lo == hi) {
                ideal = lo == 0.0 ? 0.0 : lo;
                enclosure = r.enclosure;
                break;
            }
            if (r.status == RealEvalStatus::Inconclusive) break;
        }

        if (violation || !actual.valid) continue;  // counted via n_invalid
        if (!ideal) {
            ++out.n_inconclusive;
            continue;
        }
        ++out.n_valid;
        bits_sum += bits_of_error(actual.value, *ideal);
        Rat a = Rat::of_double(actual.value);
        Rat dev = max((a - enclosure->lo).abs(), (a - enclosure->hi).abs());
        if (out.max_abs < dev) out.max_abs = dev;
    }
    out.avg_bits = out.n_valid > 0 ? bits_sum / static_cast<double>(out.n_valid) : 0.0;
    return out;
}

SampledError measure_error(const FpCoreProgram& program, const SamplePlan& plan) {
    if (!program.precondition)
        throw std::invalid_argument("measure_error requires a precondition on '" + program.name +
                                    "'");
    auto points = sample_inputs(*program.precondition, plan);
    return measure_on_points(program.body, points, plan.seed);
}

}  // namespace fpv
