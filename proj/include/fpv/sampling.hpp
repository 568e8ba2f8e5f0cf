#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fpv/expr.hpp"
#include "fpv/rational.hpp"

namespace fpv {

// Deterministic RNG. mt19937_64 is algorithmically pinned by the standard;
// bounded draws use rejection sampling so results are platform-independent.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    std::uint64_t next() { return eng_(); }
    // uniform in [0, n); n >= 1
    std::uint64_t below(std::uint64_t n);
    // uniform in [0, 1) with 53 random bits
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 eng_;
};

std::uint64_t derive_seed(std::uint64_t global_seed, const std::string& name);

struct SamplePlan {
    long n = 8192;
    std::uint64_t seed = 1;  // strategy: ordinal_uniform (the only one)
};

struct SampledError {
    double avg_bits = 0.0;       // mean log2(1 + ulps) over valid points
    Rat max_abs;                 // largest observed |actual - exact| (upper bound)
    long n_total = 0;
    long n_valid = 0;
    long n_inconclusive = 0;
    std::uint64_t seed = 0;

    long n_invalid() const { return n_total - n_valid - n_inconclusive; }
    bool no_valid_samples() const { return n_valid == 0; }
};

// Ordinal-uniform draws: per variable, uniform over the representable
// binary64 values in [round-up(lo), round-down(hi)]. Throws if a range
// contains no representable value.
std::vector<std::map<std::string, double>> sample_inputs(const Precondition& precond,
                                                         const SamplePlan& plan);

SampledError measure_error(const FpCoreProgram& program, const SamplePlan& plan);

// Same measurement on a caller-fixed point set (used by the greedy search).
SampledError measure_on_points(const ExprPtr& body,
                               const std::vector<std::map<std::string, double>>& points,
                               std::uint64_t seed);

}  // namespace fpv
