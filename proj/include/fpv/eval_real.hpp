#pragma once

#include <map>
#include <optional>
#include <string>

#include "fpv/expr.hpp"
#include "fpv/interval.hpp"

namespace fpv {

enum class RealEvalStatus {
    Exact,            // enclosure meets the requested width (often width 0)
    Inconclusive,     // precision cap reached before the width target
    DomainViolation,  // invalid operation at the exact point (e.g. 1/0)
};

struct RealEvalResult {
    RealEvalStatus status;
    std::optional<Interval> enclosure;  // present unless DomainViolation
    std::string note;                   // violation description
};

inline constexpr long kRealEvalStartBits = 128;
inline constexpr long kRealEvalMaxBits = 4096;

// Encloses the exact real value of `expr` at a rational point. `expr` must be
// If-free; callers resolve conditionals via eval_real on the comparison
// operands. Stops once width < 2^-target_width_bits * max(1, |value|).
RealEvalResult eval_real(const ExprPtr& expr, const std::map<std::string, Rat>& point,
                         long target_width_bits);

// Resolves a condition at a rational point by enclosure refinement.
// Returns nullopt if it cannot be decided within the precision cap.
std::optional<bool> eval_cond_real(const CondPtr& cond, const std::map<std::string, Rat>& point);

// Correctly rounded binary64 of the exact value, refining precision as needed
// to make the rounding unambiguous. nullopt when inconclusive or on a domain
// violation (flag distinguishes the two).
struct RoundedReal {
    std::optional<double> value;
    bool domain_violation = false;
};
RoundedReal eval_real_rounded(const ExprPtr& expr, const std::map<std::string, Rat>& point);

}  // namespace fpv
