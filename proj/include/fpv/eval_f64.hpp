#pragma once

#include <map>
#include <string>

#include "fpv/expr.hpp"

namespace fpv {

struct F64Result {
    double value;
    bool valid;  // false if any NaN or infinity appeared during evaluation
};

// Round-to-nearest-even binary64 evaluation; library semantics for the
// transcendental calls.
F64Result eval_f64(const ExprPtr& expr, const std::map<std::string, double>& point);

bool eval_cond_f64(const CondPtr& cond, const std::map<std::string, double>& point,
                   bool& saw_invalid);

}  // namespace fpv
