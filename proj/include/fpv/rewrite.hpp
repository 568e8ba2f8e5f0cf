#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fpv/expr.hpp"
#include "fpv/interval.hpp"

namespace fpv {

// Pattern over op nodes with metavariables. Nonlinear patterns (a metavariable
// appearing twice) require structurally equal subtrees.
struct Pat;
using PatPtr = std::shared_ptr<const Pat>;

struct PatMeta { std::string name; };
struct PatConst { Rat value; };
struct PatUnary { UnOp op; PatPtr child; };
struct PatBinary { BinOp op; PatPtr left, right; };

struct Pat {
    std::variant<PatMeta, PatConst, PatUnary, PatBinary> node;
};

PatPtr pmeta(const std::string& name);
PatPtr pconst(Rat v);
PatPtr punary(UnOp op, PatPtr c);
PatPtr pbinary(BinOp op, PatPtr l, PatPtr r);

using Bindings = std::map<std::string, ExprPtr>;

bool pat_match(const PatPtr& pat, const ExprPtr& expr, Bindings& out);
ExprPtr pat_instantiate(const PatPtr& pat, const Bindings& bindings);
std::vector<std::string> pat_metavars(const PatPtr& pat);

struct RewriteRule {
    std::string name;
    PatPtr lhs, rhs;
    // Domain predicate over the real ranges of bound metavariables; empty
    // means unguarded. Applied only in guarded mode.
    std::function<bool(const std::map<std::string, Interval>&)> guard;
    std::string guard_desc;  // human-readable, for `fpv rules`

    bool has_guard() const { return static_cast<bool>(guard); }
};

// The fixed, ordered rule set.
const std::vector<RewriteRule>& rules_db();

std::string rules_db_text();  // dump for the CLI

enum class RewriteMode { Guarded, Unguarded };

// All single-rule, single-position rewrites of `expr`, structurally
// deduplicated, in position-major rule-minor order, truncated at `cap`.
// In guarded mode a rule applies only where its guard is proven by interval
// analysis of the metavariable ranges under `precond`.
std::vector<ExprPtr> neighbors(const ExprPtr& expr, const std::vector<RewriteRule>& rules,
                               RewriteMode mode, const Precondition& precond, int cap);

struct RuleCheck {
    enum class Verdict { Ok, Counterexample, DomainViolation };
    Verdict verdict = Verdict::Ok;
    std::string detail;  // first offending instantiation
};

// Samples guard-satisfying metavariable instantiations and verifies that lhs
// and rhs agree via the real-evaluation oracle (width 2^-80).
RuleCheck check_rule_soundness(const RewriteRule& rule, int trials, std::uint64_t seed,
                               bool enforce_guard = true);

}  // namespace fpv
