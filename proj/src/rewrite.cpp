#include "fpv/rewrite.hpp"

#include <set>
#include <sstream>

#include "fpv/analysis.hpp"
#include "fpv/eval_real.hpp"
#include "fpv/fpcore.hpp"
#include "fpv/sampling.hpp"

namespace fpv {

PatPtr pmeta(const std::string& name) { return std::make_shared<const Pat>(Pat{PatMeta{name}}); }
PatPtr pconst(Rat v) { return std::make_shared<const Pat>(Pat{PatConst{std::move(v)}}); }
PatPtr punary(UnOp op, PatPtr c) { return std::make_shared<const Pat>(Pat{PatUnary{op, std::move(c)}}); }
PatPtr pbinary(BinOp op, PatPtr l, PatPtr r) {
    return std::make_shared<const Pat>(Pat{PatBinary{op, std::move(l), std::move(r)}});
}

bool pat_match(const PatPtr& pat, const ExprPtr& expr, Bindings& out) {
    if (auto* m = std::get_if<PatMeta>(&pat->node)) {
        auto it = out.find(m->name);
        if (it != out.end()) return expr_equal(it->second, expr);
        out.emplace(m->name, expr);
        return true;
    }
    if (auto* c = std::get_if<PatConst>(&pat->node)) {
        auto* e = std::get_if<ConstNode>(&expr->node);
        return e && e->value == c->value;
    }
    if (auto* u = std::get_if<PatUnary>(&pat->node)) {
        auto* e = std::get_if<UnaryNode>(&expr->node);
        return e && e->op == u->op && pat_match(u->child, e->child, out);
    }
    auto& b = std::get<PatBinary>(pat->node);
    auto* e = std::get_if<BinaryNode>(&expr->node);
    return e && e->op == b.op && pat_match(b.left, e->left, out) &&
           pat_match(b.right, e->right, out);
}

ExprPtr pat_instantiate(const PatPtr& pat, const Bindings& bindings) {
    if (auto* m = std::get_if<PatMeta>(&pat->node)) return bindings.at(m->name);
    if (auto* c = std::get_if<PatConst>(&pat->node)) return make_const(c->value);
    if (auto* u = std::get_if<PatUnary>(&pat->node))
        return make_unary(u->op, pat_instantiate(u->child, bindings));
    auto& b = std::get<PatBinary>(pat->node);
    return make_binary(b.op, pat_instantiate(b.left, bindings),
                       pat_instantiate(b.right, bindings));
}

std::vector<std::string> pat_metavars(const PatPtr& pat) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::function<void(const PatPtr&)> rec = [&](const PatPtr& p) {
        if (auto* m = std::get_if<PatMeta>(&p->node)) {
            if (seen.insert(m->name).second) out.push_back(m->name);
        } else if (auto* u = std::get_if<PatUnary>(&p->node)) {
            rec(u->child);
        } else if (auto* b = std::get_if<PatBinary>(&p->node)) {
            rec(b->left);
            rec(b->right);
        }
    };
    rec(pat);
    return out;
}

namespace {

using Ranges = std::map<std::string, Interval>;

bool r_nonneg(const Ranges& r, const char* v) { return r.at(v).lo.sign() >= 0; }
bool r_positive(const Ranges& r, const char* v) { return r.at(v).lo.sign() > 0; }
bool r_nonzero(const Ranges& r, const char* v) { return !r.at(v).contains_zero(); }

std::vector<RewriteRule> build_rules() {
    auto a = pmeta("a");
    auto b = pmeta("b");
    auto c = pmeta("c");
    auto x = pmeta("x");
    auto one = pconst(Rat(1));
    auto zero = pconst(Rat(0));
    auto add = [](PatPtr l, PatPtr r) { return pbinary(BinOp::Add, l, r); };
    auto sub = [](PatPtr l, PatPtr r) { return pbinary(BinOp::Sub, l, r); };
    auto mul = [](PatPtr l, PatPtr r) { return pbinary(BinOp::Mul, l, r); };
    auto div = [](PatPtr l, PatPtr r) { return pbinary(BinOp::Div, l, r); };
    auto neg = [](PatPtr e) { return punary(UnOp::Neg, e); };
    auto sqrt_ = [](PatPtr e) { return punary(UnOp::Sqrt, e); };
    auto exp_ = [](PatPtr e) { return punary(UnOp::Exp, e); };
    auto log_ = [](PatPtr e) { return punary(UnOp::Log, e); };

    std::vector<RewriteRule> rules;
    auto push = [&](std::string name, PatPtr lhs, PatPtr rhs,
                    std::function<bool(const Ranges&)> guard = nullptr,
                    std::string guard_desc = "") {
        rules.push_back({std::move(name), std::move(lhs), std::move(rhs), std::move(guard),
                         std::move(guard_desc)});
    };

    push("comm-add", add(a, b), add(b, a));
    push("comm-mul", mul(a, b), mul(b, a));
    push("assoc-add-left", add(add(a, b), c), add(a, add(b, c)));
    push("assoc-add-right", add(a, add(b, c)), add(add(a, b), c));
    push("assoc-mul-left", mul(mul(a, b), c), mul(a, mul(b, c)));
    push("assoc-mul-right", mul(a, mul(b, c)), mul(mul(a, b), c));
    push("distribute", mul(a, add(b, c)), add(mul(a, b), mul(a, c)));
    push("factor", add(mul(a, b), mul(a, c)), mul(a, add(b, c)));
    push("distribute-sub", mul(a, sub(b, c)), sub(mul(a, b), mul(a, c)));
    push("factor-sub", sub(mul(a, b), mul(a, c)), mul(a, sub(b, c)));
    push("assoc-add-sub", sub(add(a, b), c), add(a, sub(b, c)));
    push("assoc-sub-add", add(a, sub(b, c)), sub(add(a, b), c));
    push("sub-chain", sub(sub(a, b), c), sub(a, add(b, c)));
    push("sub-chain-rev", sub(a, add(b, c)), sub(sub(a, b), c));
    push("sub-neg", sub(a, b), neg(sub(b, a)));
    push("neg-sub", neg(sub(b, a)), sub(a, b));
    push("diff-squares", sub(mul(a, a), mul(b, b)), mul(sub(a, b), add(a, b)));
    push("square-diff", mul(sub(a, b), add(a, b)), sub(mul(a, a), mul(b, b)));
    push("sqrt-conjugate", sub(sqrt_(a), sqrt_(b)),
         div(sub(a, b), add(sqrt_(a), sqrt_(b))),
         [](const Ranges& r) {
             return r_nonneg(r, "a") && r_nonneg(r, "b") &&
                    (r.at("a").lo + r.at("b").lo).sign() > 0;
         },
         "a >= 0, b >= 0, sqrt(a)+sqrt(b) range excludes 0");
    push("recip-diff", sub(div(one, a), div(one, b)), div(sub(b, a), mul(a, b)),
         [](const Ranges& r) { return r_nonzero(r, "a") && r_nonzero(r, "b"); },
         "a and b ranges exclude 0");
    push("frac-split", div(add(a, b), c), add(div(a, c), div(b, c)),
         [](const Ranges& r) { return r_nonzero(r, "c"); }, "c range excludes 0");
    push("frac-join", add(div(a, c), div(b, c)), div(add(a, b), c),
         [](const Ranges& r) { return r_nonzero(r, "c"); }, "c range excludes 0");
    push("log-mul", log_(mul(a, b)), add(log_(a), log_(b)),
         [](const Ranges& r) { return r_positive(r, "a") && r_positive(r, "b"); },
         "a > 0, b > 0");
    push("log-mul-join", add(log_(a), log_(b)), log_(mul(a, b)),
         [](const Ranges& r) { return r_positive(r, "a") && r_positive(r, "b"); },
         "a > 0, b > 0");
    push("log-div", log_(div(a, b)), sub(log_(a), log_(b)),
         [](const Ranges& r) { return r_positive(r, "a") && r_positive(r, "b"); },
         "a > 0, b > 0");
    push("log-div-join", sub(log_(a), log_(b)), log_(div(a, b)),
         [](const Ranges& r) { return r_positive(r, "a") && r_positive(r, "b"); },
         "a > 0, b > 0");
    push("exp-add", exp_(add(a, b)), mul(exp_(a), exp_(b)));
    push("exp-add-join", mul(exp_(a), exp_(b)), exp_(add(a, b)));
    push("exp-log", exp_(log_(x)), x,
         [](const Ranges& r) { return r_positive(r, "x"); }, "x > 0");
    push("log-exp", log_(exp_(x)), x);
    push("horner", add(mul(mul(a, x), x), mul(b, x)), mul(add(mul(a, x), b), x));
    push("horner-expand", mul(add(mul(a, x), b), x), add(mul(mul(a, x), x), mul(b, x)));
    push("mul-one", mul(x, one), x);
    push("one-mul", mul(one, x), x);
    push("add-zero", add(x, zero), x);
    push("zero-add", add(zero, x), x);
    push("div-self", div(x, x), one,
         [](const Ranges& r) { return r_nonzero(r, "x"); }, "x range excludes 0");
    push("add-sub-cancel", sub(add(a, b), a), b);
    push("double-neg", neg(neg(x)), x);
    push("sub-to-add-neg", sub(a, b), add(a, neg(b)));
    push("add-neg-to-sub", add(a, neg(b)), sub(a, b));
    push("mul-neg-left", mul(neg(a), b), neg(mul(a, b)));
    push("neg-mul-left", neg(mul(a, b)), mul(neg(a), b));
    return rules;
}

std::string pat_text(const PatPtr& p) {
    if (auto* m = std::get_if<PatMeta>(&p->node)) return m->name;
    if (auto* c = std::get_if<PatConst>(&p->node)) return c->value.to_string();
    if (auto* u = std::get_if<PatUnary>(&p->node))
        return "(" + std::string(un_op_name(u->op)) + " " + pat_text(u->child) + ")";
    auto& b = std::get<PatBinary>(p->node);
    return "(" + std::string(bin_op_name(b.op)) + " " + pat_text(b.left) + " " +
           pat_text(b.right) + ")";
}

// Walks every position of `expr`, attempting all rules; collects candidates.
struct NeighborWalk {
    const std::vector<RewriteRule>& rules;
    RewriteMode mode;
    long prec;
    const ExprPtr& root;
    std::vector<ExprPtr> out;
    std::set<std::string> seen;
    std::string root_text;
    int cap;

    bool full() const { return static_cast<int>(out.size()) >= cap; }

    bool guard_holds(const RewriteRule& rule, const Bindings& bind, const Ranges& env) {
        if (mode == RewriteMode::Unguarded || !rule.has_guard()) return true;
        Ranges metavar_ranges;
        for (auto& [name, expr] : bind) {
            try {
                metavar_ranges.emplace(name, range_eval(expr, env, prec));
            } catch (const ContainmentFault&) {
                return false;  // range not derivable, guard unproven
            } catch (const std::invalid_argument&) {
                return false;
            }
        }
        return rule.guard(metavar_ranges);
    }

    void visit(const ExprPtr& e, ExprPath& path, const Ranges& env) {
        if (full()) return;
        for (const auto& rule : rules) {
            if (full()) return;
            Bindings bind;
            if (!pat_match(rule.lhs, e, bind)) continue;
            if (!guard_holds(rule, bind, env)) continue;
            ExprPtr replaced = replace_at(root, path, pat_instantiate(rule.rhs, bind));
            std::string key = emit_expr(replaced);
            if (key == root_text) continue;  // no-op rewrite
            if (seen.insert(key).second) out.push_back(replaced);
        }
        if (auto* u = std::get_if<UnaryNode>(&e->node)) {
            path.push_back(0);
            visit(u->child, path, env);
            path.pop_back();
        } else if (auto* b = std::get_if<BinaryNode>(&e->node)) {
            path.push_back(0);
            visit(b->left, path, env);
            path.pop_back();
            path.push_back(1);
            visit(b->right, path, env);
            path.pop_back();
        } else if (auto* l = std::get_if<LetNode>(&e->node)) {
            for (size_t i = 0; i < l->bindings.size(); ++i) {
                path.push_back(static_cast<int>(i));
                visit(l->bindings[i].second, path, env);
                path.pop_back();
            }
            Ranges body_env = env;
            for (auto& [name, rhs] : l->bindings) {
                try {
                    body_env.insert_or_assign(name, range_eval(rhs, env, prec));
                } catch (const ContainmentFault&) {
                    body_env.erase(name);  // unknown range: guards over it fail
                } catch (const std::invalid_argument&) {
                    body_env.erase(name);
                }
            }
            path.push_back(static_cast<int>(l->bindings.size()));
            visit(l->body, path, body_env);
            path.pop_back();
        } else if (auto* i = std::get_if<IfNode>(&e->node)) {
            path.push_back(0);
            visit(i->then_branch, path, env);
            path.pop_back();
            path.push_back(1);
            visit(i->else_branch, path, env);
            path.pop_back();
        }
    }
};

}  // namespace

const std::vector<RewriteRule>& rules_db() {
    static const std::vector<RewriteRule> rules = build_rules();
    return rules;
}

std::string rules_db_text() {
    std::ostringstream os;
    for (const auto& r : rules_db()) {
        os << r.name << ": " << pat_text(r.lhs) << " -> " << pat_text(r.rhs);
        if (r.has_guard()) os << "   [guard: " << r.guard_desc << "]";
        os << "\n";
    }
    return os.str();
}

std::vector<ExprPtr> neighbors(const ExprPtr& expr, const std::vector<RewriteRule>& rules,
                               RewriteMode mode, const Precondition& precond, int cap) {
    NeighborWalk walk{rules, mode, 128, expr, {}, {}, emit_expr(expr), cap};
    ExprPath path;
    walk.visit(expr, path, precond.ranges);
    return std::move(walk.out);
}

RuleCheck check_rule_soundness(const RewriteRule& rule, int trials, std::uint64_t seed,
                               bool enforce_guard) {
    Rng rng(seed);
    auto metavars = pat_metavars(rule.lhs);

    // keep magnitudes small for rules involving exp, so exact enclosures of
    // e^x stay cheap
    std::function<bool(const PatPtr&)> has_exp = [&](const PatPtr& p) {
        if (auto* u = std::get_if<PatUnary>(&p->node))
            return u->op == UnOp::Exp || has_exp(u->child);
        if (auto* b = std::get_if<PatBinary>(&p->node))
            return has_exp(b->left) || has_exp(b->right);
        return false;
    };
    const long e_span = has_exp(rule.lhs) || has_exp(rule.rhs) ? 8 : 30;

    auto draw_value = [&]() {
        // magnitude-stratified: sign * mantissa * 2^e
        long e = static_cast<long>(rng.below(2 * e_span + 1)) - e_span;
        double mant = 1.0 + rng.unit();
        Rat v = Rat::of_double(mant) * Rat::pow2(e);
        if (rng.below(2) == 0) v = -v;
        if (rng.below(8) == 0) v = Rat(0);
        return v;
    };

    for (int t = 0; t < trials; ++t) {
        Bindings bind;
        Ranges point_ranges;
        bool satisfied = false;
        for (int attempt = 0; attempt < 200 && !satisfied; ++attempt) {
            bind.clear();
            point_ranges.clear();
            for (auto& mv : metavars) {
                Rat v = draw_value();
                bind[mv] = make_const(v);
                point_ranges.emplace(mv, Interval(v));
            }
            satisfied = !enforce_guard || !rule.has_guard() || rule.guard(point_ranges);
        }
        if (!satisfied) continue;

        ExprPtr lhs = pat_instantiate(rule.lhs, bind);
        ExprPtr rhs = pat_instantiate(rule.rhs, bind);
        auto describe = [&]() {
            std::string s;
            for (auto& [k, v] : bind) {
                if (!s.empty()) s += ", ";
                s += k + " = " + std::get<ConstNode>(v->node).value.to_string();
            }
            return s;
        };
        RealEvalResult le = eval_real(lhs, {}, 80);
        RealEvalResult re = eval_real(rhs, {}, 80);
        if (le.status == RealEvalStatus::DomainViolation ||
            re.status == RealEvalStatus::DomainViolation)
            return {RuleCheck::Verdict::DomainViolation,
                    describe() + ": " +
                        (le.status == RealEvalStatus::DomainViolation ? le.note : re.note)};
        if (!le.enclosure || !re.enclosure) continue;  // inconclusive sample
        if (!iv_intersects(*le.enclosure, *re.enclosure))
            return {RuleCheck::Verdict::Counterexample, describe()};
    }
    return {RuleCheck::Verdict::Ok, ""};
}

}  // namespace fpv
