#include "fpv/eval_real.hpp"

#include <cmath>

#include "fpv/transcendental.hpp"

namespace fpv {

namespace {

// Retryable: the enclosure is too wide to decide a domain condition; a higher
// working precision may resolve it.
struct Ambiguous {
    std::string what;
};

struct Violation {
    std::string what;
};

Interval eval_rec(const ExprPtr& e, const std::map<std::string, Rat>& point,
                  std::map<std::string, Interval>& lets, long prec) {
    if (auto* c = std::get_if<ConstNode>(&e->node)) return Interval(c->value);
    if (auto* v = std::get_if<VarNode>(&e->node)) {
        auto it = lets.find(v->name);
        if (it != lets.end()) return it->second;
        auto p = point.find(v->name);
        if (p == point.end()) throw std::invalid_argument("eval_real: unbound variable " + v->name);
        return Interval(p->second);
    }
    if (auto* u = std::get_if<UnaryNode>(&e->node)) {
        Interval a = eval_rec(u->child, point, lets, prec);
        switch (u->op) {
            case UnOp::Neg: return iv_neg(a);
            case UnOp::Fabs: return iv_fabs(a);
            case UnOp::Sqrt:
                if (a.hi.sign() < 0) throw Violation{"sqrt of negative value"};
                if (a.lo.sign() < 0) throw Ambiguous{"sqrt argument enclosure straddles 0"};
                return iv_sqrt(a, prec);
            case UnOp::Cbrt: return iv_cbrt(a, prec);
            case UnOp::Exp: return iv_exp(a, prec);
            case UnOp::Log:
                if (a.hi.sign() <= 0) throw Violation{"log of non-positive value"};
                if (a.lo.sign() <= 0) throw Ambiguous{"log argument enclosure straddles 0"};
                return iv_log(a, prec);
            case UnOp::Sin: return iv_sin(a, prec);
            case UnOp::Cos: return iv_cos(a, prec);
            case UnOp::Tan: {
                Interval c = iv_cos(a, prec);
                if (c.contains_zero()) {
                    if (c.is_point()) throw Violation{"tan at a pole"};
                    throw Ambiguous{"tan denominator enclosure straddles 0"};
                }
                return iv_div(iv_sin(a, prec), c);
            }
        }
    }
    if (auto* b = std::get_if<BinaryNode>(&e->node)) {
        Interval l = eval_rec(b->left, point, lets, prec);
        Interval r = eval_rec(b->right, point, lets, prec);
        switch (b->op) {
            case BinOp::Add: return iv_add(l, r);
            case BinOp::Sub: return iv_sub(l, r);
            case BinOp::Mul: return iv_mul(l, r);
            case BinOp::Div:
                if (r.contains_zero()) {
                    if (r.is_point()) throw Violation{"division by zero"};
                    throw Ambiguous{"divisor enclosure straddles 0"};
                }
                return iv_div(l, r);
            case BinOp::Pow: {
                // exact integer exponents stay rational; otherwise exp(y*log x)
                if (r.is_point() && r.lo.is_integer()) {
                    long n = 0;
                    if (r.lo.num().fits_slong_p()) n = r.lo.num().get_si();
                    else throw Violation{"pow exponent too large"};
                    if (n < 0 && l.contains_zero()) {
                        if (l.is_point()) throw Violation{"zero to a negative power"};
                        throw Ambiguous{"pow base enclosure straddles 0"};
                    }
                    return iv_pow_int(l, n);
                }
                if (l.hi.sign() < 0) throw Violation{"pow of negative base with non-integer exponent"};
                if (l.lo.sign() <= 0) {
                    if (l.is_point() && l.lo.sign() == 0) throw Violation{"pow of zero base with non-integer exponent"};
                    throw Ambiguous{"pow base enclosure straddles 0"};
                }
                Interval lg = iv_log(l, prec);
                return iv_exp(iv_mul(r, lg), prec);
            }
        }
    }
    if (auto* l = std::get_if<LetNode>(&e->node)) {
        std::map<std::string, Interval> scope = lets;
        for (auto& [name, rhs] : l->bindings)
            scope[name] = eval_rec(rhs, point, lets, prec);  // parallel bindings
        return eval_rec(l->body, point, scope, prec);
    }
    throw std::invalid_argument("eval_real: conditional expression not supported here");
}

bool width_ok(const Interval& iv, long target_bits) {
    Rat bound = Rat::pow2(-target_bits) * max(Rat(1), iv.max_abs());
    return iv.width() < bound;
}

}  // namespace

RealEvalResult eval_real(const ExprPtr& expr, const std::map<std::string, Rat>& point,
                         long target_width_bits) {
    const bool transcendental = contains_transcendental(expr);
    std::optional<Interval> widest;
    for (long prec = kRealEvalStartBits; prec <= kRealEvalMaxBits; prec *= 2) {
        try {
            std::map<std::string, Interval> lets;
            Interval iv = eval_rec(expr, point, lets, prec);
            if (!transcendental || width_ok(iv, target_width_bits))
                return {RealEvalStatus::Exact, iv, ""};
            widest = iv;
        } catch (const Violation& v) {
            return {RealEvalStatus::DomainViolation, std::nullopt, v.what};
        } catch (const Ambiguous&) {
            // retry at higher precision
        }
        if (!transcendental) break;  // rational path cannot improve
    }
    return {RealEvalStatus::Inconclusive, widest, "precision cap reached"};
}

std::optional<bool> eval_cond_real(const CondPtr& cond, const std::map<std::string, Rat>& point) {
    if (auto* cmp = std::get_if<CmpNode>(&cond->node)) {
        // chained comparison: every adjacent pair must satisfy the relation
        for (size_t i = 0; i + 1 < cmp->operands.size(); ++i) {
            RealEvalResult a = eval_real(cmp->operands[i], point, 80);
            RealEvalResult b = eval_real(cmp->operands[i + 1], point, 80);
            if (a.status == RealEvalStatus::DomainViolation ||
                b.status == RealEvalStatus::DomainViolation)
                return std::nullopt;
            if (!a.enclosure || !b.enclosure) return std::nullopt;
            const Interval& x = *a.enclosure;
            const Interval& y = *b.enclosure;
            auto decide = [&](bool lt_holds, bool eq_holds, bool gt_holds) -> std::optional<bool> {
                if (x.hi < y.lo) return lt_holds;
                if (y.hi < x.lo) return gt_holds;
                if (x.is_point() && y.is_point()) return eq_holds;
                return std::nullopt;  // overlapping enclosures, undecided
            };
            std::optional<bool> step;
            switch (cmp->op) {
                case CmpOp::Lt: step = decide(true, false, false); break;
                case CmpOp::Le: step = decide(true, true, false); break;
                case CmpOp::Gt: step = decide(false, false, true); break;
                case CmpOp::Ge: step = decide(false, true, true); break;
                case CmpOp::Eq: step = decide(false, true, false); break;
                case CmpOp::Ne: step = decide(true, false, true); break;
            }
            if (!step) return std::nullopt;
            if (!*step) return false;
        }
        return true;
    }
    if (auto* a = std::get_if<AndNode>(&cond->node)) {
        for (auto& op : a->operands) {
            auto r = eval_cond_real(op, point);
            if (!r) return std::nullopt;
            if (!*r) return false;
        }
        return true;
    }
    if (auto* o = std::get_if<OrNode>(&cond->node)) {
        for (auto& op : o->operands) {
            auto r = eval_cond_real(op, point);
            if (!r) return std::nullopt;
            if (*r) return true;
        }
        return false;
    }
    auto r = eval_cond_real(std::get<NotNode>(cond->node).operand, point);
    if (!r) return std::nullopt;
    return !*r;
}

RoundedReal eval_real_rounded(const ExprPtr& expr, const std::map<std::string, Rat>& point) {
    ExprPtr e = expr;
    std::map<std::string, Rat> pt = point;
    // resolve conditionals outermost-first
    while (auto* i = std::get_if<IfNode>(&e->node)) {
        auto taken = eval_cond_real(i->cond, pt);
        if (!taken) return {std::nullopt, false};
        e = *taken ? i->then_branch : i->else_branch;
    }
    if (contains_if(e)) return {std::nullopt, false};  // nested conditional: inconclusive
    for (long target = 80; target <= kRealEvalMaxBits; target *= 2) {
        RealEvalResult r = eval_real(e, pt, target);
        if (r.status == RealEvalStatus::DomainViolation) return {std::nullopt, true};
        if (!r.enclosure) return {std::nullopt, false};
        double lo = r.enclosure->lo.to_double_nearest();
        double hi = r.enclosure->hi.to_double_nearest();
        if (lo == hi) return {lo == 0.0 ? 0.0 : lo, false};
        if (r.status == RealEvalStatus::Inconclusive) return {std::nullopt, false};
    }
    return {std::nullopt, false};
}

}  // namespace fpv
