#include "fpv/eval_f64.hpp"

#include <cmath>
#include <stdexcept>

namespace fpv {

namespace {

double eval_rec(const ExprPtr& e, const std::map<std::string, double>& point,
                std::map<std::string, double>& lets, bool& invalid) {
    if (auto* c = std::get_if<ConstNode>(&e->node)) {
        double v = c->value.to_double_nearest();
        if (!std::isfinite(v)) invalid = true;
        return v;
    }
    if (auto* v = std::get_if<VarNode>(&e->node)) {
        auto it = lets.find(v->name);
        if (it != lets.end()) return it->second;
        auto p = point.find(v->name);
        if (p == point.end()) throw std::invalid_argument("eval_f64: unbound variable " + v->name);
        return p->second;
    }
    if (auto* u = std::get_if<UnaryNode>(&e->node)) {
        double a = eval_rec(u->child, point, lets, invalid);
        double r = 0;
        switch (u->op) {
            case UnOp::Neg: r = -a; break;
            case UnOp::Fabs: r = std::fabs(a); break;
            case UnOp::Sqrt: r = std::sqrt(a); break;
            case UnOp::Cbrt: r = std::cbrt(a); break;
            case UnOp::Exp: r = std::exp(a); break;
            case UnOp::Log: r = std::log(a); break;
            case UnOp::Sin: r = std::sin(a); break;
            case UnOp::Cos: r = std::cos(a); break;
            case UnOp::Tan: r = std::tan(a); break;
        }
        if (!std::isfinite(r)) invalid = true;
        return r;
    }
    if (auto* b = std::get_if<BinaryNode>(&e->node)) {
        double l = eval_rec(b->left, point, lets, invalid);
        double r = eval_rec(b->right, point, lets, invalid);
        double out = 0;
        switch (b->op) {
            case BinOp::Add: out = l + r; break;
            case BinOp::Sub: out = l - r; break;
            case BinOp::Mul: out = l * r; break;
            case BinOp::Div: out = l / r; break;
            case BinOp::Pow: out = std::pow(l, r); break;
        }
        if (!std::isfinite(out)) invalid = true;
        return out;
    }
    if (auto* l = std::get_if<LetNode>(&e->node)) {
        std::map<std::string, double> scope = lets;
        for (auto& [name, rhs] : l->bindings)
            scope[name] = eval_rec(rhs, point, lets, invalid);
        return eval_rec(l->body, point, scope, invalid);
    }
    auto& i = std::get<IfNode>(e->node);
    std::map<std::string, double> merged = point;
    for (auto& [k, v] : lets) merged[k] = v;
    bool taken = eval_cond_f64(i.cond, merged, invalid);
    return eval_rec(taken ? i.then_branch : i.else_branch, point, lets, invalid);
}

}  // namespace

bool eval_cond_f64(const CondPtr& cond, const std::map<std::string, double>& point,
                   bool& saw_invalid) {
    if (auto* cmp = std::get_if<CmpNode>(&cond->node)) {
        std::map<std::string, double> lets;
        std::vector<double> vals;
        for (auto& op : cmp->operands)
            vals.push_back(eval_rec(op, point, lets, saw_invalid));
        for (size_t i = 0; i + 1 < vals.size(); ++i) {
            double a = vals[i], b = vals[i + 1];
            if (std::isnan(a) || std::isnan(b)) saw_invalid = true;
            bool ok = false;
            switch (cmp->op) {
                case CmpOp::Lt: ok = a < b; break;
                case CmpOp::Le: ok = a <= b; break;
                case CmpOp::Gt: ok = a > b; break;
                case CmpOp::Ge: ok = a >= b; break;
                case CmpOp::Eq: ok = a == b; break;
                case CmpOp::Ne: ok = a != b; break;
            }
            if (!ok) return false;
        }
        return true;
    }
    if (auto* a = std::get_if<AndNode>(&cond->node)) {
        for (auto& op : a->operands)
            if (!eval_cond_f64(op, point, saw_invalid)) return false;
        return true;
    }
    if (auto* o = std::get_if<OrNode>(&cond->node)) {
        for (auto& op : o->operands)
            if (eval_cond_f64(op, point, saw_invalid)) return true;
        return false;
    }
    return !eval_cond_f64(std::get<NotNode>(cond->node).operand, point, saw_invalid);
}

F64Result eval_f64(const ExprPtr& expr, const std::map<std::string, double>& point) {
    bool invalid = false;
    std::map<std::string, double> lets;
    double v = eval_rec(expr, point, lets, invalid);
    return {v, !invalid};
}

}  // namespace fpv
