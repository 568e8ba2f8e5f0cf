#include "fpv/expr.hpp"

#include <stdexcept>

namespace fpv {

const char* un_op_name(UnOp op) {
    switch (op) {
        case UnOp::Neg: return "-";
        case UnOp::Sqrt: return "sqrt";
        case UnOp::Cbrt: return "cbrt";
        case UnOp::Exp: return "exp";
        case UnOp::Log: return "log";
        case UnOp::Sin: return "sin";
        case UnOp::Cos: return "cos";
        case UnOp::Tan: return "tan";
        case UnOp::Fabs: return "fabs";
    }
    return "?";
}

const char* bin_op_name(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Pow: return "pow";
    }
    return "?";
}

const char* cmp_op_name(CmpOp op) {
    switch (op) {
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
        case CmpOp::Eq: return "==";
        case CmpOp::Ne: return "!=";
    }
    return "?";
}

ExprPtr make_const(Rat v) { return std::make_shared<const Expr>(Expr{ConstNode{std::move(v)}}); }
ExprPtr make_var(std::string name) { return std::make_shared<const Expr>(Expr{VarNode{std::move(name)}}); }
ExprPtr make_unary(UnOp op, ExprPtr c) { return std::make_shared<const Expr>(Expr{UnaryNode{op, std::move(c)}}); }
ExprPtr make_binary(BinOp op, ExprPtr l, ExprPtr r) {
    return std::make_shared<const Expr>(Expr{BinaryNode{op, std::move(l), std::move(r)}});
}
ExprPtr make_let(std::vector<std::pair<std::string, ExprPtr>> bindings, ExprPtr body) {
    return std::make_shared<const Expr>(Expr{LetNode{std::move(bindings), std::move(body)}});
}
ExprPtr make_if(CondPtr cond, ExprPtr t, ExprPtr e) {
    return std::make_shared<const Expr>(Expr{IfNode{std::move(cond), std::move(t), std::move(e)}});
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (a->node.index() != b->node.index()) return false;
    if (auto* ca = std::get_if<ConstNode>(&a->node))
        return ca->value == std::get<ConstNode>(b->node).value;
    if (auto* va = std::get_if<VarNode>(&a->node))
        return va->name == std::get<VarNode>(b->node).name;
    if (auto* ua = std::get_if<UnaryNode>(&a->node)) {
        auto& ub = std::get<UnaryNode>(b->node);
        return ua->op == ub.op && expr_equal(ua->child, ub.child);
    }
    if (auto* ba = std::get_if<BinaryNode>(&a->node)) {
        auto& bb = std::get<BinaryNode>(b->node);
        return ba->op == bb.op && expr_equal(ba->left, bb.left) && expr_equal(ba->right, bb.right);
    }
    if (auto* la = std::get_if<LetNode>(&a->node)) {
        auto& lb = std::get<LetNode>(b->node);
        if (la->bindings.size() != lb.bindings.size()) return false;
        for (size_t i = 0; i < la->bindings.size(); ++i) {
            if (la->bindings[i].first != lb.bindings[i].first) return false;
            if (!expr_equal(la->bindings[i].second, lb.bindings[i].second)) return false;
        }
        return expr_equal(la->body, lb.body);
    }
    auto& ia = std::get<IfNode>(a->node);
    auto& ib = std::get<IfNode>(b->node);
    return cond_equal(ia.cond, ib.cond) && expr_equal(ia.then_branch, ib.then_branch) &&
           expr_equal(ia.else_branch, ib.else_branch);
}

bool cond_equal(const CondPtr& a, const CondPtr& b) {
    if (a == b) return true;
    if (a->node.index() != b->node.index()) return false;
    if (auto* ca = std::get_if<CmpNode>(&a->node)) {
        auto& cb = std::get<CmpNode>(b->node);
        if (ca->op != cb.op || ca->operands.size() != cb.operands.size()) return false;
        for (size_t i = 0; i < ca->operands.size(); ++i)
            if (!expr_equal(ca->operands[i], cb.operands[i])) return false;
        return true;
    }
    auto list_eq = [](const std::vector<CondPtr>& x, const std::vector<CondPtr>& y) {
        if (x.size() != y.size()) return false;
        for (size_t i = 0; i < x.size(); ++i)
            if (!cond_equal(x[i], y[i])) return false;
        return true;
    };
    if (auto* aa = std::get_if<AndNode>(&a->node))
        return list_eq(aa->operands, std::get<AndNode>(b->node).operands);
    if (auto* oa = std::get_if<OrNode>(&a->node))
        return list_eq(oa->operands, std::get<OrNode>(b->node).operands);
    return cond_equal(std::get<NotNode>(a->node).operand, std::get<NotNode>(b->node).operand);
}

int node_count(const ExprPtr& e) {
    if (std::holds_alternative<ConstNode>(e->node) || std::holds_alternative<VarNode>(e->node))
        return 1;
    if (auto* u = std::get_if<UnaryNode>(&e->node)) return 1 + node_count(u->child);
    if (auto* b = std::get_if<BinaryNode>(&e->node))
        return 1 + node_count(b->left) + node_count(b->right);
    if (auto* l = std::get_if<LetNode>(&e->node)) {
        int n = 1 + node_count(l->body);
        for (auto& [_, rhs] : l->bindings) n += node_count(rhs);
        return n;
    }
    auto& i = std::get<IfNode>(e->node);
    return 1 + node_count(i.then_branch) + node_count(i.else_branch);
}

bool contains_if(const ExprPtr& e) {
    if (std::holds_alternative<IfNode>(e->node)) return true;
    if (auto* u = std::get_if<UnaryNode>(&e->node)) return contains_if(u->child);
    if (auto* b = std::get_if<BinaryNode>(&e->node))
        return contains_if(b->left) || contains_if(b->right);
    if (auto* l = std::get_if<LetNode>(&e->node)) {
        for (auto& [_, rhs] : l->bindings)
            if (contains_if(rhs)) return true;
        return contains_if(l->body);
    }
    return false;
}

bool contains_transcendental(const ExprPtr& e) {
    if (auto* u = std::get_if<UnaryNode>(&e->node)) {
        if (u->op != UnOp::Neg && u->op != UnOp::Fabs) return true;
        return contains_transcendental(u->child);
    }
    if (auto* b = std::get_if<BinaryNode>(&e->node)) {
        if (b->op == BinOp::Pow) return true;
        return contains_transcendental(b->left) || contains_transcendental(b->right);
    }
    if (auto* l = std::get_if<LetNode>(&e->node)) {
        for (auto& [_, rhs] : l->bindings)
            if (contains_transcendental(rhs)) return true;
        return contains_transcendental(l->body);
    }
    if (auto* i = std::get_if<IfNode>(&e->node))
        return contains_transcendental(i->then_branch) || contains_transcendental(i->else_branch);
    return false;
}

namespace {

void free_vars_rec(const ExprPtr& e, std::set<std::string>& bound, std::set<std::string>& out) {
    if (auto* v = std::get_if<VarNode>(&e->node)) {
        if (!bound.count(v->name)) out.insert(v->name);
        return;
    }
    if (auto* u = std::get_if<UnaryNode>(&e->node)) { free_vars_rec(u->child, bound, out); return; }
    if (auto* b = std::get_if<BinaryNode>(&e->node)) {
        free_vars_rec(b->left, bound, out);
        free_vars_rec(b->right, bound, out);
        return;
    }
    if (auto* l = std::get_if<LetNode>(&e->node)) {
        for (auto& [_, rhs] : l->bindings) free_vars_rec(rhs, bound, out);  // parallel let
        std::vector<std::string> added;
        for (auto& [name, _] : l->bindings)
            if (bound.insert(name).second) added.push_back(name);
        free_vars_rec(l->body, bound, out);
        for (auto& name : added) bound.erase(name);
        return;
    }
    if (auto* i = std::get_if<IfNode>(&e->node)) {
        std::vector<const Cond*> stack{i->cond.get()};
        while (!stack.empty()) {
            const Cond* c = stack.back();
            stack.pop_back();
            if (auto* cmp = std::get_if<CmpNode>(&c->node)) {
                for (auto& op : cmp->operands) free_vars_rec(op, bound, out);
            } else if (auto* a = std::get_if<AndNode>(&c->node)) {
                for (auto& op : a->operands) stack.push_back(op.get());
            } else if (auto* o = std::get_if<OrNode>(&c->node)) {
                for (auto& op : o->operands) stack.push_back(op.get());
            } else {
                stack.push_back(std::get<NotNode>(c->node).operand.get());
            }
        }
        free_vars_rec(i->then_branch, bound, out);
        free_vars_rec(i->else_branch, bound, out);
    }
}

void all_paths_rec(const ExprPtr& e, ExprPath& cur, std::vector<ExprPath>& out) {
    out.push_back(cur);
    auto descend = [&](const ExprPtr& child, int idx) {
        cur.push_back(idx);
        all_paths_rec(child, cur, out);
        cur.pop_back();
    };
    if (auto* u = std::get_if<UnaryNode>(&e->node)) {
        descend(u->child, 0);
    } else if (auto* b = std::get_if<BinaryNode>(&e->node)) {
        descend(b->left, 0);
        descend(b->right, 1);
    } else if (auto* l = std::get_if<LetNode>(&e->node)) {
        for (size_t i = 0; i < l->bindings.size(); ++i) descend(l->bindings[i].second, static_cast<int>(i));
        descend(l->body, static_cast<int>(l->bindings.size()));
    } else if (auto* i = std::get_if<IfNode>(&e->node)) {
        descend(i->then_branch, 0);
        descend(i->else_branch, 1);
    }
}

}  // namespace

std::set<std::string> free_vars(const ExprPtr& e) {
    std::set<std::string> bound, out;
    free_vars_rec(e, bound, out);
    return out;
}

std::string path_to_string(const ExprPath& p) {
    if (p.empty()) return "/";
    std::string s;
    for (int i : p) s += "/" + std::to_string(i);
    return s;
}

std::vector<ExprPath> all_paths(const ExprPtr& e) {
    std::vector<ExprPath> out;
    ExprPath cur;
    all_paths_rec(e, cur, out);
    return out;
}

ExprPtr subexpr_at(const ExprPtr& root, const ExprPath& path) {
    ExprPtr e = root;
    for (int idx : path) {
        if (auto* u = std::get_if<UnaryNode>(&e->node)) {
            if (idx != 0) throw std::out_of_range("subexpr_at: bad path");
            e = u->child;
        } else if (auto* b = std::get_if<BinaryNode>(&e->node)) {
            if (idx == 0) e = b->left;
            else if (idx == 1) e = b->right;
            else throw std::out_of_range("subexpr_at: bad path");
        } else if (auto* l = std::get_if<LetNode>(&e->node)) {
            if (idx >= 0 && idx < static_cast<int>(l->bindings.size())) e = l->bindings[idx].second;
            else if (idx == static_cast<int>(l->bindings.size())) e = l->body;
            else throw std::out_of_range("subexpr_at: bad path");
        } else if (auto* i = std::get_if<IfNode>(&e->node)) {
            if (idx == 0) e = i->then_branch;
            else if (idx == 1) e = i->else_branch;
            else throw std::out_of_range("subexpr_at: bad path");
        } else {
            throw std::out_of_range("subexpr_at: bad path");
        }
    }
    return e;
}

ExprPtr replace_at(const ExprPtr& root, const ExprPath& path, const ExprPtr& replacement) {
    if (path.empty()) return replacement;
    ExprPath rest(path.begin() + 1, path.end());
    int idx = path.front();
    if (auto* u = std::get_if<UnaryNode>(&root->node)) {
        return make_unary(u->op, replace_at(u->child, rest, replacement));
    }
    if (auto* b = std::get_if<BinaryNode>(&root->node)) {
        if (idx == 0) return make_binary(b->op, replace_at(b->left, rest, replacement), b->right);
        return make_binary(b->op, b->left, replace_at(b->right, rest, replacement));
    }
    if (auto* l = std::get_if<LetNode>(&root->node)) {
        auto bindings = l->bindings;
        if (idx < static_cast<int>(bindings.size())) {
            bindings[idx].second = replace_at(bindings[idx].second, rest, replacement);
            return make_let(std::move(bindings), l->body);
        }
        return make_let(std::move(bindings), replace_at(l->body, rest, replacement));
    }
    auto& i = std::get<IfNode>(root->node);
    if (idx == 0) return make_if(i.cond, replace_at(i.then_branch, rest, replacement), i.else_branch);
    return make_if(i.cond, i.then_branch, replace_at(i.else_branch, rest, replacement));
}

}  // namespace fpv
