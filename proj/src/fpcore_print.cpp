#include <cctype>
#include <sstream>

#include "fpv/fpcore.hpp"

namespace fpv {

namespace {

void print_expr(std::ostream& os, const ExprPtr& e);

void print_cond(std::ostream& os, const CondPtr& c) {
    if (auto* cmp = std::get_if<CmpNode>(&c->node)) {
        os << '(' << cmp_op_name(cmp->op);
        for (auto& op : cmp->operands) { os << ' '; print_expr(os, op); }
        os << ')';
        return;
    }
    if (auto* a = std::get_if<AndNode>(&c->node)) {
        os << "(and";
        for (auto& op : a->operands) { os << ' '; print_cond(os, op); }
        os << ')';
        return;
    }
    if (auto* o = std::get_if<OrNode>(&c->node)) {
        os << "(or";
        for (auto& op : o->operands) { os << ' '; print_cond(os, op); }
        os << ')';
        return;
    }
    os << "(not ";
    print_cond(os, std::get<NotNode>(c->node).operand);
    os << ')';
}

void print_expr(std::ostream& os, const ExprPtr& e) {
    if (auto* c = std::get_if<ConstNode>(&e->node)) {
        os << c->value.to_string();
        return;
    }
    if (auto* v = std::get_if<VarNode>(&e->node)) {
        os << v->name;
        return;
    }
    if (auto* u = std::get_if<UnaryNode>(&e->node)) {
        os << '(' << un_op_name(u->op) << ' ';
        print_expr(os, u->child);
        os << ')';
        return;
    }
    if (auto* b = std::get_if<BinaryNode>(&e->node)) {
        os << '(' << bin_op_name(b->op) << ' ';
        print_expr(os, b->left);
        os << ' ';
        print_expr(os, b->right);
        os << ')';
        return;
    }
    if (auto* l = std::get_if<LetNode>(&e->node)) {
        os << "(let (";
        bool first = true;
        for (auto& [name, rhs] : l->bindings) {
            if (!first) os << ' ';
            first = false;
            os << '(' << name << ' ';
            print_expr(os, rhs);
            os << ')';
        }
        os << ") ";
        print_expr(os, l->body);
        os << ')';
        return;
    }
    auto& i = std::get<IfNode>(e->node);
    os << "(if ";
    print_cond(os, i.cond);
    os << ' ';
    print_expr(os, i.then_branch);
    os << ' ';
    print_expr(os, i.else_branch);
    os << ')';
}

}  // namespace

std::string emit_expr(const ExprPtr& e) {
    std::ostringstream os;
    print_expr(os, e);
    return os.str();
}

std::string emit_fpcore(const FpCoreProgram& program) {
    std::ostringstream os;
    os << "(FPCore ";
    if (program.name_origin == NameOrigin::Symbol) os << program.name << ' ';
    os << '(';
    for (size_t i = 0; i < program.args.size(); ++i) {
        if (i) os << ' ';
        os << program.args[i];
    }
    os << ")";
    for (auto& [k, v] : program.properties) os << "\n  :" << k << ' ' << v;
    if (program.precondition) {
        os << "\n  :pre ";
        const auto& ranges = program.precondition->ranges;
        std::vector<std::string> conjuncts;
        for (auto& arg : program.args) {
            auto it = ranges.find(arg);
            if (it == ranges.end()) continue;
            conjuncts.push_back("(<= " + it->second.lo.to_string() + " " + arg + " " +
                                it->second.hi.to_string() + ")");
        }
        if (conjuncts.size() == 1) {
            os << conjuncts[0];
        } else {
            os << "(and";
            for (auto& c : conjuncts) os << ' ' << c;
            os << ')';
        }
    }
    os << "\n  " << emit_expr(program.body) << ")\n";
    return os.str();
}

namespace {

std::string scala_number(const Rat& v) {
    if (v.is_integer()) return v.num().get_str();
    std::string s = v.to_string();
    if (s.find('/') == std::string::npos) return s;  // exact decimal
    return "(" + v.num().get_str() + ".0 / " + v.den().get_str() + ".0)";
}

void scala_expr(std::ostream& os, const ExprPtr& e, int parent_prec, int indent);

void scala_binary(std::ostream& os, const BinaryNode& b, int parent_prec, int indent) {
    int prec = b.op == BinOp::Add || b.op == BinOp::Sub ? 1 : 2;
    bool paren = prec < parent_prec;
    if (paren) os << '(';
    scala_expr(os, b.left, prec, indent);
    switch (b.op) {
        case BinOp::Add: os << " + "; break;
        case BinOp::Sub: os << " - "; break;
        case BinOp::Mul: os << " * "; break;
        case BinOp::Div: os << " / "; break;
        case BinOp::Pow: break;
    }
    scala_expr(os, b.right, prec + 1, indent);
    if (paren) os << ')';
}

void scala_expr(std::ostream& os, const ExprPtr& e, int parent_prec, int indent) {
    if (auto* c = std::get_if<ConstNode>(&e->node)) {
        os << scala_number(c->value);
        return;
    }
    if (auto* v = std::get_if<VarNode>(&e->node)) {
        os << v->name;
        return;
    }
    if (auto* u = std::get_if<UnaryNode>(&e->node)) {
        if (u->op == UnOp::Neg) {
            os << "-";
            scala_expr(os, u->child, 3, indent);
            return;
        }
        os << un_op_name(u->op) << '(';
        scala_expr(os, u->child, 0, indent);
        os << ')';
        return;
    }
    if (auto* b = std::get_if<BinaryNode>(&e->node)) {
        if (b->op == BinOp::Pow) {
            os << "pow(";
            scala_expr(os, b->left, 0, indent);
            os << ", ";
            scala_expr(os, b->right, 0, indent);
            os << ')';
            return;
        }
        scala_binary(os, *b, parent_prec, indent);
        return;
    }
    if (auto* l = std::get_if<LetNode>(&e->node)) {
        std::string pad(indent, ' ');
        os << "{\n";
        for (auto& [name, rhs] : l->bindings) {
            os << pad << "  val " << name << " = ";
            scala_expr(os, rhs, 0, indent + 2);
            os << "\n";
        }
        os << pad << "  ";
        scala_expr(os, l->body, 0, indent + 2);
        os << "\n" << pad << "}";
        return;
    }
    throw std::runtime_error("emit_scala_dsl: conditionals are not representable");
}

std::string scala_ident(const std::string& name) {
    std::string out;
    for (char c : name)
        out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out = "f_" + out;
    return out;
}

void scala_function(std::ostream& os, const FpCoreProgram& p) {
    if (!p.precondition) throw std::runtime_error("emit_scala_dsl: missing precondition");
    os << "  def " << scala_ident(p.name) << "(";
    for (size_t i = 0; i < p.args.size(); ++i) {
        if (i) os << ", ";
        os << p.args[i] << ": Real";
    }
    os << "): Real = {\n    require(";
    bool first = true;
    for (auto& arg : p.args) {
        const Interval& r = p.precondition->ranges.at(arg);
        if (!first) os << " && ";
        first = false;
        os << scala_number(r.lo) << " <= " << arg << " && " << arg << " <= "
           << scala_number(r.hi);
    }
    os << ")\n    ";
    scala_expr(os, p.body, 0, 4);
    os << "\n  }\n";
}

}  // namespace

std::string emit_scala_dsl(const std::vector<FpCoreProgram>& programs,
                           const std::string& object_name) {
    std::ostringstream os;
    os << "import daisy.lang._\nimport Real._\n\nobject " << scala_ident(object_name) << " {\n";
    bool first = true;
    for (auto& p : programs) {
        if (!first) os << "\n";
        first = false;
        scala_function(os, p);
    }
    os << "}\n";
    return os.str();
}

std::string emit_scala_dsl(const FpCoreProgram& program) {
    return emit_scala_dsl(std::vector<FpCoreProgram>{program}, program.name);
}

}  // namespace fpv
