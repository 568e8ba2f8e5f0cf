#include <cctype>
#include <optional>
#include <sstream>

#include "fpv/fpcore.hpp"

namespace fpv {

namespace {

struct Token {
    enum Kind { LParen, RParen, Symbol, Number, String, End } kind;
    std::string text;
    int line, col;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : s_(text) {}

    Token peek() {
        if (!cached_) cached_ = lex();
        return *cached_;
    }
    Token next() {
        Token t = peek();
        cached_.reset();
        return t;
    }
    size_t offset_of_peek() {
        peek();
        return tok_start_;
    }
    size_t offset_after_last() const { return pos_; }
    const std::string& source() const { return s_; }

private:
    Token lex() {
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (c == ';') {
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
                continue;
            }
            if (c == '\n') { ++line_; col_ = 1; ++pos_; continue; }
            if (std::isspace(static_cast<unsigned char>(c))) { ++col_; ++pos_; continue; }
            break;
        }
        tok_start_ = pos_;
        if (pos_ >= s_.size()) return {Token::End, "", line_, col_};
        int line = line_, col = col_;
        char c = s_[pos_];
        if (c == '(' || c == '[') { advance(); return {Token::LParen, "(", line, col}; }
        if (c == ')' || c == ']') { advance(); return {Token::RParen, ")", line, col}; }
        if (c == '"') {
            std::string out;
            advance();
            while (pos_ < s_.size() && s_[pos_] != '"') {
                if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) advance();
                out += s_[pos_];
                advance();
            }
            if (pos_ >= s_.size()) throw ParseError("unterminated string", line, col);
            advance();
            return {Token::String, out, line, col};
        }
        std::string out;
        while (pos_ < s_.size()) {
            char d = s_[pos_];
            if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' ||
                d == '[' || d == ']' || d == ';' || d == '"')
                break;
            out += d;
            advance();
        }
        bool numeric = false;
        if (!out.empty()) {
            char f = out[0];
            numeric = std::isdigit(static_cast<unsigned char>(f)) ||
                      ((f == '-' || f == '+') && out.size() > 1 &&
                       (std::isdigit(static_cast<unsigned char>(out[1])) || out[1] == '.'));
        }
        return {numeric ? Token::Number : Token::Symbol, out, line, col};
    }

    void advance() { ++pos_; ++col_; }

    const std::string& s_;
    size_t pos_ = 0;
    size_t tok_start_ = 0;
    int line_ = 1, col_ = 1;
    std::optional<Token> cached_;
};

std::optional<UnOp> lookup_un_op(const std::string& s) {
    if (s == "sqrt") return UnOp::Sqrt;
    if (s == "cbrt") return UnOp::Cbrt;
    if (s == "exp") return UnOp::Exp;
    if (s == "log") return UnOp::Log;
    if (s == "sin") return UnOp::Sin;
    if (s == "cos") return UnOp::Cos;
    if (s == "tan") return UnOp::Tan;
    if (s == "fabs") return UnOp::Fabs;
    return std::nullopt;
}

std::optional<BinOp> lookup_bin_op(const std::string& s) {
    if (s == "+") return BinOp::Add;
    if (s == "-") return BinOp::Sub;
    if (s == "*") return BinOp::Mul;
    if (s == "/") return BinOp::Div;
    if (s == "pow") return BinOp::Pow;
    return std::nullopt;
}

std::optional<CmpOp> lookup_cmp_op(const std::string& s) {
    if (s == "<") return CmpOp::Lt;
    if (s == "<=") return CmpOp::Le;
    if (s == ">") return CmpOp::Gt;
    if (s == ">=") return CmpOp::Ge;
    if (s == "==") return CmpOp::Eq;
    if (s == "!=") return CmpOp::Ne;
    return std::nullopt;
}

class Parser {
public:
    Parser(const std::string& text, std::vector<std::string>& warnings)
        : lex_(text), warnings_(warnings) {}

    std::vector<FpCoreProgram> parse_file() {
        std::vector<FpCoreProgram> out;
        while (lex_.peek().kind != Token::End) {
            expect(Token::LParen, "expected '('");
            Token head = lex_.next();
            if (head.kind != Token::Symbol || head.text != "FPCore")
                throw ParseError("expected FPCore form", head.line, head.col);
            out.push_back(parse_core(static_cast<int>(out.size())));
        }
        return out;
    }

private:
    Token expect(Token::Kind kind, const std::string& msg) {
        Token t = lex_.next();
        if (t.kind != kind) throw ParseError(msg + ", got '" + t.text + "'", t.line, t.col);
        return t;
    }

    // Skips one s-expression, returning its raw source text.
    std::string skip_value_raw() {
        size_t start = lex_.offset_of_peek();
        Token t = lex_.next();
        if (t.kind == Token::End) throw ParseError("unexpected end of input", t.line, t.col);
        if (t.kind == Token::LParen) {
            int depth = 1;
            while (depth > 0) {
                Token u = lex_.next();
                if (u.kind == Token::End) throw ParseError("unbalanced parens", u.line, u.col);
                if (u.kind == Token::LParen) ++depth;
                if (u.kind == Token::RParen) --depth;
            }
        } else if (t.kind == Token::RParen) {
            throw ParseError("unexpected ')'", t.line, t.col);
        } else if (t.kind == Token::String) {
            return "\"" + t.text + "\"";
        }
        size_t end = lex_.offset_after_last();
        return lex_.source().substr(start, end - start);
    }

    FpCoreProgram parse_core(int index) {
        FpCoreProgram prog;
        Token t = lex_.peek();
        if (t.kind == Token::Symbol) {  // optional core identifier
            prog.name = lex_.next().text;
            prog.name_origin = NameOrigin::Symbol;
        }
        expect(Token::LParen, "expected argument list");
        while (lex_.peek().kind != Token::RParen) {
            Token a = lex_.next();
            if (a.kind == Token::LParen) {
                // annotated argument: (! props... name)
                warnings_.push_back("discarding '!' annotation on argument");
                std::string name;
                while (lex_.peek().kind != Token::RParen) {
                    Token u = lex_.next();
                    if (u.kind == Token::Symbol) name = u.text;
                    else if (u.kind == Token::LParen) { int d = 1; while (d) { Token v = lex_.next(); if (v.kind == Token::LParen) ++d; if (v.kind == Token::RParen) --d; } }
                }
                lex_.next();
                if (name.empty() || name == "!")
                    throw ParseError("bad annotated argument", a.line, a.col);
                prog.args.push_back(name);
                continue;
            }
            if (a.kind != Token::Symbol)
                throw ParseError("expected argument name", a.line, a.col);
            prog.args.push_back(a.text);
        }
        lex_.next();  // close args
        for (size_t i = 0; i < prog.args.size(); ++i)
            for (size_t j = i + 1; j < prog.args.size(); ++j)
                if (prog.args[i] == prog.args[j])
                    throw ParseError("duplicate argument '" + prog.args[i] + "'", t.line, t.col);

        // properties
        while (lex_.peek().kind == Token::Symbol && lex_.peek().text.size() > 1 &&
               lex_.peek().text[0] == ':') {
            Token key_tok = lex_.next();
            std::string key = key_tok.text.substr(1);
            for (auto& [k, _] : prog.properties)
                if (k == key)
                    throw ParseError("duplicate property key ':" + key + "'", key_tok.line,
                                     key_tok.col);
            if (key == "pre") {
                std::string raw = skip_value_raw();
                if (!install_precondition(prog, raw)) prog.properties.emplace_back("pre", raw);
                continue;
            }
            std::string raw = skip_value_raw();
            if (key == "name") {
                std::string nm = raw;
                if (nm.size() >= 2 && nm.front() == '"' && nm.back() == '"')
                    nm = nm.substr(1, nm.size() - 2);
                prog.name = nm;
                prog.name_origin = NameOrigin::Property;
            }
            prog.properties.emplace_back(key, raw);
        }

        prog.body = parse_expr();
        expect(Token::RParen, "expected ')' closing FPCore");

        if (prog.name.empty()) prog.name = "core" + std::to_string(index);

        // scope check
        auto fv = free_vars(prog.body);
        for (auto& v : fv) {
            bool found = false;
            for (auto& a : prog.args)
                if (a == v) { found = true; break; }
            if (!found) throw ParseError("unbound variable '" + v + "'", t.line, t.col);
        }
        return prog;
    }

    // Attempts to read the raw :pre text as a conjunction of two-sided bounds
    // over the program arguments (all-or-nothing). Fills prog.precondition on
    // success.
    bool install_precondition(FpCoreProgram& prog, const std::string& raw) {
        std::vector<std::string> scratch;
        Parser sub(raw, scratch);
        CondPtr cond;
        try {
            cond = sub.parse_cond();
            if (sub.lex_.peek().kind != Token::End) return false;
        } catch (const ParseError&) {
            return false;
        }
        std::map<std::string, Interval> ranges;
        if (!collect_ranges(cond, ranges)) return false;
        if (ranges.size() != prog.args.size()) return false;
        for (auto& a : prog.args)
            if (!ranges.count(a)) return false;
        Precondition pc;
        pc.ranges = std::move(ranges);
        prog.precondition = std::move(pc);
        return true;
    }

    bool collect_ranges(const CondPtr& c, std::map<std::string, Interval>& out) {
        if (auto* a = std::get_if<AndNode>(&c->node)) {
            for (auto& op : a->operands)
                if (!collect_ranges(op, out)) return false;
            return true;
        }
        auto* cmp = std::get_if<CmpNode>(&c->node);
        if (!cmp || cmp->op != CmpOp::Le || cmp->operands.size() != 3) return false;
        auto* lo = std::get_if<ConstNode>(&cmp->operands[0]->node);
        auto* var = std::get_if<VarNode>(&cmp->operands[1]->node);
        auto* hi = std::get_if<ConstNode>(&cmp->operands[2]->node);
        if (!lo || !var || !hi) return false;
        if (hi->value < lo->value) return false;
        if (out.count(var->name)) return false;
        out.emplace(var->name, Interval(lo->value, hi->value));
        return true;
    }

    CondPtr parse_cond() {
        Token t = lex_.next();
        if (t.kind != Token::LParen) throw ParseError("expected condition", t.line, t.col);
        Token head = lex_.next();
        if (head.kind != Token::Symbol) throw ParseError("expected operator", head.line, head.col);
        if (head.text == "and" || head.text == "or") {
            std::vector<CondPtr> ops;
            while (lex_.peek().kind != Token::RParen) ops.push_back(parse_cond());
            lex_.next();
            if (head.text == "and")
                return std::make_shared<const Cond>(Cond{AndNode{std::move(ops)}});
            return std::make_shared<const Cond>(Cond{OrNode{std::move(ops)}});
        }
        if (head.text == "not") {
            CondPtr c = parse_cond();
            expect(Token::RParen, "expected ')'");
            return std::make_shared<const Cond>(Cond{NotNode{std::move(c)}});
        }
        auto cmp = lookup_cmp_op(head.text);
        if (!cmp) throw ParseError("unsupported condition operator '" + head.text + "'",
                                   head.line, head.col);
        std::vector<ExprPtr> ops;
        while (lex_.peek().kind != Token::RParen) ops.push_back(parse_expr());
        lex_.next();
        if (ops.size() < 2) throw ParseError("comparison needs two operands", head.line, head.col);
        return std::make_shared<const Cond>(Cond{CmpNode{*cmp, std::move(ops)}});
    }

    ExprPtr parse_expr() {
        Token t = lex_.next();
        if (t.kind == Token::Number) {
            auto r = Rat::parse(t.text);
            if (!r) throw ParseError("bad numeric literal '" + t.text + "'", t.line, t.col);
            return make_const(*r);
        }
        if (t.kind == Token::Symbol) {
            if (t.text == "PI" || t.text == "E" || t.text == "INFINITY" || t.text == "NAN")
                throw ParseError("unsupported constant '" + t.text + "'", t.line, t.col);
            return make_var(t.text);
        }
        if (t.kind != Token::LParen) throw ParseError("expected expression", t.line, t.col);
        Token head = lex_.next();
        if (head.kind != Token::Symbol)
            throw ParseError("expected operator", head.line, head.col);
        const std::string& op = head.text;

        if (op == "!") {
            warnings_.push_back("discarding '!' annotation at line " + std::to_string(head.line));
            // properties then a single expression
            while (lex_.peek().kind == Token::Symbol && !lex_.peek().text.empty() &&
                   lex_.peek().text[0] == ':') {
                lex_.next();
                skip_value_raw();
            }
            ExprPtr inner = parse_expr();
            expect(Token::RParen, "expected ')'");
            return inner;
        }
        if (op == "let" || op == "let*") {
            expect(Token::LParen, "expected binding list");
            std::vector<std::pair<std::string, ExprPtr>> bindings;
            while (lex_.peek().kind != Token::RParen) {
                expect(Token::LParen, "expected binding");
                Token name = expect(Token::Symbol, "expected binding name");
                ExprPtr rhs = parse_expr();
                expect(Token::RParen, "expected ')' closing binding");
                bindings.emplace_back(name.text, std::move(rhs));
            }
            lex_.next();
            ExprPtr body = parse_expr();
            expect(Token::RParen, "expected ')' closing let");
            if (op == "let*" && bindings.size() > 1) {
                // desugar to nested parallel lets
                ExprPtr acc = body;
                for (auto it = bindings.rbegin(); it != bindings.rend(); ++it)
                    acc = make_let({*it}, acc);
                return acc;
            }
            return make_let(std::move(bindings), std::move(body));
        }
        if (op == "if") {
            CondPtr cond = parse_cond();
            ExprPtr then_b = parse_expr();
            ExprPtr else_b = parse_expr();
            expect(Token::RParen, "expected ')' closing if");
            return make_if(std::move(cond), std::move(then_b), std::move(else_b));
        }

        std::vector<ExprPtr> operands;
        while (lex_.peek().kind != Token::RParen) operands.push_back(parse_expr());
        lex_.next();

        if (op == "-" && operands.size() == 1) return make_unary(UnOp::Neg, operands[0]);
        if (auto un = lookup_un_op(op)) {
            if (operands.size() != 1)
                throw ParseError("'" + op + "' takes one operand", head.line, head.col);
            return make_unary(*un, operands[0]);
        }
        if (auto bin = lookup_bin_op(op)) {
            if (operands.size() < 2)
                throw ParseError("'" + op + "' takes two operands", head.line, head.col);
            if (operands.size() > 2 && (*bin == BinOp::Add || *bin == BinOp::Mul)) {
                ExprPtr acc = operands[0];
                for (size_t i = 1; i < operands.size(); ++i)
                    acc = make_binary(*bin, acc, operands[i]);
                return acc;
            }
            if (operands.size() != 2)
                throw ParseError("'" + op + "' takes two operands", head.line, head.col);
            return make_binary(*bin, operands[0], operands[1]);
        }
        throw ParseError("unsupported operator '" + op + "'", head.line, head.col);
    }

    Lexer lex_;
    std::vector<std::string>& warnings_;
};

}  // namespace

ParseResult parse_fpcore(const std::string& text) {
    ParseResult result;
    Parser p(text, result.warnings);
    result.programs = p.parse_file();
    return result;
}

Sidecar parse_sidecar(const std::string& text) {
    Sidecar out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        // tokenize, honoring double-quoted names
        std::vector<std::string> fields;
        size_t i = 0;
        while (i < line.size()) {
            if (std::isspace(static_cast<unsigned char>(line[i]))) { ++i; continue; }
            std::string f;
            if (line[i] == '"') {
                ++i;
                while (i < line.size() && line[i] != '"') f += line[i++];
                if (i >= line.size())
                    throw ParseError("unterminated quoted name in sidecar", lineno, 1);
                ++i;
            } else {
                while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
                    f += line[i++];
            }
            fields.push_back(f);
        }
        if (fields.empty()) continue;
        if (fields.size() != 4)
            throw ParseError("sidecar line needs: name variable lo hi", lineno, 1);
        auto lo = Rat::parse(fields[2]), hi = Rat::parse(fields[3]);
        if (!lo || !hi) throw ParseError("bad sidecar endpoint", lineno, 1);
        if (*hi < *lo) throw ParseError("sidecar range with lo > hi", lineno, 1);
        out[fields[0]][fields[1]] = Interval(*lo, *hi);
    }
    return out;
}

bool is_permitted_default_endpoint(const Rat& v) {
    static const long exps[] = {-20, -10, 0, 10, 20};
    for (long e : exps) {
        Rat mag = Rat(10).pow_int(e);
        if (v == mag || v == -mag) return true;
    }
    return false;
}

FpCoreProgram default_precondition(const FpCoreProgram& program, const Sidecar& sidecar,
                                   const Interval& fallback) {
    if (program.precondition) return program;
    FpCoreProgram out = program;
    auto it = sidecar.find(program.name);
    if (it != sidecar.end()) {
        Precondition pc;
        for (auto& arg : program.args) {
            auto r = it->second.find(arg);
            if (r == it->second.end())
                throw std::runtime_error("sidecar for '" + program.name +
                                         "' does not range variable '" + arg + "'");
            pc.ranges.emplace(arg, r->second);
        }
        out.precondition = std::move(pc);
        return out;
    }
    Precondition pc;
    for (auto& arg : program.args) pc.ranges.emplace(arg, fallback);
    out.precondition = std::move(pc);
    return out;
}

}  // namespace fpv
