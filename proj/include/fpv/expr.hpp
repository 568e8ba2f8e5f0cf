#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fpv/interval.hpp"
#include "fpv/rational.hpp"

namespace fpv {

enum class UnOp { Neg, Sqrt, Cbrt, Exp, Log, Sin, Cos, Tan, Fabs };
enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };

const char* un_op_name(UnOp op);
const char* bin_op_name(BinOp op);
const char* cmp_op_name(CmpOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Cond;
using CondPtr = std::shared_ptr<const Cond>;

struct ConstNode { Rat value; };
struct VarNode { std::string name; };
struct UnaryNode { UnOp op; ExprPtr child; };
struct BinaryNode { BinOp op; ExprPtr left, right; };
struct LetNode {  // parallel bindings, FPCore `let` semantics
    std::vector<std::pair<std::string, ExprPtr>> bindings;
    ExprPtr body;
};
struct IfNode { CondPtr cond; ExprPtr then_branch, else_branch; };

struct Expr {
    std::variant<ConstNode, VarNode, UnaryNode, BinaryNode, LetNode, IfNode> node;
};

// Boolean condition language (used by `if` and `:pre`).
struct CmpNode { CmpOp op; std::vector<ExprPtr> operands; };  // chained, e.g. (<= a b c)
struct AndNode { std::vector<CondPtr> operands; };
struct OrNode { std::vector<CondPtr> operands; };
struct NotNode { CondPtr operand; };

struct Cond {
    std::variant<CmpNode, AndNode, OrNode, NotNode> node;
};

ExprPtr make_const(Rat v);
ExprPtr make_var(std::string name);
ExprPtr make_unary(UnOp op, ExprPtr c);
ExprPtr make_binary(BinOp op, ExprPtr l, ExprPtr r);
ExprPtr make_let(std::vector<std::pair<std::string, ExprPtr>> bindings, ExprPtr body);
ExprPtr make_if(CondPtr cond, ExprPtr t, ExprPtr e);

bool expr_equal(const ExprPtr& a, const ExprPtr& b);
bool cond_equal(const CondPtr& a, const CondPtr& b);
int node_count(const ExprPtr& e);
bool contains_if(const ExprPtr& e);
bool contains_transcendental(const ExprPtr& e);
std::set<std::string> free_vars(const ExprPtr& e);

// Path from the root: child indices. For Let, binding i is child i and the
// body is the last child. For If, cond operands are not addressable; then/else
// are children 0/1.
using ExprPath = std::vector<int>;

std::string path_to_string(const ExprPath& p);

// All expression positions in pre-order (root first).
std::vector<ExprPath> all_paths(const ExprPtr& e);
ExprPtr subexpr_at(const ExprPtr& root, const ExprPath& path);
ExprPtr replace_at(const ExprPtr& root, const ExprPath& path, const ExprPtr& replacement);

struct Precondition {
    std::map<std::string, Interval> ranges;
};

enum class NameOrigin { Generated, Symbol, Property };

struct FpCoreProgram {
    std::string name;
    NameOrigin name_origin = NameOrigin::Generated;
    std::vector<std::string> args;
    std::optional<Precondition> precondition;
    std::vector<std::pair<std::string, std::string>> properties;  // unparsed, in file order
    ExprPtr body;
};

}  // namespace fpv
