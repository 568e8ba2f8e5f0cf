#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpv/expr.hpp"

namespace fpv {

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(const std::string& msg, int line_, int col_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                             std::to_string(col_) + ")"),
          line(line_), col(col_) {}
};

struct ParseResult {
    std::vector<FpCoreProgram> programs;
    std::vector<std::string> warnings;  // e.g. discarded `!` annotations
};

// Parses every (FPCore ...) form in the text, in order.
ParseResult parse_fpcore(const std::string& text);

// Round-trip printer: parse(emit(p)) is structurally identical to p.
std::string emit_fpcore(const FpCoreProgram& program);
std::string emit_expr(const ExprPtr& e);

// Scala DSL translation; requires a precondition.
std::string emit_scala_dsl(const FpCoreProgram& program);
std::string emit_scala_dsl(const std::vector<FpCoreProgram>& programs,
                           const std::string& object_name);

// benchmark name -> (variable -> range)
using Sidecar = std::map<std::string, std::map<std::string, Interval>>;

// Lines: benchmark-name variable lo hi. Names with spaces may be double-quoted.
// '#' starts a comment.
Sidecar parse_sidecar(const std::string& text);

// Existing precondition wins; else sidecar entry (must cover every argument);
// else `fallback` applied to every argument.
FpCoreProgram default_precondition(const FpCoreProgram& program, const Sidecar& sidecar,
                                   const Interval& fallback = Interval(Rat(1), Rat(10).pow_int(10)));

// The permitted order-of-magnitude endpoints for fallback ranges.
bool is_permitted_default_endpoint(const Rat& v);

}  // namespace fpv
