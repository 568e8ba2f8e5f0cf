#pragma once

#include <optional>
#include <string>

#include "fpv/expr.hpp"

namespace fpv {

enum class TightenSide { Lo, Hi };

// SMT-LIB 2 script over QF_NRA asserting the precondition and that the root
// expression lies beyond `probe` on the chosen side; `unsat` from an external
// solver certifies that the range can be tightened to the probe.
//
// sqrt and cbrt are encoded exactly through auxiliary variables; other
// transcendental subterms are relaxed to fresh variables constrained to a
// sound interval enclosure, which preserves the unsat certificate.
std::string emit_smt_query(const FpCoreProgram& program, const Interval& candidate_range,
                           TightenSide side, const Rat& probe);

enum class SolverVerdict { Sat, Unsat, Unknown };

// Runs an external SMT-LIB solver binary on the script. Returns nullopt if
// the binary could not be executed.
std::optional<SolverVerdict> run_smt_solver(const std::string& solver_path,
                                            const std::string& script);

// Binary-search range tightening driven by an external solver; at most
// `probes_per_side` queries per side. Returns the (possibly) tightened range.
Interval smt_tighten_range(const FpCoreProgram& program, const Interval& range,
                           const std::string& solver_path, int probes_per_side = 8);

}  // namespace fpv
