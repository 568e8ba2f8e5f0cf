#include "fpv/smt.hpp"

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fpv/analysis.hpp"

namespace fpv {

namespace {

std::string smt_rat(const Rat& v) {
    std::string mag;
    Rat a = v.abs();
    if (a.is_integer())
        mag = a.num().get_str() + ".0";
    else
        mag = "(/ " + a.num().get_str() + ".0 " + a.den().get_str() + ".0)";
    if (v.sign() < 0) return "(- " + mag + ")";
    return mag;
}

struct SmtEmitter {
    std::ostringstream defs;
    int next_aux = 0;
    const std::map<std::string, Interval>* ranges;
    long prec;

    std::string fresh(const char* tag) { return std::string("_") + tag + std::to_string(next_aux++); }

    // Relaxes a subterm to a fresh variable bounded by its interval enclosure.
    std::string relax(const ExprPtr& e, const std::map<std::string, Interval>& env) {
        Interval r = range_eval(e, env, prec);
        std::string v = fresh("t");
        defs << "(declare-const " << v << " Real)\n";
        defs << "(assert (and (>= " << v << " " << smt_rat(r.lo) << ") (<= " << v << " "
             << smt_rat(r.hi) << ")))\n";
        return v;
    }

    std::string emit(const ExprPtr& e, const std::map<std::string, Interval>& env,
                     std::map<std::string, std::string> lets) {
        if (auto* c = std::get_if<ConstNode>(&e->node)) return smt_rat(c->value);
        if (auto* v = std::get_if<VarNode>(&e->node)) {
            auto it = lets.find(v->name);
            return it != lets.end() ? it->second : v->name;
        }
        if (auto* u = std::get_if<UnaryNode>(&e->node)) {
            switch (u->op) {
                case UnOp::Neg: return "(- " + emit(u->child, env, lets) + ")";
                case UnOp::Fabs: {
                    std::string c = emit(u->child, env, lets);
                    return "(ite (>= " + c + " 0.0) " + c + " (- " + c + "))";
                }
                case UnOp::Sqrt: {
                    std::string c = emit(u->child, env, lets);
                    std::string v = fresh("sqrt");
                    defs << "(declare-const " << v << " Real)\n";
                    defs << "(assert (and (>= " << v << " 0.0) (= (* " << v << " " << v
                         << ") " << c << ")))\n";
                    return v;
                }
                case UnOp::Cbrt: {
                    std::string c = emit(u->child, env, lets);
                    std::string v = fresh("cbrt");
                    defs << "(declare-const " << v << " Real)\n";
                    defs << "(assert (= (* " << v << " (* " << v << " " << v << ")) " << c
                         << "))\n";
                    return v;
                }
                default: return relax(e, env);  // exp/log/sin/cos/tan: interval relaxation
            }
        }
        if (auto* b = std::get_if<BinaryNode>(&e->node)) {
            if (b->op == BinOp::Pow) {
                auto* n = std::get_if<ConstNode>(&b->right->node);
                if (n && n->value.is_integer() && n->value.num().fits_slong_p()) {
                    long k = n->value.num().get_si();
                    if (k == 0) return "1.0";
                    std::string base = emit(b->left, env, lets);
                    std::string acc = base;
                    for (long i = 1; i < (k < 0 ? -k : k); ++i)
                        acc = "(* " + acc + " " + base + ")";
                    if (k < 0) return "(/ 1.0 " + acc + ")";
                    return acc;
                }
                return relax(e, env);
            }
            std::string l = emit(b->left, env, lets);
            std::string r = emit(b->right, env, lets);
            const char* op = b->op == BinOp::Add   ? "+"
                             : b->op == BinOp::Sub ? "-"
                             : b->op == BinOp::Mul ? "*"
                                                   : "/";
            return std::string("(") + op + " " + l + " " + r + ")";
        }
        if (auto* l = std::get_if<LetNode>(&e->node)) {
            auto scope = lets;
            for (auto& [name, rhs] : l->bindings) {
                std::string v = fresh("let");
                defs << "(declare-const " << v << " Real)\n";
                defs << "(assert (= " << v << " " << emit(rhs, env, lets) << "))\n";
                scope[name] = v;
            }
            return emit(l->body, env, scope);
        }
        throw std::invalid_argument("emit_smt_query: conditional expression not supported");
    }
};

}  // namespace

std::string emit_smt_query(const FpCoreProgram& program, const Interval& candidate_range,
                           TightenSide side, const Rat& probe) {
    if (!program.precondition)
        throw std::invalid_argument("emit_smt_query requires a precondition");
    std::ostringstream os;
    os << "(set-logic QF_NRA)\n";
    os << "; benchmark: " << program.name << "\n";
    os << "; candidate range: [" << candidate_range.lo.to_sci(6) << ", "
       << candidate_range.hi.to_sci(6) << "]\n";
    for (auto& arg : program.args) os << "(declare-const " << arg << " Real)\n";
    for (auto& arg : program.args) {
        const Interval& r = program.precondition->ranges.at(arg);
        os << "(assert (and (>= " << arg << " " << smt_rat(r.lo) << ") (<= " << arg << " "
           << smt_rat(r.hi) << ")))\n";
    }
    SmtEmitter em;
    em.ranges = &program.precondition->ranges;
    em.prec = 128;
    std::string body = em.emit(program.body, program.precondition->ranges, {});
    os << em.defs.str();
    // unsat certifies: no input drives the expression beyond the probe
    if (side == TightenSide::Hi)
        os << "(assert (> " << body << " " << smt_rat(probe) << "))\n";
    else
        os << "(assert (< " << body << " " << smt_rat(probe) << "))\n";
    os << "(check-sat)\n";
    return os.str();
}

std::optional<SolverVerdict> run_smt_solver(const std::string& solver_path,
                                            const std::string& script) {
    char tmpl[] = "/tmp/fpv_smt_XXXXXX";
    int fd = mkstemp(tmpl);
    if (fd < 0) return std::nullopt;
    {
        std::ofstream out(tmpl);
        out << script;
    }
    close(fd);
    std::string cmd = solver_path + " " + tmpl + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        std::remove(tmpl);
        return std::nullopt;
    }
    std::string output;
    char buf[256];
    while (fgets(buf, sizeof buf, pipe)) output += buf;
    int rc = pclose(pipe);
    std::remove(tmpl);
    if (rc < 0) return std::nullopt;
    if (output.find("unsat") != std::string::npos) return SolverVerdict::Unsat;
    if (output.find("sat") != std::string::npos) return SolverVerdict::Sat;
    return SolverVerdict::Unknown;
}

Interval smt_tighten_range(const FpCoreProgram& program, const Interval& range,
                           const std::string& solver_path, int probes_per_side) {
    Interval current = range;
    for (TightenSide side : {TightenSide::Hi, TightenSide::Lo}) {
        Rat good = side == TightenSide::Hi ? current.hi : current.lo;  // proven bound
        Rat bad = side == TightenSide::Hi ? current.lo : current.hi;   // not provable past here
        for (int i = 0; i < probes_per_side; ++i) {
            Rat probe = (good + bad) / Rat(2);
            auto verdict = run_smt_solver(solver_path, emit_smt_query(program, current, side, probe));
            if (!verdict) return current;  // solver unavailable
            if (*verdict == SolverVerdict::Unsat)
                good = probe;
            else
                bad = probe;
        }
        if (side == TightenSide::Hi)
            current = Interval(current.lo, good);
        else
            current = Interval(good, current.hi);
    }
    return current;
}

}  // namespace fpv
