#include "fpv/analysis.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "fpv/transcendental.hpp"

namespace fpv {

const char* alarm_name(AlarmKind k) {
    switch (k) {
        case AlarmKind::Div0: return "DIV0";
        case AlarmKind::SqrtNeg: return "SQRTNEG";
        case AlarmKind::LogDomain: return "LOGDOMAIN";
        case AlarmKind::NonIntPow: return "NONINT_POW";
        case AlarmKind::CondUnsupported: return "COND_UNSUPPORTED";
        case AlarmKind::CbrtSingular: return "CBRT_SINGULAR";
        case AlarmKind::FnUnsupported: return "FN_UNSUPPORTED";
    }
    return "?";
}

const char* alarm_cell_code(AlarmKind k) {
    switch (k) {
        case AlarmKind::Div0: return "DIV0";
        case AlarmKind::SqrtNeg: return "SQRTNEG";
        case AlarmKind::LogDomain: return "LOG";
        case AlarmKind::NonIntPow: return "POW";
        case AlarmKind::CondUnsupported: return "COND";
        case AlarmKind::CbrtSingular: return "CBRT";
        case AlarmKind::FnUnsupported: return "FN";
    }
    return "?";
}

AnalysisOutcome AnalysisOutcome::make_bound(Rat err, Interval r) {
    AnalysisOutcome o;
    o.kind = Kind::Bound;
    o.bound = ErrorBound{std::move(err)};
    o.range = std::move(r);
    return o;
}

AnalysisOutcome AnalysisOutcome::make_alarm(AlarmKind k, ExprPath path) {
    AnalysisOutcome o;
    o.kind = Kind::Alarm;
    o.alarm = Alarm{k, std::move(path)};
    return o;
}

AnalysisOutcome AnalysisOutcome::make_timeout() {
    AnalysisOutcome o;
    o.kind = Kind::Timeout;
    return o;
}

namespace {

struct AlarmExc {
    AlarmKind kind;
    ExprPath path;
};

struct TimeoutExc {};

// Per-node analysis state: real range R and worst-case absolute error e.
// The float range is R widened by +/-e.
struct NodeInfo {
    Interval range;
    Rat err;
    Interval float_range() const { return range.widened(err); }
};

class Analyzer {
public:
    Analyzer(const AnalysisParams& params, const Deadline& deadline)
        : p_(params), deadline_(deadline) {}

    NodeInfo analyze(const ExprPtr& e, const std::map<std::string, NodeInfo>& env) {
        poll();
        if (auto* c = std::get_if<ConstNode>(&e->node)) return const_info(c->value);
        if (auto* v = std::get_if<VarNode>(&e->node)) {
            auto it = env.find(v->name);
            if (it == env.end())
                throw std::invalid_argument("analyze: unbound variable " + v->name);
            return it->second;
        }
        if (auto* u = std::get_if<UnaryNode>(&e->node)) {
            path_.push_back(0);
            NodeInfo a = analyze(u->child, env);
            path_.pop_back();
            return unary(u->op, a);
        }
        if (auto* b = std::get_if<BinaryNode>(&e->node)) {
            if (b->op == BinOp::Pow) return power(*b, env);
            path_.push_back(0);
            NodeInfo l = analyze(b->left, env);
            path_.pop_back();
            path_.push_back(1);
            NodeInfo r = analyze(b->right, env);
            path_.pop_back();
            return binary(b->op, l, r);
        }
        if (auto* l = std::get_if<LetNode>(&e->node)) {
            std::map<std::string, NodeInfo> scope = env;
            for (size_t i = 0; i < l->bindings.size(); ++i) {
                path_.push_back(static_cast<int>(i));
                NodeInfo info = analyze(l->bindings[i].second, env);  // parallel bindings
                path_.pop_back();
                scope.insert_or_assign(l->bindings[i].first, std::move(info));
            }
            path_.push_back(static_cast<int>(l->bindings.size()));
            NodeInfo body = analyze(l->body, scope);
            path_.pop_back();
            return body;
        }
        throw AlarmExc{AlarmKind::CondUnsupported, path_};
    }

private:
    void poll() {
        if ((++polls_ & 0xFF) == 0 && deadline_.expired()) throw TimeoutExc{};
    }

    Rat rnd_term(const Interval& pre_round_float_range) const {
        return p_.unit_roundoff * pre_round_float_range.max_abs() + p_.denormal_term;
    }

    Rat lib_rnd_term(const Interval& pre_round_float_range) const {
        return p_.lib_factor * p_.unit_roundoff * pre_round_float_range.max_abs() +
               p_.denormal_term;
    }

    NodeInfo const_info(const Rat& c) const {
        double rounded = c.to_double_nearest();
        if (!std::isfinite(rounded)) throw AlarmExc{AlarmKind::FnUnsupported, path_};
        return {Interval(c), (Rat::of_double(rounded) - c).abs()};
    }

    NodeInfo unary(UnOp op, const NodeInfo& a) {
        const Interval fl_a = a.float_range();
        switch (op) {
            case UnOp::Neg: return {iv_neg(a.range), a.err};
            case UnOp::Fabs: return {iv_fabs(a.range), a.err};
            case UnOp::Sqrt: {
                if (fl_a.lo.sign() < 0) throw AlarmExc{AlarmKind::SqrtNeg, path_};
                Interval r = iv_sqrt(a.range, p_.precision_bits);
                Rat prop;
                if (fl_a.lo.is_zero()) {
                    // sub-Lipschitz bound sqrt(x+e) - sqrt(x) <= sqrt(e)
                    prop = iv_sqrt(Interval(a.err), p_.precision_bits).hi;
                } else {
                    Rat root_lo = iv_sqrt(Interval(fl_a.lo), p_.precision_bits).lo;
                    if (root_lo.sign() <= 0)
                        prop = iv_sqrt(Interval(a.err), p_.precision_bits).hi;
                    else
                        prop = a.err / (Rat(2) * root_lo);
                }
                return {r, prop + rnd_term(iv_sqrt(fl_a, p_.precision_bits))};
            }
            case UnOp::Cbrt: {
                if (fl_a.contains_zero()) throw AlarmExc{AlarmKind::CbrtSingular, path_};
                Interval r = iv_cbrt(a.range, p_.precision_bits);
                Rat m = fl_a.min_abs();
                Rat c_lo = iv_cbrt(Interval(m), p_.precision_bits).lo;
                if (c_lo.sign() <= 0) throw AlarmExc{AlarmKind::CbrtSingular, path_};
                Rat prop = a.err / (Rat(3) * c_lo * c_lo);
                return {r, prop + lib_rnd_term(iv_cbrt(fl_a, p_.precision_bits))};
            }
            case UnOp::Exp: {
                Interval r = iv_exp(a.range, p_.precision_bits);
                Interval fl_r = iv_exp(fl_a, p_.precision_bits);
                Rat lipschitz = iv_exp(Interval(fl_a.hi), p_.precision_bits).hi;
                return {r, lipschitz * a.err + lib_rnd_term(fl_r)};
            }
            case UnOp::Log: {
                if (fl_a.lo.sign() <= 0) throw AlarmExc{AlarmKind::LogDomain, path_};
                Interval r = iv_log(a.range, p_.precision_bits);
                Interval fl_r = iv_log(fl_a, p_.precision_bits);
                return {r, a.err / fl_a.lo + lib_rnd_term(fl_r)};
            }
            case UnOp::Sin: {
                Interval r = iv_sin(a.range, p_.precision_bits);
                Interval fl_r = iv_sin(fl_a, p_.precision_bits);
                return {r, a.err + lib_rnd_term(fl_r)};
            }
            case UnOp::Cos: {
                Interval r = iv_cos(a.range, p_.precision_bits);
                Interval fl_r = iv_cos(fl_a, p_.precision_bits);
                return {r, a.err + lib_rnd_term(fl_r)};
            }
            case UnOp::Tan: throw AlarmExc{AlarmKind::FnUnsupported, path_};
        }
        throw std::logic_error("unary: bad op");
    }

    NodeInfo mul_info(const NodeInfo& l, const NodeInfo& r) {
        Interval range = iv_mul(l.range, r.range);
        // maxAbs of a product interval factorizes exactly
        Rat fl_max = (l.range.max_abs() + l.err) * (r.range.max_abs() + r.err);
        Rat rnd = p_.unit_roundoff * fl_max + p_.denormal_term;
        Rat err = l.range.max_abs() * r.err + r.range.max_abs() * l.err + l.err * r.err + rnd;
        return {range, err};
    }

    NodeInfo div_info(const NodeInfo& l, const NodeInfo& r) {
        const Rat fl_r_min = r.range.min_abs() - r.err;  // minAbs(R widened by err)
        if (fl_r_min.sign() <= 0) throw AlarmExc{AlarmKind::Div0, path_};
        Interval inv_range = iv_div(Interval(Rat(1)), r.range);
        Rat inv_err = r.err / (r.range.min_abs() * fl_r_min);
        Interval range = iv_mul(l.range, inv_range);
        // maxAbs of a quotient interval is maxAbs(num) / minAbs(den)
        Rat fl_max = (l.range.max_abs() + l.err) / fl_r_min;
        Rat rnd = p_.unit_roundoff * fl_max + p_.denormal_term;
        Rat err = l.range.max_abs() * inv_err + inv_range.max_abs() * l.err +
                  l.err * inv_err + rnd;
        return {range, err};
    }

    NodeInfo binary(BinOp op, const NodeInfo& l, const NodeInfo& r) {
        switch (op) {
            case BinOp::Add: {
                Interval range = iv_add(l.range, r.range);
                // the float range is the real range widened by e_l + e_r
                Rat fl_max = range.max_abs() + l.err + r.err;
                Rat rnd = p_.unit_roundoff * fl_max + p_.denormal_term;
                return {range, l.err + r.err + rnd};
            }
            case BinOp::Sub: {
                Interval range = iv_sub(l.range, r.range);
                Rat fl_max = range.max_abs() + l.err + r.err;
                Rat rnd = p_.unit_roundoff * fl_max + p_.denormal_term;
                return {range, l.err + r.err + rnd};
            }
            case BinOp::Mul: return mul_info(l, r);
            case BinOp::Div: return div_info(l, r);
            case BinOp::Pow: break;
        }
        throw std::logic_error("binary: bad op");
    }

    NodeInfo power(const BinaryNode& b, const std::map<std::string, NodeInfo>& env) {
        auto* exp_const = std::get_if<ConstNode>(&b.right->node);
        if (!exp_const || !exp_const->value.is_integer() ||
            !exp_const->value.num().fits_slong_p())
            throw AlarmExc{AlarmKind::NonIntPow, path_};
        long n = exp_const->value.num().get_si();
        path_.push_back(0);
        NodeInfo base = analyze(b.left, env);
        path_.pop_back();
        if (n == 0) return {Interval(Rat(1)), Rat(0)};
        long mag = n < 0 ? -n : n;
        NodeInfo acc = base;
        for (long i = 1; i < mag; ++i) acc = mul_info(acc, base);  // repeated-mul expansion
        if (n < 0) return div_info({Interval(Rat(1)), Rat(0)}, acc);
        return acc;
    }

    const AnalysisParams& p_;
    const Deadline& deadline_;
    ExprPath path_;
    unsigned polls_ = 0;
};

std::map<std::string, NodeInfo> input_env(const Precondition& pre, const AnalysisParams& p) {
    std::map<std::string, NodeInfo> env;
    for (auto& [name, range] : pre.ranges) {
        Rat err = p.inputs_rounded ? p.unit_roundoff * range.max_abs() + p.denormal_term : Rat(0);
        env.emplace(name, NodeInfo{range, err});
    }
    return env;
}

AnalysisOutcome run_on_box(const FpCoreProgram& program, const Precondition& box,
                           const AnalysisParams& params, const Deadline& deadline) {
    if (deadline.expired()) return AnalysisOutcome::make_timeout();
    try {
        Analyzer an(params, deadline);
        NodeInfo root = an.analyze(program.body, input_env(box, params));
        return AnalysisOutcome::make_bound(root.err, root.range);
    } catch (const AlarmExc& a) {
        return AnalysisOutcome::make_alarm(a.kind, a.path);
    } catch (const TimeoutExc&) {
        return AnalysisOutcome::make_timeout();
    }
}

void require_precondition(const FpCoreProgram& program) {
    if (!program.precondition)
        throw std::invalid_argument("analysis requires a precondition on '" + program.name + "'");
    for (auto& arg : program.args)
        if (!program.precondition->ranges.count(arg))
            throw std::invalid_argument("precondition misses variable '" + arg + "'");
}

}  // namespace

AnalysisOutcome analyze_ia(const FpCoreProgram& program, const AnalysisParams& params,
                           const Deadline& deadline) {
    require_precondition(program);
    return run_on_box(program, *program.precondition, params, deadline);
}

AnalysisOutcome analyze_ia(const FpCoreProgram& program, const AnalysisParams& params) {
    return analyze_ia(program, params, Deadline::after_ms(params.time_budget_ms));
}

std::vector<int> subdivision_counts(const std::vector<Rat>& widths, int k, long max_boxes) {
    const size_t n = widths.size();
    std::vector<int> counts(n, k < 1 ? 1 : k);
    if (max_boxes < 1) max_boxes = 1;
    auto product = [&]() {
        long prod = 1;
        for (int c : counts) {
            prod *= c;
            if (prod > (1L << 40)) return prod;  // saturate, still > any sane budget
        }
        return prod;
    };
    while (product() > max_boxes) {
        // coarsen the smallest-width variable that still has k > 1
        int best = -1;
        for (size_t i = 0; i < n; ++i) {
            if (counts[i] <= 1) continue;
            if (best < 0 || widths[i] < widths[best] ||
                (widths[i] == widths[best] && i > static_cast<size_t>(best)))
                best = static_cast<int>(i);
        }
        if (best < 0) break;
        counts[best] -= 1;
    }
    return counts;
}

AnalysisOutcome analyze_subdiv(const FpCoreProgram& program, const AnalysisParams& params,
                               const Deadline& deadline) {
    require_precondition(program);
    const auto& ranges = program.precondition->ranges;
    const std::vector<std::string>& vars = program.args;
    std::vector<Rat> widths;
    widths.reserve(vars.size());
    for (auto& v : vars) widths.push_back(ranges.at(v).width());
    std::vector<int> counts = subdivision_counts(widths, params.subdiv_per_var, params.max_boxes);
    long total = 1;
    for (int c : counts) total *= c;

    // row-major over the argument order: the last argument varies fastest
    auto box_at = [&](long flat) {
        Precondition box;
        for (size_t i = vars.size(); i-- > 0;) {
            long j = flat % counts[i];
            flat /= counts[i];
            const Interval& full = ranges.at(vars[i]);
            Rat w = full.width() / Rat(counts[i]);
            Rat lo = full.lo + w * Rat(static_cast<long>(j));
            Rat hi = j + 1 == counts[i] ? full.hi : full.lo + w * Rat(static_cast<long>(j + 1));
            box.ranges.emplace(vars[i], Interval(lo, hi));
        }
        return box;
    };

    struct Partial {
        std::optional<Rat> worst_err;
        std::optional<Interval> hull;
        long bad_index = -1;
        AnalysisOutcome bad = AnalysisOutcome::make_timeout();
    };

    int workers = params.box_workers;
    if (workers <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        workers = static_cast<int>(hw ? (hw > 8 ? 8 : hw) : 1);
    }
    if (total < 16) workers = 1;
    if (workers > total) workers = static_cast<int>(total);

    std::atomic<long> first_bad{total};
    std::vector<Partial> partials(static_cast<size_t>(workers));
    auto run_chunk = [&](int w) {
        Partial& out = partials[static_cast<size_t>(w)];
        long begin = total * w / workers;
        long end = total * (w + 1) / workers;
        for (long flat = begin; flat < end; ++flat) {
            if (first_bad.load(std::memory_order_relaxed) < flat) return;
            if (deadline.expired()) {
                out.bad_index = flat;
                out.bad = AnalysisOutcome::make_timeout();
                break;
            }
            AnalysisOutcome r = run_on_box(program, box_at(flat), params, deadline);
            if (!r.is_bound()) {
                out.bad_index = flat;
                out.bad = std::move(r);
                break;
            }
            if (!out.worst_err || *out.worst_err < r.bound->abs_err)
                out.worst_err = r.bound->abs_err;
            out.hull = out.hull ? iv_hull(*out.hull, *r.range) : *r.range;
        }
        if (out.bad_index >= 0) {
            long seen = first_bad.load();
            while (out.bad_index < seen &&
                   !first_bad.compare_exchange_weak(seen, out.bad_index)) {}
        }
    };

    if (workers == 1) {
        run_chunk(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_chunk, w);
        for (auto& t : pool) t.join();
    }

    // the earliest bad box decides, matching sequential evaluation order
    long bad_at = total;
    const Partial* bad_partial = nullptr;
    for (auto& part : partials) {
        if (part.bad_index >= 0 && part.bad_index < bad_at) {
            bad_at = part.bad_index;
            bad_partial = &part;
        }
    }
    if (bad_partial) return bad_partial->bad;

    std::optional<Rat> worst_err;
    std::optional<Interval> hull;
    for (auto& part : partials) {
        if (part.worst_err && (!worst_err || *worst_err < *part.worst_err))
            worst_err = part.worst_err;
        if (part.hull) hull = hull ? iv_hull(*hull, *part.hull) : *part.hull;
    }
    return AnalysisOutcome::make_bound(*worst_err, *hull);
}

AnalysisOutcome analyze_subdiv(const FpCoreProgram& program, const AnalysisParams& params) {
    return analyze_subdiv(program, params, Deadline::after_ms(params.time_budget_ms));
}

AnalysisOutcome analyze_portfolio(const FpCoreProgram& program, const AnalysisParams& params,
                                  const std::set<AnalysisMode>& modes, const Deadline& deadline) {
    std::optional<AnalysisOutcome> best;
    std::optional<AnalysisOutcome> first_alarm;
    bool any_timeout = false;
    for (AnalysisMode mode : {AnalysisMode::IA, AnalysisMode::Subdiv}) {
        if (!modes.count(mode)) continue;
        AnalysisOutcome r = mode == AnalysisMode::IA ? analyze_ia(program, params, deadline)
                                                     : analyze_subdiv(program, params, deadline);
        if (r.is_bound()) {
            if (!best || r.bound->abs_err < best->bound->abs_err) best = std::move(r);
        } else if (r.is_alarm()) {
            if (!first_alarm) first_alarm = std::move(r);
        } else {
            any_timeout = true;
        }
    }
    if (best) return *best;
    if (first_alarm) return *first_alarm;
    if (any_timeout) return AnalysisOutcome::make_timeout();
    throw std::invalid_argument("analyze_portfolio: empty mode set");
}

AnalysisOutcome analyze_portfolio(const FpCoreProgram& program, const AnalysisParams& params,
                                  const std::set<AnalysisMode>& modes) {
    return analyze_portfolio(program, params, modes, Deadline::after_ms(params.time_budget_ms));
}

namespace {

Interval range_eval_rec(const ExprPtr& e, const std::map<std::string, Interval>& env,
                        long prec) {
    if (auto* c = std::get_if<ConstNode>(&e->node)) return Interval(c->value);
    if (auto* v = std::get_if<VarNode>(&e->node)) {
        auto it = env.find(v->name);
        if (it == env.end())
            throw std::invalid_argument("range_eval: unbound variable " + v->name);
        return it->second;
    }
    if (auto* u = std::get_if<UnaryNode>(&e->node)) {
        Interval a = range_eval_rec(u->child, env, prec);
        switch (u->op) {
            case UnOp::Neg: return iv_neg(a);
            case UnOp::Fabs: return iv_fabs(a);
            case UnOp::Sqrt: return iv_sqrt(a, prec);
            case UnOp::Cbrt: return iv_cbrt(a, prec);
            case UnOp::Exp: return iv_exp(a, prec);
            case UnOp::Log: return iv_log(a, prec);
            case UnOp::Sin: return iv_sin(a, prec);
            case UnOp::Cos: return iv_cos(a, prec);
            case UnOp::Tan: {
                Interval c = iv_cos(a, prec);
                return iv_div(iv_sin(a, prec), c);
            }
        }
    }
    if (auto* b = std::get_if<BinaryNode>(&e->node)) {
        Interval l = range_eval_rec(b->left, env, prec);
        Interval r = range_eval_rec(b->right, env, prec);
        switch (b->op) {
            case BinOp::Add: return iv_add(l, r);
            case BinOp::Sub: return iv_sub(l, r);
            case BinOp::Mul: return iv_mul(l, r);
            case BinOp::Div: return iv_div(l, r);
            case BinOp::Pow: {
                auto* n = std::get_if<ConstNode>(&b->right->node);
                if (n && n->value.is_integer() && n->value.num().fits_slong_p())
                    return iv_pow_int(l, n->value.num().get_si());
                Interval lg = iv_log(l, prec);
                return iv_exp(iv_mul(r, lg), prec);
            }
        }
    }
    if (auto* l = std::get_if<LetNode>(&e->node)) {
        std::map<std::string, Interval> scope = env;
        for (auto& [name, rhs] : l->bindings)
            scope.insert_or_assign(name, range_eval_rec(rhs, env, prec));
        return range_eval_rec(l->body, scope, prec);
    }
    throw ContainmentFault("range_eval: conditional expression");
}

}  // namespace

Interval range_eval(const ExprPtr& expr, const std::map<std::string, Interval>& env,
                    long precision_bits) {
    return range_eval_rec(expr, env, precision_bits);
}

}  // namespace fpv
