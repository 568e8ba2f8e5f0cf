#include "fpv/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fpv/fpcore.hpp"
#include "fpv/smt.hpp"

namespace fpv {

namespace {

using ordered_json = nlohmann::ordered_json;

RunConfig per_benchmark_config(const RunConfig& config, const std::string& name) {
    RunConfig c = config;
    std::uint64_t s = derive_seed(config.seed, name);
    c.plan.seed = s;
    c.search.genetic.seed = s;
    return c;
}

std::optional<Rat> best_of(const std::map<std::string, AnalysisOutcome>& bounds) {
    std::optional<Rat> best;
    for (auto& [_, o] : bounds)
        if (o.is_bound() && (!best || o.bound->abs_err < *best)) best = o.bound->abs_err;
    return best;
}

bool any_alarm(const std::map<std::string, AnalysisOutcome>& bounds) {
    for (auto& [_, o] : bounds)
        if (o.is_alarm()) return true;
    return false;
}

std::map<std::string, AnalysisOutcome> analyze_both_modes(const FpCoreProgram& p,
                                                          const RunConfig& config) {
    std::map<std::string, AnalysisOutcome> out;
    out.emplace("ia", enforce_timeout(
                          [&](const Deadline& d) { return analyze_ia(p, config.analysis, d); },
                          config.timeout_ms));
    out.emplace("subdiv",
                enforce_timeout(
                    [&](const Deadline& d) { return analyze_subdiv(p, config.analysis, d); },
                    config.timeout_ms));
    if (!config.smt_solver.empty()) {
        // optional refinement of the plain-IA range via external solver probes
        auto it = out.find("ia");
        if (it->second.is_bound()) {
            Interval tightened =
                smt_tighten_range(p, *it->second.range, config.smt_solver);
            it->second.range = tightened;
        }
    }
    return out;
}

AnalysisOutcome portfolio_of(const std::map<std::string, AnalysisOutcome>& bounds) {
    std::optional<AnalysisOutcome> best;
    std::optional<AnalysisOutcome> first_alarm;
    for (const char* key : {"ia", "subdiv"}) {
        auto it = bounds.find(key);
        if (it == bounds.end()) continue;
        const AnalysisOutcome& o = it->second;
        if (o.is_bound()) {
            if (!best || o.bound->abs_err < best->bound->abs_err) best = o;
        } else if (o.is_alarm() && !first_alarm) {
            first_alarm = o;
        }
    }
    if (best) return *best;
    if (first_alarm) return *first_alarm;
    return AnalysisOutcome::make_timeout();
}

PipelineRow make_row(const FpCoreProgram& program, const RunConfig& global_config,
                     bool with_rewrite_columns) {
    const RunConfig config = per_benchmark_config(global_config, program.name);
    PipelineRow row;
    row.name = program.name;
    row.src_text = emit_fpcore(program);

    // (1) greedy improvement under its stage budget
    ImproveResult improved = enforce_timeout(
        [&](const Deadline& d) {
            return greedy_improve(program, config.plan, config.search, d);
        },
        config.timeout_ms);
    const bool improve_timed_out = improved.timed_out;
    std::optional<FpCoreProgram> res;
    if (!improve_timed_out) {
        res = improved.program;
        row.res_text = emit_fpcore(*res);
    }

    // (2) dynamic measurement of both versions
    row.sampled_src = measure_error(program, config.plan);
    if (res) row.sampled_res = measure_error(*res, config.plan);

    // (3) static analyses of both versions
    row.bounds_src = analyze_both_modes(program, config);
    if (res) row.bounds_res = analyze_both_modes(*res, config);

    // (4) bests, ratio, status
    row.best_src = best_of(row.bounds_src);
    row.best_res = best_of(row.bounds_res);
    if (row.best_src && row.best_res) {
        if (row.best_src->sign() > 0)
            row.improvement_ratio = *row.best_res / *row.best_src;
        else if (row.best_res->sign() == 0)
            row.improvement_ratio = Rat(1);
    }
    if (!row.best_src)
        row.status = any_alarm(row.bounds_src) ? RowStatus::AlarmSrc : RowStatus::TimeoutAnalyze;
    else if (improve_timed_out)
        row.status = RowStatus::TimeoutImprove;
    else if (!row.best_res)
        row.status = any_alarm(row.bounds_res) ? RowStatus::AlarmRes : RowStatus::TimeoutAnalyze;
    else
        row.status = RowStatus::Ok;

    if (!with_rewrite_columns) return row;

    // rewriting comparison columns
    RewriteColumns cols{AnalysisOutcome::make_timeout(), AnalysisOutcome::make_timeout(),
                        AnalysisOutcome::make_timeout(), AnalysisOutcome::make_timeout(),
                        std::nullopt, {}};
    cols.baseline = portfolio_of(row.bounds_src);

    // daisy: genetic applied to the input
    ImproveResult daisy_res = enforce_timeout(
        [&](const Deadline& d) {
            return genetic_improve(program, config.analysis, config.search, d);
        },
        config.timeout_ms);
    std::optional<FpCoreProgram> daisy_prog;
    if (daisy_res.input_alarm)
        cols.daisy = AnalysisOutcome::make_alarm(daisy_res.input_alarm->kind,
                                                 daisy_res.input_alarm->path);
    else if (daisy_res.timed_out)
        cols.daisy = AnalysisOutcome::make_timeout();
    else {
        daisy_prog = daisy_res.program;
        cols.daisy = portfolio_of(analyze_both_modes(*daisy_prog, config));
    }

    // herbie: the greedy result already analyzed above
    std::optional<FpCoreProgram> herbie_prog;
    if (improve_timed_out)
        cols.herbie = AnalysisOutcome::make_timeout();
    else {
        herbie_prog = *res;
        cols.herbie = portfolio_of(row.bounds_res);
    }

    // both: genetic applied to greedy's output
    std::optional<FpCoreProgram> both_prog;
    if (improve_timed_out)
        cols.both = AnalysisOutcome::make_timeout();
    else {
        ImproveResult both_res = enforce_timeout(
            [&](const Deadline& d) {
                return genetic_improve(*res, config.analysis, config.search, d);
            },
            config.timeout_ms);
        if (both_res.input_alarm)
            cols.both = AnalysisOutcome::make_alarm(both_res.input_alarm->kind,
                                                    both_res.input_alarm->path);
        else if (both_res.timed_out)
            cols.both = AnalysisOutcome::make_timeout();
        else {
            both_prog = both_res.program;
            cols.both = portfolio_of(analyze_both_modes(*both_prog, config));
        }
    }

    for (const AnalysisOutcome* o : {&cols.daisy, &cols.herbie, &cols.both})
        if (o->is_bound() && (!cols.minimum || o->bound->abs_err < *cols.minimum))
            cols.minimum = o->bound->abs_err;

    // keep-best final program: composition never regresses the reported bound
    const FpCoreProgram* final_prog = &program;
    std::optional<Rat> final_err;
    if (cols.baseline.is_bound()) final_err = cols.baseline.bound->abs_err;
    auto consider = [&](const AnalysisOutcome& o, const std::optional<FpCoreProgram>& p) {
        if (!o.is_bound() || !p) return;
        if (!final_err || o.bound->abs_err < *final_err) {
            final_err = o.bound->abs_err;
            final_prog = &*p;
        }
    };
    consider(cols.daisy, daisy_prog);
    consider(cols.herbie, herbie_prog);
    consider(cols.both, both_prog);
    cols.final_program = emit_fpcore(*final_prog);

    row.rewrite_columns = std::move(cols);
    return row;
}

}  // namespace

const char* row_status_name(RowStatus s) {
    switch (s) {
        case RowStatus::Ok: return "ok";
        case RowStatus::AlarmSrc: return "alarm_src";
        case RowStatus::AlarmRes: return "alarm_res";
        case RowStatus::TimeoutImprove: return "timeout_improve";
        case RowStatus::TimeoutAnalyze: return "timeout_analyze";
    }
    return "?";
}

PipelineRow run_pipeline(const FpCoreProgram& program, const RunConfig& config) {
    return make_row(program, config, config.strategy_genetic);
}

PipelineRow compare_rewriters(const FpCoreProgram& program, const RunConfig& config) {
    return make_row(program, config, true);
}

std::vector<PipelineRow> run_benchmarks(const std::vector<FpCoreProgram>& programs,
                                        const RunConfig& config) {
    std::vector<PipelineRow> rows(programs.size());
    const int workers = std::max(1, config.workers);
    if (workers == 1) {
        for (size_t i = 0; i < programs.size(); ++i)
            rows[i] = make_row(programs[i], config, config.strategy_genetic);
        return rows;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= programs.size()) return;
                rows[i] = make_row(programs[i], config, config.strategy_genetic);
            }
        });
    }
    for (auto& t : pool) t.join();
    return rows;
}

namespace {

ordered_json rat_json(const Rat& v) {
    ordered_json j;
    j["approx"] = v.to_sci(3);
    j["exact"] = v.num().get_str() + "/" + v.den().get_str();
    return j;
}

ordered_json outcome_json(const AnalysisOutcome& o) {
    ordered_json j;
    if (o.is_bound()) {
        j["kind"] = "bound";
        j["abs_err"] = rat_json(o.bound->abs_err);
        ordered_json r;
        r["lo"] = rat_json(o.range->lo);
        r["hi"] = rat_json(o.range->hi);
        j["range"] = r;
    } else if (o.is_alarm()) {
        j["kind"] = "alarm";
        j["alarm"] = alarm_name(o.alarm->kind);
        j["path"] = path_to_string(o.alarm->path);
    } else {
        j["kind"] = "timeout";
    }
    return j;
}

ordered_json sampled_json(const SampledError& s) {
    ordered_json j;
    j["avg_bits"] = s.avg_bits;
    j["max_abs"] = rat_json(s.max_abs);
    j["n_total"] = s.n_total;
    j["n_valid"] = s.n_valid;
    j["n_inconclusive"] = s.n_inconclusive;
    j["n_invalid"] = s.n_invalid();
    j["seed"] = s.seed;
    return j;
}

std::string outcome_cell(const AnalysisOutcome& o) {
    if (o.is_bound()) return o.bound->abs_err.to_sci(3);
    if (o.is_alarm()) return alarm_cell_code(o.alarm->kind);
    return "TO";
}

std::string maybe_cell(const std::map<std::string, AnalysisOutcome>& m, const char* key) {
    auto it = m.find(key);
    return it == m.end() ? "" : outcome_cell(it->second);
}

std::string render_csv(const std::vector<PipelineRow>& rows) {
    std::ostringstream os;
    os << "name,status,ia_src,ia_res,subdiv_src,subdiv_res,best_src,best_res,improvement,"
          "sampled_src_bits,sampled_res_bits,baseline,daisy,herbie,both,minimum\n";
    for (auto& r : rows) {
        auto quoted = [](const std::string& s) {
            if (s.find(',') == std::string::npos && s.find('"') == std::string::npos) return s;
            std::string out = "\"";
            for (char c : s) {
                if (c == '"') out += '"';
                out += c;
            }
            return out + "\"";
        };
        os << quoted(r.name) << ',' << row_status_name(r.status) << ','
           << maybe_cell(r.bounds_src, "ia") << ',' << maybe_cell(r.bounds_res, "ia") << ','
           << maybe_cell(r.bounds_src, "subdiv") << ',' << maybe_cell(r.bounds_res, "subdiv")
           << ',' << (r.best_src ? r.best_src->to_sci(3) : "") << ','
           << (r.best_res ? r.best_res->to_sci(3) : "") << ','
           << (r.improvement_ratio ? r.improvement_ratio->to_sci(3) : "") << ',';
        std::ostringstream b1, b2;
        if (r.sampled_src) b1 << r.sampled_src->avg_bits;
        if (r.sampled_res) b2 << r.sampled_res->avg_bits;
        os << b1.str() << ',' << b2.str() << ',';
        if (r.rewrite_columns) {
            const auto& c = *r.rewrite_columns;
            os << outcome_cell(c.baseline) << ',' << outcome_cell(c.daisy) << ','
               << outcome_cell(c.herbie) << ',' << outcome_cell(c.both) << ','
               << (c.minimum ? c.minimum->to_sci(3) : "");
        } else {
            os << ",,,,";
        }
        os << '\n';
    }
    return os.str();
}

std::string render_markdown(const std::vector<PipelineRow>& rows) {
    std::ostringstream os;
    os << "## Error analysis\n\n";
    os << "| Name | Status | IA src | IA res | Subdiv src | Subdiv res | Best src | Best res | "
          "res / src |\n";
    os << "|---|---|---|---|---|---|---|---|---|\n";
    for (auto& r : rows) {
        os << "| " << r.name << " | " << row_status_name(r.status) << " | "
           << maybe_cell(r.bounds_src, "ia") << " | " << maybe_cell(r.bounds_res, "ia") << " | "
           << maybe_cell(r.bounds_src, "subdiv") << " | " << maybe_cell(r.bounds_res, "subdiv")
           << " | " << (r.best_src ? r.best_src->to_sci(3) : "") << " | "
           << (r.best_res ? r.best_res->to_sci(3) : "") << " | "
           << (r.improvement_ratio ? r.improvement_ratio->to_sci(3) : "") << " |\n";
    }
    bool any_rewrites = false;
    for (auto& r : rows)
        if (r.rewrite_columns) any_rewrites = true;
    if (any_rewrites) {
        os << "\n## Rewriting comparison\n\n";
        os << "| Name | Baseline | Daisy | Herbie | Both | Minimum |\n";
        os << "|---|---|---|---|---|---|\n";
        for (auto& r : rows) {
            if (!r.rewrite_columns) continue;
            const auto& c = *r.rewrite_columns;
            os << "| " << r.name << " | " << outcome_cell(c.baseline) << " | "
               << outcome_cell(c.daisy) << " | " << outcome_cell(c.herbie) << " | "
               << outcome_cell(c.both) << " | " << (c.minimum ? c.minimum->to_sci(3) : "")
               << " |\n";
        }
    }
    return os.str();
}

}  // namespace

std::string render_report_json(const std::vector<PipelineRow>& rows, const RunConfig& config) {
    ordered_json doc;
    ordered_json cfg;
    cfg["timeout_ms"] = config.timeout_ms;
    cfg["seed"] = config.seed;
    cfg["samples"] = config.plan.n;
    cfg["subdiv_per_var"] = config.analysis.subdiv_per_var;
    cfg["max_boxes"] = config.analysis.max_boxes;
    cfg["precision_bits"] = config.analysis.precision_bits;
    cfg["inputs_rounded"] = config.analysis.inputs_rounded;
    cfg["lib_factor"] = config.analysis.lib_factor.to_string();
    cfg["workers"] = config.workers;
    cfg["strategies"] = std::string(config.strategy_greedy ? "greedy " : "") +
                        (config.strategy_genetic ? "genetic" : "");
    doc["config"] = cfg;
    ordered_json jrows = ordered_json::array();
    for (auto& r : rows) {
        ordered_json j;
        j["name"] = r.name;
        j["status"] = row_status_name(r.status);
        j["src"] = r.src_text;
        j["res"] = r.res_text;
        if (r.sampled_src) j["sampled_src"] = sampled_json(*r.sampled_src);
        if (r.sampled_res) j["sampled_res"] = sampled_json(*r.sampled_res);
        ordered_json bs;
        for (auto& [k, v] : r.bounds_src) bs[k] = outcome_json(v);
        j["bounds_src"] = bs;
        ordered_json br;
        for (auto& [k, v] : r.bounds_res) br[k] = outcome_json(v);
        j["bounds_res"] = br;
        if (r.best_src) j["best_src"] = rat_json(*r.best_src);
        if (r.best_res) j["best_res"] = rat_json(*r.best_res);
        if (r.improvement_ratio) j["improvement_ratio"] = rat_json(*r.improvement_ratio);
        if (r.rewrite_columns) {
            const auto& c = *r.rewrite_columns;
            ordered_json rc;
            rc["baseline"] = outcome_json(c.baseline);
            rc["daisy"] = outcome_json(c.daisy);
            rc["herbie"] = outcome_json(c.herbie);
            rc["both"] = outcome_json(c.both);
            if (c.minimum) rc["minimum"] = rat_json(*c.minimum);
            rc["final_program"] = c.final_program;
            j["rewrite_columns"] = rc;
        }
        jrows.push_back(j);
    }
    doc["rows"] = jrows;
    return doc.dump(2) + "\n";
}

std::string render_report(const std::vector<PipelineRow>& rows, const std::string& format) {
    if (format == "json") return render_report_json(rows, RunConfig{});
    if (format == "csv") return render_csv(rows);
    if (format == "markdown" || format == "md") return render_markdown(rows);
    throw std::invalid_argument("render_report: unknown format '" + format + "'");
}

namespace {

Rat rat_from_json(const ordered_json& j) {
    auto v = Rat::parse(j.at("exact").get<std::string>());
    if (!v) throw std::runtime_error("report json: bad rational");
    return *v;
}

ExprPath path_from_string(const std::string& s) {
    ExprPath p;
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '/') { ++i; continue; }
        size_t j = i;
        while (j < s.size() && s[j] != '/') ++j;
        p.push_back(std::stoi(s.substr(i, j - i)));
        i = j;
    }
    return p;
}

AnalysisOutcome outcome_from_json(const ordered_json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "bound") {
        Rat err = rat_from_json(j.at("abs_err"));
        Interval range(rat_from_json(j.at("range").at("lo")),
                       rat_from_json(j.at("range").at("hi")));
        return AnalysisOutcome::make_bound(std::move(err), std::move(range));
    }
    if (kind == "alarm") {
        std::string name = j.at("alarm").get<std::string>();
        AlarmKind k = AlarmKind::FnUnsupported;
        for (AlarmKind cand :
             {AlarmKind::Div0, AlarmKind::SqrtNeg, AlarmKind::LogDomain, AlarmKind::NonIntPow,
              AlarmKind::CondUnsupported, AlarmKind::CbrtSingular, AlarmKind::FnUnsupported})
            if (name == alarm_name(cand)) k = cand;
        return AnalysisOutcome::make_alarm(k, path_from_string(j.at("path").get<std::string>()));
    }
    return AnalysisOutcome::make_timeout();
}

SampledError sampled_from_json(const ordered_json& j) {
    SampledError s;
    s.avg_bits = j.at("avg_bits").get<double>();
    s.max_abs = rat_from_json(j.at("max_abs"));
    s.n_total = j.at("n_total").get<long>();
    s.n_valid = j.at("n_valid").get<long>();
    s.n_inconclusive = j.at("n_inconclusive").get<long>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

}  // namespace

std::vector<PipelineRow> rows_from_json(const std::string& json_text) {
    ordered_json doc = ordered_json::parse(json_text);
    std::vector<PipelineRow> rows;
    for (auto& j : doc.at("rows")) {
        PipelineRow r;
        r.name = j.at("name").get<std::string>();
        std::string status = j.at("status").get<std::string>();
        for (RowStatus s : {RowStatus::Ok, RowStatus::AlarmSrc, RowStatus::AlarmRes,
                            RowStatus::TimeoutImprove, RowStatus::TimeoutAnalyze})
            if (status == row_status_name(s)) r.status = s;
        r.src_text = j.value("src", "");
        r.res_text = j.value("res", "");
        if (j.contains("sampled_src")) r.sampled_src = sampled_from_json(j.at("sampled_src"));
        if (j.contains("sampled_res")) r.sampled_res = sampled_from_json(j.at("sampled_res"));
        if (j.contains("bounds_src"))
            for (auto& [k, v] : j.at("bounds_src").items())
                r.bounds_src.emplace(k, outcome_from_json(v));
        if (j.contains("bounds_res"))
            for (auto& [k, v] : j.at("bounds_res").items())
                r.bounds_res.emplace(k, outcome_from_json(v));
        if (j.contains("best_src")) r.best_src = rat_from_json(j.at("best_src"));
        if (j.contains("best_res")) r.best_res = rat_from_json(j.at("best_res"));
        if (j.contains("improvement_ratio"))
            r.improvement_ratio = rat_from_json(j.at("improvement_ratio"));
        if (j.contains("rewrite_columns")) {
            auto& rc = j.at("rewrite_columns");
            RewriteColumns c{outcome_from_json(rc.at("baseline")),
                             outcome_from_json(rc.at("daisy")),
                             outcome_from_json(rc.at("herbie")),
                             outcome_from_json(rc.at("both")),
                             std::nullopt,
                             rc.value("final_program", "")};
            if (rc.contains("minimum")) c.minimum = rat_from_json(rc.at("minimum"));
            r.rewrite_columns = std::move(c);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string summarize(const std::vector<PipelineRow>& rows) {
    std::ostringstream os;

    // src -> res improvement through the greedy stage
    int tightened = 0, equal = 0, loosened = 0;
    double log_sum = 0.0;
    int comparable = 0;
    for (auto& r : rows) {
        if (!r.best_src || !r.best_res) continue;
        ++comparable;
        if (*r.best_res < *r.best_src) ++tightened;
        else if (*r.best_src < *r.best_res) ++loosened;
        else ++equal;
        if (r.best_src->sign() > 0 && r.best_res->sign() > 0)
            log_sum += std::log10(r.best_src->to_double_nearest()) -
                       std::log10(r.best_res->to_double_nearest());
    }
    os << "greedy improvement (best_res vs best_src): ";
    if (comparable == 0) {
        os << "no comparable rows\n";
    } else {
        double orders = log_sum / comparable;
        os << tightened << " tightened, " << equal << " equal, " << loosened << " loosened"
           << "; geometric-mean factor " << std::pow(10.0, orders) << " (" << orders
           << " orders of magnitude)\n";
    }

    // per-strategy comparison against the baseline column
    struct Tally {
        int tightened = 0, equal = 0, loosened = 0, comparable = 0;
        double log_sum = 0.0;
    };
    std::map<std::string, Tally> tallies;
    for (auto& r : rows) {
        if (!r.rewrite_columns) continue;
        const auto& c = *r.rewrite_columns;
        if (!c.baseline.is_bound()) continue;
        const Rat base = c.baseline.bound->abs_err;
        auto tally = [&](const char* name, const AnalysisOutcome& o) {
            if (!o.is_bound()) return;
            Tally& t = tallies[name];
            ++t.comparable;
            const Rat& v = o.bound->abs_err;
            if (v < base) ++t.tightened;
            else if (base < v) ++t.loosened;
            else ++t.equal;
            if (base.sign() > 0 && v.sign() > 0)
                t.log_sum +=
                    std::log10(base.to_double_nearest()) - std::log10(v.to_double_nearest());
        };
        tally("daisy", c.daisy);
        tally("herbie", c.herbie);
        tally("both", c.both);
    }
    if (tallies.empty()) {
        os << "rewriting strategies: no comparable rows\n";
    } else {
        for (auto& [name, t] : tallies) {
            double orders = t.comparable ? t.log_sum / t.comparable : 0.0;
            os << name << " vs baseline: " << t.tightened << " tightened, " << t.equal
               << " equal, " << t.loosened << " loosened over " << t.comparable
               << " rows; geometric-mean factor " << std::pow(10.0, orders) << " (" << orders
               << " orders of magnitude)\n";
        }
    }
    return os.str();
}

}  // namespace fpv
