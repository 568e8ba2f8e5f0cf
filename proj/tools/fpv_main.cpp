#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fpv/fpcore.hpp"
#include "fpv/pipeline.hpp"
#include "fpv/rewrite.hpp"
#include "fpv/smt.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<fpv::FpCoreProgram> load_cores(const std::string& path,
                                           std::vector<std::string>& warnings) {
    fpv::ParseResult r = fpv::parse_fpcore(slurp(path));
    for (auto& w : r.warnings) warnings.push_back(path + ": " + w);
    return r.programs;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"floating-point pipeline: analyze, sample, improve, verify"};
    app.set_config("--config", "", "key = value configuration file");
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand

    fpv::RunConfig config;
    std::string sidecar_path;
    std::string default_range = "1,1e10";

    app.add_option("--seed", config.seed, "global random seed");
    app.add_option("--timeout", config.timeout_ms, "per-stage budget in ms");
    app.add_option("--samples", config.plan.n, "dynamic sample count");
    app.add_option("--subdiv", config.analysis.subdiv_per_var, "subdivisions per variable");
    app.add_option("--max-boxes", config.analysis.max_boxes, "subdivision box budget");
    app.add_option("--precision", config.analysis.precision_bits, "interval working precision");
    app.add_flag("--no-input-rounding",
                 [&](std::int64_t) { config.analysis.inputs_rounded = false; },
                 "treat inputs as exact reals");
    app.add_option("--min-gain-bits", config.search.greedy.min_gain_bits,
                   "greedy acceptance threshold");
    app.add_option("--population", config.search.genetic.population, "genetic population");
    app.add_option("--generations", config.search.genetic.generations, "genetic generations");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "static worst-case roundoff error bounds");
    std::string analyze_file, analyze_mode = "portfolio";
    analyze->add_option("file", analyze_file, "FPCore file")->required();
    analyze->add_option("--mode", analyze_mode, "ia|subdiv|portfolio");

    // sample
    auto* sample = app.add_subcommand("sample", "dynamic average bits-of-error");
    std::string sample_file;
    sample->add_option("file", sample_file, "FPCore file")->required();
    sample->add_option("--n", config.plan.n, "sample count");

    // improve
    auto* improve = app.add_subcommand("improve", "rewrite for accuracy");
    std::string improve_file, strategy = "both", improve_out;
    improve->add_option("file", improve_file, "FPCore file")->required();
    improve->add_option("--strategy", strategy, "greedy|genetic|both");
    improve->add_option("--out", improve_out, "write improved cores to this file");

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "batch analyze/improve/verify");
    std::string pipeline_dir, pipeline_out = "report.json", pipeline_strategy = "both";
    pipeline->add_option("dir", pipeline_dir, "directory of .fpcore files")->required();
    pipeline->add_option("--out", pipeline_out, "report path");
    pipeline->add_option("--preconditions", sidecar_path, "precondition sidecar file");
    pipeline->add_option("--workers", config.workers, "parallel benchmark workers");
    pipeline->add_option("--smt-solver", config.smt_solver, "external SMT-LIB solver binary");
    pipeline->add_option("--strategy", pipeline_strategy, "greedy|genetic|both");
    pipeline->add_option("--default-range", default_range,
                         "fallback precondition endpoints lo,hi");

    // report
    auto* report = app.add_subcommand("report", "render a report.json");
    std::string report_file, report_format = "md";
    report->add_option("file", report_file, "report.json path")->required();
    report->add_option("--format", report_format, "md|csv");

    // rules
    auto* rules = app.add_subcommand("rules", "dump the rewrite rule database");

    // translate (FPCore -> Scala DSL)
    auto* translate = app.add_subcommand("translate", "emit the Scala analysis input");
    std::string translate_file, translate_out;
    translate->add_option("file", translate_file, "FPCore file")->required();
    translate->add_option("--out", translate_out, "output .scala path");

    // smt query emission
    auto* smt = app.add_subcommand("smt", "emit an SMT-LIB range-tightening query");
    std::string smt_file, smt_side = "hi", smt_probe = "0";
    smt->add_option("file", smt_file, "FPCore file")->required();
    smt->add_option("--side", smt_side, "lo|hi");
    smt->add_option("--probe", smt_probe, "probe value (rational or decimal)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (const char* env_seed = std::getenv("FPV_SEED")) {
        try {
            config.seed = std::stoull(env_seed);
        } catch (...) {
            std::cerr << "bad FPV_SEED value\n";
            return 1;
        }
    }
    config.analysis.time_budget_ms = config.timeout_ms;

    try {
        std::vector<std::string> warnings;
        fpv::Sidecar sidecar;
        if (!sidecar_path.empty()) sidecar = fpv::parse_sidecar(slurp(sidecar_path));
        auto fallback = [&]() {
            auto comma = default_range.find(',');
            auto lo = fpv::Rat::parse(default_range.substr(0, comma));
            auto hi = fpv::Rat::parse(default_range.substr(comma + 1));
            if (comma == std::string::npos || !lo || !hi)
                throw std::runtime_error("bad --default-range");
            if (!fpv::is_permitted_default_endpoint(*lo) ||
                !fpv::is_permitted_default_endpoint(*hi))
                throw std::runtime_error(
                    "--default-range endpoints must be +/-10^{-20,-10,0,10,20}");
            return fpv::Interval(*lo, *hi);
        };

        if (*analyze) {
            auto cores = load_cores(analyze_file, warnings);
            for (auto& w : warnings) std::cerr << "warning: " << w << "\n";
            for (auto& raw : cores) {
                fpv::FpCoreProgram p = fpv::default_precondition(raw, sidecar, fallback());
                fpv::AnalysisOutcome o;
                if (analyze_mode == "ia")
                    o = fpv::analyze_ia(p, config.analysis);
                else if (analyze_mode == "subdiv")
                    o = fpv::analyze_subdiv(p, config.analysis);
                else
                    o = fpv::analyze_portfolio(p, config.analysis);
                std::cout << p.name << ": ";
                if (o.is_bound())
                    std::cout << "bound " << o.bound->abs_err.to_sci(3) << "  range ["
                              << o.range->lo.to_sci(3) << ", " << o.range->hi.to_sci(3) << "]\n";
                else if (o.is_alarm())
                    std::cout << "alarm " << fpv::alarm_name(o.alarm->kind) << " at "
                              << fpv::path_to_string(o.alarm->path) << "\n";
                else
                    std::cout << "timeout\n";
            }
            return 0;
        }

        if (*sample) {
            auto cores = load_cores(sample_file, warnings);
            for (auto& raw : cores) {
                fpv::FpCoreProgram p = fpv::default_precondition(raw, sidecar, fallback());
                fpv::SamplePlan plan{config.plan.n, fpv::derive_seed(config.seed, p.name)};
                fpv::SampledError s = fpv::measure_error(p, plan);
                std::cout << p.name << ": avg_bits " << s.avg_bits << "  max_abs "
                          << s.max_abs.to_sci(3) << "  valid " << s.n_valid << "/" << s.n_total
                          << " (invalid " << s.n_invalid() << ", inconclusive "
                          << s.n_inconclusive << ")\n";
            }
            return 0;
        }

        if (*improve) {
            auto cores = load_cores(improve_file, warnings);
            std::ostringstream out;
            for (auto& raw : cores) {
                fpv::FpCoreProgram p = fpv::default_precondition(raw, sidecar, fallback());
                fpv::RunConfig c = config;
                c.plan.seed = fpv::derive_seed(config.seed, p.name);
                c.search.genetic.seed = c.plan.seed;
                fpv::FpCoreProgram result = p;
                if (strategy == "greedy" || strategy == "both")
                    result = fpv::greedy_improve(result, c.plan, c.search).program;
                if (strategy == "genetic" || strategy == "both")
                    result = fpv::genetic_improve(result, c.analysis, c.search).program;
                std::cout << p.name << " -> " << fpv::emit_expr(result.body) << "\n";
                out << fpv::emit_fpcore(result) << "\n";
            }
            if (!improve_out.empty()) {
                std::ofstream f(improve_out);
                f << out.str();
            }
            return 0;
        }

        if (*pipeline) {
            config.strategy_greedy = pipeline_strategy != "genetic";
            config.strategy_genetic = pipeline_strategy != "greedy";
            std::vector<fs::path> files;
            for (auto& entry : fs::directory_iterator(pipeline_dir))
                if (entry.path().extension() == ".fpcore") files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            std::vector<fpv::FpCoreProgram> programs;
            for (auto& f : files)
                for (auto& raw : load_cores(f.string(), warnings))
                    programs.push_back(fpv::default_precondition(raw, sidecar, fallback()));
            for (auto& w : warnings) std::cerr << "warning: " << w << "\n";
            auto rows = fpv::run_benchmarks(programs, config);
            std::ofstream f(pipeline_out, std::ios::binary);
            f << fpv::render_report_json(rows, config);
            std::cout << fpv::summarize(rows);
            std::cout << "wrote " << pipeline_out << " (" << rows.size() << " rows)\n";
            return 0;
        }

        if (*report) {
            auto rows = fpv::rows_from_json(slurp(report_file));
            std::cout << fpv::render_report(rows, report_format);
            return 0;
        }

        if (*rules) {
            std::cout << fpv::rules_db_text();
            return 0;
        }

        if (*translate) {
            auto cores = load_cores(translate_file, warnings);
            std::vector<fpv::FpCoreProgram> ranged;
            for (auto& raw : cores)
                ranged.push_back(fpv::default_precondition(raw, sidecar, fallback()));
            std::string object_name = fs::path(translate_file).stem().string();
            std::string text = fpv::emit_scala_dsl(ranged, object_name);
            if (translate_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream f(translate_out);
                f << text;
            }
            return 0;
        }

        if (*smt) {
            auto cores = load_cores(smt_file, warnings);
            auto probe = fpv::Rat::parse(smt_probe);
            if (!probe) throw std::runtime_error("bad --probe");
            for (auto& raw : cores) {
                fpv::FpCoreProgram p = fpv::default_precondition(raw, sidecar, fallback());
                fpv::AnalysisOutcome o = fpv::analyze_ia(p, config.analysis);
                fpv::Interval range = o.is_bound() ? *o.range : fpv::Interval(fpv::Rat(0));
                std::cout << fpv::emit_smt_query(
                    p, range, smt_side == "lo" ? fpv::TightenSide::Lo : fpv::TightenSide::Hi,
                    *probe);
            }
            return 0;
        }
    } catch (const fpv::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
