// filo: localizes the app method to change when a framework upgrade breaks
// an app, from one baseline trace and one failure trace.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <filo/baselines.hpp>
#include <filo/bench.hpp>
#include <filo/diff.hpp>
#include <filo/ranking.hpp>
#include <filo/trace.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitEmpty = 2;
constexpr int kExitFindings = 3;

std::vector<std::string> split_prefixes(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        if (comma == std::string::npos)
            comma = csv.size();
        std::string item = csv.substr(start, comma - start);
        if (!item.empty())
            out.push_back(std::move(item));
        start = comma + 1;
    }
    return out;
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
        throw filo::ParameterError("cannot open output file: " + out_path);
    out << text;
}

struct AnalysisFlags {
    std::string key_policy = "full";
    int min_weight = 2;
    double k1 = 0.25;
    double k2 = 0.75;
    bool k1_set = false;
    bool k2_set = false;
    std::string prefixes_csv;
    std::string root = filo::kDefaultRootMethod;

    void add_to(CLI::App& cmd, bool with_scoring) {
        cmd.add_option("--key-policy", key_policy, "Diff key policy: full|no_return")
            ->check(CLI::IsMember({"full", "no_return"}));
        cmd.add_option("--framework-prefixes", prefixes_csv,
                       "Comma-separated package prefixes classified as framework")
            ->envname("FILO_FRAMEWORK_PREFIXES");
        cmd.add_option("--root", root, "Designated root method of stack snapshots");
        if (with_scoring) {
            cmd.add_option("--min-weight", min_weight, "Minimum SIB weight (default 2)")
                ->check(CLI::PositiveNumber);
            // when only one coefficient is given the other becomes its complement
            cmd.add_option("--k1", k1, "ImpBlocks coefficient (default 0.25)")
                ->check(CLI::Range(0.0, 1.0))
                ->each([this](const std::string&) { k1_set = true; });
            cmd.add_option("--k2", k2, "Depth coefficient (default 0.75)")
                ->check(CLI::Range(0.0, 1.0))
                ->each([this](const std::string&) { k2_set = true; });
        }
    }

    filo::AnalysisConfig to_config() const {
        filo::AnalysisConfig cfg;
        cfg.key_policy =
            key_policy == "no_return" ? filo::KeyPolicy::no_return : filo::KeyPolicy::full;
        cfg.min_weight = min_weight;
        cfg.k1 = k1;
        cfg.k2 = k2;
        if (k1_set && !k2_set)
            cfg.k2 = 1.0 - cfg.k1;
        else if (k2_set && !k1_set)
            cfg.k1 = 1.0 - cfg.k2;
        if (cfg.k1 < 0.0 || cfg.k2 < 0.0 || std::abs(cfg.k1 + cfg.k2 - 1.0) > 1e-9)
            throw filo::ParameterError("k1 and k2 must be non-negative and sum to 1");
        if (!prefixes_csv.empty())
            cfg.framework_prefixes = split_prefixes(prefixes_csv);
        if (cfg.framework_prefixes.empty())
            throw filo::ParameterError("framework prefix list must be non-empty");
        cfg.root_name = root;
        return cfg;
    }
};

int cmd_analyze(const std::string& baseline_path, const std::string& failure_path,
                const AnalysisFlags& flags, int top, const std::string& format,
                const std::string& out_path, const std::string& sib_dump) {
    const filo::AnalysisConfig cfg = flags.to_config();
    const filo::Trace baseline =
        filo::load_trace_file(baseline_path, filo::TraceLabel::baseline);
    const filo::Trace failure = filo::load_trace_file(failure_path, filo::TraceLabel::failure);

    if (!sib_dump.empty()) {
        const filo::DiffResult diff =
            filo::detect_sibs(baseline, failure, {cfg.key_policy, cfg.max_edit_cost});
        write_output(filo::diff_result_to_json(diff).dump(2) + "\n", sib_dump);
    }

    const filo::FixLocusReport report = filo::analyze(baseline, failure, cfg);
    const std::optional<int> limit = top >= 0 ? std::optional<int>(top) : std::nullopt;
    if (format == "text")
        write_output(filo::report_to_text(report, limit), out_path);
    else
        write_output(filo::report_to_json(report, limit).dump(2) + "\n", out_path);

    if (report.ranking.empty()) {
        std::cerr << (report.no_differences ? "no differences detected"
                                            : "empty ranking: no application method to report")
                  << "\n";
        return kExitEmpty;
    }
    return kExitOk;
}

int cmd_naive(const std::string& baseline_path, const std::string& failure_path,
              const AnalysisFlags& flags, int top, const std::string& format,
              const std::string& out_path) {
    const filo::AnalysisConfig cfg = flags.to_config();
    const filo::Trace baseline =
        filo::load_trace_file(baseline_path, filo::TraceLabel::baseline);
    const filo::Trace failure = filo::load_trace_file(failure_path, filo::TraceLabel::failure);
    const filo::BaselineRanking ranking =
        filo::naive_rank(baseline, failure, cfg.key_policy, cfg.framework_prefixes);
    const std::optional<int> limit = top >= 0 ? std::optional<int>(top) : std::nullopt;
    write_output(format == "text" ? filo::baseline_to_text(ranking, limit)
                                  : filo::baseline_to_json(ranking, limit).dump(2) + "\n",
                 out_path);
    if (ranking.entries.empty()) {
        std::cerr << "no differences detected\n";
        return kExitEmpty;
    }
    return kExitOk;
}

int cmd_sbfl(const std::string& coverage_path, const std::string& granularity, int top,
             const std::string& format, const std::string& out_path) {
    std::ifstream in(coverage_path);
    if (!in)
        throw filo::ParseError("cannot open coverage file: " + coverage_path);
    const filo::CoverageMatrix matrix = filo::parse_coverage_csv(in);
    const filo::BaselineRanking ranking = filo::ochiai_rank(matrix, granularity);
    const std::optional<int> limit = top >= 0 ? std::optional<int>(top) : std::nullopt;
    write_output(format == "text" ? filo::baseline_to_text(ranking, limit)
                                  : filo::baseline_to_json(ranking, limit).dump(2) + "\n",
                 out_path);
    if (ranking.entries.empty()) {
        std::cerr << "empty ranking\n";
        return kExitEmpty;
    }
    return kExitOk;
}

int cmd_bench(const std::string& manifest_path, const std::string& emit_manifest,
              const std::string& out_dir, bool no_ochiai, int passing_tests,
              const AnalysisFlags& flags, const std::string& format,
              const std::string& out_path) {
    const std::vector<filo::FaultScenario> scenarios =
        manifest_path.empty() ? filo::default_bench_suite()
                              : filo::load_manifest_file(manifest_path);
    if (!emit_manifest.empty()) {
        write_output(filo::scenarios_to_manifest(scenarios).dump(2) + "\n", emit_manifest);
        return kExitOk;
    }
    filo::BenchConfig cfg;
    cfg.analysis = flags.to_config();
    cfg.with_ochiai = !no_ochiai;
    cfg.ochiai_passing_tests = passing_tests;
    if (!out_dir.empty())
        cfg.artifact_dir = out_dir;
    const filo::BenchResult result = filo::run_bench(scenarios, cfg);
    write_output(format == "text" ? filo::bench_summary_text(result)
                                  : filo::bench_result_to_json(result).dump(2) + "\n",
                 out_path);
    return kExitOk;
}

int cmd_validate(const std::string& trace_path, const AnalysisFlags& flags) {
    filo::ValidationOptions options;
    const filo::AnalysisConfig cfg = flags.to_config();
    options.framework_prefixes = cfg.framework_prefixes;
    options.root_name = cfg.root_name;

    filo::Trace trace;
    try {
        trace = filo::load_trace_file(trace_path, filo::TraceLabel::baseline);
    } catch (const filo::StructureError& e) {
        std::cout << "error  " << e.what() << "\n";
        std::cout << "1 error(s), 0 warning(s)\n";
        return kExitFindings;
    }

    const std::vector<filo::Diagnostic> diags = filo::validate_trace(trace, options);
    std::size_t errors = 0;
    std::size_t warnings = 0;
    for (const auto& d : diags) {
        const bool is_error = d.severity == filo::Diagnostic::Severity::error;
        (is_error ? errors : warnings) += 1;
        std::cout << (is_error ? "error  " : "warning");
        if (d.has_seq)
            std::cout << "  seq=" << d.seq;
        std::cout << "  " << d.message << "\n";
    }
    std::cout << errors << " error(s), " << warnings << " warning(s)\n";
    return errors > 0 ? kExitFindings : kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"filo: fix-locus recommendation from baseline/failure trace pairs"};
    app.require_subcommand(1);

    std::string baseline_path;
    std::string failure_path;
    std::string coverage_path;
    std::string out_path;
    std::string format = "json";
    std::string sib_dump;
    std::string granularity = "method";
    std::string manifest_path;
    std::string emit_manifest;
    std::string out_dir;
    std::string validate_path;
    bool no_ochiai = false;
    int passing_tests = 12;
    int top = -1;
    AnalysisFlags analyze_flags;
    AnalysisFlags naive_flags;
    AnalysisFlags bench_flags;
    AnalysisFlags validate_flags;

    CLI::App* analyze = app.add_subcommand("analyze", "Rank fix-locus candidates for a trace pair");
    analyze->add_option("--baseline", baseline_path, "Baseline trace file")->required();
    analyze->add_option("--failure", failure_path, "Failure trace file")->required();
    analyze_flags.add_to(*analyze, true);
    analyze->add_option("--top", top, "Limit the displayed ranking to N entries");
    analyze->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));
    analyze->add_option("--out", out_path, "Write the report to this file instead of stdout");
    analyze->add_option("--sib-dump", sib_dump, "Also dump the raw diff result to this JSON file");

    CLI::App* naive = app.add_subcommand("naive", "Naive trace analysis baseline");
    naive->add_option("--baseline", baseline_path, "Baseline trace file")->required();
    naive->add_option("--failure", failure_path, "Failure trace file")->required();
    naive_flags.add_to(*naive, false);
    naive->add_option("--top", top, "Limit the displayed ranking to N entries");
    naive->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));
    naive->add_option("--out", out_path, "Output file");

    CLI::App* sbfl = app.add_subcommand("sbfl", "Ochiai spectrum-based baseline");
    sbfl->add_option("--coverage", coverage_path, "Coverage matrix CSV")->required();
    sbfl->add_option("--granularity", granularity, "Entity granularity label")
        ->check(CLI::IsMember({"method", "statement"}));
    sbfl->add_option("--top", top, "Limit the displayed ranking to N entries");
    sbfl->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));
    sbfl->add_option("--out", out_path, "Output file");

    CLI::App* bench = app.add_subcommand("bench", "Run the synthetic fault-injection benchmark");
    bench->add_option("--manifest", manifest_path, "Scenario manifest (default: built-in suite)");
    bench->add_option("--emit-manifest", emit_manifest, "Write the scenario list and exit");
    bench->add_option("--out-dir", out_dir, "Write per-scenario artifacts to this directory");
    bench->add_flag("--no-ochiai", no_ochiai, "Skip the Ochiai arm");
    bench->add_option("--passing-tests", passing_tests, "Passing tests per generated matrix")
        ->check(CLI::PositiveNumber);
    bench_flags.add_to(*bench, true);
    bench->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));
    bench->add_option("--out", out_path, "Output file");

    CLI::App* validate = app.add_subcommand("validate", "Check trace invariants");
    validate->add_option("trace", validate_path, "Trace file to validate")->required();
    validate_flags.add_to(*validate, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitError;
    }

    try {
        if (*analyze)
            return cmd_analyze(baseline_path, failure_path, analyze_flags, top, format, out_path,
                               sib_dump);
        if (*naive)
            return cmd_naive(baseline_path, failure_path, naive_flags, top, format, out_path);
        if (*sbfl)
            return cmd_sbfl(coverage_path, granularity, top, format, out_path);
        if (*bench)
            return cmd_bench(manifest_path, emit_manifest, out_dir, no_ochiai, passing_tests,
                             bench_flags, format, out_path);
        if (*validate)
            return cmd_validate(validate_path, validate_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
