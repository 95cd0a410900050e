#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include <filo/baselines.hpp>
#include <filo/diff.hpp>
#include <filo/ranking.hpp>
#include <filo/trace.hpp>

namespace filo {

enum class FaultKind {
    permission_early_return,
    changed_return_semantics,
    missing_callback,
    crash_on_startup,
};

std::string fault_kind_name(FaultKind kind);
FaultKind fault_kind_from_name(std::string_view name);

/// Generator parameters for one synthetic app execution.
struct AppShape {
    int call_depth = 3;        // helper nesting below each callback
    int fan_out = 3;           // api calls per helper level
    int trace_length = 240;    // approximate baseline event count
    int noise_blocks = 0;      // spurious single-call difference blocks
    int noise_block_length = 1;
    std::uint64_t seed = 1;
};

struct FaultScenario {
    std::string id;
    FaultKind fault_kind = FaultKind::permission_early_return;
    std::string ground_truth_method; // derived by the generator when empty
    AppShape app_shape;
};

/// frmc: the boundary-call keys a fix adds or suppresses, i.e. the diff
/// between running the faulty and the fixed app on the upgraded framework.
/// Empty only for crash_on_startup (no failure trace exists to compare).
struct GroundTruth {
    FaultScenario scenario;
    std::vector<std::string> frmc; // sorted, unique diff keys
};

struct GeneratedPair {
    Trace baseline;
    Trace failure;
    GroundTruth truth;
};

/// Deterministic per seed: equal scenarios yield byte-identical traces.
/// frmc keys are computed under key_policy, which must match the policy the
/// metrics are later evaluated with.
GeneratedPair generate_pair(const FaultScenario& scenario, KeyPolicy key_policy = KeyPolicy::full);

/// Synthetic coverage matrix for the SBFL arm: entities are the application
/// methods observed in the trace pair, the failing test covers the methods
/// executed by the failure, passing tests avoid the ground-truth method.
/// Throws ParameterError when the failure trace is empty (no passing suite
/// can be built for an app that crashes on startup).
CoverageMatrix generate_coverage(const GeneratedPair& pair, int passing_tests,
                                 std::span<const std::string> framework_prefixes);

struct SoundnessResult {
    std::optional<double> all_sibs; // absent when there are no SIBs
    std::optional<double> filtered; // over weight >= min_weight; absent when none
};

/// Fraction of blocks that contain at least one fault-related call.
SoundnessResult soundness(const DiffResult& result, const GroundTruth& truth, int min_weight,
                          KeyPolicy key_policy);

/// Fraction of fault-related calls that appear in some block; fix-only new
/// behaviour (keys absent from both traces) counts as missed. Absent when
/// frmc is empty.
std::optional<double> completeness(const DiffResult& result, const GroundTruth& truth,
                                   KeyPolicy key_policy);

struct ScenarioOutcome {
    std::string id;
    FaultKind kind = FaultKind::permission_early_return;
    std::string ground_truth_method;
    std::size_t detected_sibs = 0;
    std::size_t retained_sibs = 0;
    std::optional<int> filo_position;
    std::optional<int> naive_position;
    std::optional<int> ochiai_position;
    bool ochiai_applicable = false;
    SoundnessResult sib_soundness;
    std::optional<double> sib_completeness;
};

struct TechniqueAggregate {
    int top1 = 0;
    int top5 = 0;
    int top10 = 0;
    int not_ranked = 0;
};

struct BenchResult {
    std::vector<ScenarioOutcome> scenarios;
    TechniqueAggregate filo;
    TechniqueAggregate naive;
    TechniqueAggregate ochiai;
};

struct BenchConfig {
    AnalysisConfig analysis;
    bool with_ochiai = true;
    int ochiai_passing_tests = 12;
    std::optional<std::filesystem::path> artifact_dir; // per-scenario dumps when set
};

/// Runs every scenario through the analyzer and both baselines, computes
/// rank positions against the ground truth and aggregates Top-1/5/10 and
/// not-in-ranking counts.
BenchResult run_bench(std::span<const FaultScenario> scenarios, const BenchConfig& config);

/// The built-in desk-scale suite: 40 localizable scenarios and 10
/// missing-callback scenarios, all noise-free, seeds fixed.
std::vector<FaultScenario> default_bench_suite();

nlohmann::ordered_json scenarios_to_manifest(std::span<const FaultScenario> scenarios);
std::vector<FaultScenario> scenarios_from_manifest(const nlohmann::json& manifest);
std::vector<FaultScenario> load_manifest_file(const std::filesystem::path& path);

nlohmann::ordered_json bench_result_to_json(const BenchResult& result);
std::string bench_summary_text(const BenchResult& result);

} // namespace filo
