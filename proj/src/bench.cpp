#include <filo/bench.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <unordered_set>

namespace filo {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kAppPackage = "org.bench.app.";

const std::vector<std::string>& app_classes() {
    static const std::vector<std::string> v = {"MainActivity",  "SettingsActivity",
                                               "DetailActivity", "SyncService",
                                               "WeatherWidget",  "NetworkAgent"};
    return v;
}

const std::vector<std::string>& callback_methods() {
    static const std::vector<std::string> v = {"onCreate",  "onResume",
                                               "onClick",   "onOptionsItemSelected",
                                               "onReceive", "onStartCommand",
                                               "onRestart", "onMenuOpened"};
    return v;
}

const std::vector<std::string>& helper_methods() {
    static const std::vector<std::string> v = {
        "loadPreferences", "refreshView",   "requestLocation", "syncAccount",
        "updateForecast",  "bindItemList",  "openDatabase",    "scheduleAlarm",
        "renderChart",     "fetchRemote",   "applyTheme",      "resolveAccount"};
    return v;
}

const std::vector<std::string>& api_methods() {
    static const std::vector<std::string> v = {
        "android.app.Activity.findViewById",
        "android.content.Context.getSystemService",
        "android.location.LocationManager.getLastKnownLocation",
        "java.util.ArrayList.add",
        "android.os.Handler.post",
        "android.view.View.setVisibility",
        "android.widget.TextView.setText",
        "android.content.SharedPreferences.getString",
        "android.net.ConnectivityManager.getActiveNetworkInfo",
        "android.database.sqlite.SQLiteDatabase.query",
        "java.io.File.exists",
        "android.app.NotificationManager.notify",
        "android.content.Intent.putExtra",
        "android.view.LayoutInflater.inflate",
        "java.util.HashMap.put",
        "android.os.Bundle.getString"};
    return v;
}

// methods that only ever appear in injected anomaly blocks
const std::vector<std::string>& anomaly_apis() {
    static const std::vector<std::string> v = {
        "android.util.Log.w", "android.widget.Toast.makeText",
        "android.app.AlertDialog$Builder.show", "android.util.Log.e",
        "android.view.View.announceForAccessibility"};
    return v;
}

// methods that only ever appear in noise blocks
const std::vector<std::string>& noise_apis() {
    static const std::vector<std::string> v = {
        "android.view.ViewRootImpl.performTraversals",
        "android.os.MessageQueue.nativePollOnce",
        "android.graphics.drawable.Drawable.invalidateSelf",
        "android.view.Choreographer.postFrameCallback",
        "android.os.BinderProxy.transactNative",
        "android.animation.ValueAnimator.setCurrentFraction"};
    return v;
}

const std::vector<std::string>& return_types() {
    static const std::vector<std::string> v = {"android.view.View", "java.lang.String",
                                               "android.os.Bundle", "android.location.Location"};
    return v;
}

constexpr const char* kPermissionCheckApi =
    "android.support.v4.content.ContextCompat.checkSelfPermission";

struct Rng {
    std::mt19937_64 engine;

    explicit Rng(std::uint64_t seed) : engine(seed) {}

    std::size_t pick(std::size_t n) { return static_cast<std::size_t>(engine() % n); }
    bool chance(int percent) { return pick(100) < static_cast<std::size_t>(percent); }
};

std::optional<ReturnValue> random_return(Rng& rng) {
    switch (rng.pick(5)) {
    case 0: return std::nullopt;
    case 1: return ReturnValue{ReprKind::primitive, std::to_string(rng.pick(1000))};
    case 2: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "obj@%06zx", rng.pick(0xffffff));
        return ReturnValue{ReprKind::to_string, buf};
    }
    case 3: return ReturnValue{ReprKind::dynamic_type_only, return_types()[rng.pick(return_types().size())]};
    default: return ReturnValue{ReprKind::void_return, ""};
    }
}

TraceEvent make_begin(const std::string& method, Direction dir, std::vector<std::string> stack) {
    TraceEvent ev;
    ev.kind = EventKind::begin;
    ev.method.name = method;
    ev.direction = dir;
    ev.stack = StackSnapshot{std::move(stack)};
    return ev;
}

TraceEvent make_end(const std::string& method, Direction dir, std::optional<ReturnValue> ret) {
    TraceEvent ev;
    ev.kind = EventKind::end;
    ev.method.name = method;
    ev.direction = dir;
    ev.ret = std::move(ret);
    return ev;
}

void append_pair(std::vector<TraceEvent>& out, const std::string& method, Direction dir,
                 const std::vector<std::string>& path, std::optional<ReturnValue> ret) {
    std::vector<std::string> stack = path;
    stack.push_back(method);
    out.push_back(make_begin(method, dir, std::move(stack)));
    out.push_back(make_end(method, dir, std::move(ret)));
}

void renumber(Trace& trace) {
    std::uint64_t seq = 0;
    for (auto& ev : trace.events)
        ev.seq = seq++;
}

struct BaselinePlan {
    Trace trace;
    std::vector<std::string> dispatch; // root + framework dispatch frames
    // fault site: the deepest helper block of the fault segment
    std::size_t site_begin = 0;
    std::size_t site_len = 0;
    std::vector<std::string> site_path; // stack path down to (and including) gm
    std::string ground_truth;           // the deepest helper of the fault segment
    std::size_t seg_begin = 0;          // fault segment bounds, for missing_callback
    std::size_t seg_len = 0;
    std::string seg_class;
    std::string first_callback; // segment 0 entry, ground truth of crash faults
};

void check_shape(const AppShape& shape) {
    if (shape.call_depth < 1 || shape.fan_out < 1 || shape.trace_length < 1)
        throw ParameterError("app shape: call_depth, fan_out and trace_length must be >= 1");
    if (shape.noise_blocks < 0 || shape.noise_block_length < 1)
        throw ParameterError("app shape: invalid noise parameters");
}

BaselinePlan build_baseline(const AppShape& shape, const std::string& root_name, Rng& rng) {
    BaselinePlan plan;
    plan.trace.label = TraceLabel::baseline;
    plan.dispatch = {root_name, "android.app.ActivityThread.main", "android.os.Looper.loop",
                     "android.os.Handler.dispatchMessage"};

    const int per_segment = 2 + shape.call_depth * shape.fan_out * 2;
    const int segments = std::max(2, shape.trace_length / per_segment);
    const std::size_t fault_segment = 1 + rng.pick(static_cast<std::size_t>(segments - 1));

    auto& out = plan.trace.events;
    for (int s = 0; s < segments; ++s) {
        const std::string klass =
            s == 0 ? "BenchApplication" : app_classes()[rng.pick(app_classes().size())];
        const std::string cb_name =
            s == 0 ? "onCreate" : callback_methods()[rng.pick(callback_methods().size())];
        const std::string cb = kAppPackage + klass + "." + cb_name;
        if (s == 0)
            plan.first_callback = cb;

        const std::size_t seg_begin = out.size();
        std::vector<std::string> path = plan.dispatch;
        {
            std::vector<std::string> stack = path;
            stack.push_back(cb);
            out.push_back(make_begin(cb, Direction::callback, std::move(stack)));
        }
        path.push_back(cb);

        std::vector<std::string> helpers;
        std::unordered_set<std::size_t> used;
        for (int level = 0; level < shape.call_depth; ++level) {
            std::size_t idx = rng.pick(helper_methods().size());
            while (used.count(idx))
                idx = (idx + 1) % helper_methods().size();
            used.insert(idx);
            helpers.push_back(kAppPackage + klass + "." + helper_methods()[idx]);
        }

        for (int level = 0; level < shape.call_depth; ++level) {
            path.push_back(helpers[static_cast<std::size_t>(level)]);
            const bool is_site =
                static_cast<std::size_t>(s) == fault_segment && level == shape.call_depth - 1;
            if (is_site) {
                plan.site_begin = out.size();
                plan.site_path = path;
                plan.ground_truth = helpers.back();
                plan.seg_class = klass;
            }
            for (int f = 0; f < shape.fan_out; ++f) {
                const std::string& api = api_methods()[rng.pick(api_methods().size())];
                append_pair(out, api, Direction::api_call, path, random_return(rng));
            }
            if (is_site)
                plan.site_len = out.size() - plan.site_begin;
        }

        out.push_back(make_end(cb, Direction::callback, ReturnValue{ReprKind::void_return, ""}));
        if (static_cast<std::size_t>(s) == fault_segment) {
            plan.seg_begin = seg_begin;
            plan.seg_len = out.size() - seg_begin;
        }
    }
    renumber(plan.trace);
    return plan;
}

std::vector<std::string> keys_of(std::span<const TraceEvent> events, KeyPolicy policy) {
    std::set<std::string> keys;
    for (const auto& ev : events)
        keys.insert(diff_key(ev, policy));
    return {keys.begin(), keys.end()};
}

void insert_noise(Trace& failure, const AppShape& shape, const std::vector<std::string>& dispatch,
                  std::size_t fault_lo, std::size_t fault_hi, Rng& rng) {
    if (shape.noise_blocks == 0)
        return;
    std::vector<std::size_t> gaps;
    for (std::size_t g = 1; g < failure.events.size(); ++g) {
        if (g + 1 >= fault_lo && g <= fault_hi + 1)
            continue; // keep noise detached from the fault block
        gaps.push_back(g);
    }
    if (gaps.size() < static_cast<std::size_t>(shape.noise_blocks))
        throw ParameterError("app shape: trace too short for the requested noise blocks");
    for (std::size_t k = 0; k < static_cast<std::size_t>(shape.noise_blocks); ++k)
        std::swap(gaps[k], gaps[k + rng.pick(gaps.size() - k)]);
    std::vector<std::size_t> chosen(gaps.begin(), gaps.begin() + shape.noise_blocks);
    std::sort(chosen.rbegin(), chosen.rend());

    for (std::size_t gap : chosen) {
        std::vector<TraceEvent> block;
        for (int c = 0; c < shape.noise_block_length; ++c) {
            const std::string& method = noise_apis()[rng.pick(noise_apis().size())];
            append_pair(block, method, Direction::api_call, dispatch, std::nullopt);
        }
        failure.events.insert(failure.events.begin() + static_cast<std::ptrdiff_t>(gap),
                              block.begin(), block.end());
    }
    renumber(failure);
}

} // namespace

std::string fault_kind_name(FaultKind kind) {
    switch (kind) {
    case FaultKind::permission_early_return: return "permission_early_return";
    case FaultKind::changed_return_semantics: return "changed_return_semantics";
    case FaultKind::missing_callback: return "missing_callback";
    case FaultKind::crash_on_startup: return "crash_on_startup";
    }
    return "?";
}

FaultKind fault_kind_from_name(std::string_view name) {
    if (name == "permission_early_return") return FaultKind::permission_early_return;
    if (name == "changed_return_semantics") return FaultKind::changed_return_semantics;
    if (name == "missing_callback") return FaultKind::missing_callback;
    if (name == "crash_on_startup") return FaultKind::crash_on_startup;
    throw ParameterError("unknown fault kind: " + std::string(name));
}

GeneratedPair generate_pair(const FaultScenario& scenario, KeyPolicy key_policy) {
    check_shape(scenario.app_shape);
    Rng rng(scenario.app_shape.seed);
    BaselinePlan plan = build_baseline(scenario.app_shape, kDefaultRootMethod, rng);

    GeneratedPair pair;
    pair.truth.scenario = scenario;
    pair.failure.label = TraceLabel::failure;

    std::size_t fault_lo = 0;
    std::size_t fault_hi = 0;

    switch (scenario.fault_kind) {
    case FaultKind::permission_early_return: {
        // the permission check comes back denied, the downstream block under
        // the ground-truth method disappears and error handling runs instead
        std::vector<TraceEvent> inserted;
        append_pair(inserted, kPermissionCheckApi, Direction::api_call, plan.site_path,
                    ReturnValue{ReprKind::primitive, "-1"});
        const int fallback_calls = std::max(1, scenario.app_shape.fan_out - 1);
        for (int c = 0; c < fallback_calls; ++c)
            append_pair(inserted, anomaly_apis()[c % anomaly_apis().size()], Direction::api_call,
                        plan.site_path, std::nullopt);

        auto& ev = pair.failure.events;
        ev.assign(plan.trace.events.begin(),
                  plan.trace.events.begin() + static_cast<std::ptrdiff_t>(plan.site_begin));
        ev.insert(ev.end(), inserted.begin(), inserted.end());
        ev.insert(ev.end(),
                  plan.trace.events.begin() +
                      static_cast<std::ptrdiff_t>(plan.site_begin + plan.site_len),
                  plan.trace.events.end());
        fault_lo = plan.site_begin;
        fault_hi = plan.site_begin + inserted.size();
        pair.truth.frmc = keys_of(inserted, key_policy);
        pair.truth.scenario.ground_truth_method = plan.ground_truth;
        break;
    }
    case FaultKind::changed_return_semantics: {
        // the first api call of the site block starts returning null and the
        // app reacts with an unexpected error-handling block
        const std::size_t end_idx = plan.site_begin + 1; // its end event
        std::vector<TraceEvent> inserted;
        TraceEvent changed = plan.trace.events[end_idx];
        changed.ret = ReturnValue{ReprKind::dynamic_type_only, "null"};
        inserted.push_back(changed);
        const int reactions = std::max(2, scenario.app_shape.fan_out - 1);
        for (int c = 0; c < reactions; ++c)
            append_pair(inserted, anomaly_apis()[(c + 3) % anomaly_apis().size()],
                        Direction::api_call, plan.site_path, std::nullopt);

        auto& ev = pair.failure.events;
        ev.assign(plan.trace.events.begin(),
                  plan.trace.events.begin() + static_cast<std::ptrdiff_t>(end_idx));
        ev.insert(ev.end(), inserted.begin(), inserted.end());
        ev.insert(ev.end(),
                  plan.trace.events.begin() + static_cast<std::ptrdiff_t>(end_idx + 1),
                  plan.trace.events.end());
        fault_lo = end_idx;
        fault_hi = end_idx + inserted.size();
        // under no_return the changed end event still matches its baseline
        // counterpart, so only the reaction calls are fault-related
        pair.truth.frmc = keys_of(
            key_policy == KeyPolicy::full
                ? std::span<const TraceEvent>(inserted)
                : std::span<const TraceEvent>(inserted).subspan(1),
            key_policy);
        pair.truth.scenario.ground_truth_method = plan.ground_truth;
        break;
    }
    case FaultKind::missing_callback: {
        // the upgraded framework stops invoking the old callback; the fix
        // implements a replacement callback that never existed before
        auto& ev = pair.failure.events;
        ev.assign(plan.trace.events.begin(),
                  plan.trace.events.begin() + static_cast<std::ptrdiff_t>(plan.seg_begin));
        ev.insert(ev.end(),
                  plan.trace.events.begin() +
                      static_cast<std::ptrdiff_t>(plan.seg_begin + plan.seg_len),
                  plan.trace.events.end());
        fault_lo = plan.seg_begin;
        fault_hi = plan.seg_begin;

        const std::string new_cb =
            kAppPackage + plan.seg_class + ".onRequestPermissionsResult";
        std::vector<TraceEvent> fixed_only;
        append_pair(fixed_only, new_cb, Direction::callback, plan.dispatch,
                    ReturnValue{ReprKind::void_return, ""});
        append_pair(fixed_only, "android.app.Activity.requestPermissions", Direction::api_call,
                    plan.dispatch, std::nullopt);
        pair.truth.frmc = keys_of(fixed_only, key_policy);
        pair.truth.scenario.ground_truth_method = new_cb;
        break;
    }
    case FaultKind::crash_on_startup: {
        // no failure trace is produced at all
        pair.truth.frmc.clear();
        pair.truth.scenario.ground_truth_method = plan.first_callback;
        break;
    }
    }

    if (scenario.fault_kind != FaultKind::crash_on_startup)
        insert_noise(pair.failure, scenario.app_shape, plan.dispatch, fault_lo, fault_hi, rng);
    renumber(pair.failure);

    pair.baseline = std::move(plan.trace);
    pair.baseline.metadata["generator"] = "filo-bench";
    pair.failure.metadata["generator"] = "filo-bench";
    return pair;
}

CoverageMatrix generate_coverage(const GeneratedPair& pair, int passing_tests,
                                 std::span<const std::string> framework_prefixes) {
    if (pair.failure.events.empty())
        throw ParameterError("cannot build a passing test suite for an app that crashes on startup");
    if (passing_tests < 1)
        throw ParameterError("passing_tests must be >= 1");

    auto collect = [&](const Trace& trace, std::set<std::string>& into) {
        for (const auto& ev : trace.events) {
            if (classify_origin(ev.method.name, framework_prefixes) == Origin::application)
                into.insert(ev.method.name);
            if (ev.stack)
                for (const auto& frame : ev.stack->frames)
                    if (classify_origin(frame, framework_prefixes) == Origin::application)
                        into.insert(frame);
        }
    };

    std::set<std::string> all;
    collect(pair.baseline, all);
    collect(pair.failure, all);
    std::set<std::string> failing_covers;
    collect(pair.failure, failing_covers);

    CoverageMatrix matrix;
    matrix.entities.assign(all.begin(), all.end());

    const std::string& gm = pair.truth.scenario.ground_truth_method;
    Rng rng(pair.truth.scenario.app_shape.seed ^ 0x9e3779b97f4a7c15ULL);

    CoverageMatrix::TestRecord failing;
    failing.failed = true;
    for (std::size_t e = 0; e < matrix.entities.size(); ++e)
        if (failing_covers.count(matrix.entities[e]))
            failing.covered.push_back(static_cast<std::uint32_t>(e));
    matrix.tests.push_back(std::move(failing));

    for (int t = 0; t < passing_tests; ++t) {
        CoverageMatrix::TestRecord test;
        for (std::size_t e = 0; e < matrix.entities.size(); ++e) {
            if (matrix.entities[e] == gm)
                continue; // passing runs never reach the fault-triggering path
            if (rng.chance(75))
                test.covered.push_back(static_cast<std::uint32_t>(e));
        }
        matrix.tests.push_back(std::move(test));
    }
    return matrix;
}

SoundnessResult soundness(const DiffResult& result, const GroundTruth& truth, int min_weight,
                          KeyPolicy key_policy) {
    SoundnessResult out;
    if (result.sibs.empty())
        return out;

    auto contains_frmc = [&](const SuspiciousInvocationBlock& sib) {
        for (const auto& ev : sib.events)
            if (std::binary_search(truth.frmc.begin(), truth.frmc.end(),
                                   diff_key(ev, key_policy)))
                return true;
        return false;
    };

    std::size_t all = 0;
    std::size_t all_hit = 0;
    std::size_t heavy = 0;
    std::size_t heavy_hit = 0;
    for (const auto& sib : result.sibs) {
        const bool hit = contains_frmc(sib);
        ++all;
        all_hit += hit;
        if (sib.weight >= min_weight) {
            ++heavy;
            heavy_hit += hit;
        }
    }
    out.all_sibs = static_cast<double>(all_hit) / static_cast<double>(all);
    if (heavy > 0)
        out.filtered = static_cast<double>(heavy_hit) / static_cast<double>(heavy);
    return out;
}

std::optional<double> completeness(const DiffResult& result, const GroundTruth& truth,
                                   KeyPolicy key_policy) {
    if (truth.frmc.empty())
        return std::nullopt;
    std::set<std::string> seen;
    for (const auto& sib : result.sibs)
        for (const auto& ev : sib.events) {
            std::string key = diff_key(ev, key_policy);
            if (std::binary_search(truth.frmc.begin(), truth.frmc.end(), key))
                seen.insert(std::move(key));
        }
    return static_cast<double>(seen.size()) / static_cast<double>(truth.frmc.size());
}

namespace {

void count_position(TechniqueAggregate& agg, const std::optional<int>& pos) {
    if (!pos) {
        ++agg.not_ranked;
        return;
    }
    if (*pos <= 1)
        ++agg.top1;
    if (*pos <= 5)
        ++agg.top5;
    if (*pos <= 10)
        ++agg.top10;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

} // namespace

BenchResult run_bench(std::span<const FaultScenario> scenarios, const BenchConfig& config) {
    if (scenarios.empty())
        throw ParameterError("bench needs at least one scenario");

    BenchResult result;
    if (config.artifact_dir)
        std::filesystem::create_directories(*config.artifact_dir);

    for (const auto& scenario : scenarios) {
        const GeneratedPair pair = generate_pair(scenario, config.analysis.key_policy);
        const std::string& gm = pair.truth.scenario.ground_truth_method;

        const DiffResult detected =
            detect_sibs(pair.baseline, pair.failure,
                        {config.analysis.key_policy, config.analysis.max_edit_cost});
        const FixLocusReport report = analyze(pair.baseline, pair.failure, config.analysis);
        const BaselineRanking naive =
            naive_rank(pair.baseline, pair.failure, config.analysis.key_policy,
                       config.analysis.framework_prefixes);

        ScenarioOutcome outcome;
        outcome.id = scenario.id;
        outcome.kind = scenario.fault_kind;
        outcome.ground_truth_method = gm;
        outcome.detected_sibs = detected.stats.total_sibs;
        outcome.retained_sibs = report.retained_sibs;
        outcome.filo_position = rank_position(report, gm);
        outcome.naive_position = rank_position(naive, gm);
        outcome.sib_soundness =
            soundness(detected, pair.truth, config.analysis.min_weight, config.analysis.key_policy);
        outcome.sib_completeness = completeness(detected, pair.truth, config.analysis.key_policy);

        std::optional<CoverageMatrix> coverage;
        std::optional<BaselineRanking> ochiai;
        if (config.with_ochiai && scenario.fault_kind != FaultKind::crash_on_startup) {
            coverage = generate_coverage(pair, config.ochiai_passing_tests,
                                         config.analysis.framework_prefixes);
            ochiai = ochiai_rank(*coverage);
            outcome.ochiai_applicable = true;
            outcome.ochiai_position = rank_position(*ochiai, gm);
        }

        count_position(result.filo, outcome.filo_position);
        count_position(result.naive, outcome.naive_position);
        count_position(result.ochiai, outcome.ochiai_position);

        if (config.artifact_dir) {
            const auto dir = *config.artifact_dir / scenario.id;
            std::filesystem::create_directories(dir);
            write_text_file(dir / "baseline.jsonl", serialize_trace(pair.baseline));
            write_text_file(dir / "failure.jsonl", serialize_trace(pair.failure));

            ordered_json truth;
            truth["id"] = scenario.id;
            truth["fault_kind"] = fault_kind_name(scenario.fault_kind);
            truth["ground_truth_method"] = gm;
            truth["seed"] = scenario.app_shape.seed;
            truth["frmc"] = pair.truth.frmc;
            write_text_file(dir / "truth.json", truth.dump(2) + "\n");

            write_text_file(dir / "filo.json", report_to_json(report).dump(2) + "\n");
            write_text_file(dir / "naive.json", baseline_to_json(naive).dump(2) + "\n");
            if (ochiai) {
                write_text_file(dir / "ochiai.json", baseline_to_json(*ochiai).dump(2) + "\n");
                write_text_file(dir / "coverage.csv", coverage_to_csv(*coverage));
            }
        }

        result.scenarios.push_back(std::move(outcome));
    }

    if (config.artifact_dir) {
        write_text_file(*config.artifact_dir / "bench.json",
                        scenarios_to_manifest(scenarios).dump(2) + "\n");
        write_text_file(*config.artifact_dir / "summary.json",
                        bench_result_to_json(result).dump(2) + "\n");
        write_text_file(*config.artifact_dir / "summary.txt", bench_summary_text(result));
    }
    return result;
}

std::vector<FaultScenario> default_bench_suite() {
    std::vector<FaultScenario> scenarios;
    std::uint64_t seed = 1;
    auto add = [&](FaultKind kind, const char* prefix, int count) {
        for (int i = 0; i < count; ++i) {
            FaultScenario s;
            char id[32];
            std::snprintf(id, sizeof(id), "%s-%02d", prefix, i + 1);
            s.id = id;
            s.fault_kind = kind;
            s.app_shape.call_depth = 2 + i % 3;
            s.app_shape.fan_out = 2 + (i / 2) % 3;
            s.app_shape.trace_length = 160 + 24 * (i % 8);
            s.app_shape.noise_blocks = 0;
            s.app_shape.seed = seed++;
            scenarios.push_back(std::move(s));
        }
    };
    add(FaultKind::permission_early_return, "perm", 20);
    add(FaultKind::changed_return_semantics, "ret", 12);
    add(FaultKind::crash_on_startup, "crash", 8);
    add(FaultKind::missing_callback, "nocb", 10);
    return scenarios;
}

nlohmann::ordered_json scenarios_to_manifest(std::span<const FaultScenario> scenarios) {
    ordered_json j;
    ordered_json list = ordered_json::array();
    for (const auto& s : scenarios) {
        ordered_json e;
        e["id"] = s.id;
        e["fault_kind"] = fault_kind_name(s.fault_kind);
        ordered_json shape;
        shape["call_depth"] = s.app_shape.call_depth;
        shape["fan_out"] = s.app_shape.fan_out;
        shape["trace_length"] = s.app_shape.trace_length;
        shape["noise_blocks"] = s.app_shape.noise_blocks;
        shape["noise_block_length"] = s.app_shape.noise_block_length;
        shape["seed"] = s.app_shape.seed;
        e["app_shape"] = std::move(shape);
        list.push_back(std::move(e));
    }
    j["scenarios"] = std::move(list);
    return j;
}

std::vector<FaultScenario> scenarios_from_manifest(const nlohmann::json& manifest) {
    if (!manifest.is_object() || !manifest.contains("scenarios") ||
        !manifest["scenarios"].is_array())
        throw ParseError("manifest must be an object with a 'scenarios' array");
    std::vector<FaultScenario> scenarios;
    for (const auto& e : manifest["scenarios"]) {
        FaultScenario s;
        if (!e.contains("id") || !e["id"].is_string())
            throw ParseError("scenario without a string 'id'");
        s.id = e["id"].get<std::string>();
        if (!e.contains("fault_kind") || !e["fault_kind"].is_string())
            throw ParseError("scenario '" + s.id + "' lacks a 'fault_kind'");
        s.fault_kind = fault_kind_from_name(e["fault_kind"].get<std::string>());
        if (e.contains("app_shape")) {
            const auto& shape = e["app_shape"];
            auto get_int = [&](const char* field, int fallback) {
                return shape.contains(field) ? shape[field].get<int>() : fallback;
            };
            s.app_shape.call_depth = get_int("call_depth", s.app_shape.call_depth);
            s.app_shape.fan_out = get_int("fan_out", s.app_shape.fan_out);
            s.app_shape.trace_length = get_int("trace_length", s.app_shape.trace_length);
            s.app_shape.noise_blocks = get_int("noise_blocks", s.app_shape.noise_blocks);
            s.app_shape.noise_block_length =
                get_int("noise_block_length", s.app_shape.noise_block_length);
            if (shape.contains("seed"))
                s.app_shape.seed = shape["seed"].get<std::uint64_t>();
        }
        scenarios.push_back(std::move(s));
    }
    if (scenarios.empty())
        throw ParseError("manifest lists no scenarios");
    return scenarios;
}

std::vector<FaultScenario> load_manifest_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open manifest: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid manifest JSON: ") + e.what());
    }
    return scenarios_from_manifest(j);
}

namespace {

ordered_json aggregate_to_json(const TechniqueAggregate& agg) {
    ordered_json j;
    j["top1"] = agg.top1;
    j["top5"] = agg.top5;
    j["top10"] = agg.top10;
    j["not_in_ranking"] = agg.not_ranked;
    return j;
}

std::string position_text(const std::optional<int>& pos) {
    return pos ? std::to_string(*pos) : "-";
}

} // namespace

nlohmann::ordered_json bench_result_to_json(const BenchResult& result) {
    ordered_json j;
    ordered_json scenarios = ordered_json::array();
    for (const auto& s : result.scenarios) {
        ordered_json e;
        e["id"] = s.id;
        e["fault_kind"] = fault_kind_name(s.kind);
        e["ground_truth_method"] = s.ground_truth_method;
        e["detected_sibs"] = s.detected_sibs;
        e["retained_sibs"] = s.retained_sibs;
        e["filo"] = s.filo_position ? ordered_json(*s.filo_position) : ordered_json(nullptr);
        e["naive"] = s.naive_position ? ordered_json(*s.naive_position) : ordered_json(nullptr);
        e["ochiai"] = s.ochiai_position ? ordered_json(*s.ochiai_position) : ordered_json(nullptr);
        e["ochiai_applicable"] = s.ochiai_applicable;
        e["soundness_all"] = s.sib_soundness.all_sibs ? ordered_json(*s.sib_soundness.all_sibs)
                                                      : ordered_json(nullptr);
        e["soundness_min_weight"] = s.sib_soundness.filtered
                                        ? ordered_json(*s.sib_soundness.filtered)
                                        : ordered_json(nullptr);
        e["completeness"] =
            s.sib_completeness ? ordered_json(*s.sib_completeness) : ordered_json(nullptr);
        scenarios.push_back(std::move(e));
    }
    j["scenarios"] = std::move(scenarios);
    ordered_json agg;
    agg["filo"] = aggregate_to_json(result.filo);
    agg["naive"] = aggregate_to_json(result.naive);
    agg["ochiai"] = aggregate_to_json(result.ochiai);
    j["aggregates"] = std::move(agg);
    return j;
}

std::string bench_summary_text(const BenchResult& result) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-12s %-26s %8s %8s %8s\n", "Scenario", "Kind", "FILO",
                  "Naive", "Ochiai");
    out += line;
    for (const auto& s : result.scenarios) {
        std::snprintf(line, sizeof(line), "%-12s %-26s %8s %8s %8s\n", s.id.c_str(),
                      fault_kind_name(s.kind).c_str(), position_text(s.filo_position).c_str(),
                      position_text(s.naive_position).c_str(),
                      position_text(s.ochiai_position).c_str());
        out += line;
    }
    out += std::string(66, '-') + "\n";
    auto agg_row = [&](const char* label, auto accessor) {
        std::snprintf(line, sizeof(line), "%-39s %8d %8d %8d\n", label, accessor(result.filo),
                      accessor(result.naive), accessor(result.ochiai));
        out += line;
    };
    agg_row("Top-1", [](const TechniqueAggregate& a) { return a.top1; });
    agg_row("Top-5", [](const TechniqueAggregate& a) { return a.top5; });
    agg_row("Top-10", [](const TechniqueAggregate& a) { return a.top10; });
    agg_row("Not in the ranking", [](const TechniqueAggregate& a) { return a.not_ranked; });
    return out;
}

} // namespace filo
