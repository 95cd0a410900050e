#include <filo/ranking.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace filo {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> sib_path(const SuspiciousInvocationBlock& sib) {
    std::vector<std::string> path = sib.representative_stack->frames;
    if (path.back() != sib.representative.name)
        path.push_back(sib.representative.name);
    return path;
}

std::optional<std::string> enclosing_class_of(const std::string& method_name) {
    const auto last_dot = method_name.rfind('.');
    if (last_dot == std::string::npos)
        return std::nullopt;
    const std::string class_part = method_name.substr(0, last_dot);
    const auto dollar = class_part.find('$');
    if (dollar == std::string::npos)
        return std::nullopt;
    return class_part.substr(0, dollar);
}

std::vector<std::string> event_key_preview(const SuspiciousInvocationBlock& sib,
                                           std::size_t limit = 10) {
    std::vector<std::string> preview;
    for (const auto& ev : sib.events) {
        if (preview.size() >= limit)
            break;
        preview.push_back(diff_key(ev, KeyPolicy::full));
    }
    return preview;
}

std::string format_score(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

const char* key_policy_name(KeyPolicy policy) {
    return policy == KeyPolicy::full ? "full" : "no_return";
}

} // namespace

FailureCallTree build_failure_call_tree(std::span<const SuspiciousInvocationBlock> sibs,
                                        const std::string& root_name) {
    if (sibs.empty())
        throw StructureError("nothing to localize: no suspicious invocation blocks");

    FailureCallTree tree;
    tree.nodes.push_back({root_name, 0, -1, {}, {}, 0, 0});

    for (std::size_t s = 0; s < sibs.size(); ++s) {
        const auto& sib = sibs[s];
        if (!sib.rankable())
            throw StructureError("block at seq [" + std::to_string(sib.start_seq) + ".." +
                                 std::to_string(sib.end_seq) + "] is not rankable");
        const std::vector<std::string> path = sib_path(sib);
        if (path.front() != root_name)
            throw StructureError("block at seq [" + std::to_string(sib.start_seq) + ".." +
                                 std::to_string(sib.end_seq) + "] has stack root '" + path.front() +
                                 "', expected '" + root_name + "'");
        int node = 0;
        for (std::size_t depth = 1; depth < path.size(); ++depth) {
            const std::string& name = path[depth];
            int next = -1;
            for (int child : tree.nodes[static_cast<std::size_t>(node)].children) {
                if (tree.nodes[static_cast<std::size_t>(child)].method == name) {
                    next = child;
                    break;
                }
            }
            if (next < 0) {
                next = static_cast<int>(tree.nodes.size());
                tree.nodes.push_back({name, static_cast<int>(depth), node, {}, {}, 0, 0});
                tree.nodes[static_cast<std::size_t>(node)].children.push_back(next);
            }
            node = next;
        }
        auto& leaf = tree.nodes[static_cast<std::size_t>(node)];
        if (leaf.sib_indices.empty())
            ++tree.leaf_count;
        leaf.sib_indices.push_back(s);
        leaf.leaf_weight += sib.weight;
        tree.total_weight += sib.weight;
    }

    for (const auto& node : tree.nodes)
        tree.height = std::max(tree.height, node.depth);

    // parents precede children, so one reverse sweep aggregates subtrees
    for (std::size_t idx = tree.nodes.size(); idx-- > 0;) {
        auto& node = tree.nodes[idx];
        node.subtree_weight += node.leaf_weight;
        if (node.parent >= 0)
            tree.nodes[static_cast<std::size_t>(node.parent)].subtree_weight += node.subtree_weight;
    }
    return tree;
}

double imp_blocks(const FailureCallTree& tree, int node) {
    if (tree.total_weight <= 0)
        throw StructureError("failure call tree has zero total weight");
    return static_cast<double>(tree.nodes[static_cast<std::size_t>(node)].subtree_weight) /
           static_cast<double>(tree.total_weight);
}

double depth_score(const FailureCallTree& tree, int node) {
    if (tree.height <= 0)
        throw StructureError("failure call tree has height 0; depth cannot be normalized");
    return static_cast<double>(tree.nodes[static_cast<std::size_t>(node)].depth) /
           static_cast<double>(tree.height);
}

FixLocusReport rank(const FailureCallTree& tree, std::span<const SuspiciousInvocationBlock> sibs,
                    double k1, double k2, std::span<const std::string> framework_prefixes) {
    if (k1 < 0.0 || k2 < 0.0 || std::abs(k1 + k2 - 1.0) > 1e-9)
        throw ParameterError("k1 and k2 must be non-negative and sum to 1");

    FixLocusReport report;
    report.tree_stats = {tree.nodes.size(), tree.height, tree.leaf_count, tree.total_weight};

    std::unordered_map<std::string, MethodScore> best;
    for (int idx = 1; idx < static_cast<int>(tree.nodes.size()); ++idx) {
        const auto& node = tree.nodes[static_cast<std::size_t>(idx)];
        if (classify_origin(node.method, framework_prefixes) == Origin::framework)
            continue;
        MethodScore score;
        score.method = node.method;
        score.imp_blocks = imp_blocks(tree, idx);
        score.depth = depth_score(tree, idx);
        score.susp = k1 * score.imp_blocks + k2 * score.depth;
        score.node = idx;
        score.enclosing_class = enclosing_class_of(node.method);

        auto [it, inserted] = best.emplace(node.method, score);
        if (!inserted) {
            auto& cur = it->second;
            const bool better = score.susp > cur.susp ||
                                (score.susp == cur.susp &&
                                 (score.imp_blocks > cur.imp_blocks ||
                                  (score.imp_blocks == cur.imp_blocks && score.depth < cur.depth)));
            if (better)
                cur = score;
        }
    }

    report.ranking.reserve(best.size());
    for (auto& [name, score] : best) {
        // evidence: every SIB whose leaf falls inside this occurrence's subtree
        std::vector<int> stack{score.node};
        while (!stack.empty()) {
            const int idx = stack.back();
            stack.pop_back();
            const auto& node = tree.nodes[static_cast<std::size_t>(idx)];
            score.evidence.insert(score.evidence.end(), node.sib_indices.begin(),
                                  node.sib_indices.end());
            stack.insert(stack.end(), node.children.begin(), node.children.end());
        }
        std::sort(score.evidence.begin(), score.evidence.end());
        report.ranking.push_back(std::move(score));
    }

    std::sort(report.ranking.begin(), report.ranking.end(),
              [](const MethodScore& x, const MethodScore& y) {
                  if (x.susp != y.susp)
                      return x.susp > y.susp;
                  if (x.imp_blocks != y.imp_blocks)
                      return x.imp_blocks > y.imp_blocks;
                  if (x.depth != y.depth)
                      return x.depth < y.depth;
                  return x.method < y.method;
              });

    report.sibs.assign(sibs.begin(), sibs.end());
    return report;
}

FixLocusReport analyze(const Trace& baseline, const Trace& failure, const AnalysisConfig& config) {
    if (config.k1 < 0.0 || config.k2 < 0.0 || std::abs(config.k1 + config.k2 - 1.0) > 1e-9)
        throw ParameterError("k1 and k2 must be non-negative and sum to 1");

    DiffOptions diff_options{config.key_policy, config.max_edit_cost};
    const DiffResult detected = detect_sibs(baseline, failure, diff_options);
    const DiffResult filtered = filter_sibs(detected, config.min_weight);

    std::vector<SuspiciousInvocationBlock> rankable;
    for (const auto& sib : filtered.sibs)
        if (sib.rankable())
            rankable.push_back(sib);

    if (filtered.sibs.empty()) {
        FixLocusReport report;
        report.parameters = config;
        report.sib_stats = detected.stats;
        report.warnings = detected.warnings;
        report.no_differences = true;
        return report;
    }
    if (rankable.empty())
        throw StructureError("no suspicious block carries a representative stack snapshot; "
                             "cannot build a failure call tree");

    const FailureCallTree tree = build_failure_call_tree(rankable, config.root_name);
    FixLocusReport report =
        rank(tree, rankable, config.k1, config.k2, config.framework_prefixes);
    report.parameters = config;
    report.sib_stats = detected.stats;
    report.retained_sibs = filtered.sibs.size();
    report.warnings = filtered.warnings;
    return report;
}

nlohmann::ordered_json report_to_json(const FixLocusReport& report, std::optional<int> top) {
    ordered_json j;
    j["technique"] = "filo";

    ordered_json params;
    params["k1"] = report.parameters.k1;
    params["k2"] = report.parameters.k2;
    params["min_weight"] = report.parameters.min_weight;
    params["key_policy"] = key_policy_name(report.parameters.key_policy);
    params["root"] = report.parameters.root_name;
    params["framework_prefixes"] = report.parameters.framework_prefixes;
    j["parameters"] = std::move(params);

    ordered_json stats;
    stats["detected"] = report.sib_stats.total_sibs;
    stats["retained"] = report.retained_sibs;
    stats["baseline_only_blocks"] = report.sib_stats.baseline_only;
    stats["excluded_no_stack"] = report.sib_stats.excluded_no_stack;
    stats["excluded_no_begin"] = report.sib_stats.excluded_no_begin;
    stats["total_weight"] = report.sib_stats.total_weight;
    ordered_json hist = ordered_json::object();
    for (const auto& [weight, count] : report.sib_stats.weight_histogram)
        hist[std::to_string(weight)] = count;
    stats["weight_histogram"] = std::move(hist);
    j["sib_stats"] = std::move(stats);

    ordered_json tstats;
    tstats["nodes"] = report.tree_stats.nodes;
    tstats["height"] = report.tree_stats.height;
    tstats["leaves"] = report.tree_stats.leaves;
    tstats["total_weight"] = report.tree_stats.total_weight;
    j["tree_stats"] = std::move(tstats);

    j["no_differences"] = report.no_differences;

    ordered_json ranking = ordered_json::array();
    std::size_t limit = report.ranking.size();
    if (top && *top >= 0)
        limit = std::min(limit, static_cast<std::size_t>(*top));
    for (std::size_t r = 0; r < limit; ++r) {
        const auto& entry = report.ranking[r];
        ordered_json e;
        e["method"] = entry.method;
        e["susp"] = entry.susp;
        e["imp_blocks"] = entry.imp_blocks;
        e["depth"] = entry.depth;
        if (entry.enclosing_class)
            e["enclosing_class"] = *entry.enclosing_class;
        ordered_json evidence = ordered_json::array();
        for (std::size_t sib_idx : entry.evidence) {
            const auto& sib = report.sibs[sib_idx];
            ordered_json ev;
            ev["representative"] = sib.representative.name;
            ev["weight"] = sib.weight;
            ev["start_seq"] = sib.start_seq;
            ev["end_seq"] = sib.end_seq;
            ev["preview"] = event_key_preview(sib);
            evidence.push_back(std::move(ev));
        }
        e["evidence"] = std::move(evidence);
        ranking.push_back(std::move(e));
    }
    j["ranking"] = std::move(ranking);
    j["warnings"] = report.warnings;
    return j;
}

std::string report_to_text(const FixLocusReport& report, std::optional<int> top) {
    if (report.no_differences)
        return "no differences detected\n";

    std::size_t limit = report.ranking.size();
    if (top && *top >= 0)
        limit = std::min(limit, static_cast<std::size_t>(*top));

    std::size_t width = std::string("MethodName").size();
    for (std::size_t r = 0; r < limit; ++r)
        width = std::max(width, report.ranking[r].method.size());

    std::string out = "MethodName";
    out.append(width - std::string("MethodName").size() + 2, ' ');
    out += "Susp\n";
    for (std::size_t r = 0; r < limit; ++r) {
        const auto& entry = report.ranking[r];
        out += entry.method;
        out.append(width - entry.method.size() + 2, ' ');
        out += format_score(entry.susp, 2);
        out += '\n';
    }
    return out;
}

nlohmann::ordered_json diff_result_to_json(const DiffResult& result) {
    ordered_json j;
    ordered_json sibs = ordered_json::array();
    for (const auto& sib : result.sibs) {
        ordered_json s;
        s["start_seq"] = sib.start_seq;
        s["end_seq"] = sib.end_seq;
        s["events"] = sib.events.size();
        s["weight"] = sib.weight;
        s["representative"] = sib.has_begin() ? sib.representative.name : "";
        s["has_stack"] = sib.representative_stack.has_value();
        s["preview"] = event_key_preview(sib);
        sibs.push_back(std::move(s));
    }
    j["sibs"] = std::move(sibs);

    ordered_json deletions = ordered_json::array();
    for (const auto& block : result.baseline_only_blocks) {
        ordered_json b;
        b["start_seq"] = block.start_seq;
        b["end_seq"] = block.end_seq;
        b["events"] = block.events.size();
        deletions.push_back(std::move(b));
    }
    j["baseline_only_blocks"] = std::move(deletions);

    ordered_json stats;
    stats["total_sibs"] = result.stats.total_sibs;
    stats["baseline_only"] = result.stats.baseline_only;
    stats["total_weight"] = result.stats.total_weight;
    ordered_json hist = ordered_json::object();
    for (const auto& [weight, count] : result.stats.weight_histogram)
        hist[std::to_string(weight)] = count;
    stats["weight_histogram"] = std::move(hist);
    j["stats"] = std::move(stats);
    j["warnings"] = result.warnings;
    return j;
}

} // namespace filo
