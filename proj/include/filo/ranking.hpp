#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include <filo/diff.hpp>
#include <filo/trace.hpp>

namespace filo {

/// Rooted tree merging the stack snapshots of all SIB representatives.
/// Nodes are method calls; two stacks sharing a name-path prefix share
/// nodes, so recursion (the same method at several depths of one stack)
/// yields distinct nodes. Nodes carrying sib_indices are the SIB leaves.
struct CallTreeNode {
    std::string method;
    int depth = 0;
    int parent = -1;
    std::vector<int> children;
    std::vector<std::size_t> sib_indices; // SIBs whose representative sits here
    long long leaf_weight = 0;            // summed weight of those SIBs
    long long subtree_weight = 0;
};

struct FailureCallTree {
    std::vector<CallTreeNode> nodes; // nodes[0] is the root; parents precede children
    int height = 0;
    long long total_weight = 0;
    int leaf_count = 0;
};

/// Builds the failure call tree from SIB representative stacks. Every SIB
/// must be rankable (weight >= 1 and a stack whose first frame equals
/// root_name); an empty block list or a foreign stack root raises
/// StructureError. If a stack does not already end at the representative
/// method, the method is appended as the final path element.
FailureCallTree build_failure_call_tree(std::span<const SuspiciousInvocationBlock> sibs,
                                        const std::string& root_name);

/// Fraction of the total SIB weight reachable from the node's subtree.
double imp_blocks(const FailureCallTree& tree, int node);

/// Node depth normalized by tree height. Throws StructureError on a
/// root-only tree (height 0).
double depth_score(const FailureCallTree& tree, int node);

struct MethodScore {
    std::string method;
    double susp = 0.0;
    double imp_blocks = 0.0;
    double depth = 0.0; // normalized depth of the maximizing occurrence
    int node = -1;
    std::vector<std::size_t> evidence; // SIB indices reachable from that node
    std::optional<std::string> enclosing_class; // for anonymous/inner classes
};

struct TreeStats {
    std::size_t nodes = 0;
    int height = 0;
    int leaves = 0;
    long long total_weight = 0;
};

struct AnalysisConfig {
    KeyPolicy key_policy = KeyPolicy::full;
    int min_weight = 2;
    double k1 = 0.25;
    double k2 = 0.75;
    std::vector<std::string> framework_prefixes = default_framework_prefixes();
    std::string root_name = kDefaultRootMethod;
    int max_edit_cost = 8192;
};

struct FixLocusReport {
    std::vector<MethodScore> ranking; // susp descending, one entry per method
    AnalysisConfig parameters;
    TreeStats tree_stats;
    DiffStats sib_stats;      // statistics of the full detection result
    std::size_t retained_sibs = 0; // blocks that survived the weight filter
    std::vector<SuspiciousInvocationBlock> sibs; // the ranked evidence blocks
    std::vector<std::string> warnings;
    bool no_differences = false;
};

/// Scores every node as k1*ImpBlocks + k2*Depth, keeps the best occurrence
/// per method, drops framework-origin methods and the root, and sorts the
/// rest. Ties order by higher imp_blocks, then shallower depth, then name.
FixLocusReport rank(const FailureCallTree& tree, std::span<const SuspiciousInvocationBlock> sibs,
                    double k1, double k2, std::span<const std::string> framework_prefixes);

/// End-to-end composition: detect_sibs -> filter_sibs -> build tree -> rank.
/// Zero detected SIBs yield a no-differences report with an empty ranking;
/// SIBs whose representatives all lack stacks raise StructureError.
FixLocusReport analyze(const Trace& baseline, const Trace& failure, const AnalysisConfig& config);

nlohmann::ordered_json report_to_json(const FixLocusReport& report,
                                      std::optional<int> top = std::nullopt);
std::string report_to_text(const FixLocusReport& report, std::optional<int> top = std::nullopt);

nlohmann::ordered_json diff_result_to_json(const DiffResult& result);

} // namespace filo
