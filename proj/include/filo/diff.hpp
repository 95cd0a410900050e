#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <filo/trace.hpp>

namespace filo {

/// One gap between two matched lines of the diff: a_len deleted baseline
/// lines and b_len inserted failure lines (either side may be empty, not
/// both). Offsets index the key streams handed to diff_hunks().
struct EditHunk {
    std::size_t a_start = 0;
    std::size_t a_len = 0;
    std::size_t b_start = 0;
    std::size_t b_len = 0;

    bool operator==(const EditHunk&) const = default;
};

/// Minimal-edit-script line diff with a fixed canonical alignment.
///
/// Semantics: walk both streams from the front; equal keys always match;
/// on a mismatch, delete the baseline line if doing so still permits a
/// minimal script (measured against the suffix edit distance), otherwise
/// insert the failure line. This makes the block decomposition a pure
/// function of the inputs; ties between minimal scripts never depend on
/// internal evaluation order.
///
/// The implementation runs reverse Myers furthest-reaching frontiers, so
/// memory is O(d^2) in the edit distance d and independent of input length.
/// When d exceeds max_cost the middle of the input (after stripping the
/// common prefix and suffix) is reported as one replacement hunk; the result
/// is still a correct edit script, just not a minimal one.
std::vector<EditHunk> diff_hunks(std::span<const std::int32_t> a, std::span<const std::int32_t> b,
                                 int max_cost = 8192);

/// A contiguous run of failure-trace boundary calls with no counterpart in
/// the baseline trace. weight counts begin events: one boundary call weighs
/// 1 no matter whether its end event also falls inside the block. Blocks
/// that contain no begin event (a hunk can start mid-call) keep weight 0 and
/// are retained for statistics only.
struct SuspiciousInvocationBlock {
    std::vector<TraceEvent> events; // contiguous slice of the failure trace
    MethodId representative;        // method of the first begin event
    std::optional<StackSnapshot> representative_stack;
    int weight = 0;
    std::uint64_t start_seq = 0;
    std::uint64_t end_seq = 0;

    bool has_begin() const { return weight > 0; }
    /// Eligible for fix-locus ranking: carries a representative with a stack.
    bool rankable() const { return weight > 0 && representative_stack.has_value(); }
};

/// Contiguous baseline-trace run deleted by the diff (calls the failure
/// never performed).
struct BaselineOnlyBlock {
    std::vector<TraceEvent> events;
    std::uint64_t start_seq = 0;
    std::uint64_t end_seq = 0;
};

struct DiffStats {
    std::size_t total_sibs = 0;
    std::size_t baseline_only = 0;
    std::size_t excluded_no_stack = 0; // representative lacks a stack snapshot
    std::size_t excluded_no_begin = 0; // block holds end events only
    long long total_weight = 0;
    std::map<int, std::size_t> weight_histogram;

    std::size_t count_weight_greater(int k) const;
};

struct DiffResult {
    std::vector<SuspiciousInvocationBlock> sibs; // ordered by start_seq, non-overlapping
    std::vector<BaselineOnlyBlock> baseline_only_blocks;
    DiffStats stats;
    std::vector<std::string> warnings;
};

struct DiffOptions {
    KeyPolicy key_policy = KeyPolicy::full;
    int max_edit_cost = 8192;
};

/// Anomaly detection: diffs the two traces over diff_key() streams and cuts
/// the failure-side gaps into SIBs. An empty failure trace against a
/// non-empty baseline is the crash-on-startup case and yields the whole
/// baseline as a single block whose events and stacks come from the
/// baseline.
DiffResult detect_sibs(const Trace& baseline, const Trace& failure, const DiffOptions& options = {});

/// Keeps blocks of weight >= min_weight; if nothing survives and the input
/// was non-empty the input set is returned unchanged (all-noise fallback).
DiffResult filter_sibs(const DiffResult& result, int min_weight);

DiffStats sib_stats(const DiffResult& result);

} // namespace filo
