#include <filo/diff.hpp>

#include <algorithm>
#include <cassert>
#include <limits>
#include <unordered_map>

namespace filo {

namespace {

constexpr std::int32_t kUnreachable = std::numeric_limits<std::int32_t>::max();

// Reverse Myers furthest-reaching frontiers over the suffix edit distance.
// levels[d] holds, for diagonals l = (n-m) - d + 2t with t = 0..d, the
// minimal row i reachable backward from (n, m) with exactly d edits after
// maximal snake sliding. The canonical walk consumes one level per edit.
struct ReverseFrontiers {
    std::vector<std::vector<std::int32_t>> levels;
    std::int32_t l_end = 0;
    int distance = -1; // suffix edit distance of (0, 0); -1 when max_cost hit

    // true iff the suffix edit distance of (i, j) is <= level (parity of
    // `level` must match the diagonal of (i, j), which the walk guarantees)
    bool covers(int level, std::int32_t i, std::int32_t j) const {
        const std::int32_t l = i - j;
        if (l < l_end - level || l > l_end + level)
            return false;
        const std::int32_t t = (l - (l_end - level)) / 2;
        assert((l - (l_end - level)) % 2 == 0);
        const std::int32_t r = levels[static_cast<std::size_t>(level)][static_cast<std::size_t>(t)];
        return r != kUnreachable && r <= i;
    }
};

ReverseFrontiers compute_reverse_frontiers(std::span<const std::int32_t> a,
                                           std::span<const std::int32_t> b, int max_cost) {
    const std::int32_t n = static_cast<std::int32_t>(a.size());
    const std::int32_t m = static_cast<std::int32_t>(b.size());
    ReverseFrontiers fr;
    fr.l_end = n - m;

    auto slide_back = [&](std::int32_t i, std::int32_t l) {
        std::int32_t j = i - l;
        while (i > 0 && j > 0 && a[static_cast<std::size_t>(i - 1)] == b[static_cast<std::size_t>(j - 1)]) {
            --i;
            --j;
        }
        return i;
    };

    auto covers_origin = [&](int d) {
        // diagonal 0 holds (0, 0); representable at level d only when in
        // range and of matching parity
        if (0 < fr.l_end - d || 0 > fr.l_end + d)
            return false;
        if ((d - fr.l_end) % 2 != 0)
            return false;
        const std::int32_t t = (0 - (fr.l_end - d)) / 2;
        return fr.levels[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)] == 0;
    };

    fr.levels.push_back({slide_back(n, fr.l_end)});
    if (covers_origin(0)) {
        fr.distance = 0;
        return fr;
    }

    for (int d = 1; d <= max_cost; ++d) {
        const auto& prev = fr.levels.back();
        std::vector<std::int32_t> cur(static_cast<std::size_t>(d) + 1, kUnreachable);
        for (std::int32_t t = 0; t <= d; ++t) {
            const std::int32_t l = fr.l_end - d + 2 * t;
            if (l < -m || l > n)
                continue;
            std::int32_t best = kUnreachable;
            // reverse of a forward delete: from diagonal l+1, row decreases
            if (t <= d - 1) {
                const std::int32_t pi = prev[static_cast<std::size_t>(t)];
                if (pi != kUnreachable && pi >= 1)
                    best = pi - 1;
            }
            // reverse of a forward insert: from diagonal l-1, row unchanged
            if (t >= 1) {
                const std::int32_t pi = prev[static_cast<std::size_t>(t) - 1];
                if (pi != kUnreachable && pi - (l - 1) >= 1)
                    best = std::min(best, pi);
            }
            if (best == kUnreachable)
                continue;
            cur[static_cast<std::size_t>(t)] = slide_back(best, l);
        }
        fr.levels.push_back(std::move(cur));
        if (covers_origin(d)) {
            fr.distance = d;
            return fr;
        }
    }
    return fr; // distance stays -1: cost cap exceeded
}

class HunkBuilder {
public:
    HunkBuilder(std::size_t offset, std::vector<EditHunk>& out) : offset_(offset), out_(out) {}

    void edit_at(std::size_t i, std::size_t j) {
        if (!open_) {
            open_ = true;
            a_start_ = i;
            b_start_ = j;
        }
    }

    void match_at(std::size_t i, std::size_t j) {
        if (open_) {
            out_.push_back({offset_ + a_start_, i - a_start_, offset_ + b_start_, j - b_start_});
            open_ = false;
        }
    }

private:
    std::size_t offset_;
    std::vector<EditHunk>& out_;
    bool open_ = false;
    std::size_t a_start_ = 0;
    std::size_t b_start_ = 0;
};

} // namespace

std::vector<EditHunk> diff_hunks(std::span<const std::int32_t> a, std::span<const std::int32_t> b,
                                 int max_cost) {
    std::size_t prefix = 0;
    while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix])
        ++prefix;
    const auto a2 = a.subspan(prefix);
    const auto b2 = b.subspan(prefix);

    if (a2.empty() && b2.empty())
        return {};
    if (a2.empty())
        return {{prefix, 0, prefix, b2.size()}};
    if (b2.empty())
        return {{prefix, a2.size(), prefix, 0}};

    const ReverseFrontiers fr = compute_reverse_frontiers(a2, b2, max_cost);
    if (fr.distance < 0) {
        // cost cap exceeded: report the whole middle as one replacement
        std::size_t suffix = 0;
        while (suffix < a2.size() && suffix < b2.size() &&
               a2[a2.size() - 1 - suffix] == b2[b2.size() - 1 - suffix])
            ++suffix;
        return {{prefix, a2.size() - suffix, prefix, b2.size() - suffix}};
    }

    std::vector<EditHunk> hunks;
    HunkBuilder builder(prefix, hunks);
    const std::int32_t n = static_cast<std::int32_t>(a2.size());
    const std::int32_t m = static_cast<std::int32_t>(b2.size());
    std::int32_t i = 0;
    std::int32_t j = 0;
    int d = fr.distance;
    while (true) {
        while (i < n && j < m && a2[static_cast<std::size_t>(i)] == b2[static_cast<std::size_t>(j)]) {
            builder.match_at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            ++i;
            ++j;
        }
        if (i == n && j == m)
            break;
        builder.edit_at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        assert(d > 0);
        if (j == m) {
            ++i;
        } else if (i == n) {
            ++j;
        } else if (fr.covers(d - 1, i + 1, j)) {
            ++i; // deleting the baseline line keeps the script minimal
        } else {
            ++j;
        }
        --d;
    }
    builder.match_at(static_cast<std::size_t>(n), static_cast<std::size_t>(m));
    assert(d == 0);
    return hunks;
}

namespace {

SuspiciousInvocationBlock make_sib(std::span<const TraceEvent> events) {
    SuspiciousInvocationBlock sib;
    sib.events.assign(events.begin(), events.end());
    sib.start_seq = events.front().seq;
    sib.end_seq = events.back().seq;
    for (const auto& ev : events) {
        if (ev.kind != EventKind::begin)
            continue;
        if (sib.weight == 0) {
            sib.representative = ev.method;
            sib.representative_stack = ev.stack;
        }
        ++sib.weight;
    }
    return sib;
}

void add_exclusion_warnings(DiffResult& result) {
    for (const auto& sib : result.sibs) {
        if (!sib.has_begin())
            result.warnings.push_back("block at seq [" + std::to_string(sib.start_seq) + ".." +
                                      std::to_string(sib.end_seq) +
                                      "] contains no begin event; excluded from ranking");
        else if (!sib.representative_stack)
            result.warnings.push_back("block at seq [" + std::to_string(sib.start_seq) + ".." +
                                      std::to_string(sib.end_seq) + "] (representative " +
                                      sib.representative.name +
                                      ") has no stack snapshot; excluded from ranking");
    }
}

} // namespace

std::size_t DiffStats::count_weight_greater(int k) const {
    std::size_t count = 0;
    for (const auto& [weight, n] : weight_histogram)
        if (weight > k)
            count += n;
    return count;
}

DiffResult detect_sibs(const Trace& baseline, const Trace& failure, const DiffOptions& options) {
    DiffResult result;

    if (failure.events.empty() && !baseline.events.empty()) {
        // crash on startup: no failure trace was produced, so the whole
        // baseline becomes one suspicious block
        result.sibs.push_back(make_sib(baseline.events));
        add_exclusion_warnings(result);
        result.stats = sib_stats(result);
        return result;
    }

    std::unordered_map<std::string, std::int32_t> ids;
    auto key_stream = [&](const Trace& t) {
        std::vector<std::int32_t> keys;
        keys.reserve(t.events.size());
        for (const auto& ev : t.events) {
            auto [it, inserted] =
                ids.emplace(diff_key(ev, options.key_policy), static_cast<std::int32_t>(ids.size()));
            keys.push_back(it->second);
        }
        return keys;
    };
    const std::vector<std::int32_t> a = key_stream(baseline);
    const std::vector<std::int32_t> b = key_stream(failure);

    for (const EditHunk& hunk : diff_hunks(a, b, options.max_edit_cost)) {
        if (hunk.b_len > 0)
            result.sibs.push_back(
                make_sib(std::span(failure.events).subspan(hunk.b_start, hunk.b_len)));
        if (hunk.a_len > 0) {
            BaselineOnlyBlock block;
            auto events = std::span(baseline.events).subspan(hunk.a_start, hunk.a_len);
            block.events.assign(events.begin(), events.end());
            block.start_seq = events.front().seq;
            block.end_seq = events.back().seq;
            result.baseline_only_blocks.push_back(std::move(block));
        }
    }
    add_exclusion_warnings(result);
    result.stats = sib_stats(result);
    return result;
}

DiffResult filter_sibs(const DiffResult& result, int min_weight) {
    if (min_weight < 1)
        throw ParameterError("min_weight must be >= 1");
    DiffResult out;
    out.baseline_only_blocks = result.baseline_only_blocks;
    out.warnings = result.warnings;
    for (const auto& sib : result.sibs)
        if (sib.weight >= min_weight)
            out.sibs.push_back(sib);
    if (out.sibs.empty() && !result.sibs.empty())
        out.sibs = result.sibs; // every block is below the threshold: keep them all
    out.stats = sib_stats(out);
    return out;
}

DiffStats sib_stats(const DiffResult& result) {
    DiffStats stats;
    stats.total_sibs = result.sibs.size();
    stats.baseline_only = result.baseline_only_blocks.size();
    for (const auto& sib : result.sibs) {
        stats.total_weight += sib.weight;
        ++stats.weight_histogram[sib.weight];
        if (!sib.has_begin())
            ++stats.excluded_no_begin;
        else if (!sib.representative_stack)
            ++stats.excluded_no_stack;
    }
    return stats;
}

} // namespace filo
