#pragma once

// Reference diff for small inputs: a full suffix-LCS dynamic program plus
// the declared canonical walk (match when equal, otherwise delete when that
// preserves the LCS, otherwise insert). Deliberately independent of the
// frontier-based production implementation.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include <filo/diff.hpp>

namespace filo::testing {

inline std::vector<EditHunk> oracle_diff_hunks(std::span<const std::int32_t> a,
                                               std::span<const std::int32_t> b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;)
        for (std::size_t j = m; j-- > 0;)
            lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1
                                     : std::max(lcs[i + 1][j], lcs[i][j + 1]);

    std::vector<EditHunk> hunks;
    std::size_t i = 0;
    std::size_t j = 0;
    bool open = false;
    std::size_t hunk_a = 0;
    std::size_t hunk_b = 0;
    auto on_match = [&]() {
        if (open) {
            hunks.push_back({hunk_a, i - hunk_a, hunk_b, j - hunk_b});
            open = false;
        }
    };
    while (i < n || j < m) {
        if (i < n && j < m && a[i] == b[j]) {
            on_match();
            ++i;
            ++j;
        } else {
            if (!open) {
                hunk_a = i;
                hunk_b = j;
                open = true;
            }
            if (j == m || (i < n && lcs[i + 1][j] >= lcs[i][j + 1]))
                ++i;
            else
                ++j;
        }
    }
    on_match();
    return hunks;
}

/// Replays an edit script over the baseline stream; the result must equal
/// the failure stream if the hunks form a valid script.
inline std::vector<std::int32_t> replay_hunks(std::span<const std::int32_t> a,
                                              std::span<const std::int32_t> b,
                                              std::span<const EditHunk> hunks) {
    std::vector<std::int32_t> out;
    std::size_t ai = 0;
    std::size_t bi = 0;
    for (const auto& hunk : hunks) {
        while (ai < hunk.a_start) {
            out.push_back(a[ai++]);
            ++bi;
        }
        ai += hunk.a_len;
        for (std::size_t k = 0; k < hunk.b_len; ++k)
            out.push_back(b[hunk.b_start + k]);
        bi = hunk.b_start + hunk.b_len;
    }
    while (ai < a.size())
        out.push_back(a[ai++]);
    (void)bi;
    return out;
}

} // namespace filo::testing
