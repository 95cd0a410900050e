#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include <filo/diff.hpp>
#include <filo/ranking.hpp>
#include <filo/trace.hpp>

namespace filo {

/// Per-test pass/fail outcomes and covered-entity sets; the input of the
/// spectrum-based baseline. Entities are method or statement ids.
struct CoverageMatrix {
    struct TestRecord {
        bool failed = false;
        std::vector<std::uint32_t> covered; // indices into entities
    };
    std::vector<std::string> entities;
    std::vector<TestRecord> tests;
};

/// CSV format: optional leading "outcome" header cell, then entity ids; one
/// row per test, outcome ("pass"|"fail") followed by 0/1 coverage flags.
CoverageMatrix parse_coverage_csv(std::istream& in);
CoverageMatrix parse_coverage_csv(std::string_view text);
std::string coverage_to_csv(const CoverageMatrix& matrix);

struct BaselineEntry {
    std::string entity;
    double score = 0.0;
};

struct BaselineRanking {
    enum class Technique { naive, ochiai };
    Technique technique = Technique::naive;
    std::string granularity = "method";
    std::vector<BaselineEntry> entries; // score descending, id ascending on ties
};

/// Naive trace analysis: application methods appearing anywhere inside the
/// SIBs, in order of first occurrence in the failure trace. The score is
/// 1/rank and only encodes the inspection order.
BaselineRanking naive_rank(const Trace& baseline, const Trace& failure, KeyPolicy key_policy,
                           std::span<const std::string> framework_prefixes);

/// Ochiai: score(e) = ef / sqrt((ef+nf)*(ef+ep)). Entities covered by no
/// test score 0. Requires at least one failing test.
BaselineRanking ochiai_rank(const CoverageMatrix& matrix, std::string granularity = "method");

/// 1-based position of the target entity, or nullopt when it is not ranked.
std::optional<int> rank_position(const BaselineRanking& ranking, std::string_view target);
std::optional<int> rank_position(const FixLocusReport& report, std::string_view target);

/// Positions of several targets joined Table-style, e.g. "1,2" or "-".
std::string rank_positions_text(const FixLocusReport& report,
                                std::span<const std::string> targets);

nlohmann::ordered_json baseline_to_json(const BaselineRanking& ranking,
                                        std::optional<int> top = std::nullopt);
std::string baseline_to_text(const BaselineRanking& ranking,
                             std::optional<int> top = std::nullopt);

} // namespace filo
