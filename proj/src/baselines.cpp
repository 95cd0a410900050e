#include <filo/baselines.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <unordered_set>

namespace filo {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
            cell.pop_back();
        std::size_t start = cell.find_first_not_of(' ');
        cells.push_back(start == std::string::npos ? "" : cell.substr(start));
    }
    if (!line.empty() && line.back() == ',')
        cells.push_back("");
    return cells;
}

std::string ascii_lower(std::string s) {
    for (char& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

} // namespace

CoverageMatrix parse_coverage_csv(std::istream& in) {
    CoverageMatrix matrix;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    bool any_failed = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (!have_header) {
            if (!cells.empty() && ascii_lower(cells.front()) == "outcome")
                cells.erase(cells.begin());
            if (cells.empty())
                throw ParseError("coverage header declares no entities", line_no);
            std::unordered_set<std::string> seen;
            for (const auto& id : cells) {
                if (id.empty())
                    throw ParseError("empty entity id in header", line_no);
                if (!seen.insert(id).second)
                    throw ParseError("duplicate entity id '" + id + "'", line_no);
            }
            matrix.entities = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != matrix.entities.size() + 1)
            throw ParseError("test row has " + std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(matrix.entities.size() + 1),
                             line_no);
        CoverageMatrix::TestRecord record;
        const std::string outcome = ascii_lower(cells.front());
        if (outcome == "fail")
            record.failed = true;
        else if (outcome != "pass")
            throw ParseError("outcome must be 'pass' or 'fail', got '" + cells.front() + "'",
                             line_no);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            if (cells[c] == "1")
                record.covered.push_back(static_cast<std::uint32_t>(c - 1));
            else if (cells[c] != "0")
                throw ParseError("coverage flag must be 0 or 1, got '" + cells[c] + "'", line_no);
        }
        any_failed = any_failed || record.failed;
        matrix.tests.push_back(std::move(record));
    }
    if (!have_header)
        throw ParseError("coverage matrix is empty");
    if (matrix.tests.empty())
        throw ParameterError("coverage matrix has no tests");
    if (!any_failed)
        throw ParameterError("coverage matrix needs at least one failing test");
    return matrix;
}

CoverageMatrix parse_coverage_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_coverage_csv(in);
}

std::string coverage_to_csv(const CoverageMatrix& matrix) {
    std::string out = "outcome";
    for (const auto& id : matrix.entities) {
        out += ',';
        out += id;
    }
    out += '\n';
    for (const auto& test : matrix.tests) {
        out += test.failed ? "fail" : "pass";
        std::vector<char> flags(matrix.entities.size(), '0');
        for (std::uint32_t idx : test.covered)
            flags[idx] = '1';
        for (char f : flags) {
            out += ',';
            out += f;
        }
        out += '\n';
    }
    return out;
}

BaselineRanking naive_rank(const Trace& baseline, const Trace& failure, KeyPolicy key_policy,
                           std::span<const std::string> framework_prefixes) {
    const DiffResult result = detect_sibs(baseline, failure, {key_policy, 8192});

    BaselineRanking ranking;
    ranking.technique = BaselineRanking::Technique::naive;

    std::unordered_set<std::string> seen;
    for (const auto& sib : result.sibs) {
        for (const auto& ev : sib.events) {
            if (classify_origin(ev.method.name, framework_prefixes) != Origin::application)
                continue;
            if (!seen.insert(ev.method.name).second)
                continue;
            ranking.entries.push_back({ev.method.name, 0.0});
        }
    }
    for (std::size_t r = 0; r < ranking.entries.size(); ++r)
        ranking.entries[r].score = 1.0 / static_cast<double>(r + 1);
    return ranking;
}

BaselineRanking ochiai_rank(const CoverageMatrix& matrix, std::string granularity) {
    if (matrix.tests.empty())
        throw ParameterError("coverage matrix has no tests");
    std::size_t total_failed = 0;
    for (const auto& test : matrix.tests)
        if (test.failed)
            ++total_failed;
    if (total_failed == 0)
        throw ParameterError("coverage matrix needs at least one failing test");

    std::vector<std::size_t> ef(matrix.entities.size(), 0);
    std::vector<std::size_t> ep(matrix.entities.size(), 0);
    for (const auto& test : matrix.tests)
        for (std::uint32_t idx : test.covered)
            (test.failed ? ef : ep)[idx] += 1;

    BaselineRanking ranking;
    ranking.technique = BaselineRanking::Technique::ochiai;
    ranking.granularity = std::move(granularity);
    ranking.entries.reserve(matrix.entities.size());
    for (std::size_t e = 0; e < matrix.entities.size(); ++e) {
        double score = 0.0;
        if (ef[e] + ep[e] > 0) {
            const double nf = static_cast<double>(total_failed - ef[e]);
            const double denom =
                std::sqrt((static_cast<double>(ef[e]) + nf) * static_cast<double>(ef[e] + ep[e]));
            score = denom > 0.0 ? static_cast<double>(ef[e]) / denom : 0.0;
        }
        ranking.entries.push_back({matrix.entities[e], score});
    }
    std::sort(ranking.entries.begin(), ranking.entries.end(),
              [](const BaselineEntry& x, const BaselineEntry& y) {
                  if (x.score != y.score)
                      return x.score > y.score;
                  return x.entity < y.entity;
              });
    return ranking;
}

std::optional<int> rank_position(const BaselineRanking& ranking, std::string_view target) {
    for (std::size_t r = 0; r < ranking.entries.size(); ++r)
        if (ranking.entries[r].entity == target)
            return static_cast<int>(r + 1);
    return std::nullopt;
}

std::optional<int> rank_position(const FixLocusReport& report, std::string_view target) {
    for (std::size_t r = 0; r < report.ranking.size(); ++r)
        if (report.ranking[r].method == target)
            return static_cast<int>(r + 1);
    return std::nullopt;
}

std::string rank_positions_text(const FixLocusReport& report,
                                std::span<const std::string> targets) {
    std::vector<int> positions;
    for (const auto& target : targets)
        if (auto pos = rank_position(report, target))
            positions.push_back(*pos);
    if (positions.empty())
        return "-";
    std::sort(positions.begin(), positions.end());
    std::string out;
    for (std::size_t p = 0; p < positions.size(); ++p) {
        if (p)
            out += ',';
        out += std::to_string(positions[p]);
    }
    return out;
}

nlohmann::ordered_json baseline_to_json(const BaselineRanking& ranking, std::optional<int> top) {
    ordered_json j;
    j["technique"] = ranking.technique == BaselineRanking::Technique::naive ? "naive" : "ochiai";
    j["granularity"] = ranking.granularity;
    ordered_json entries = ordered_json::array();
    std::size_t limit = ranking.entries.size();
    if (top && *top >= 0)
        limit = std::min(limit, static_cast<std::size_t>(*top));
    for (std::size_t r = 0; r < limit; ++r) {
        ordered_json e;
        e["method"] = ranking.entries[r].entity;
        e["score"] = ranking.entries[r].score;
        entries.push_back(std::move(e));
    }
    j["ranking"] = std::move(entries);
    return j;
}

std::string baseline_to_text(const BaselineRanking& ranking, std::optional<int> top) {
    if (ranking.entries.empty())
        return "empty ranking\n";
    std::size_t limit = ranking.entries.size();
    if (top && *top >= 0)
        limit = std::min(limit, static_cast<std::size_t>(*top));
    std::size_t width = std::string("MethodName").size();
    for (std::size_t r = 0; r < limit; ++r)
        width = std::max(width, ranking.entries[r].entity.size());
    std::string out = "MethodName";
    out.append(width - std::string("MethodName").size() + 2, ' ');
    out += "Score\n";
    for (std::size_t r = 0; r < limit; ++r) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", ranking.entries[r].score);
        out += ranking.entries[r].entity;
        out.append(width - ranking.entries[r].entity.size() + 2, ' ');
        out += buf;
        out += '\n';
    }
    return out;
}

} // namespace filo
