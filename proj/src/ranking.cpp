#include "triage/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_set>

#include "json.hpp"

#include "triage/errors.hpp"
#include "triage/strings.hpp"

namespace triage {

RankedReport rank(std::vector<RankedItem> scored) {
    std::sort(scored.begin(), scored.end(), [](const RankedItem& a, const RankedItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.artefact.canonical_path < b.artefact.canonical_path;
    });
    RankedReport report;
    report.items = std::move(scored);
    return report;
}

double recall_at(const RankedReport& report, const std::vector<std::string>& truth,
                 double fraction) {
    if (truth.empty()) throw EmptyTruth("recall needs a nonempty truth set");
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw DataError("review fraction must be in (0,1], got " + format_double(fraction));
    }
    std::unordered_set<std::string_view> truth_set(truth.begin(), truth.end());
    std::size_t found_in_ranked = 0;
    for (const auto& item : report.items) {
        if (truth_set.count(item.artefact.canonical_path)) ++found_in_ranked;
    }
    if (found_in_ranked != truth_set.size()) {
        for (std::string_view t : truth_set) {
            bool present = false;
            for (const auto& item : report.items) {
                if (item.artefact.canonical_path == t) {
                    present = true;
                    break;
                }
            }
            if (!present) throw UnknownTruthArtefact(std::string(t));
        }
    }

    const std::size_t n = report.items.size();
    const std::size_t k = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(n)) + 0.000001);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n && i < k; ++i) {
        if (truth_set.count(report.items[i].artefact.canonical_path)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truth_set.size());
}

std::vector<std::pair<double, double>> recall_table(const RankedReport& report,
                                                    const std::vector<std::string>& truth,
                                                    const std::vector<double>& fractions) {
    std::vector<std::pair<double, double>> table;
    std::vector<double> sorted = fractions;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    table.reserve(sorted.size());
    for (double f : sorted) table.emplace_back(f, recall_at(report, truth, f));
    return table;
}

std::string format_fraction(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction);
    return buf;
}

std::string report_to_json(const RankedReport& report) {
    nlohmann::ordered_json j;
    j["model"] = report.model_fingerprint;
    j["schema"] = report.schema_name;
    j["generated_at"] = report.generated_at;
    auto& items = j["items"] = nlohmann::ordered_json::array();
    std::size_t rank_no = 1;
    for (const auto& item : report.items) {
        nlohmann::ordered_json row;
        row["rank"] = rank_no++;
        row["path"] = item.artefact.canonical_path;
        row["score"] = item.score;
        if (item.probability) {
            row["probability"] = *item.probability;
        } else {
            row["probability"] = nullptr;
        }
        items.push_back(std::move(row));
    }
    auto& recall = j["recall"] = nlohmann::ordered_json::object();
    for (const auto& [f, r] : report.recall) {
        recall[format_fraction(f)] = r;
    }
    return j.dump(2) + "\n";
}

RankedReport report_from_json(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("report json: ") + e.what(), 2);
    }
    RankedReport report;
    try {
        report.model_fingerprint = j.at("model").get<std::string>();
        report.schema_name = j.at("schema").get<std::string>();
        report.generated_at = j.at("generated_at").get<std::string>();
        for (const auto& row : j.at("items")) {
            RankedItem item;
            item.artefact.canonical_path = row.at("path").get<std::string>();
            item.score = row.at("score").get<double>();
            if (row.contains("probability") && !row["probability"].is_null()) {
                item.probability = row["probability"].get<double>();
            }
            report.items.push_back(std::move(item));
        }
        for (const auto& [key, value] : j.at("recall").items()) {
            report.recall.emplace_back(std::stod(key), value.get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("report json: ") + e.what(), 2);
    }
    std::sort(report.recall.begin(), report.recall.end());
    return report;
}

std::string report_to_text(const RankedReport& report) {
    std::string out;
    out.append("rank\tscore\tprobability\tpath\n");
    std::size_t rank_no = 1;
    for (const auto& item : report.items) {
        out.append(std::to_string(rank_no++));
        out.push_back('\t');
        out.append(format_double(item.score));
        out.push_back('\t');
        out.append(item.probability ? format_double(*item.probability) : "-");
        out.push_back('\t');
        out.append(item.artefact.canonical_path);
        out.push_back('\n');
    }
    if (!report.recall.empty()) {
        out.append("\nreviewed\trecall\n");
        for (const auto& [f, r] : report.recall) {
            out.append(format_fraction(f));
            out.push_back('\t');
            out.append(format_double(r));
            out.push_back('\n');
        }
    }
    return out;
}

void emit_report(const RankedReport& report, std::ostream& json_sink, std::ostream& text_sink) {
    std::string j = report_to_json(report);
    json_sink.write(j.data(), static_cast<std::streamsize>(j.size()));
    std::string t = report_to_text(report);
    text_sink.write(t.data(), static_cast<std::streamsize>(t.size()));
    if (!json_sink || !text_sink) throw Error("report write failed", 2);
}

}  // namespace triage
