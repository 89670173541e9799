#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "triage/artefact.hpp"

namespace triage {

struct RankedItem {
    ArtefactId artefact;
    double score = 0.0;
    std::optional<double> probability;
};

struct RankedReport {
    std::vector<RankedItem> items;  // scores non-increasing, ties by path ascending
    std::string model_fingerprint;
    std::string schema_name;
    // Deterministic run token (derived from config + seed, not the clock), so
    // identical runs emit identical bytes.
    std::string generated_at;
    // (review fraction, recall), ascending by fraction; filled only when
    // ground truth was supplied.
    std::vector<std::pair<double, double>> recall;
};

inline constexpr std::array<double, 5> kDefaultReviewFractions = {0.1, 0.2, 0.3, 0.5, 1.0};

// Sorts score-descending with a lexicographic path tie-break, so the order is
// a pure function of the (artefact, score) multiset.
RankedReport rank(std::vector<RankedItem> scored);

// truth = canonical paths of the genuinely pertinent artefacts among the
// ranked items. k = ceil(fraction * N) items reviewed.
double recall_at(const RankedReport& report, const std::vector<std::string>& truth,
                 double fraction);

std::vector<std::pair<double, double>> recall_table(
    const RankedReport& report, const std::vector<std::string>& truth,
    const std::vector<double>& fractions = {kDefaultReviewFractions.begin(),
                                            kDefaultReviewFractions.end()});

// Review fractions are keyed as fixed two-decimal strings ("0.10" ... "1.00").
std::string format_fraction(double fraction);

std::string report_to_json(const RankedReport& report);
RankedReport report_from_json(std::string_view json_text);
std::string report_to_text(const RankedReport& report);
void emit_report(const RankedReport& report, std::ostream& json_sink, std::ostream& text_sink);

}  // namespace triage
