#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "triage/artefact.hpp"
#include "triage/timeline.hpp"

namespace triage {

enum class LossKind : int;  // model.hpp

enum class TimeBucket : int { late_night = 0, early_morning, morning, afternoon, night };

std::string_view time_bucket_name(TimeBucket b);
inline constexpr int kTimeBucketCount = 5;

struct DatetimeCategory {
    int month = 1;        // 1..12
    int weekday = 0;      // Monday=0 .. Sunday=6
    bool is_workday = false;
    TimeBucket bucket = TimeBucket::late_night;

    bool operator==(const DatetimeCategory&) const = default;
};

// Bucket boundaries, inclusive-left:
//   late_night [00,04) early_morning [04,08) morning [08,12)
//   afternoon [12,18) night [18,24)
DatetimeCategory categorize_datetime(const Date& date, const TimeOfDay& time);

enum class FeatureKind : int {
    event_count = 0,
    special_event_flag,
    datetime_category,
    keyword_count,
};

std::string_view feature_kind_name(FeatureKind k);
FeatureKind feature_kind_from_name(std::string_view name);

struct FeatureDef {
    std::string name;
    FeatureKind kind = FeatureKind::event_count;
    // event_count: "" (total), "type:<event type>", or "source:<source>"
    // special_event_flag: the event type
    // datetime_category: "month:<1..12>", "weekday:<0..6>", "workday", "bucket:<name>"
    // keyword_count: the keyword
    std::string parameter;

    bool operator==(const FeatureDef&) const = default;
};

struct FeatureSchema {
    std::vector<FeatureDef> defs;

    std::size_t size() const { return defs.size(); }
    // Stable digest over names/kinds/parameters; models refuse vectors from a
    // different schema.
    std::string fingerprint() const;

    bool operator==(const FeatureSchema&) const = default;
};

// Event types that get dedicated presence flags.
const std::array<std::string_view, 5>& special_event_types();

struct FeatureConfig {
    std::vector<std::string> keywords;
    int top_k = 0;                   // most-frequent event types and sources to count
    bool auto_discover = true;       // harvest keywords from known-pertinent timelines
    int auto_keyword_limit = 10;
};

// Assembles the vector layout: total event count, top-k event-type counts,
// top-k source counts, the fixed special-event flags, datetime one-hots, then
// keyword counters (configured order first, auto-discovered after).
FeatureSchema build_schema(const FeatureConfig& config,
                           const std::vector<const ArtefactTimeline*>& pertinent_timelines,
                           const Timeline& parent);

struct FeatureVector {
    ArtefactId artefact;
    std::vector<double> values;
};

FeatureVector extract(const ArtefactId& artefact, const std::vector<const TimelineEvent*>& events,
                      const FeatureSchema& schema);

// One vector per index entry, in index order. Parallel across artefacts when
// OpenMP is enabled; output is identical either way.
std::vector<FeatureVector> extract_all(const ArtefactIndex& index, const Timeline& parent,
                                       const FeatureSchema& schema);

struct ScalingParams {
    std::vector<double> means;
    std::vector<double> stds;
    std::vector<bool> constant_flags;

    bool operator==(const ScalingParams&) const = default;
};

// Zero-mean unit-variance per column (population stddev). Constant columns
// pass through unchanged and are flagged.
ScalingParams fit_scaling(const std::vector<FeatureVector>& matrix);
void apply_scaling(std::vector<double>& values, const ScalingParams& params);
std::vector<FeatureVector> standardize(const std::vector<FeatureVector>& matrix,
                                       ScalingParams& params_out);

// Keeps the k most useful features. frequency: highest nonzero rate.
// coefficient: largest |weight| from a model trained on the standardized
// matrix. Ties resolve to the earlier schema position; surviving features keep
// their original order.
enum class SelectionMethod : int { frequency = 0, coefficient };

FeatureSchema select_features(const std::vector<FeatureVector>& matrix,
                              const std::vector<int>& labels, std::size_t k,
                              SelectionMethod method, const FeatureSchema& schema);
FeatureSchema select_features(const std::vector<FeatureVector>& matrix,
                              const std::vector<int>& labels, std::size_t k,
                              SelectionMethod method, const FeatureSchema& schema, LossKind loss);

// Keyword hit counting, exposed for tests. Alphanumeric keywords match whole
// tokens (split on non-alphanumerics); keywords with punctuation match as
// substrings whose alphanumeric edges sit on token boundaries.
std::uint64_t count_keyword(std::string_view text, std::string_view keyword_lower);

// schema json: {"version":1,"features":[{"name","kind","parameter"},...]}
std::string schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(std::string_view json_text);

// csv: header "artefact,<feature names...>", one row per vector.
void write_feature_matrix(const std::vector<FeatureVector>& matrix, const FeatureSchema& schema,
                          std::ostream& output);

}  // namespace triage
