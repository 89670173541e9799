#include "triage/features.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "triage/csv.hpp"
#include "triage/errors.hpp"
#include "triage/model.hpp"
#include "triage/strings.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace triage {

std::string_view time_bucket_name(TimeBucket b) {
    switch (b) {
        case TimeBucket::late_night: return "late_night";
        case TimeBucket::early_morning: return "early_morning";
        case TimeBucket::morning: return "morning";
        case TimeBucket::afternoon: return "afternoon";
        case TimeBucket::night: return "night";
    }
    return "late_night";
}

DatetimeCategory categorize_datetime(const Date& date, const TimeOfDay& time) {
    DatetimeCategory cat;
    cat.month = date.month;
    cat.weekday = weekday_monday0(date);
    cat.is_workday = cat.weekday <= 4;
    if (time.hour < 4) cat.bucket = TimeBucket::late_night;
    else if (time.hour < 8) cat.bucket = TimeBucket::early_morning;
    else if (time.hour < 12) cat.bucket = TimeBucket::morning;
    else if (time.hour < 18) cat.bucket = TimeBucket::afternoon;
    else cat.bucket = TimeBucket::night;
    return cat;
}

std::string_view feature_kind_name(FeatureKind k) {
    switch (k) {
        case FeatureKind::event_count: return "event_count";
        case FeatureKind::special_event_flag: return "special_event_flag";
        case FeatureKind::datetime_category: return "datetime_category";
        case FeatureKind::keyword_count: return "keyword_count";
    }
    return "event_count";
}

FeatureKind feature_kind_from_name(std::string_view name) {
    if (name == "event_count") return FeatureKind::event_count;
    if (name == "special_event_flag") return FeatureKind::special_event_flag;
    if (name == "datetime_category") return FeatureKind::datetime_category;
    if (name == "keyword_count") return FeatureKind::keyword_count;
    throw CorruptModel("unknown feature kind: " + std::string(name));
}

std::string FeatureSchema::fingerprint() const {
    std::uint64_t h = fnv1a64("feature-schema-v1");
    for (const auto& d : defs) {
        h = fnv1a64(d.name, h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(feature_kind_name(d.kind), h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(d.parameter, h);
        h = fnv1a64("\x1e", h);
    }
    return to_hex(h);
}

const std::array<std::string_view, 5>& special_event_types() {
    static const std::array<std::string_view, 5> types = {
        "File Downloaded",
        "Previous Last Time Executed",
        "Last Time Executed",
        "Document Creation Time",
        "Content Deletion Time",
    };
    return types;
}

namespace {

bool is_all_alnum(std::string_view s) {
    for (char c : s) {
        if (!is_ascii_alnum(c)) return false;
    }
    return !s.empty();
}

bool is_all_digits(std::string_view s) {
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return !s.empty();
}

// Counts non-overlapping occurrences of `needle` in already-lowercased `text`
// where each alphanumeric edge of the needle sits on a token boundary.
// Punctuation edges bound themselves, so ".py" matches the end of
// "script.py" but "py" alone would not match inside "copy".
std::uint64_t count_boundary_substring(std::string_view text, std::string_view needle) {
    if (needle.empty() || needle.size() > text.size()) return 0;
    std::uint64_t n = 0;
    std::size_t pos = 0;
    const bool front_alnum = is_ascii_alnum(needle.front());
    const bool back_alnum = is_ascii_alnum(needle.back());
    while ((pos = text.find(needle, pos)) != std::string_view::npos) {
        bool left = !front_alnum || pos == 0 || !is_ascii_alnum(text[pos - 1]);
        std::size_t end = pos + needle.size();
        bool right = !back_alnum || end == text.size() || !is_ascii_alnum(text[end]);
        if (left && right) {
            ++n;
            pos = end;
        } else {
            ++pos;
        }
    }
    return n;
}

std::uint64_t count_whole_tokens(std::string_view lower_text, std::string_view keyword) {
    std::uint64_t n = 0;
    std::size_t i = 0;
    while (i < lower_text.size()) {
        while (i < lower_text.size() && !is_ascii_alnum(lower_text[i])) ++i;
        std::size_t start = i;
        while (i < lower_text.size() && is_ascii_alnum(lower_text[i])) ++i;
        if (i > start && lower_text.substr(start, i - start) == keyword) ++n;
    }
    return n;
}

std::uint64_t count_keyword_lowered(std::string_view lower_text, std::string_view keyword_lower) {
    if (is_all_alnum(keyword_lower)) return count_whole_tokens(lower_text, keyword_lower);
    return count_boundary_substring(lower_text, keyword_lower);
}

}  // namespace

std::uint64_t count_keyword(std::string_view text, std::string_view keyword_lower) {
    return count_keyword_lowered(ascii_lower(text), keyword_lower);
}

FeatureSchema build_schema(const FeatureConfig& config,
                           const std::vector<const ArtefactTimeline*>& pertinent_timelines,
                           const Timeline& parent) {
    if (config.keywords.empty() && config.top_k <= 0) {
        throw EmptyConfig("feature config needs keywords or a top-k count");
    }

    FeatureSchema schema;
    auto add = [&](std::string name, FeatureKind kind, std::string parameter) {
        schema.defs.push_back(FeatureDef{std::move(name), kind, std::move(parameter)});
    };

    add("total_event_count", FeatureKind::event_count, "");

    if (config.top_k > 0) {
        auto types = value_counts(parent, TimelineField::type);
        for (std::size_t i = 0; i < types.size() && i < static_cast<std::size_t>(config.top_k); ++i) {
            add("count_type:" + types[i].first, FeatureKind::event_count, "type:" + types[i].first);
        }
        auto sources = value_counts(parent, TimelineField::source);
        for (std::size_t i = 0; i < sources.size() && i < static_cast<std::size_t>(config.top_k);
             ++i) {
            add("count_source:" + sources[i].first, FeatureKind::event_count,
                "source:" + sources[i].first);
        }
    }

    for (auto type : special_event_types()) {
        add("flag:" + std::string(type), FeatureKind::special_event_flag, std::string(type));
    }

    for (int m = 1; m <= 12; ++m) {
        add("dt_month:" + std::to_string(m), FeatureKind::datetime_category,
            "month:" + std::to_string(m));
    }
    for (int w = 0; w <= 6; ++w) {
        add("dt_weekday:" + std::to_string(w), FeatureKind::datetime_category,
            "weekday:" + std::to_string(w));
    }
    add("dt_workday", FeatureKind::datetime_category, "workday");
    for (int b = 0; b < kTimeBucketCount; ++b) {
        std::string name(time_bucket_name(static_cast<TimeBucket>(b)));
        add("dt_bucket:" + name, FeatureKind::datetime_category, "bucket:" + name);
    }

    std::unordered_set<std::string> seen_lower;
    auto add_keyword = [&](const std::string& kw) {
        std::string lower = ascii_lower(std::string_view(kw));
        if (!seen_lower.insert(lower).second) return;
        add("kw:" + kw, FeatureKind::keyword_count, kw);
    };
    for (const auto& kw : config.keywords) {
        if (!kw.empty()) add_keyword(kw);
    }

    if (config.auto_discover && config.auto_keyword_limit > 0 && !pertinent_timelines.empty()) {
        std::unordered_map<std::string, std::uint64_t> freq;
        for (const ArtefactTimeline* atl : pertinent_timelines) {
            if (!atl) continue;
            for (const auto& m : atl->events) {
                const TimelineEvent* ev = parent.find_row(m.row_id);
                if (!ev) continue;
                for (const auto& tok : tokenize_alnum(ev->desc)) ++freq[tok];
                for (const auto& tok : tokenize_alnum(ev->filename)) ++freq[tok];
            }
        }
        std::vector<std::pair<std::string, std::uint64_t>> ranked;
        ranked.reserve(freq.size());
        for (auto& [tok, n] : freq) {
            if (tok.size() < 3 || is_all_digits(tok)) continue;
            if (seen_lower.count(tok)) continue;
            ranked.emplace_back(tok, n);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        int taken = 0;
        for (const auto& [tok, n] : ranked) {
            if (taken >= config.auto_keyword_limit) break;
            add_keyword(tok);
            ++taken;
        }
    }

    return schema;
}

namespace {

struct EventAggregates {
    std::uint64_t total = 0;
    std::unordered_map<std::string_view, std::uint64_t> by_type;
    std::unordered_map<std::string_view, std::uint64_t> by_source;
    const TimelineEvent* datetime_anchor = nullptr;  // earliest B-flagged, else earliest
    std::vector<std::uint64_t> keyword_hits;         // aligned to keyword defs
};

EventAggregates aggregate_events(const std::vector<const TimelineEvent*>& events,
                                 const std::vector<std::string>& keywords_lower) {
    EventAggregates agg;
    agg.total = events.size();
    agg.keyword_hits.assign(keywords_lower.size(), 0);
    const TimelineEvent* earliest = nullptr;
    const TimelineEvent* earliest_born = nullptr;
    for (const TimelineEvent* ev : events) {
        ++agg.by_type[ev->event_type];
        ++agg.by_source[ev->source];
        if (!earliest || ev->row_id < earliest->row_id) earliest = ev;
        if (ev->macb.born && (!earliest_born || ev->row_id < earliest_born->row_id)) {
            earliest_born = ev;
        }
        if (!keywords_lower.empty()) {
            std::string desc_lower = ascii_lower(std::string_view(ev->desc));
            std::string name_lower = ascii_lower(std::string_view(ev->filename));
            for (std::size_t k = 0; k < keywords_lower.size(); ++k) {
                agg.keyword_hits[k] += count_keyword_lowered(desc_lower, keywords_lower[k]);
                agg.keyword_hits[k] += count_keyword_lowered(name_lower, keywords_lower[k]);
            }
        }
    }
    agg.datetime_anchor = earliest_born ? earliest_born : earliest;
    return agg;
}

}  // namespace

FeatureVector extract(const ArtefactId& artefact, const std::vector<const TimelineEvent*>& events,
                      const FeatureSchema& schema) {
    std::vector<std::string> keywords_lower;
    for (const auto& d : schema.defs) {
        if (d.kind == FeatureKind::keyword_count) {
            keywords_lower.push_back(ascii_lower(std::string_view(d.parameter)));
        }
    }
    EventAggregates agg = aggregate_events(events, keywords_lower);

    DatetimeCategory cat;
    bool has_cat = false;
    if (agg.datetime_anchor) {
        cat = categorize_datetime(agg.datetime_anchor->date, agg.datetime_anchor->time);
        has_cat = true;
    }

    FeatureVector fv;
    fv.artefact = artefact;
    fv.values.reserve(schema.defs.size());
    std::size_t kw_idx = 0;
    for (const auto& d : schema.defs) {
        double v = 0.0;
        switch (d.kind) {
            case FeatureKind::event_count: {
                std::string_view p = d.parameter;
                if (p.empty()) {
                    v = static_cast<double>(agg.total);
                } else if (p.starts_with("type:")) {
                    auto it = agg.by_type.find(p.substr(5));
                    v = it == agg.by_type.end() ? 0.0 : static_cast<double>(it->second);
                } else if (p.starts_with("source:")) {
                    auto it = agg.by_source.find(p.substr(7));
                    v = it == agg.by_source.end() ? 0.0 : static_cast<double>(it->second);
                }
                break;
            }
            case FeatureKind::special_event_flag: {
                auto it = agg.by_type.find(std::string_view(d.parameter));
                v = (it != agg.by_type.end() && it->second > 0) ? 1.0 : 0.0;
                break;
            }
            case FeatureKind::datetime_category: {
                if (!has_cat) break;
                std::string_view p = d.parameter;
                if (p.starts_with("month:")) {
                    v = (std::to_string(cat.month) == p.substr(6)) ? 1.0 : 0.0;
                } else if (p.starts_with("weekday:")) {
                    v = (std::to_string(cat.weekday) == p.substr(8)) ? 1.0 : 0.0;
                } else if (p == "workday") {
                    v = cat.is_workday ? 1.0 : 0.0;
                } else if (p.starts_with("bucket:")) {
                    v = (time_bucket_name(cat.bucket) == p.substr(7)) ? 1.0 : 0.0;
                }
                break;
            }
            case FeatureKind::keyword_count: {
                v = static_cast<double>(agg.keyword_hits[kw_idx]);
                ++kw_idx;
                break;
            }
        }
        fv.values.push_back(v);
    }
    return fv;
}

std::vector<FeatureVector> extract_all(const ArtefactIndex& index, const Timeline& parent,
                                       const FeatureSchema& schema) {
    std::vector<FeatureVector> matrix(index.entries.size());
    const std::int64_t n = static_cast<std::int64_t>(index.entries.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& entry = index.entries[static_cast<std::size_t>(i)];
        auto events = artefact_timeline_events(entry, parent);
        matrix[static_cast<std::size_t>(i)] = extract(entry.artefact, events, schema);
    }
    return matrix;
}

ScalingParams fit_scaling(const std::vector<FeatureVector>& matrix) {
    ScalingParams p;
    if (matrix.empty()) return p;
    const std::size_t cols = matrix.front().values.size();
    p.means.assign(cols, 0.0);
    p.stds.assign(cols, 1.0);
    p.constant_flags.assign(cols, false);
    const double n = static_cast<double>(matrix.size());
    for (std::size_t c = 0; c < cols; ++c) {
        double sum = 0.0;
        for (const auto& row : matrix) sum += row.values[c];
        double mean = sum / n;
        double sq = 0.0;
        for (const auto& row : matrix) {
            double d = row.values[c] - mean;
            sq += d * d;
        }
        double std = std::sqrt(sq / n);
        if (std > 0.0 && std::isfinite(std)) {
            p.means[c] = mean;
            p.stds[c] = std;
        } else {
            p.means[c] = 0.0;
            p.stds[c] = 1.0;
            p.constant_flags[c] = true;
        }
    }
    return p;
}

void apply_scaling(std::vector<double>& values, const ScalingParams& params) {
    if (params.means.size() != values.size()) {
        throw SchemaMismatch(std::to_string(params.means.size()), std::to_string(values.size()));
    }
    for (std::size_t c = 0; c < values.size(); ++c) {
        values[c] = (values[c] - params.means[c]) / params.stds[c];
    }
}

std::vector<FeatureVector> standardize(const std::vector<FeatureVector>& matrix,
                                       ScalingParams& params_out) {
    params_out = fit_scaling(matrix);
    std::vector<FeatureVector> out = matrix;
    for (auto& row : out) apply_scaling(row.values, params_out);
    return out;
}

namespace {

FeatureSchema keep_features(const FeatureSchema& schema, const std::vector<std::size_t>& keep) {
    std::vector<bool> mask(schema.defs.size(), false);
    for (std::size_t i : keep) mask[i] = true;
    FeatureSchema out;
    for (std::size_t i = 0; i < schema.defs.size(); ++i) {
        if (mask[i]) out.defs.push_back(schema.defs[i]);
    }
    return out;
}

}  // namespace

FeatureSchema select_features(const std::vector<FeatureVector>& matrix,
                              const std::vector<int>& labels, std::size_t k,
                              SelectionMethod method, const FeatureSchema& schema, LossKind loss) {
    if (matrix.empty()) throw DataError("feature selection needs a nonempty matrix");
    if (matrix.size() != labels.size()) {
        throw DataError("feature selection labels misaligned with matrix");
    }
    const std::size_t cols = schema.defs.size();
    if (k >= cols) return schema;

    std::vector<double> score(cols, 0.0);
    if (method == SelectionMethod::frequency) {
        for (const auto& row : matrix) {
            for (std::size_t c = 0; c < cols; ++c) {
                if (row.values[c] != 0.0) score[c] += 1.0;
            }
        }
    } else {
        bool has_pos = false, has_neg = false;
        for (int y : labels) (y > 0 ? has_pos : has_neg) = true;
        if (!has_pos || !has_neg) {
            throw DegenerateLabels("coefficient selection needs both classes");
        }
        ScalingParams params;
        auto standardized = standardize(matrix, params);
        TrainConfig cfg;
        cfg.loss = loss;
        LinearModel model = train(standardized, labels, schema, cfg);
        for (std::size_t c = 0; c < cols; ++c) score[c] = std::fabs(model.weights[c]);
    }

    std::vector<std::size_t> order(cols);
    for (std::size_t c = 0; c < cols; ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    order.resize(k);
    return keep_features(schema, order);
}

FeatureSchema select_features(const std::vector<FeatureVector>& matrix,
                              const std::vector<int>& labels, std::size_t k,
                              SelectionMethod method, const FeatureSchema& schema) {
    return select_features(matrix, labels, k, method, schema, LossKind::logistic);
}

std::string schema_to_json(const FeatureSchema& schema) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["fingerprint"] = schema.fingerprint();
    auto& arr = j["features"] = nlohmann::ordered_json::array();
    for (const auto& d : schema.defs) {
        arr.push_back({{"name", d.name},
                       {"kind", std::string(feature_kind_name(d.kind))},
                       {"parameter", d.parameter}});
    }
    return j.dump(2) + "\n";
}

FeatureSchema schema_from_json(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw CorruptModel(std::string("schema json: ") + e.what());
    }
    if (!j.contains("features") || !j["features"].is_array()) {
        throw CorruptModel("schema json missing features array");
    }
    FeatureSchema schema;
    for (const auto& f : j["features"]) {
        FeatureDef d;
        d.name = f.at("name").get<std::string>();
        d.kind = feature_kind_from_name(f.at("kind").get<std::string>());
        d.parameter = f.at("parameter").get<std::string>();
        schema.defs.push_back(std::move(d));
    }
    return schema;
}

void write_feature_matrix(const std::vector<FeatureVector>& matrix, const FeatureSchema& schema,
                          std::ostream& output) {
    std::string out;
    std::vector<std::string> cols;
    cols.reserve(schema.defs.size() + 1);
    cols.emplace_back("artefact");
    for (const auto& d : schema.defs) cols.push_back(d.name);
    write_csv_record(out, cols);
    for (const auto& row : matrix) {
        cols.clear();
        cols.push_back(row.artefact.canonical_path);
        for (double v : row.values) cols.push_back(format_double(v));
        write_csv_record(out, cols);
    }
    output.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!output) throw Error("feature matrix write failed", 2);
}

}  // namespace triage
