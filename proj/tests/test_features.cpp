#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <string>
#include <vector>

#include "support/builders.hpp"
#include "support/grid_min.hpp"
#include "triage/artefact.hpp"
#include "triage/errors.hpp"
#include "triage/features.hpp"
#include "triage/model.hpp"
#include "triage/scenario.hpp"

using namespace triage;
using test_support::EventSpec;

namespace {

Timeline empty_timeline() {
    return parse_timeline(std::string(kL2tcsvHeader) + "\n", ParsePolicy::strict).timeline;
}

const FeatureDef* find_def(const FeatureSchema& s, const std::string& name) {
    for (const auto& d : s.defs) {
        if (d.name == name) return &d;
    }
    return nullptr;
}

double value_of(const FeatureVector& v, const FeatureSchema& s, const std::string& name) {
    for (std::size_t i = 0; i < s.defs.size(); ++i) {
        if (s.defs[i].name == name) return v.values[i];
    }
    REQUIRE(false);
    return 0.0;
}

// Number of datetime one-hot features: 12 months + 7 weekdays + workday + 5 buckets.
constexpr std::size_t kDatetimeFeatures = 12 + 7 + 1 + 5;

}  // namespace

TEST_CASE("minimal schema: k=0, one keyword, no discovery sources") {
    FeatureConfig cfg{{"x"}, 0, true, 10};
    FeatureSchema s = build_schema(cfg, {}, empty_timeline());
    // total + 5 special flags + datetime one-hots + 1 keyword
    CHECK(s.size() == 1 + 5 + kDatetimeFeatures + 1);
    CHECK(s.defs[0].name == "total_event_count");
    CHECK(find_def(s, "kw:x") != nullptr);
    for (std::string_view flag : special_event_types()) {
        CHECK(find_def(s, "flag:" + std::string(flag)) != nullptr);
    }
}

TEST_CASE("the five case-1 keyword features are all present") {
    FeatureConfig cfg{{"chrome", "child", "png", "jpg", "MFT"}, 0, false, 0};
    FeatureSchema s = build_schema(cfg, {}, empty_timeline());
    std::size_t kw = 0;
    for (const auto& d : s.defs) kw += d.kind == FeatureKind::keyword_count;
    CHECK(kw == 5);
    // Names keep the configured spelling; matching lowercases internally.
    for (const char* k : {"chrome", "child", "png", "jpg", "MFT"}) {
        CHECK(find_def(s, std::string("kw:") + k) != nullptr);
    }
    CHECK(count_keyword("path: /x/$MFT read", "mft") == 1);
}

TEST_CASE("schema needs at least one keyword or a positive k") {
    CHECK_THROWS_AS(build_schema(FeatureConfig{{}, 0, true, 10}, {}, empty_timeline()),
                    EmptyConfig);
}

TEST_CASE("top-k event types and sources come from parent-timeline frequency") {
    Timeline t = test_support::make_timeline({
        {.source = "FILE", .type = "Last Access Time"},
        {.source = "FILE", .type = "Last Access Time"},
        {.source = "WEBHIST", .type = "Creation Time"},
        {.source = "LOG", .type = "Creation Time"},
        {.source = "FILE", .type = "Rare Event"},
    });
    FeatureSchema s = build_schema(FeatureConfig{{"x"}, 2, false, 0}, {}, t);
    CHECK(find_def(s, "count_type:Last Access Time") != nullptr);
    CHECK(find_def(s, "count_type:Creation Time") != nullptr);
    CHECK(find_def(s, "count_type:Rare Event") == nullptr);
    CHECK(find_def(s, "count_source:FILE") != nullptr);
    // WEBHIST and LOG tie at one event each; "LOG" wins lexicographically.
    CHECK(find_def(s, "count_source:LOG") != nullptr);
    CHECK(find_def(s, "count_source:WEBHIST") == nullptr);
}

TEST_CASE("auto-discovery harvests keywords from known-pertinent timelines once") {
    Timeline t = test_support::make_timeline({
        {.desc = "ran unzip on /tmp/archive.zip", .filename = "/tmp/archive.zip"},
        {.desc = "unzip finished", .filename = "/tmp/archive.zip"},
    });
    ArtefactIndex idx = build_index(t, {{.canonical_path = "/tmp/archive.zip"}});
    FeatureSchema s = build_schema(FeatureConfig{{"zip"}, 0, true, 10},
                                   {&idx.entries[0]}, t);
    const FeatureDef* unzip = find_def(s, "kw:unzip");
    REQUIRE(unzip != nullptr);
    std::size_t count = 0;
    for (const auto& d : s.defs) count += d.name == "kw:unzip";
    CHECK(count == 1);  // added once
    // Tokens shorter than 3 chars or all digits are not harvested.
    CHECK(find_def(s, "kw:on") == nullptr);
    // Configured keywords keep their position ahead of discovered ones.
    CHECK(find_def(s, "kw:zip") < unzip);
}

TEST_CASE("categorize_datetime: calendar lookups") {
    DatetimeCategory c = categorize_datetime(Date{2020, 6, 1}, TimeOfDay{10, 30, 0});
    CHECK(c.month == 6);
    CHECK(c.weekday == 0);  // 2020-06-01 is a Monday
    CHECK(c.is_workday);
    CHECK(c.bucket == TimeBucket::morning);

    DatetimeCategory sat = categorize_datetime(Date{2020, 6, 6}, TimeOfDay{12, 0, 0});
    CHECK(sat.weekday == 5);
    CHECK_FALSE(sat.is_workday);
    CHECK(sat.bucket == TimeBucket::afternoon);
}

TEST_CASE("bucket boundaries are inclusive on the left") {
    CHECK(categorize_datetime(Date{2020, 1, 1}, TimeOfDay{0, 0, 0}).bucket ==
          TimeBucket::late_night);
    CHECK(categorize_datetime(Date{2020, 1, 1}, TimeOfDay{3, 59, 59}).bucket ==
          TimeBucket::late_night);
    CHECK(categorize_datetime(Date{2020, 1, 1}, TimeOfDay{4, 0, 0}).bucket ==
          TimeBucket::early_morning);
    CHECK(categorize_datetime(Date{2020, 1, 1}, TimeOfDay{8, 0, 0}).bucket == TimeBucket::morning);
    CHECK(categorize_datetime(Date{2020, 1, 1}, TimeOfDay{12, 0, 0}).bucket ==
          TimeBucket::afternoon);
    CHECK(categorize_datetime(Date{2020, 1, 1}, TimeOfDay{18, 0, 0}).bucket == TimeBucket::night);
    CHECK(categorize_datetime(Date{2020, 1, 1}, TimeOfDay{23, 59, 59}).bucket ==
          TimeBucket::night);
}

TEST_CASE("exhaustive week: buckets partition each day and workday matches weekday") {
    // Every minute of the week starting Monday 2020-06-01.
    for (int day = 0; day < 7; ++day) {
        Date d{2020, 6, 1 + day};
        for (int minute = 0; minute < 24 * 60; ++minute) {
            DatetimeCategory c =
                categorize_datetime(d, TimeOfDay{minute / 60, minute % 60, 0});
            REQUIRE(c.weekday == day);
            REQUIRE(c.is_workday == (day <= 4));
            int h = minute / 60;
            TimeBucket expect = h < 4    ? TimeBucket::late_night
                                : h < 8  ? TimeBucket::early_morning
                                : h < 12 ? TimeBucket::morning
                                : h < 18 ? TimeBucket::afternoon
                                         : TimeBucket::night;
            REQUIRE(c.bucket == expect);
            REQUIRE(c.month == 6);
        }
    }
}

TEST_CASE("extract: empty event list gives the all-zero vector") {
    FeatureSchema s = build_schema(FeatureConfig{{"x"}, 0, false, 0}, {}, empty_timeline());
    FeatureVector v = extract({.canonical_path = "/f"}, {}, s);
    REQUIRE(v.values.size() == s.size());
    for (double x : v.values) CHECK(x == 0.0);
}

TEST_CASE("extract counts totals and raises special flags") {
    Timeline t = test_support::make_timeline({
        {.type = "File Downloaded", .desc = "/f.bin fetched"},
        {.type = "Creation Time", .desc = "made /f.bin"},
        {.type = "Last Access Time", .desc = "read /f.bin"},
    });
    FeatureSchema s = build_schema(FeatureConfig{{"x"}, 0, false, 0}, {}, t);
    std::vector<const TimelineEvent*> events;
    for (const auto& e : t.events()) events.push_back(&e);
    FeatureVector v = extract({.canonical_path = "/f.bin"}, events, s);
    CHECK(value_of(v, s, "total_event_count") == 3.0);
    CHECK(value_of(v, s, "flag:File Downloaded") == 1.0);
    CHECK(value_of(v, s, "flag:Last Time Executed") == 0.0);
}

TEST_CASE("keyword counts sum across desc and filename over all events") {
    Timeline t = test_support::make_timeline({
        {.desc = "invoice sent, invoice archived"},
        {.desc = "another invoice"},
        {.desc = "unrelated"},
    });
    FeatureSchema s = build_schema(FeatureConfig{{"invoice"}, 0, false, 0}, {}, t);
    std::vector<const TimelineEvent*> events;
    for (const auto& e : t.events()) events.push_back(&e);
    FeatureVector v = extract({.canonical_path = "/f"}, events, s);
    CHECK(value_of(v, s, "kw:invoice") == 3.0);
}

TEST_CASE("alphanumeric keywords match whole tokens only: py vs copy") {
    CHECK(count_keyword("copy file", "py") == 0);
    CHECK(count_keyword("run py now", "py") == 1);
    CHECK(count_keyword("script.py saved", "py") == 1);  // '.' splits tokens
    CHECK(count_keyword("PY Py py", "py") == 3);
    CHECK(count_keyword("spy game", "py") == 0);
}

TEST_CASE("keywords with punctuation use boundary-substring matching") {
    CHECK(count_keyword("saved script.py now", ".py") == 1);
    CHECK(count_keyword("saved script.pyc now", ".py") == 0);  // right edge not a boundary
    CHECK(count_keyword("copy.py", ".py") == 1);
    CHECK(count_keyword("a.py b.py", ".py") == 2);
    CHECK(count_keyword("xx..py", ".py") == 1);  // left edge is non-alnum, self-bounding
}

TEST_CASE("datetime anchor: earliest creation-flagged event, else earliest event") {
    // Creation at 20:00 on a Saturday; an earlier access at 09:00 on a Monday.
    Timeline t = test_support::make_timeline({
        {.date = "06/01/2020", .time = "09:00:00", .macb = ".A..", .type = "Last Access Time"},
        {.date = "06/06/2020", .time = "20:00:00", .macb = "...B", .type = "Creation Time"},
    });
    FeatureSchema s = build_schema(FeatureConfig{{"x"}, 0, false, 0}, {}, t);
    std::vector<const TimelineEvent*> events;
    for (const auto& e : t.events()) events.push_back(&e);
    FeatureVector with_b = extract({.canonical_path = "/f"}, events, s);
    CHECK(value_of(with_b, s, "dt_weekday:5") == 1.0);  // the B event wins
    CHECK(value_of(with_b, s, "dt_bucket:night") == 1.0);
    CHECK(value_of(with_b, s, "dt_workday") == 0.0);

    std::vector<const TimelineEvent*> first_only = {events[0]};
    FeatureVector no_b = extract({.canonical_path = "/f"}, first_only, s);
    CHECK(value_of(no_b, s, "dt_weekday:0") == 1.0);  // fallback: earliest event
    CHECK(value_of(no_b, s, "dt_bucket:morning") == 1.0);
    CHECK(value_of(no_b, s, "dt_workday") == 1.0);
}

TEST_CASE("datetime one-hot groups sum to one, or zero with no events") {
    Timeline t = test_support::make_timeline({
        {.date = "06/03/2020", .time = "14:15:16", .macb = "...B"},
    });
    FeatureSchema s = build_schema(FeatureConfig{{"x"}, 0, false, 0}, {}, t);
    std::vector<const TimelineEvent*> events = {&t.events()[0]};
    FeatureVector v = extract({.canonical_path = "/f"}, events, s);
    double months = 0, weekdays = 0, buckets = 0;
    for (std::size_t i = 0; i < s.defs.size(); ++i) {
        if (s.defs[i].kind != FeatureKind::datetime_category) continue;
        if (s.defs[i].parameter.rfind("month:", 0) == 0) months += v.values[i];
        if (s.defs[i].parameter.rfind("weekday:", 0) == 0) weekdays += v.values[i];
        if (s.defs[i].parameter.rfind("bucket:", 0) == 0) buckets += v.values[i];
    }
    CHECK(months == 1.0);
    CHECK(weekdays == 1.0);
    CHECK(buckets == 1.0);
}

TEST_CASE("per-type count features never exceed the total event count") {
    GeneratedScenario gen = [] {
        ScenarioSpec spec = *find_builtin("scenario-a");
        spec.noise_count_override = 500;
        return generate(spec);
    }();
    std::vector<ArtefactId> artefacts;
    for (const auto& e : gen.manifest.entries) artefacts.push_back(e.artefact);
    ArtefactIndex idx = build_index(gen.timeline, artefacts);
    FeatureSchema s = build_schema(FeatureConfig{{"x"}, 5, false, 0}, {}, gen.timeline);
    auto matrix = extract_all(idx, gen.timeline, s);
    for (const auto& v : matrix) {
        double total = v.values[0];
        for (std::size_t i = 0; i < s.defs.size(); ++i) {
            if (s.defs[i].kind == FeatureKind::event_count && !s.defs[i].parameter.empty() &&
                s.defs[i].parameter.rfind("type:", 0) == 0) {
                CHECK(v.values[i] <= total);
            }
        }
    }
}

TEST_CASE("extraction is invariant under event-list permutation") {
    Timeline t = test_support::make_timeline({
        {.date = "06/01/2020", .time = "09:00:00", .macb = "...B", .desc = "chrome /f"},
        {.date = "06/02/2020", .time = "10:00:00", .macb = ".A..", .desc = "read /f"},
        {.date = "06/03/2020", .time = "11:00:00", .macb = "M...", .desc = "chrome again"},
    });
    FeatureSchema s = build_schema(FeatureConfig{{"chrome"}, 2, false, 0}, {}, t);
    std::vector<const TimelineEvent*> events;
    for (const auto& e : t.events()) events.push_back(&e);
    FeatureVector base = extract({.canonical_path = "/f"}, events, s);
    std::vector<const TimelineEvent*> shuffled = {events[2], events[0], events[1]};
    FeatureVector same = extract({.canonical_path = "/f"}, shuffled, s);
    CHECK(base.values == same.values);
}

TEST_CASE("standardize: [1,3] maps to [-1,1] under population stddev") {
    std::vector<FeatureVector> m(2);
    m[0].values = {1.0};
    m[1].values = {3.0};
    ScalingParams p;
    auto out = standardize(m, p);
    CHECK(p.means[0] == 2.0);
    CHECK(p.stds[0] == 1.0);
    CHECK_FALSE(p.constant_flags[0]);
    CHECK(out[0].values[0] == -1.0);
    CHECK(out[1].values[0] == 1.0);
}

TEST_CASE("standardize passes constant columns through, flagged") {
    std::vector<FeatureVector> m(3);
    for (auto& v : m) v.values = {7.0, 1.0};
    m[2].values[1] = 2.0;
    ScalingParams p;
    auto out = standardize(m, p);
    CHECK(p.constant_flags[0]);
    CHECK(p.stds[0] == 1.0);
    CHECK(out[0].values[0] == 7.0);
    CHECK_FALSE(p.constant_flags[1]);
}

TEST_CASE("re-applying stored params reproduces the standardized matrix") {
    auto [m, labels] = test_support::random_dataset(10, 4, 31);
    ScalingParams p;
    auto out = standardize(m, p);
    for (std::size_t i = 0; i < m.size(); ++i) {
        std::vector<double> row = m[i].values;
        apply_scaling(row, p);
        CHECK(row == out[i].values);
    }
}

TEST_CASE("select_features: k >= schema size keeps the schema unchanged") {
    auto [m, labels] = test_support::random_dataset(8, 3, 5);
    FeatureSchema s = test_support::numbered_schema(3);
    FeatureSchema out = select_features(m, labels, 10, SelectionMethod::frequency, s);
    CHECK(out == s);
}

TEST_CASE("frequency selection never keeps an all-zero feature over a live one") {
    std::vector<FeatureVector> m(4);
    for (std::size_t i = 0; i < 4; ++i) m[i].values = {0.0, static_cast<double>(i), 1.0};
    std::vector<int> labels = {1, -1, 1, -1};
    FeatureSchema s = test_support::numbered_schema(3);
    FeatureSchema out = select_features(m, labels, 2, SelectionMethod::frequency, s);
    REQUIRE(out.size() == 2);
    CHECK(out.defs[0].name == s.defs[1].name);
    CHECK(out.defs[1].name == s.defs[2].name);
}

TEST_CASE("coefficient selection keeps the separating feature over noise") {
    // Feature 0 separates the labels perfectly; feature 1 is symmetric noise.
    std::vector<FeatureVector> m(8);
    std::vector<int> labels(8);
    double noise[] = {0.4, -0.4, 0.2, -0.2, -0.3, 0.3, -0.1, 0.1};
    for (std::size_t i = 0; i < 8; ++i) {
        double y = i < 4 ? 1.0 : -1.0;
        m[i].values = {y * 1.0, noise[i]};
        labels[i] = static_cast<int>(y);
    }
    FeatureSchema s = test_support::numbered_schema(2);
    FeatureSchema out = select_features(m, labels, 1, SelectionMethod::coefficient, s);
    REQUIRE(out.size() == 1);
    CHECK(out.defs[0].name == s.defs[0].name);

    // Independent confirmation via the exact grid minimum of the same
    // objective: |w0| > |w1| at the optimum.
    ScalingParams p;
    auto standardized = standardize(m, p);
    test_support::GridProblem gp;
    gp.matrix = &standardized;
    gp.labels = &labels;
    gp.lambda = 0.01;
    auto grid = test_support::grid_min_enumerate(gp);
    double w0 = gp.grid.value(grid.argmin[0]);
    double w1 = gp.grid.value(grid.argmin[1]);
    CHECK(std::fabs(w0) > std::fabs(w1));

    std::vector<int> single(8, 1);
    CHECK_THROWS_AS(select_features(m, single, 1, SelectionMethod::coefficient, s),
                    DegenerateLabels);
}

TEST_CASE("schema json round-trips and the fingerprint tracks content") {
    Timeline t = test_support::make_timeline({{.type = "A"}, {.type = "B"}});
    FeatureSchema s = build_schema(FeatureConfig{{"kw1", ".py"}, 2, false, 0}, {}, t);
    FeatureSchema back = schema_from_json(schema_to_json(s));
    CHECK(back == s);
    CHECK(back.fingerprint() == s.fingerprint());

    FeatureSchema other = s;
    other.defs[0].name = "renamed";
    CHECK(other.fingerprint() != s.fingerprint());
}

TEST_CASE("feature matrix export: header plus one row per artefact") {
    Timeline t = test_support::make_timeline({{.desc = "x /f"}});
    FeatureSchema s = build_schema(FeatureConfig{{"x"}, 0, false, 0}, {}, t);
    ArtefactIndex idx = build_index(t, {{.canonical_path = "/f"}});
    auto matrix = extract_all(idx, t, s);
    std::ostringstream out;
    write_feature_matrix(matrix, s, out);
    std::istringstream lines(out.str());
    std::string header, row, extra_line;
    REQUIRE(std::getline(lines, header));
    REQUIRE(std::getline(lines, row));
    CHECK_FALSE(std::getline(lines, extra_line));
    CHECK(header.rfind("artefact,total_event_count", 0) == 0);
    CHECK(row.rfind("/f,", 0) == 0);
}
