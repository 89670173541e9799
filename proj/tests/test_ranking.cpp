#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "triage/errors.hpp"
#include "triage/ranking.hpp"
#include "triage/rng.hpp"

using namespace triage;

namespace {

RankedItem item(const std::string& path, double score) {
    RankedItem it;
    it.artefact.canonical_path = path;
    it.score = score;
    return it;
}

std::vector<std::string> order_of(const RankedReport& r) {
    std::vector<std::string> out;
    for (const auto& it : r.items) out.push_back(it.artefact.canonical_path);
    return out;
}

}  // namespace

TEST_CASE("rank sorts by score descending") {
    RankedReport r = rank({item("a", 1.0), item("b", 2.0)});
    CHECK(order_of(r) == std::vector<std::string>{"b", "a"});
}

TEST_CASE("equal scores break ties by path ascending") {
    RankedReport r = rank({item("b", 1.0), item("a", 1.0)});
    CHECK(order_of(r) == std::vector<std::string>{"a", "b"});
}

TEST_CASE("empty input ranks to an empty report") {
    RankedReport r = rank({});
    CHECK(r.items.empty());
}

TEST_CASE("rank output is independent of input order") {
    std::vector<RankedItem> items = {item("c", 0.5), item("a", 0.5), item("b", 2.0),
                                     item("d", -1.0)};
    RankedReport base = rank(items);
    std::sort(items.begin(), items.end(),
              [](const RankedItem& x, const RankedItem& y) {
                  return x.artefact.canonical_path < y.artefact.canonical_path;
              });
    RankedReport sorted_in = rank(items);
    std::reverse(items.begin(), items.end());
    RankedReport reversed_in = rank(items);
    CHECK(order_of(base) == order_of(sorted_in));
    CHECK(order_of(base) == order_of(reversed_in));
}

TEST_CASE("recall_at: hand-checked cases") {
    // N=10, truth = {a} ranked first, fraction 0.1 -> k=1 -> recall 1.
    std::vector<RankedItem> ten;
    ten.push_back(item("a", 100.0));
    for (int i = 1; i < 10; ++i) ten.push_back(item("b" + std::to_string(i), 10.0 - i));
    RankedReport r10 = rank(ten);
    CHECK(recall_at(r10, {"a"}, 0.1) == 1.0);

    // N=20, truth at ranks 1,2,5,20, fraction 0.25 -> k=5 -> 3/4 recovered.
    std::vector<RankedItem> twenty;
    for (int i = 1; i <= 20; ++i) {
        twenty.push_back(item("p" + std::string(1, char('a' + i - 1)), 100.0 - i));
    }
    std::vector<std::string> truth = {"pa", "pb", "pe", "pt"};
    RankedReport r20 = rank(twenty);
    CHECK(recall_at(r20, truth, 0.25) == doctest::Approx(0.75));
    CHECK(recall_at(r20, truth, 1.0) == 1.0);
}

TEST_CASE("recall_at guards its inputs") {
    RankedReport r = rank({item("a", 1.0)});
    CHECK_THROWS_AS(recall_at(r, {}, 0.5), EmptyTruth);
    CHECK_THROWS_AS(recall_at(r, {"not-ranked"}, 0.5), UnknownTruthArtefact);
}

TEST_CASE("recall_table over the default fractions; flat-zero prefix case") {
    // 10 items, both truth members ranked last.
    std::vector<RankedItem> items;
    for (int i = 0; i < 8; ++i) items.push_back(item("benign" + std::to_string(i), 10.0 - i));
    items.push_back(item("zz1", -5.0));
    items.push_back(item("zz2", -6.0));
    RankedReport r = rank(items);
    auto table = recall_table(r, {"zz1", "zz2"});
    REQUIRE(table.size() == 5);
    CHECK(table[0].first == doctest::Approx(0.1));
    CHECK(table[0].second == 0.0);  // k=1
    CHECK(table[1].second == 0.0);  // k=2
    CHECK(table[2].second == 0.0);  // k=3
    CHECK(table[3].second == 0.0);  // k=5
    CHECK(table[4].second == 1.0);  // k=10
    // Non-decreasing in fraction.
    for (std::size_t i = 1; i < table.size(); ++i) {
        CHECK(table[i].second >= table[i - 1].second);
    }
}

TEST_CASE("review fractions format as fixed two-decimal keys") {
    CHECK(format_fraction(0.1) == "0.10");
    CHECK(format_fraction(0.2) == "0.20");
    CHECK(format_fraction(0.3) == "0.30");
    CHECK(format_fraction(0.5) == "0.50");
    CHECK(format_fraction(1.0) == "1.00");
}

TEST_CASE("property suite over random instances") {
    SeededRng rng(20200615);
    for (int round = 0; round < 1000; ++round) {
        std::size_t n = 1 + rng.below(30);
        std::vector<RankedItem> items;
        for (std::size_t i = 0; i < n; ++i) {
            // Coarse scores force plenty of ties.
            double s = static_cast<double>(rng.below(5));
            items.push_back(item("p" + std::to_string(i), s));
        }
        std::size_t truth_n = 1 + rng.below(n);
        std::vector<std::string> truth;
        for (std::size_t i = 0; i < truth_n; ++i) {
            truth.push_back("p" + std::to_string(rng.below(n)));
        }
        std::sort(truth.begin(), truth.end());
        truth.erase(std::unique(truth.begin(), truth.end()), truth.end());

        RankedReport r = rank(items);

        // Scores non-increasing; ties by path ascending.
        for (std::size_t i = 1; i < r.items.size(); ++i) {
            REQUIRE(r.items[i - 1].score >= r.items[i].score);
            if (r.items[i - 1].score == r.items[i].score) {
                REQUIRE(r.items[i - 1].artefact.canonical_path <
                        r.items[i].artefact.canonical_path);
            }
        }

        // recall@1.0 = 1 and monotone in the fraction.
        double prev = 0.0;
        for (double f : {0.05, 0.1, 0.25, 0.5, 0.75, 1.0}) {
            double rec = recall_at(r, truth, f);
            REQUIRE(rec >= prev - 1e-15);
            REQUIRE(rec >= 0.0);
            REQUIRE(rec <= 1.0);
            prev = rec;
        }
        REQUIRE(recall_at(r, truth, 1.0) == 1.0);

        // Strictly monotone transforms preserve the order exactly.
        std::vector<RankedItem> transformed = items;
        for (auto& it : transformed) it.score = std::atan(3.0 * it.score) + 7.0;
        REQUIRE(order_of(rank(transformed)) == order_of(r));

        // Deterministic under input permutation (tie-break is total).
        std::vector<RankedItem> shuffled = items;
        rng.shuffle(shuffled);
        REQUIRE(order_of(rank(shuffled)) == order_of(r));
    }
}

TEST_CASE("emit_report: empty report produces headers only") {
    RankedReport empty;
    std::ostringstream js, txt;
    emit_report(empty, js, txt);
    CHECK(js.str().find("\"items\": []") != std::string::npos);
    std::istringstream lines(txt.str());
    std::string first;
    std::getline(lines, first);
    CHECK(first.find("rank") != std::string::npos);
}

TEST_CASE("emit_report: two items give two body rows and a parseable json") {
    RankedReport r = rank({item("/a", 1.5), item("/b", 0.5)});
    r.schema_name = "s";
    r.model_fingerprint = "m";
    r.generated_at = "t0";
    std::ostringstream js, txt;
    emit_report(r, js, txt);
    std::string text = txt.str();
    CHECK(text.find("/a") != std::string::npos);
    CHECK(text.find("/b") != std::string::npos);

    RankedReport back = report_from_json(js.str());
    REQUIRE(back.items.size() == 2);
    CHECK(back.items[0].artefact.canonical_path == "/a");
    CHECK(back.items[0].score == 1.5);
    CHECK(back.generated_at == "t0");
    CHECK(back.model_fingerprint == "m");

    // Byte-stable emission.
    std::ostringstream js2, txt2;
    emit_report(r, js2, txt2);
    CHECK(js.str() == js2.str());
    CHECK(txt.str() == txt2.str());
}

TEST_CASE("report json round-trips probabilities and recall tables") {
    RankedReport r = rank({item("/a", 2.0), item("/b", 1.0)});
    r.items[0].probability = 0.875;
    r.recall = {{0.1, 0.5}, {1.0, 1.0}};
    RankedReport back = report_from_json(report_to_json(r));
    REQUIRE(back.items.size() == 2);
    REQUIRE(back.items[0].probability.has_value());
    CHECK(*back.items[0].probability == 0.875);
    CHECK_FALSE(back.items[1].probability.has_value());
    REQUIRE(back.recall.size() == 2);
    CHECK(back.recall[0].first == doctest::Approx(0.1));
    CHECK(back.recall[0].second == 0.5);
    CHECK(report_to_json(back) == report_to_json(r));
}
