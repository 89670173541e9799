#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <sstream>
#include <string>

#include "triage/errors.hpp"
#include "triage/hash_catalog.hpp"
#include "triage/rng.hpp"

using namespace triage;

namespace {

// 40 and 64 hex-char digests with a recognizable stem.
std::string sha1ish(char fill) { return std::string(40, fill); }
std::string sha256ish(char fill) { return std::string(64, fill); }

}  // namespace

TEST_CASE("empty input loads an empty catalog") {
    std::istringstream in("");
    HashCatalog c = load_catalog(in);
    CHECK(c.size() == 0);
    CHECK(c.count(HashLabel::benign) == 0);
    CHECK(c.count(HashLabel::pertinent) == 0);
}

TEST_CASE("comments and blank lines are skipped; notes are preserved") {
    std::istringstream in("# comment\n\n" + sha1ish('a') + "\tbenign\tnsrl import\n");
    HashCatalog c = load_catalog(in);
    REQUIRE(c.size() == 1);
    CHECK(c.records().begin()->second.note == "nsrl import");
}

TEST_CASE("re-inserting the same digest with the same label is idempotent") {
    std::istringstream in(sha1ish('a') + "\tbenign\n" + sha1ish('a') + "\tbenign\n");
    HashCatalog c = load_catalog(in);
    CHECK(c.size() == 1);
}

TEST_CASE("conflicting labels for one digest are rejected") {
    std::istringstream in(sha1ish('a') + "\tbenign\n" + sha1ish('a') + "\tpertinent\n");
    CHECK_THROWS_AS(load_catalog(in), DuplicateConflictingDigest);
}

TEST_CASE("malformed lines carry their 1-based line number") {
    std::istringstream in(sha1ish('a') + "\tbenign\nnot-a-digest\tbenign\n");
    try {
        load_catalog(in);
        FAIL("expected MalformedLine");
    } catch (const MalformedLine& e) {
        CHECK(e.line_no == 2);
    }

    std::istringstream bad_label(sha1ish('b') + "\tsuspicious\n");
    CHECK_THROWS_AS(load_catalog(bad_label), MalformedLine);
    std::istringstream no_tab(sha1ish('c') + "\n");
    CHECK_THROWS_AS(load_catalog(no_tab), MalformedLine);
}

TEST_CASE("digest normalization: case-insensitive, sha1 and sha256 lengths only") {
    CHECK(normalize_digest("ABCDEF" + std::string(34, '0')) ==
          "abcdef" + std::string(34, '0'));
    CHECK(normalize_digest(sha256ish('F')) == sha256ish('f'));
    CHECK_THROWS_AS(normalize_digest("abc"), InvalidDigest);           // wrong length
    CHECK_THROWS_AS(normalize_digest(std::string(40, 'g')), InvalidDigest);  // not hex
    CHECK_THROWS_AS(normalize_digest(std::string(41, 'a')), InvalidDigest);
    CHECK_THROWS_AS(normalize_digest(""), InvalidDigest);
}

TEST_CASE("classify: present labels and unknown fallthrough") {
    std::istringstream in(sha1ish('a') + "\tbenign\n" + sha256ish('b') + "\tpertinent\n");
    HashCatalog c = load_catalog(in);
    CHECK(classify(c, sha1ish('a')) == Known::benign);
    CHECK(classify(c, sha256ish('b')) == Known::pertinent);
    CHECK(classify(c, sha1ish('f')) == Known::unknown);
    // Uppercase input classifies identically to lowercase.
    CHECK(classify(c, sha256ish('B')) == Known::pertinent);
    CHECK_THROWS_AS(classify(c, "zz"), InvalidDigest);
}

TEST_CASE("catalog mixes digest lengths") {
    std::istringstream in(sha1ish('a') + "\tbenign\n" + sha256ish('a') + "\tpertinent\n");
    HashCatalog c = load_catalog(in);
    CHECK(c.size() == 2);
}

TEST_CASE("partition: all-unknown, mixed, and empty manifests") {
    std::istringstream in(sha1ish('a') + "\tbenign\n" + sha1ish('b') + "\tbenign\n" +
                          sha1ish('c') + "\tpertinent\n");
    HashCatalog c = load_catalog(in);

    auto item = [](const char* path, std::string digest) {
        return ArtefactDigest{ArtefactId{path, {}}, std::move(digest)};
    };

    LabeledPartition all_unknown = partition(c, {item("/1", sha1ish('d')),
                                                 item("/2", sha1ish('e'))});
    CHECK(all_unknown.unknown.size() == 2);
    CHECK(all_unknown.known_benign.empty());
    CHECK(all_unknown.known_pertinent.empty());

    LabeledPartition mixed = partition(c, {
        item("/a", sha1ish('a')),
        item("/b", sha1ish('b')),
        item("/c", sha1ish('c')),
        item("/d", sha1ish('d')),
        item("/e", sha1ish('e')),
    });
    CHECK(mixed.known_benign.size() == 2);
    CHECK(mixed.known_pertinent.size() == 1);
    CHECK(mixed.unknown.size() == 2);
    // Input order preserved within buckets.
    CHECK(mixed.known_benign[0].canonical_path == "/a");
    CHECK(mixed.known_benign[1].canonical_path == "/b");

    LabeledPartition empty = partition(c, {});
    CHECK(empty.known_benign.empty());
    CHECK(empty.known_pertinent.empty());
    CHECK(empty.unknown.empty());
}

TEST_CASE("partition is total and disjoint on random manifests") {
    SeededRng rng(4242);
    const char* hex = "0123456789abcdef";
    auto random_digest = [&](std::size_t len) {
        std::string d;
        for (std::size_t i = 0; i < len; ++i) d += hex[rng.below(16)];
        return d;
    };
    for (int round = 0; round < 50; ++round) {
        std::ostringstream catalog_text;
        std::vector<std::string> known;
        for (int i = 0; i < 10; ++i) {
            std::string d = random_digest(rng.unit() < 0.5 ? 40 : 64);
            known.push_back(d);
            catalog_text << d << '\t' << (rng.unit() < 0.5 ? "benign" : "pertinent") << '\n';
        }
        std::istringstream in(catalog_text.str());
        HashCatalog c = load_catalog(in);

        std::vector<ArtefactDigest> manifest;
        for (int i = 0; i < 20; ++i) {
            std::string d = rng.unit() < 0.5 ? known[rng.below(known.size())]
                                             : random_digest(64);
            manifest.push_back({ArtefactId{"/p" + std::to_string(i), {}}, d});
        }
        LabeledPartition part = partition(c, manifest);
        CHECK(part.known_benign.size() + part.known_pertinent.size() + part.unknown.size() ==
              manifest.size());
        std::set<std::string> seen;
        for (const auto* bucket : {&part.known_benign, &part.known_pertinent, &part.unknown}) {
            for (const auto& a : *bucket) {
                CHECK(seen.insert(a.canonical_path).second);  // disjoint
            }
        }
    }
}

TEST_CASE("load-save-load is the identity") {
    std::istringstream in(sha256ish('b') + "\tpertinent\tcase7\n" + sha1ish('a') + "\tbenign\n");
    HashCatalog c = load_catalog(in);
    std::ostringstream saved;
    save_catalog(c, saved);
    std::istringstream again(saved.str());
    HashCatalog c2 = load_catalog(again);
    REQUIRE(c2.size() == c.size());
    CHECK(c2.records() == c.records());
    std::ostringstream saved2;
    save_catalog(c2, saved2);
    CHECK(saved.str() == saved2.str());
}

TEST_CASE("records iterate sorted by digest") {
    std::istringstream in(sha1ish('c') + "\tbenign\n" + sha1ish('a') + "\tbenign\n");
    HashCatalog c = load_catalog(in);
    CHECK(c.records().begin()->first == sha1ish('a'));
}
