#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "triage/artefact.hpp"

namespace triage {

enum class HashLabel : int { benign = 0, pertinent = 1 };

std::string_view hash_label_name(HashLabel label);
std::optional<HashLabel> hash_label_from_name(std::string_view name);

struct HashRecord {
    std::string digest;  // lowercase hex, 40 (SHA-1) or 64 (SHA-256) chars
    HashLabel label = HashLabel::benign;
    std::string note;

    bool operator==(const HashRecord&) const = default;
};

// Lowercases and validates; throws InvalidDigest otherwise.
std::string normalize_digest(std::string_view raw);

class HashCatalog {
  public:
    // Re-inserting the same digest with the same label is a no-op (first note
    // wins); a different label throws DuplicateConflictingDigest.
    void insert(HashRecord record);

    std::optional<HashLabel> lookup(std::string_view digest) const;

    std::size_t size() const { return records_.size(); }
    std::size_t count(HashLabel label) const;

    // Sorted by digest, so iteration (and save) order is deterministic.
    const std::map<std::string, HashRecord>& records() const { return records_; }

  private:
    std::map<std::string, HashRecord> records_;
};

// One record per line: <digest>\t<benign|pertinent>[\t<note>]. '#' lines and
// blank lines are skipped. Line numbers in errors are 1-based.
HashCatalog load_catalog(std::istream& input);
HashCatalog load_catalog_file(const std::filesystem::path& path);
void save_catalog(const HashCatalog& catalog, std::ostream& output);

enum class Known : int { benign = 0, pertinent = 1, unknown = 2 };

Known classify(const HashCatalog& catalog, std::string_view digest);

struct ArtefactDigest {
    ArtefactId artefact;
    std::string digest;
};

struct LabeledPartition {
    std::vector<ArtefactId> known_benign;
    std::vector<ArtefactId> known_pertinent;
    std::vector<ArtefactId> unknown;
};

// Disjoint three-way split; input order preserved within each bucket.
LabeledPartition partition(const HashCatalog& catalog, const std::vector<ArtefactDigest>& items);

}  // namespace triage
