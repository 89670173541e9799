#include "triage/hash_catalog.hpp"

#include <fstream>
#include <ostream>

#include "triage/errors.hpp"
#include "triage/strings.hpp"

namespace triage {

std::string_view hash_label_name(HashLabel label) {
    return label == HashLabel::benign ? "benign" : "pertinent";
}

std::optional<HashLabel> hash_label_from_name(std::string_view name) {
    if (name == "benign") return HashLabel::benign;
    if (name == "pertinent") return HashLabel::pertinent;
    return std::nullopt;
}

std::string normalize_digest(std::string_view raw) {
    if (raw.size() != 40 && raw.size() != 64) {
        throw InvalidDigest("digest length " + std::to_string(raw.size()) +
                            " (need 40 or 64 hex chars): " + std::string(raw));
    }
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        char l = ascii_lower(c);
        bool hex = (l >= '0' && l <= '9') || (l >= 'a' && l <= 'f');
        if (!hex) throw InvalidDigest("non-hex character in digest: " + std::string(raw));
        out.push_back(l);
    }
    return out;
}

void HashCatalog::insert(HashRecord record) {
    record.digest = normalize_digest(record.digest);
    auto it = records_.find(record.digest);
    if (it != records_.end()) {
        if (it->second.label != record.label) {
            throw DuplicateConflictingDigest(record.digest);
        }
        return;
    }
    records_.emplace(record.digest, std::move(record));
}

std::optional<HashLabel> HashCatalog::lookup(std::string_view digest) const {
    auto it = records_.find(normalize_digest(digest));
    if (it == records_.end()) return std::nullopt;
    return it->second.label;
}

std::size_t HashCatalog::count(HashLabel label) const {
    std::size_t n = 0;
    for (const auto& [d, r] : records_) {
        if (r.label == label) ++n;
    }
    return n;
}

HashCatalog load_catalog(std::istream& input) {
    HashCatalog catalog;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        auto parts = split(trimmed, '\t');
        if (parts.size() < 2 || parts.size() > 3) {
            throw MalformedLine(line_no, "expected digest<TAB>label[<TAB>note]");
        }
        auto label = hash_label_from_name(parts[1]);
        if (!label) throw MalformedLine(line_no, "label must be benign or pertinent: " + parts[1]);
        HashRecord rec;
        rec.digest = parts[0];
        rec.label = *label;
        if (parts.size() == 3) rec.note = parts[2];
        try {
            catalog.insert(std::move(rec));
        } catch (const InvalidDigest& e) {
            throw MalformedLine(line_no, e.what());
        }
    }
    return catalog;
}

HashCatalog load_catalog_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open catalog: " + path.string(), 2);
    return load_catalog(in);
}

void save_catalog(const HashCatalog& catalog, std::ostream& output) {
    std::string out;
    for (const auto& [digest, rec] : catalog.records()) {
        out.append(digest);
        out.push_back('\t');
        out.append(hash_label_name(rec.label));
        if (!rec.note.empty()) {
            out.push_back('\t');
            out.append(rec.note);
        }
        out.push_back('\n');
    }
    output.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!output) throw Error("catalog write failed", 2);
}

Known classify(const HashCatalog& catalog, std::string_view digest) {
    auto label = catalog.lookup(digest);
    if (!label) return Known::unknown;
    return *label == HashLabel::benign ? Known::benign : Known::pertinent;
}

LabeledPartition partition(const HashCatalog& catalog, const std::vector<ArtefactDigest>& items) {
    LabeledPartition p;
    for (const auto& item : items) {
        Known k;
        try {
            k = classify(catalog, item.digest);
        } catch (const InvalidDigest& e) {
            throw InvalidDigest(std::string(e.what()) + " (artefact " +
                                item.artefact.canonical_path + ")");
        }
        switch (k) {
            case Known::benign: p.known_benign.push_back(item.artefact); break;
            case Known::pertinent: p.known_pertinent.push_back(item.artefact); break;
            case Known::unknown: p.unknown.push_back(item.artefact); break;
        }
    }
    return p;
}

}  // namespace triage
