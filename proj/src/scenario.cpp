#include "triage/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "triage/errors.hpp"
#include "triage/rng.hpp"
#include "triage/strings.hpp"

namespace triage {

namespace {

constexpr std::array<std::string_view, 9> kActionNames = {
    "create", "download", "edit", "execute", "unzip", "copy", "move", "access", "late_access",
};

}  // namespace

std::string_view file_action_name(FileAction a) {
    return kActionNames[static_cast<std::size_t>(a)];
}

std::optional<FileAction> file_action_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kActionNames.size(); ++i) {
        if (kActionNames[i] == name) return static_cast<FileAction>(i);
    }
    return std::nullopt;
}

void validate_spec(const ScenarioSpec& spec) {
    if (spec.name.empty()) throw InvalidSpec("scenario name is empty");
    if (!is_valid_date(spec.range.start) || !is_valid_date(spec.range.end)) {
        throw InvalidSpec("invalid date in range");
    }
    if (days_from_civil(spec.range.end) < days_from_civil(spec.range.start)) {
        throw InvalidSpec("date range is empty");
    }
    if (days_from_civil(spec.range.start) < 0) {
        throw InvalidSpec("date range must not precede 1970");
    }
    auto check_groups = [](const std::vector<PopulationGroup>& groups, const char* which) {
        for (const auto& g : groups) {
            if (g.file_type.empty()) {
                throw InvalidSpec(std::string(which) + " group with empty file type");
            }
            for (char c : g.file_type) {
                if (!is_ascii_alnum(c)) {
                    throw InvalidSpec("file type must be alphanumeric: " + g.file_type);
                }
            }
            if (g.actions.empty() && g.count > 0) {
                throw InvalidSpec(std::string(which) + " group '" + g.file_type +
                                  "' has no actions");
            }
        }
    };
    check_groups(spec.benign_population, "benign");
    check_groups(spec.pertinent_population, "pertinent");
    if (spec.pertinent_fraction_override) {
        double f = *spec.pertinent_fraction_override;
        if (!(f > 0.0) || !(f < 1.0)) {
            throw InvalidSpec("pertinent_fraction_override must lie in (0,1)");
        }
        if (spec.benign_population.empty()) {
            throw InvalidSpec("pertinent_fraction_override needs a benign population");
        }
    }
    if (spec.noise_factor < 0.0) throw InvalidSpec("noise_factor must be non-negative");
    for (double p : {spec.keyword_prob_pertinent, spec.keyword_prob_benign}) {
        if (p < 0.0 || p > 1.0) throw InvalidSpec("keyword probability outside [0,1]");
    }
}

std::string synth_digest(std::string_view path, std::uint64_t seed) {
    std::uint64_t base = fnv1a64(path) ^ splitmix64(seed);
    std::string out;
    out.reserve(64);
    for (std::uint64_t i = 0; i < 4; ++i) {
        out += to_hex(splitmix64(base + i));
    }
    return out;
}

namespace {

std::string_view directory_for(std::string_view ext) {
    if (ext == "pdf" || ext == "png" || ext == "gif" || ext == "jpg") return "Downloads";
    if (ext == "txt") return "Documents";
    if (ext == "py") return "Projects";
    return "Files";
}

// Benign counts rescaled (largest-remainder) so pertinent/total = fraction.
std::vector<std::uint64_t> rescaled_benign_counts(const ScenarioSpec& spec) {
    std::vector<std::uint64_t> counts;
    for (const auto& g : spec.benign_population) counts.push_back(g.count);
    if (!spec.pertinent_fraction_override) return counts;

    std::uint64_t total_p = 0;
    for (const auto& g : spec.pertinent_population) total_p += g.count;
    if (total_p == 0) return counts;
    std::uint64_t total_b = 0;
    for (std::uint64_t c : counts) total_b += c;
    if (total_b == 0) throw InvalidSpec("pertinent_fraction_override needs benign files");

    const double f = *spec.pertinent_fraction_override;
    const double target_b = static_cast<double>(total_p) * (1.0 - f) / f;
    std::vector<double> exact(counts.size());
    std::vector<std::uint64_t> scaled(counts.size());
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        exact[i] = target_b * static_cast<double>(counts[i]) / static_cast<double>(total_b);
        scaled[i] = static_cast<std::uint64_t>(exact[i]);
        assigned += scaled[i];
    }
    std::uint64_t want = static_cast<std::uint64_t>(std::llround(target_b));
    std::vector<std::size_t> order(counts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return exact[a] - std::floor(exact[a]) > exact[b] - std::floor(exact[b]);
    });
    for (std::size_t i = 0; assigned < want; i = (i + 1) % order.size()) {
        ++scaled[order[i]];
        ++assigned;
    }
    return scaled;
}

struct EventTemplate {
    std::string_view type;
    std::string_view macb;
    std::string_view source;
    std::string_view sourcetype;
    std::string_view format;
};

EventTemplate template_for(std::string_view type) {
    if (type == "Creation Time") return {type, "...B", "FILE", "NTFS $MFT", "mft"};
    if (type == "Content Modification Time") return {type, "M...", "FILE", "NTFS $MFT", "mft"};
    if (type == "Last Access Time") return {type, ".A..", "FILE", "NTFS $MFT", "mft"};
    if (type == "Metadata Modification Time") return {type, "..C.", "FILE", "NTFS $MFT", "mft"};
    if (type == "File Downloaded") {
        return {type, "M...", "WEBHIST", "Chrome History", "sqlite/chrome_history"};
    }
    if (type == "Last Visited Time") {
        return {type, ".A..", "WEBHIST", "Chrome History", "sqlite/chrome_history"};
    }
    if (type == "Last Time Executed" || type == "Previous Last Time Executed") {
        return {type, "M...", "LOG", "WinPrefetch", "prefetch"};
    }
    if (type == "Last Connection Time") {
        return {type, "M...", "REG", "Registry Key", "winreg/default"};
    }
    if (type == "Last Login Time") return {type, "M...", "LOG", "WinEVTX", "winevtx"};
    if (type == "Start Time") return {type, "M...", "LOG", "WinEVTX", "winevtx"};
    return {type, "M...", "LOG", "Log File", "generic"};
}

// Background types deliberately exclude "Creation Time" and every type that
// has a dedicated presence flag, so per-type totals remain derivable from the
// manifest alone.
constexpr std::array<std::string_view, 7> kNoiseTypes = {
    "Content Modification Time", "Last Access Time",  "Metadata Modification Time",
    "Last Connection Time",      "Last Login Time",   "Last Visited Time",
    "Start Time",
};

constexpr std::string_view kChromeHistoryPath =
    "/Users/user/AppData/Local/Google/Chrome/User Data/Default/History";

struct PendingEvent {
    std::int64_t ts = 0;
    std::uint64_t seq = 0;
    std::string type;
    std::string macb;
    std::string source;
    std::string sourcetype;
    std::string format;
    std::string filename;
    std::string desc;
    std::string inode;
};

class Forge {
  public:
    explicit Forge(const ScenarioSpec& spec)
        : spec_(spec),
          rng_(spec.seed),
          ts_start_(days_from_civil(spec.range.start) * 86400),
          ts_end_(days_from_civil(spec.range.end) * 86400 + 86399) {}

    GeneratedScenario run() {
        auto benign_counts = rescaled_benign_counts(spec_);
        for (std::size_t g = 0; g < spec_.benign_population.size(); ++g) {
            emit_group(spec_.benign_population[g], benign_counts[g], HashLabel::benign);
        }
        for (const auto& group : spec_.pertinent_population) {
            emit_group(group, group.count, HashLabel::pertinent);
        }
        emit_noise();

        std::sort(events_.begin(), events_.end(), [](const PendingEvent& a, const PendingEvent& b) {
            if (a.ts != b.ts) return a.ts < b.ts;
            return a.seq < b.seq;
        });

        GeneratedScenario out{Timeline({}, spec_.name), std::move(manifest_)};
        std::vector<TimelineEvent> rows;
        rows.reserve(events_.size());
        for (std::size_t i = 0; i < events_.size(); ++i) {
            rows.push_back(to_row(events_[i], i));
        }
        out.timeline = Timeline(std::move(rows), spec_.name);
        return out;
    }

  private:
    void emit_group(const PopulationGroup& group, std::uint64_t count, HashLabel label) {
        for (std::uint64_t i = 0; i < count; ++i) emit_artefact(group, label);
    }

    void emit_artefact(const PopulationGroup& group, HashLabel label) {
        const std::uint64_t ordinal = ++ext_counter_[group.file_type];
        char num[16];
        std::snprintf(num, sizeof(num), "%04llu", static_cast<unsigned long long>(ordinal));
        std::string path = "/Users/user/";
        path += directory_for(group.file_type);
        path += "/file_";
        path += num;
        path += '.';
        path += group.file_type;

        ManifestEntry entry;
        entry.artefact.canonical_path = path;
        entry.digest = synth_digest(path, spec_.seed);
        entry.label = label;
        for (FileAction a : group.actions) entry.tags.emplace_back(file_action_name(a));

        const std::string inode = std::to_string(10000 + manifest_.entries.size());
        std::int64_t ts = base_timestamp();
        for (FileAction a : group.actions) {
            ts = emit_action(a, path, inode, label, ts);
        }
        manifest_.entries.push_back(std::move(entry));
    }

    std::int64_t base_timestamp() {
        const std::int64_t span = ts_end_ - ts_start_;
        const std::int64_t headroom = std::min<std::int64_t>(span / 4, 45000);
        return ts_start_ + static_cast<std::int64_t>(
                               rng_.below(static_cast<std::uint64_t>(span - headroom + 1)));
    }

    std::int64_t step(std::int64_t ts) {
        return std::min(ts_end_, ts + 30 + static_cast<std::int64_t>(rng_.below(1800)));
    }

    std::int64_t late_timestamp() {
        const std::int64_t span = ts_end_ - ts_start_;
        const std::int64_t lo = ts_end_ - span / 10;
        return lo + static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(ts_end_ - lo + 1)));
    }

    std::int64_t emit_action(FileAction action, const std::string& path, const std::string& inode,
                             HashLabel label, std::int64_t ts) {
        std::string_view base = std::string_view(path).substr(path.rfind('/') + 1);
        switch (action) {
            case FileAction::create:
                push_mft("Creation Time", path, inode, label, ts);
                return step(ts);
            case FileAction::download: {
                push_mft("Creation Time", path, inode, label, ts);
                std::int64_t t2 = step(ts);
                push_web("File Downloaded",
                         "https://cdn.example.net/" + std::string(base) + " downloaded to \"" +
                             path + "\"",
                         label, t2);
                std::int64_t t3 = step(t2);
                push_web("Last Visited Time",
                         "Visited https://cdn.example.net/" + std::string(base) + " saving \"" +
                             path + "\"",
                         label, t3);
                return step(t3);
            }
            case FileAction::edit:
                push_mft("Content Modification Time", path, inode, label, ts);
                return step(ts);
            case FileAction::execute: {
                push_prefetch("Previous Last Time Executed", path, base, label, ts);
                std::int64_t t2 = step(ts);
                push_prefetch("Last Time Executed", path, base, label, t2);
                return step(t2);
            }
            case FileAction::unzip:
            case FileAction::copy:
            case FileAction::move:
                push_mft("Metadata Modification Time", path, inode, label, ts);
                return step(ts);
            case FileAction::access:
                push_mft("Last Access Time", path, inode, label, ts);
                return step(ts);
            case FileAction::late_access:
                push_mft("Last Access Time", path, inode, label, late_timestamp());
                return step(ts);
        }
        return step(ts);
    }

    void push_mft(std::string_view type, const std::string& path, const std::string& inode,
                  HashLabel label, std::int64_t ts) {
        PendingEvent ev = from_template(type, ts);
        ev.filename = path;
        ev.desc = "Path: " + path + " Type: file";
        ev.inode = inode;
        inject_keywords(ev.desc, label);
        events_.push_back(std::move(ev));
    }

    void push_web(std::string_view type, std::string desc, HashLabel label, std::int64_t ts) {
        PendingEvent ev = from_template(type, ts);
        ev.filename = std::string(kChromeHistoryPath);
        ev.desc = std::move(desc);
        ev.inode = "-";
        inject_keywords(ev.desc, label);
        events_.push_back(std::move(ev));
    }

    void push_prefetch(std::string_view type, const std::string& path, std::string_view base,
                       HashLabel label, std::int64_t ts) {
        PendingEvent ev = from_template(type, ts);
        ev.filename = "/Windows/Prefetch/" + ascii_lower(base) + ".pf";
        ev.desc = "Prefetch " + std::string(base) + " run executable \"" + path + "\"";
        ev.inode = "-";
        inject_keywords(ev.desc, label);
        events_.push_back(std::move(ev));
    }

    PendingEvent from_template(std::string_view type, std::int64_t ts) {
        EventTemplate t = template_for(type);
        PendingEvent ev;
        ev.ts = ts;
        ev.seq = seq_++;
        ev.type = std::string(type);
        ev.macb = std::string(t.macb);
        ev.source = std::string(t.source);
        ev.sourcetype = std::string(t.sourcetype);
        ev.format = std::string(t.format);
        return ev;
    }

    void inject_keywords(std::string& desc, HashLabel label) {
        const auto& pool = label == HashLabel::pertinent ? spec_.pertinent_keyword_pool
                                                         : spec_.benign_keyword_pool;
        const double p = label == HashLabel::pertinent ? spec_.keyword_prob_pertinent
                                                       : spec_.keyword_prob_benign;
        if (pool.empty() || p <= 0.0) return;
        if (rng_.unit() >= p) return;
        const std::uint64_t n = 1 + rng_.below(2);
        for (std::uint64_t i = 0; i < n; ++i) {
            desc += ' ';
            desc += pool[rng_.below(pool.size())];
        }
    }

    void emit_noise() {
        std::uint64_t n = spec_.noise_count_override
                              ? *spec_.noise_count_override
                              : static_cast<std::uint64_t>(std::llround(
                                    spec_.noise_factor * static_cast<double>(events_.size())));
        const std::int64_t span = ts_end_ - ts_start_ + 1;
        for (std::uint64_t i = 0; i < n; ++i) {
            std::string_view type = kNoiseTypes[rng_.below(kNoiseTypes.size())];
            std::int64_t ts =
                ts_start_ + static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(span)));
            PendingEvent ev = from_template(type, ts);
            ev.inode = "-";
            fill_noise_payload(ev);
            events_.push_back(std::move(ev));
        }
    }

    void fill_noise_payload(PendingEvent& ev) {
        const std::uint64_t k = rng_.below(4000);
        if (ev.source == "FILE") {
            ev.filename = "/Windows/System32/lib" + std::to_string(k % 512) + ".dll";
            ev.desc = "Path: " + ev.filename + " Type: file";
            ev.inode = std::to_string(500000 + k);
        } else if (ev.source == "WEBHIST") {
            ev.filename = std::string(kChromeHistoryPath);
            ev.desc = "Visited https://news.example.org/article" + std::to_string(k);
        } else if (ev.source == "REG") {
            ev.filename = "/Windows/System32/config/SOFTWARE";
            ev.desc = "Key: HKLM/Software/Vendor" + std::to_string(k % 64) + "/App" +
                      std::to_string(k % 97);
        } else {
            ev.filename = "/Windows/System32/winevt/Logs/System.evtx";
            ev.desc = "Record " + std::to_string(100000 + k) + " service event";
        }
    }

    TimelineEvent to_row(const PendingEvent& pe, std::size_t row_id) const {
        TimelineEvent ev;
        ev.row_id = row_id;
        std::int64_t days = pe.ts / 86400;
        std::int64_t rem = pe.ts - days * 86400;
        ev.date = civil_from_days(days);
        ev.time = TimeOfDay{static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                            static_cast<int>(rem % 60)};
        ev.timezone = "UTC";
        ev.macb = *MacbFlags::parse(pe.macb);
        ev.source = pe.source;
        ev.sourcetype = pe.sourcetype;
        ev.event_type = pe.type;
        ev.user = "user";
        ev.host = "WKS-01";
        ev.short_desc = pe.type;
        ev.desc = pe.desc;
        ev.version = "2";
        ev.filename = pe.filename;
        ev.inode = pe.inode;
        ev.notes = "-";
        ev.format = pe.format;
        ev.extra = "-";
        return ev;
    }

    const ScenarioSpec& spec_;
    SeededRng rng_;
    std::int64_t ts_start_;
    std::int64_t ts_end_;
    std::uint64_t seq_ = 0;
    std::map<std::string, std::uint64_t> ext_counter_;
    std::vector<PendingEvent> events_;
    GroundTruthManifest manifest_;
};

}  // namespace

GeneratedScenario generate(const ScenarioSpec& spec) {
    validate_spec(spec);
    Forge forge(spec);
    return forge.run();
}

namespace {

std::vector<PopulationGroup> table_benign() {
    return {
        {"pdf", {FileAction::download}, 999},
        {"txt", {FileAction::create}, 100},
        {"png", {FileAction::download}, 100},
        {"py", {FileAction::create, FileAction::access, FileAction::execute}, 63},
    };
}

std::vector<PopulationGroup> table_pertinent() {
    return {
        {"txt", {FileAction::create, FileAction::access, FileAction::edit}, 6},
        {"py",
         {FileAction::create, FileAction::unzip, FileAction::access, FileAction::move,
          FileAction::copy},
         6},
        {"jpg", {FileAction::create, FileAction::access}, 13},
        {"png", {FileAction::download, FileAction::access}, 4},
        {"gif", {FileAction::download, FileAction::access}, 1},
        {"pdf", {FileAction::download}, 1},
    };
}

void append_action(std::vector<PopulationGroup>& groups, std::string_view file_type,
                   FileAction action) {
    for (auto& g : groups) {
        if ((file_type.empty() || g.file_type == file_type) &&
            std::find(g.actions.begin(), g.actions.end(), action) == g.actions.end()) {
            g.actions.push_back(action);
        }
    }
}

}  // namespace

ScenarioSpec paper_baseline() {
    ScenarioSpec spec;
    spec.name = "paper-baseline";
    spec.benign_population = table_benign();
    spec.pertinent_population = table_pertinent();
    return spec;
}

std::vector<ScenarioSpec> builtin_scenarios() {
    std::vector<ScenarioSpec> out;

    ScenarioSpec a = paper_baseline();
    a.name = "scenario-a";
    append_action(a.pertinent_population, "", FileAction::download);
    a.pertinent_keyword_pool = {"chrome", "child", "png", "jpg", "MFT"};
    a.benign_keyword_pool = a.pertinent_keyword_pool;
    out.push_back(std::move(a));

    ScenarioSpec b = paper_baseline();
    b.name = "scenario-b";
    append_action(b.pertinent_population, "py", FileAction::execute);
    b.pertinent_keyword_pool = {"hack", "python", "py", "txt", "zip", "unzip"};
    b.benign_keyword_pool = b.pertinent_keyword_pool;
    out.push_back(std::move(b));

    ScenarioSpec c = paper_baseline();
    c.name = "scenario-c";
    append_action(c.pertinent_population, "pdf", FileAction::late_access);
    c.pertinent_keyword_pool = {"pdf", "invoice", "email", "fraud"};
    c.benign_keyword_pool = c.pertinent_keyword_pool;
    out.push_back(std::move(c));

    return out;
}

std::optional<ScenarioSpec> find_builtin(std::string_view name) {
    if (name == "paper-baseline") return paper_baseline();
    for (auto& s : builtin_scenarios()) {
        if (s.name == name) return s;
    }
    return std::nullopt;
}

HashCatalog derive_catalog(const GroundTruthManifest& manifest, double benign_fraction,
                           double pertinent_fraction, std::uint64_t seed) {
    for (double f : {benign_fraction, pertinent_fraction}) {
        if (f < 0.0 || f > 1.0) throw DataError("catalog fraction outside [0,1]");
    }
    std::vector<std::size_t> benign_idx, pertinent_idx;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const auto& e = manifest.entries[i];
        if (!e.label) continue;
        (*e.label == HashLabel::benign ? benign_idx : pertinent_idx).push_back(i);
    }
    SeededRng rng(seed);
    HashCatalog catalog;
    auto take = [&](std::vector<std::size_t>& idx, double fraction, HashLabel label) {
        if (idx.empty() || fraction <= 0.0) return;
        rng.shuffle(idx);
        std::size_t n = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(idx.size())));
        n = std::max<std::size_t>(n, 1);
        n = std::min(n, idx.size());
        std::vector<std::size_t> chosen(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
        std::sort(chosen.begin(), chosen.end());
        for (std::size_t i : chosen) {
            catalog.insert(HashRecord{manifest.entries[i].digest, label, ""});
        }
    };
    take(benign_idx, benign_fraction, HashLabel::benign);
    take(pertinent_idx, pertinent_fraction, HashLabel::pertinent);
    return catalog;
}

std::vector<std::string> unknown_pertinent_paths(const GroundTruthManifest& manifest,
                                                 const HashCatalog& catalog) {
    std::vector<std::string> out;
    for (const auto& e : manifest.entries) {
        if (e.label && *e.label == HashLabel::pertinent &&
            classify(catalog, e.digest) == Known::unknown) {
            out.push_back(e.artefact.canonical_path);
        }
    }
    return out;
}

void save_manifest(const GroundTruthManifest& manifest, std::ostream& output) {
    std::string out;
    for (const auto& e : manifest.entries) {
        out.append(e.artefact.canonical_path);
        out.push_back('\t');
        out.append(e.digest);
        if (e.label) {
            out.push_back('\t');
            out.append(hash_label_name(*e.label));
            if (!e.tags.empty()) {
                out.push_back('\t');
                for (std::size_t i = 0; i < e.tags.size(); ++i) {
                    if (i) out.push_back(',');
                    out.append(e.tags[i]);
                }
            }
        }
        out.push_back('\n');
    }
    output.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!output) throw Error("manifest write failed", 2);
}

GroundTruthManifest load_manifest(std::istream& input) {
    GroundTruthManifest manifest;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        auto parts = split(trimmed, '\t');
        if (parts.size() < 2 || parts.size() > 4) {
            throw MalformedLine(line_no, "expected path<TAB>digest[<TAB>label[<TAB>tags]]");
        }
        ManifestEntry e;
        e.artefact.canonical_path = parts[0];
        try {
            e.digest = normalize_digest(parts[1]);
        } catch (const InvalidDigest& ex) {
            throw MalformedLine(line_no, ex.what());
        }
        if (parts.size() >= 3) {
            auto label = hash_label_from_name(parts[2]);
            if (!label) throw MalformedLine(line_no, "bad label: " + parts[2]);
            e.label = *label;
        }
        if (parts.size() == 4 && !parts[3].empty()) {
            e.tags = split(parts[3], ',');
        }
        if (e.artefact.canonical_path.empty()) throw MalformedLine(line_no, "empty path");
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

GroundTruthManifest load_manifest_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open manifest: " + path.string(), 2);
    return load_manifest(in);
}

namespace {

nlohmann::ordered_json population_to_json(const std::vector<PopulationGroup>& groups) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& g : groups) {
        auto actions = nlohmann::ordered_json::array();
        for (FileAction a : g.actions) actions.push_back(std::string(file_action_name(a)));
        arr.push_back({{"file_type", g.file_type}, {"actions", actions}, {"count", g.count}});
    }
    return arr;
}

std::vector<PopulationGroup> population_from_json(const nlohmann::json& arr) {
    std::vector<PopulationGroup> groups;
    for (const auto& item : arr) {
        PopulationGroup g;
        g.file_type = item.at("file_type").get<std::string>();
        g.count = item.at("count").get<std::uint64_t>();
        for (const auto& name : item.at("actions")) {
            auto a = file_action_from_name(name.get<std::string>());
            if (!a) throw InvalidSpec("unknown action: " + name.get<std::string>());
            g.actions.push_back(*a);
        }
        groups.push_back(std::move(g));
    }
    return groups;
}

std::string iso_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

}  // namespace

std::string spec_to_json(const ScenarioSpec& spec) {
    nlohmann::ordered_json j;
    j["name"] = spec.name;
    j["seed"] = spec.seed;
    j["date_range"] = {{"start", iso_date(spec.range.start)}, {"end", iso_date(spec.range.end)}};
    j["benign_population"] = population_to_json(spec.benign_population);
    j["pertinent_population"] = population_to_json(spec.pertinent_population);
    j["benign_keyword_pool"] = spec.benign_keyword_pool;
    j["pertinent_keyword_pool"] = spec.pertinent_keyword_pool;
    if (spec.pertinent_fraction_override) {
        j["pertinent_fraction_override"] = *spec.pertinent_fraction_override;
    } else {
        j["pertinent_fraction_override"] = nullptr;
    }
    j["noise_factor"] = spec.noise_factor;
    if (spec.noise_count_override) {
        j["noise_count_override"] = *spec.noise_count_override;
    } else {
        j["noise_count_override"] = nullptr;
    }
    j["keyword_prob_pertinent"] = spec.keyword_prob_pertinent;
    j["keyword_prob_benign"] = spec.keyword_prob_benign;
    return j.dump(2) + "\n";
}

ScenarioSpec spec_from_json(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec(std::string("spec json: ") + e.what());
    }
    ScenarioSpec spec;
    try {
        spec.name = j.at("name").get<std::string>();
        if (!j.contains("seed")) throw InvalidSpec("spec json: seed is mandatory");
        spec.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("date_range")) {
            auto start = parse_date(j["date_range"].at("start").get<std::string>(), true);
            auto end = parse_date(j["date_range"].at("end").get<std::string>(), true);
            if (!start || !end) throw InvalidSpec("spec json: unparseable date_range");
            spec.range = DateRange{*start, *end};
        }
        if (j.contains("benign_population")) {
            spec.benign_population = population_from_json(j["benign_population"]);
        }
        if (j.contains("pertinent_population")) {
            spec.pertinent_population = population_from_json(j["pertinent_population"]);
        }
        if (j.contains("benign_keyword_pool")) {
            spec.benign_keyword_pool = j["benign_keyword_pool"].get<std::vector<std::string>>();
        }
        if (j.contains("pertinent_keyword_pool")) {
            spec.pertinent_keyword_pool =
                j["pertinent_keyword_pool"].get<std::vector<std::string>>();
        }
        if (j.contains("pertinent_fraction_override") && !j["pertinent_fraction_override"].is_null()) {
            spec.pertinent_fraction_override = j["pertinent_fraction_override"].get<double>();
        }
        if (j.contains("noise_factor")) spec.noise_factor = j["noise_factor"].get<double>();
        if (j.contains("noise_count_override") && !j["noise_count_override"].is_null()) {
            spec.noise_count_override = j["noise_count_override"].get<std::uint64_t>();
        }
        if (j.contains("keyword_prob_pertinent")) {
            spec.keyword_prob_pertinent = j["keyword_prob_pertinent"].get<double>();
        }
        if (j.contains("keyword_prob_benign")) {
            spec.keyword_prob_benign = j["keyword_prob_benign"].get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec(std::string("spec json: ") + e.what());
    }
    validate_spec(spec);
    return spec;
}

ScenarioSpec load_spec_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open spec: " + path.string(), 2);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return spec_from_json(text);
}

}  // namespace triage
