#include "triage/artefact.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "triage/csv.hpp"
#include "triage/errors.hpp"
#include "triage/strings.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace triage {

std::string_view match_field_name(MatchField f) {
    return f == MatchField::filename ? "filename" : "desc";
}

const ArtefactTimeline* ArtefactIndex::find(std::string_view canonical_path) const {
    for (const auto& e : entries) {
        if (e.artefact.canonical_path == canonical_path) return &e;
    }
    return nullptr;
}

std::string normalize_path(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (c == '\\') {
            out.push_back('/');
        } else {
            out.push_back(ascii_lower(c));
        }
    }
    return out;
}

namespace {

bool is_boundary_ws(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_quote(char c) { return c == '"' || c == '\''; }

bool left_ok(std::string_view hay, std::size_t pos, char needle_front) {
    if (needle_front == '/') return true;  // a leading slash is its own boundary
    if (pos == 0) return true;
    char prev = hay[pos - 1];
    return prev == '/' || is_quote(prev);
}

bool right_ok(std::string_view hay, std::size_t end) {
    if (end == hay.size()) return true;
    char next = hay[end];
    return next == '/' || is_quote(next) || is_boundary_ws(next);
}

}  // namespace

bool boundary_match(std::string_view haystack, std::string_view needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
        if (left_ok(haystack, pos, needle.front()) && right_ok(haystack, pos + needle.size())) {
            return true;
        }
        ++pos;
    }
    return false;
}

bool match_artefact(std::string_view norm_filename, std::string_view norm_desc,
                    const std::vector<std::string>& norm_needles, MatchField& field_out) {
    for (const auto& n : norm_needles) {
        if (boundary_match(norm_filename, n)) {
            field_out = MatchField::filename;
            return true;
        }
    }
    for (const auto& n : norm_needles) {
        if (boundary_match(norm_desc, n)) {
            field_out = MatchField::desc;
            return true;
        }
    }
    return false;
}

namespace {

std::vector<std::vector<std::string>> normalized_needles(const std::vector<ArtefactId>& artefacts) {
    std::vector<std::vector<std::string>> needles(artefacts.size());
    for (std::size_t a = 0; a < artefacts.size(); ++a) {
        needles[a].push_back(normalize_path(artefacts[a].canonical_path));
        for (const auto& alias : artefacts[a].aliases) {
            needles[a].push_back(normalize_path(alias));
        }
    }
    return needles;
}

ArtefactIndex empty_index(const std::vector<ArtefactId>& artefacts) {
    ArtefactIndex index;
    index.entries.resize(artefacts.size());
    for (std::size_t a = 0; a < artefacts.size(); ++a) {
        index.entries[a].artefact = artefacts[a];
    }
    return index;
}

}  // namespace

ArtefactIndex build_index_reference(const Timeline& timeline,
                                    const std::vector<ArtefactId>& artefacts) {
    ArtefactIndex index = empty_index(artefacts);
    auto needles = normalized_needles(artefacts);
    for (const auto& ev : timeline.events()) {
        std::string norm_f = normalize_path(ev.filename);
        std::string norm_d = normalize_path(ev.desc);
        for (std::size_t a = 0; a < artefacts.size(); ++a) {
            MatchField field;
            if (match_artefact(norm_f, norm_d, needles[a], field)) {
                index.entries[a].events.push_back(MatchedEvent{ev.row_id, field});
            }
        }
    }
    return index;
}

namespace {

// Token delimiters are exactly the characters that can bound a match, so any
// boundary-matched name ends on a whole token equal to its final path
// component. Names that contain a delimiter other than '/' (or end in '/')
// cannot be keyed that way and fall back to being checked for every event.
bool is_token_delim(char c) { return c == '/' || is_quote(c) || is_boundary_ws(c); }

std::string_view last_component(std::string_view needle) {
    auto slash = needle.rfind('/');
    return slash == std::string_view::npos ? needle : needle.substr(slash + 1);
}

bool needs_fallback(std::string_view needle) {
    std::string_view comp = last_component(needle);
    if (comp.empty()) return true;
    for (char c : comp) {
        if (is_token_delim(c)) return true;  // unreachable for '/', kept for clarity
    }
    // Components earlier in the needle may still contain quotes/whitespace;
    // those never tokenize cleanly either, but the *key* is the last component,
    // and the precise matcher re-checks the whole needle, so only the key must
    // be a clean token. A quote or space elsewhere in the needle is fine.
    return false;
}

template <typename Fn>
void for_each_token(std::string_view text, Fn&& fn) {
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_token_delim(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_token_delim(text[i])) ++i;
        if (i > start) fn(text.substr(start, i - start));
    }
}

}  // namespace

ArtefactIndex build_index(const Timeline& timeline, const std::vector<ArtefactId>& artefacts) {
    ArtefactIndex index = empty_index(artefacts);
    auto needles = normalized_needles(artefacts);

    // Key each artefact by the last components of its names.
    std::unordered_map<std::string_view, std::vector<std::uint32_t>> by_component;
    std::vector<std::uint32_t> always_check;
    std::vector<char> has_fallback(artefacts.size(), 0);
    for (std::size_t a = 0; a < artefacts.size(); ++a) {
        for (const auto& n : needles[a]) {
            if (needs_fallback(n)) {
                if (!has_fallback[a]) {
                    has_fallback[a] = 1;
                    always_check.push_back(static_cast<std::uint32_t>(a));
                }
            } else {
                auto& bucket = by_component[last_component(n)];
                if (bucket.empty() || bucket.back() != a) {
                    bucket.push_back(static_cast<std::uint32_t>(a));
                }
            }
        }
    }

    const auto& events = timeline.events();
    const std::int64_t n_events = static_cast<std::int64_t>(events.size());
    std::vector<std::vector<std::pair<std::uint32_t, MatchField>>> hits(events.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 256)
#endif
    for (std::int64_t e = 0; e < n_events; ++e) {
        const auto& ev = events[static_cast<std::size_t>(e)];
        std::string norm_f = normalize_path(ev.filename);
        std::string norm_d = normalize_path(ev.desc);

        std::vector<std::uint32_t> cands(always_check);
        auto collect = [&](std::string_view text) {
            for_each_token(text, [&](std::string_view tok) {
                auto it = by_component.find(tok);
                if (it == by_component.end()) return;
                for (std::uint32_t a : it->second) cands.push_back(a);
            });
        };
        collect(norm_f);
        collect(norm_d);
        std::sort(cands.begin(), cands.end());
        cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

        for (std::uint32_t a : cands) {
            MatchField field;
            if (match_artefact(norm_f, norm_d, needles[a], field)) {
                hits[static_cast<std::size_t>(e)].emplace_back(a, field);
            }
        }
    }

    // Serial merge in event order keeps row_ids sorted and the result
    // independent of the thread count.
    for (std::size_t e = 0; e < events.size(); ++e) {
        for (auto [a, field] : hits[e]) {
            index.entries[a].events.push_back(MatchedEvent{events[e].row_id, field});
        }
    }
    return index;
}

std::vector<const TimelineEvent*> artefact_timeline_events(const ArtefactTimeline& atl,
                                                           const Timeline& parent) {
    std::vector<const TimelineEvent*> out;
    out.reserve(atl.events.size());
    for (const auto& m : atl.events) {
        const TimelineEvent* ev = parent.find_row(m.row_id);
        if (!ev) throw Error("artefact timeline references missing row " + std::to_string(m.row_id), 2);
        out.push_back(ev);
    }
    return out;
}

std::vector<const TimelineEvent*> artefact_timeline_events(const ArtefactIndex& index,
                                                           const ArtefactId& artefact,
                                                           const Timeline& parent) {
    const ArtefactTimeline* atl = index.find(artefact.canonical_path);
    if (!atl) throw UnknownArtefact(artefact.canonical_path);
    return artefact_timeline_events(*atl, parent);
}

void export_artefact_timeline(const std::vector<const TimelineEvent*>& events,
                              std::ostream& output) {
    std::string out;
    out.append(kArtefactExportHeader);
    out.push_back('\n');
    std::vector<std::string> cols(10);
    for (const TimelineEvent* ev : events) {
        cols[0] = ev->inode;
        cols[1] = format_date(ev->date);
        cols[2] = format_time(ev->time);
        cols[3] = ev->macb.to_string();
        cols[4] = ev->filename;
        cols[5] = ev->event_type;
        cols[6] = ev->source;
        cols[7] = ev->sourcetype;
        cols[8] = format_iso_datetime(ev->date, ev->time);
        cols[9] = ev->desc;
        write_csv_record(out, cols);
    }
    output.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!output) throw Error("artefact export write failed", 2);
}

std::vector<ArtefactId> load_artefact_list(std::istream& input) {
    std::vector<ArtefactId> out;
    std::string line;
    while (std::getline(input, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        auto parts = split(trimmed, '\t');
        ArtefactId art;
        art.canonical_path = std::string(parts[0]);
        for (std::size_t i = 1; i < parts.size(); ++i) {
            std::string alias(parts[i]);
            if (alias.empty() || alias == art.canonical_path) continue;
            if (std::find(art.aliases.begin(), art.aliases.end(), alias) == art.aliases.end()) {
                art.aliases.push_back(std::move(alias));
            }
        }
        if (!art.canonical_path.empty()) out.push_back(std::move(art));
    }
    return out;
}

std::vector<ArtefactId> load_artefact_list_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open artefact list: " + path.string(), 2);
    return load_artefact_list(in);
}

std::string sanitize_artefact_filename(std::string_view canonical_path) {
    std::string stem;
    stem.reserve(canonical_path.size());
    for (char c : canonical_path) {
        if (is_ascii_alnum(c) || c == '.' || c == '-') {
            stem.push_back(ascii_lower(c));
        } else {
            stem.push_back('_');
        }
    }
    // Strip leading separators-turned-underscores so names don't start with '_'.
    std::size_t first = stem.find_first_not_of('_');
    if (first != std::string::npos && first > 0) stem.erase(0, first);
    if (stem.empty()) stem = "artefact";
    if (stem.size() > 120) {
        std::string digest = to_hex(fnv1a64(canonical_path));
        stem = stem.substr(0, 100) + "-" + digest;
    }
    return stem;
}

}  // namespace triage
