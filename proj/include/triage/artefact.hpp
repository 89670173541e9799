#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "triage/timeline.hpp"

namespace triage {

// A file artefact under investigation: a canonical path plus any historical
// or alternate names it was known by.
struct ArtefactId {
    std::string canonical_path;
    std::vector<std::string> aliases;

    bool operator==(const ArtefactId&) const = default;
};

enum class MatchField : int { filename = 0, desc = 1 };

std::string_view match_field_name(MatchField f);

struct MatchedEvent {
    std::uint64_t row_id = 0;
    MatchField field = MatchField::filename;

    bool operator==(const MatchedEvent&) const = default;
};

// All events attributed to one artefact, as references into a parent timeline.
// row_ids are strictly increasing.
struct ArtefactTimeline {
    ArtefactId artefact;
    std::vector<MatchedEvent> events;
};

struct ArtefactIndex {
    std::vector<ArtefactTimeline> entries;  // one per input artefact, input order

    const ArtefactTimeline* find(std::string_view canonical_path) const;
};

// Lowercases ASCII letters and maps backslashes to forward slashes.
std::string normalize_path(std::string_view raw);

// True when `needle` occurs in `haystack` with path-style boundaries on both
// sides: the character before the occurrence is start-of-string, '/', or a
// quote (needles that begin with '/' carry their own left boundary), and the
// character after is end-of-string, '/', a quote, or whitespace. Both inputs
// must already be normalized.
bool boundary_match(std::string_view haystack, std::string_view needle);

// Matches one event field pair against one artefact (all names), filename
// column taking precedence over desc. Inputs normalized.
bool match_artefact(std::string_view norm_filename, std::string_view norm_desc,
                    const std::vector<std::string>& norm_needles, MatchField& field_out);

// Straightforward scan: every artefact against every event. Kept as the
// reference the optimized index is tested against.
ArtefactIndex build_index_reference(const Timeline& timeline,
                                    const std::vector<ArtefactId>& artefacts);

// Candidate-filtered version: events are tokenized once and artefact names are
// looked up by their final path component, so only plausible pairs reach the
// precise matcher. Parallelized over events when OpenMP is enabled; results
// are identical to build_index_reference regardless of thread count.
ArtefactIndex build_index(const Timeline& timeline, const std::vector<ArtefactId>& artefacts);

// Dereferences an artefact's matched rows against the parent timeline.
std::vector<const TimelineEvent*> artefact_timeline_events(const ArtefactIndex& index,
                                                           const ArtefactId& artefact,
                                                           const Timeline& parent);

std::vector<const TimelineEvent*> artefact_timeline_events(const ArtefactTimeline& atl,
                                                           const Timeline& parent);

// Writes per-artefact csv with the reduced column set:
// inode,date,time,MACB,filename,type,source,sourcetype,datetime,desc
void export_artefact_timeline(const std::vector<const TimelineEvent*>& events,
                              std::ostream& output);

inline constexpr std::string_view kArtefactExportHeader =
    "inode,date,time,MACB,filename,type,source,sourcetype,datetime,desc";

// One canonical path per line, optional tab-separated aliases. '#' starts a
// comment line; blank lines are skipped.
std::vector<ArtefactId> load_artefact_list(std::istream& input);
std::vector<ArtefactId> load_artefact_list_file(const std::filesystem::path& path);

// Deterministic filesystem-safe file stem for a canonical path.
std::string sanitize_artefact_filename(std::string_view canonical_path);

}  // namespace triage
