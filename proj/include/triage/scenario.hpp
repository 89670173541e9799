#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "triage/artefact.hpp"
#include "triage/hash_catalog.hpp"
#include "triage/timeline.hpp"

namespace triage {

enum class FileAction : int {
    create = 0,
    download,     // implies on-disk creation plus browser-history events
    edit,
    execute,
    unzip,
    copy,
    move,
    access,
    late_access,  // access pinned to the final 10% of the date range
};

std::string_view file_action_name(FileAction a);
std::optional<FileAction> file_action_from_name(std::string_view name);

struct PopulationGroup {
    std::string file_type;  // extension without the dot
    std::vector<FileAction> actions;
    std::uint64_t count = 0;
};

struct DateRange {
    Date start;
    Date end;  // inclusive
};

struct ScenarioSpec {
    std::string name;
    std::vector<PopulationGroup> benign_population;
    std::vector<PopulationGroup> pertinent_population;
    std::vector<std::string> benign_keyword_pool;
    std::vector<std::string> pertinent_keyword_pool;
    DateRange range{Date{2020, 1, 1}, Date{2020, 6, 30}};
    std::uint64_t seed = 42;
    // Rescales the benign counts so pertinent/(total) hits this value.
    std::optional<double> pertinent_fraction_override;
    double noise_factor = 10.0;  // background events per artefact event
    std::optional<std::uint64_t> noise_count_override;
    double keyword_prob_pertinent = 0.9;  // per-event chance of keyword injection
    double keyword_prob_benign = 0.02;
};

struct ManifestEntry {
    ArtefactId artefact;
    std::string digest;
    std::optional<HashLabel> label;
    std::vector<std::string> tags;  // action names realized for this artefact
};

struct GroundTruthManifest {
    std::vector<ManifestEntry> entries;
};

struct GeneratedScenario {
    Timeline timeline;
    GroundTruthManifest manifest;
};

// Throws InvalidSpec.
void validate_spec(const ScenarioSpec& spec);

// Deterministic: (spec, seed) fully determine the output bytes. Every
// generated artefact path occurs with clean boundaries in its own events and
// in no other artefact's events.
GeneratedScenario generate(const ScenarioSpec& spec);

// The populations of the emulated study data, no keyword injection.
ScenarioSpec paper_baseline();

// Three themed scenarios over the same populations:
//   scenario-a  browser-download media case; every pertinent file downloaded
//   scenario-b  script/hacking case; pertinent scripts executed
//   scenario-c  document-fraud case; pertinent documents accessed late
std::vector<ScenarioSpec> builtin_scenarios();

// Accepts the builtin scenario names plus "paper-baseline"; null if unknown.
std::optional<ScenarioSpec> find_builtin(std::string_view name);

// Stable synthetic content digest (64 hex chars) for a manifest path.
std::string synth_digest(std::string_view path, std::uint64_t seed);

// Samples a known-hash catalog from the manifest: round(fraction * n) of each
// label (at least one when the label is populated and its fraction > 0).
HashCatalog derive_catalog(const GroundTruthManifest& manifest, double benign_fraction,
                           double pertinent_fraction, std::uint64_t seed);

// Canonical paths of pertinent manifest entries the catalog does not know —
// the ground truth a ranking of unknowns is scored against.
std::vector<std::string> unknown_pertinent_paths(const GroundTruthManifest& manifest,
                                                 const HashCatalog& catalog);

// <path>\t<digest>[\t<label>[\t<comma,separated,tags>]] per line, '#' comments.
void save_manifest(const GroundTruthManifest& manifest, std::ostream& output);
GroundTruthManifest load_manifest(std::istream& input);
GroundTruthManifest load_manifest_file(const std::filesystem::path& path);

std::string spec_to_json(const ScenarioSpec& spec);
ScenarioSpec spec_from_json(std::string_view json_text);
ScenarioSpec load_spec_file(const std::filesystem::path& path);

}  // namespace triage
