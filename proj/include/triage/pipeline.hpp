#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "triage/features.hpp"
#include "triage/hash_catalog.hpp"
#include "triage/model.hpp"
#include "triage/ranking.hpp"
#include "triage/scenario.hpp"
#include "triage/timeline.hpp"

namespace triage {

struct PipelineConfig {
    std::filesystem::path timeline_path;
    std::filesystem::path catalog_path;
    std::filesystem::path manifest_path;
    // Optional; without it the artefact universe is the manifest's paths.
    std::filesystem::path artefact_list_path;
    // Empty means "out"; the CLI also consults ARTEFACT_TRIAGE_OUT.
    std::filesystem::path out_dir;

    FeatureConfig features{{}, 5, true, 10};
    LossKind loss = LossKind::logistic;
    Hyperparams hyper;
    std::vector<double> eval_fractions{kDefaultReviewFractions.begin(),
                                       kDefaultReviewFractions.end()};
    bool strict_parse = false;
    std::uint64_t seed = 0;
};

PipelineConfig config_from_json(std::string_view json_text);
PipelineConfig load_config_file(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& config);

// Deterministic run token: digest of the serialized config (which includes
// the seed). Wall-clock time never enters any output file.
std::string config_digest(const PipelineConfig& config);

struct PipelineResult {
    std::uint64_t data_rows = 0;
    std::uint64_t skipped_rows = 0;
    std::size_t known_benign = 0;
    std::size_t known_pertinent = 0;
    std::size_t unknown = 0;
    FeatureSchema schema;
    LinearModel model;
    RankedReport report;
    bool recall_evaluated = false;
    std::vector<std::filesystem::path> written;
};

// The whole chain: parse, partition by catalog, build the per-artefact index,
// build the feature schema (auto-discovering keywords from known-pertinent
// timelines), extract, train on the knowns, score and rank the unknowns, and
// evaluate recall when the manifest carries ground-truth labels. Intermediates
// land in config.out_dir.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace triage
