#include "triage/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "triage/errors.hpp"
#include "triage/strings.hpp"

namespace triage {

namespace {

std::vector<double> json_doubles(const nlohmann::json& arr) {
    std::vector<double> out;
    for (const auto& v : arr) out.push_back(v.get<double>());
    return out;
}

}  // namespace

PipelineConfig config_from_json(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("config json: ") + e.what(), 2);
    }
    PipelineConfig cfg;
    try {
        if (j.contains("timeline")) cfg.timeline_path = j["timeline"].get<std::string>();
        if (j.contains("catalog")) cfg.catalog_path = j["catalog"].get<std::string>();
        if (j.contains("manifest")) cfg.manifest_path = j["manifest"].get<std::string>();
        if (j.contains("artefact_list") && !j["artefact_list"].is_null()) {
            cfg.artefact_list_path = j["artefact_list"].get<std::string>();
        }
        if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
        if (j.contains("features")) {
            const auto& f = j["features"];
            if (f.contains("keywords")) {
                cfg.features.keywords = f["keywords"].get<std::vector<std::string>>();
            }
            if (f.contains("top_k")) cfg.features.top_k = f["top_k"].get<int>();
            if (f.contains("auto_discover")) {
                cfg.features.auto_discover = f["auto_discover"].get<bool>();
            }
            if (f.contains("auto_keyword_limit")) {
                cfg.features.auto_keyword_limit = f["auto_keyword_limit"].get<int>();
            }
        }
        if (j.contains("model")) {
            const auto& m = j["model"];
            if (m.contains("loss")) cfg.loss = loss_kind_from_name(m["loss"].get<std::string>());
            if (m.contains("learning_rate")) {
                cfg.hyper.learning_rate = m["learning_rate"].get<double>();
            }
            if (m.contains("epochs")) cfg.hyper.epochs = m["epochs"].get<int>();
            if (m.contains("l2_lambda")) cfg.hyper.l2_lambda = m["l2_lambda"].get<double>();
            if (m.contains("positive_class_weight") && !m["positive_class_weight"].is_null()) {
                cfg.hyper.positive_class_weight = m["positive_class_weight"].get<double>();
            }
        }
        if (j.contains("eval_fractions")) cfg.eval_fractions = json_doubles(j["eval_fractions"]);
        if (j.contains("strict")) cfg.strict_parse = j["strict"].get<bool>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("config json: ") + e.what(), 2);
    }
    return cfg;
}

PipelineConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config: " + path.string(), 2);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return config_from_json(text);
}

std::string config_to_json(const PipelineConfig& cfg) {
    nlohmann::ordered_json j;
    j["timeline"] = cfg.timeline_path.string();
    j["catalog"] = cfg.catalog_path.string();
    j["manifest"] = cfg.manifest_path.string();
    if (cfg.artefact_list_path.empty()) {
        j["artefact_list"] = nullptr;
    } else {
        j["artefact_list"] = cfg.artefact_list_path.string();
    }
    j["out_dir"] = cfg.out_dir.string();
    j["features"] = {{"keywords", cfg.features.keywords},
                     {"top_k", cfg.features.top_k},
                     {"auto_discover", cfg.features.auto_discover},
                     {"auto_keyword_limit", cfg.features.auto_keyword_limit}};
    nlohmann::ordered_json model;
    model["loss"] = std::string(loss_kind_name(cfg.loss));
    model["learning_rate"] = cfg.hyper.learning_rate;
    model["epochs"] = cfg.hyper.epochs;
    model["l2_lambda"] = cfg.hyper.l2_lambda;
    if (cfg.hyper.positive_class_weight) {
        model["positive_class_weight"] = *cfg.hyper.positive_class_weight;
    } else {
        model["positive_class_weight"] = nullptr;
    }
    j["model"] = std::move(model);
    j["eval_fractions"] = cfg.eval_fractions;
    j["strict"] = cfg.strict_parse;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

std::string config_digest(const PipelineConfig& config) {
    // The output directory is where results land, not what they are; leaving
    // it out keeps reruns into different directories byte-identical.
    PipelineConfig keyed = config;
    keyed.out_dir.clear();
    return "cfg-" + to_hex(fnv1a64(config_to_json(keyed)));
}

namespace {

void write_text_file(const std::filesystem::path& path, std::string_view text,
                     std::vector<std::filesystem::path>& written) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string(), 2);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error("write failed: " + path.string(), 2);
    written.push_back(path);
}

nlohmann::ordered_json paths_json(const std::vector<ArtefactId>& artefacts) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& a : artefacts) arr.push_back(a.canonical_path);
    return arr;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config_in) {
    PipelineConfig config = config_in;
    if (config.out_dir.empty()) config.out_dir = "out";
    PipelineResult result;
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw Error("cannot create output dir: " + config.out_dir.string(), 2);

    // 1. Parse the super timeline.
    ParseResult parsed = parse_timeline_file(
        config.timeline_path, config.strict_parse ? ParsePolicy::strict : ParsePolicy::lenient);
    result.data_rows = parsed.data_rows;
    result.skipped_rows = parsed.skipped.size();
    const Timeline& timeline = parsed.timeline;

    {
        nlohmann::ordered_json j;
        j["data_rows"] = parsed.data_rows;
        j["parsed"] = parsed.data_rows - parsed.skipped.size();
        auto& arr = j["skipped"] = nlohmann::ordered_json::array();
        for (const auto& s : parsed.skipped) {
            arr.push_back({{"row_id", s.row_id}, {"reason", s.reason}});
        }
        write_text_file(config.out_dir / "skipped_rows.json", j.dump(2) + "\n", result.written);
    }

    // 2. Known-hash partition of the manifest's artefacts.
    HashCatalog catalog = load_catalog_file(config.catalog_path);
    GroundTruthManifest manifest = load_manifest_file(config.manifest_path);

    std::vector<ArtefactId> artefacts;
    std::unordered_map<std::string, std::size_t> by_path;
    for (const auto& e : manifest.entries) {
        if (by_path.emplace(e.artefact.canonical_path, artefacts.size()).second) {
            artefacts.push_back(e.artefact);
        }
    }
    if (!config.artefact_list_path.empty()) {
        for (auto& extra : load_artefact_list_file(config.artefact_list_path)) {
            auto it = by_path.find(extra.canonical_path);
            if (it == by_path.end()) {
                by_path.emplace(extra.canonical_path, artefacts.size());
                artefacts.push_back(std::move(extra));
            } else {
                auto& aliases = artefacts[it->second].aliases;
                for (auto& alias : extra.aliases) {
                    if (std::find(aliases.begin(), aliases.end(), alias) == aliases.end()) {
                        aliases.push_back(std::move(alias));
                    }
                }
            }
        }
    }

    std::vector<ArtefactDigest> digests;
    std::unordered_map<std::string, std::string> digest_by_path;
    for (const auto& e : manifest.entries) {
        digest_by_path.emplace(e.artefact.canonical_path, e.digest);
    }
    for (const auto& a : artefacts) {
        auto it = digest_by_path.find(a.canonical_path);
        // Artefacts without a digest cannot be in the catalog: unknown.
        digests.push_back(ArtefactDigest{a, it == digest_by_path.end() ? "" : it->second});
    }
    LabeledPartition part;
    for (const auto& item : digests) {
        if (item.digest.empty()) {
            part.unknown.push_back(item.artefact);
            continue;
        }
        switch (classify(catalog, item.digest)) {
            case Known::benign: part.known_benign.push_back(item.artefact); break;
            case Known::pertinent: part.known_pertinent.push_back(item.artefact); break;
            case Known::unknown: part.unknown.push_back(item.artefact); break;
        }
    }
    result.known_benign = part.known_benign.size();
    result.known_pertinent = part.known_pertinent.size();
    result.unknown = part.unknown.size();

    {
        nlohmann::ordered_json j;
        j["known_benign"] = paths_json(part.known_benign);
        j["known_pertinent"] = paths_json(part.known_pertinent);
        j["unknown"] = paths_json(part.unknown);
        write_text_file(config.out_dir / "partition.json", j.dump(2) + "\n", result.written);
    }

    if (part.known_benign.empty() || part.known_pertinent.empty()) {
        throw SingleClass("catalog yields " + std::to_string(part.known_benign.size()) +
                          " known-benign and " + std::to_string(part.known_pertinent.size()) +
                          " known-pertinent artefacts; training needs both");
    }

    // 3. Attribute events to artefacts.
    ArtefactIndex index = build_index(timeline, artefacts);
    std::unordered_map<std::string_view, const ArtefactTimeline*> atl_by_path;
    for (const auto& e : index.entries) {
        atl_by_path.emplace(e.artefact.canonical_path, &e);
    }

    // 4. Feature schema, with keyword discovery over the known-pertinent set.
    std::vector<const ArtefactTimeline*> pertinent_atls;
    for (const auto& a : part.known_pertinent) pertinent_atls.push_back(atl_by_path[a.canonical_path]);
    FeatureSchema schema = build_schema(config.features, pertinent_atls, timeline);
    result.schema = schema;
    write_text_file(config.out_dir / "schema.json", schema_to_json(schema), result.written);

    // 5. Extract everything once, then split known / unknown.
    std::vector<FeatureVector> all = extract_all(index, timeline, schema);
    std::unordered_map<std::string_view, const FeatureVector*> fv_by_path;
    for (const auto& fv : all) fv_by_path.emplace(fv.artefact.canonical_path, &fv);

    std::vector<FeatureVector> known;
    std::vector<int> labels;
    for (const auto& a : part.known_benign) {
        known.push_back(*fv_by_path[a.canonical_path]);
        labels.push_back(-1);
    }
    for (const auto& a : part.known_pertinent) {
        known.push_back(*fv_by_path[a.canonical_path]);
        labels.push_back(1);
    }
    std::vector<FeatureVector> unknown;
    for (const auto& a : part.unknown) unknown.push_back(*fv_by_path[a.canonical_path]);

    {
        std::ofstream f(config.out_dir / "features_known.csv", std::ios::binary);
        write_feature_matrix(known, schema, f);
        result.written.push_back(config.out_dir / "features_known.csv");
        std::ofstream g(config.out_dir / "features_unknown.csv", std::ios::binary);
        write_feature_matrix(unknown, schema, g);
        result.written.push_back(config.out_dir / "features_unknown.csv");
    }

    // 6. Train on the knowns (standardized), score the unknowns.
    TrainConfig tc;
    tc.loss = config.loss;
    tc.hyper = config.hyper;
    tc.hyper.seed = splitmix64(config.seed ^ 0x747261696e5f31ULL);  // per-stage fan-out
    ScalingParams params;
    std::vector<FeatureVector> standardized = standardize(known, params);
    tc.scaling = params;
    LinearModel model = train(standardized, labels, schema, tc);
    result.model = model;
    write_text_file(config.out_dir / "model.json", model_to_json(model), result.written);

    std::vector<Score> scores = score_all(model, unknown, schema);
    {
        std::string tsv = "path\tscore\tprobability\n";
        for (std::size_t i = 0; i < unknown.size(); ++i) {
            tsv += unknown[i].artefact.canonical_path;
            tsv += '\t';
            tsv += format_double(scores[i].value);
            tsv += '\t';
            tsv += scores[i].probability ? format_double(*scores[i].probability) : "-";
            tsv += '\n';
        }
        write_text_file(config.out_dir / "scores.tsv", tsv, result.written);
    }

    // 7. Rank and, when the manifest is labeled, evaluate recall.
    std::vector<RankedItem> items;
    items.reserve(unknown.size());
    for (std::size_t i = 0; i < unknown.size(); ++i) {
        items.push_back(RankedItem{unknown[i].artefact, scores[i].value, scores[i].probability});
    }
    RankedReport report = rank(std::move(items));
    report.model_fingerprint = "model-" + to_hex(fnv1a64(model_to_json(model)));
    report.schema_name = schema.fingerprint();
    report.generated_at = config_digest(config);

    std::vector<std::string> truth = unknown_pertinent_paths(manifest, catalog);
    if (!truth.empty()) {
        report.recall = recall_table(report, truth, config.eval_fractions);
        result.recall_evaluated = true;
    }

    write_text_file(config.out_dir / "report.json", report_to_json(report), result.written);
    write_text_file(config.out_dir / "report.txt", report_to_text(report), result.written);
    result.report = std::move(report);
    return result;
}

}  // namespace triage
