#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "triage/artefact.hpp"
#include "triage/errors.hpp"
#include "triage/features.hpp"
#include "triage/hash_catalog.hpp"
#include "triage/model.hpp"
#include "triage/pipeline.hpp"
#include "triage/ranking.hpp"
#include "triage/scenario.hpp"
#include "triage/strings.hpp"
#include "triage/timeline.hpp"

namespace {

using namespace triage;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    bool strict = false;
    std::string out_dir;
    std::string timeline;
    std::string catalog;
    std::string manifest;
    std::string artefact_list;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "pipeline config JSON");
    cmd->add_option("--seed", opts.seed, "override the top-level seed");
    cmd->add_flag("--strict", opts.strict, "abort on the first malformed timeline row");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--timeline", opts.timeline, "timeline csv path");
    cmd->add_option("--catalog", opts.catalog, "known-hash catalog path");
    cmd->add_option("--manifest", opts.manifest, "artefact manifest path");
    cmd->add_option("--artefact-list", opts.artefact_list, "artefact list path");
}

std::filesystem::path default_out_dir() {
    const char* env = std::getenv("ARTEFACT_TRIAGE_OUT");
    if (env && *env) return env;
    return "out";
}

PipelineConfig resolve_config(const CommonOpts& opts) {
    PipelineConfig cfg;
    if (!opts.config_path.empty()) cfg = load_config_file(opts.config_path);
    if (!opts.timeline.empty()) cfg.timeline_path = opts.timeline;
    if (!opts.catalog.empty()) cfg.catalog_path = opts.catalog;
    if (!opts.manifest.empty()) cfg.manifest_path = opts.manifest;
    if (!opts.artefact_list.empty()) cfg.artefact_list_path = opts.artefact_list;
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.strict) cfg.strict_parse = true;
    if (!opts.out_dir.empty()) {
        cfg.out_dir = opts.out_dir;
    } else if (cfg.out_dir.empty()) {
        cfg.out_dir = default_out_dir();
    }
    return cfg;
}

ParsePolicy policy(const PipelineConfig& cfg) {
    return cfg.strict_parse ? ParsePolicy::strict : ParsePolicy::lenient;
}

nlohmann::ordered_json counts_json(const std::vector<std::pair<std::string, std::uint64_t>>& vc) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [value, count] : vc) arr.push_back({{"value", value}, {"count", count}});
    return arr;
}

int cmd_summarize(const CommonOpts& opts) {
    PipelineConfig cfg = resolve_config(opts);
    if (cfg.timeline_path.empty()) throw Error("summarize needs --timeline or a config", 1);
    ParseResult parsed = parse_timeline_file(cfg.timeline_path, policy(cfg));
    TimelineSummary s = summarize(parsed.timeline);

    nlohmann::ordered_json j;
    j["data_rows"] = parsed.data_rows;
    j["parsed"] = parsed.timeline.size();
    j["skipped"] = parsed.skipped.size();
    j["event_count"] = s.event_count;
    j["distinct_filenames"] = s.distinct_filename_count;
    j["by_type"] = counts_json(value_counts(parsed.timeline, TimelineField::type));
    j["by_source"] = counts_json(value_counts(parsed.timeline, TimelineField::source));
    j["by_sourcetype"] = counts_json(value_counts(parsed.timeline, TimelineField::sourcetype));
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_extract(const CommonOpts& opts) {
    PipelineConfig cfg = resolve_config(opts);
    if (cfg.timeline_path.empty() || cfg.artefact_list_path.empty()) {
        throw Error("extract needs --timeline and --artefact-list (or a config)", 1);
    }
    ParseResult parsed = parse_timeline_file(cfg.timeline_path, policy(cfg));
    auto artefacts = load_artefact_list_file(cfg.artefact_list_path);
    ArtefactIndex index = build_index(parsed.timeline, artefacts);

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw Error("cannot create output dir: " + cfg.out_dir.string(), 2);

    for (const auto& entry : index.entries) {
        auto events = artefact_timeline_events(entry, parsed.timeline);
        std::string name = sanitize_artefact_filename(entry.artefact.canonical_path) + ".csv";
        std::filesystem::path out_path = cfg.out_dir / name;
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw Error("cannot write " + out_path.string(), 2);
        export_artefact_timeline(events, out);
        std::cout << entry.artefact.canonical_path << "\t" << name << "\t" << events.size()
                  << "\n";
    }
    return 0;
}

int cmd_gen(const CommonOpts& opts, const std::string& scenario_name,
            const std::string& spec_path, double benign_fraction, double pertinent_fraction) {
    ScenarioSpec spec;
    if (!spec_path.empty()) {
        spec = load_spec_file(spec_path);
    } else if (!scenario_name.empty()) {
        auto builtin = find_builtin(scenario_name);
        if (!builtin) throw Error("unknown builtin scenario: " + scenario_name, 1);
        spec = *builtin;
    } else {
        throw Error("gen needs --scenario <name> or --spec <file>", 1);
    }
    if (opts.seed) spec.seed = *opts.seed;

    GeneratedScenario gen = generate(spec);
    HashCatalog catalog = derive_catalog(gen.manifest, benign_fraction, pertinent_fraction,
                                         splitmix64(spec.seed ^ 0x636174616c6f67ULL));

    std::filesystem::path out_dir =
        opts.out_dir.empty() ? default_out_dir() : std::filesystem::path(opts.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create output dir: " + out_dir.string(), 2);

    {
        std::ofstream f(out_dir / "timeline.csv", std::ios::binary);
        if (!f) throw Error("cannot write timeline.csv", 2);
        write_timeline(gen.timeline, f);
    }
    {
        std::ofstream f(out_dir / "manifest.tsv", std::ios::binary);
        if (!f) throw Error("cannot write manifest.tsv", 2);
        save_manifest(gen.manifest, f);
    }
    {
        std::ofstream f(out_dir / "catalog.tsv", std::ios::binary);
        if (!f) throw Error("cannot write catalog.tsv", 2);
        save_catalog(catalog, f);
    }
    {
        std::ofstream f(out_dir / "spec.json", std::ios::binary);
        if (!f) throw Error("cannot write spec.json", 2);
        std::string text = spec_to_json(spec);
        f.write(text.data(), static_cast<std::streamsize>(text.size()));
    }

    nlohmann::ordered_json j;
    j["scenario"] = spec.name;
    j["seed"] = spec.seed;
    j["events"] = gen.timeline.size();
    j["artefacts"] = gen.manifest.entries.size();
    j["catalog_benign"] = catalog.count(HashLabel::benign);
    j["catalog_pertinent"] = catalog.count(HashLabel::pertinent);
    j["out_dir"] = out_dir.string();
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_catalog(const CommonOpts& opts, const std::string& digest) {
    PipelineConfig cfg = resolve_config(opts);
    if (cfg.catalog_path.empty()) throw Error("catalog needs --catalog (or a config)", 1);
    HashCatalog catalog = load_catalog_file(cfg.catalog_path);

    nlohmann::ordered_json j;
    j["records"] = catalog.size();
    j["benign"] = catalog.count(HashLabel::benign);
    j["pertinent"] = catalog.count(HashLabel::pertinent);
    if (!digest.empty()) {
        Known k = classify(catalog, digest);
        j["digest"] = normalize_digest(digest);
        j["classification"] = k == Known::benign     ? "benign"
                              : k == Known::pertinent ? "pertinent"
                                                      : "unknown";
    }
    if (!cfg.manifest_path.empty()) {
        GroundTruthManifest manifest = load_manifest_file(cfg.manifest_path);
        std::vector<ArtefactDigest> items;
        for (const auto& e : manifest.entries) {
            items.push_back(ArtefactDigest{e.artefact, e.digest});
        }
        LabeledPartition part = partition(catalog, items);
        j["partition"] = {{"known_benign", part.known_benign.size()},
                          {"known_pertinent", part.known_pertinent.size()},
                          {"unknown", part.unknown.size()}};
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

// Shared front half of train/score: parse, partition, build index + schema.
struct StageContext {
    ParseResult parsed;
    HashCatalog catalog;
    GroundTruthManifest manifest;
    std::vector<ArtefactId> artefacts;
    LabeledPartition part;
    ArtefactIndex index;
};

StageContext stage_front(const PipelineConfig& cfg) {
    if (cfg.timeline_path.empty() || cfg.catalog_path.empty() || cfg.manifest_path.empty()) {
        throw Error("this command needs timeline, catalog, and manifest (config or flags)", 1);
    }
    StageContext ctx;
    ctx.parsed = parse_timeline_file(cfg.timeline_path, policy(cfg));
    ctx.catalog = load_catalog_file(cfg.catalog_path);
    ctx.manifest = load_manifest_file(cfg.manifest_path);
    for (const auto& e : ctx.manifest.entries) ctx.artefacts.push_back(e.artefact);
    std::vector<ArtefactDigest> items;
    for (const auto& e : ctx.manifest.entries) {
        items.push_back(ArtefactDigest{e.artefact, e.digest});
    }
    ctx.part = partition(ctx.catalog, items);
    ctx.index = build_index(ctx.parsed.timeline, ctx.artefacts);
    return ctx;
}

const ArtefactTimeline* find_atl(const ArtefactIndex& index, const std::string& path) {
    const ArtefactTimeline* atl = index.find(path);
    if (!atl) throw UnknownArtefact(path);
    return atl;
}

int cmd_train(const CommonOpts& opts) {
    PipelineConfig cfg = resolve_config(opts);
    StageContext ctx = stage_front(cfg);
    if (ctx.part.known_benign.empty() || ctx.part.known_pertinent.empty()) {
        throw SingleClass("catalog yields " + std::to_string(ctx.part.known_benign.size()) +
                          " known-benign and " + std::to_string(ctx.part.known_pertinent.size()) +
                          " known-pertinent artefacts");
    }

    std::vector<const ArtefactTimeline*> pertinent_atls;
    for (const auto& a : ctx.part.known_pertinent) {
        pertinent_atls.push_back(find_atl(ctx.index, a.canonical_path));
    }
    FeatureSchema schema = build_schema(cfg.features, pertinent_atls, ctx.parsed.timeline);

    std::vector<FeatureVector> known;
    std::vector<int> labels;
    for (const auto& a : ctx.part.known_benign) {
        auto events = artefact_timeline_events(*find_atl(ctx.index, a.canonical_path),
                                               ctx.parsed.timeline);
        known.push_back(extract(a, events, schema));
        labels.push_back(-1);
    }
    for (const auto& a : ctx.part.known_pertinent) {
        auto events = artefact_timeline_events(*find_atl(ctx.index, a.canonical_path),
                                               ctx.parsed.timeline);
        known.push_back(extract(a, events, schema));
        labels.push_back(1);
    }

    TrainConfig tc;
    tc.loss = cfg.loss;
    tc.hyper = cfg.hyper;
    tc.hyper.seed = splitmix64(cfg.seed ^ 0x747261696e5f31ULL);
    ScalingParams params;
    auto standardized = standardize(known, params);
    tc.scaling = params;
    LinearModel model = train(standardized, labels, schema, tc);

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw Error("cannot create output dir: " + cfg.out_dir.string(), 2);
    {
        std::ofstream f(cfg.out_dir / "schema.json", std::ios::binary);
        if (!f) throw Error("cannot write schema.json", 2);
        std::string text = schema_to_json(schema);
        f.write(text.data(), static_cast<std::streamsize>(text.size()));
    }
    {
        std::ofstream f(cfg.out_dir / "model.json", std::ios::binary);
        if (!f) throw Error("cannot write model.json", 2);
        save_model(model, f);
    }

    nlohmann::ordered_json j;
    j["trained_on"] = known.size();
    j["features"] = schema.size();
    j["loss"] = std::string(loss_kind_name(model.loss_kind));
    j["bias"] = model.bias;
    j["model"] = (cfg.out_dir / "model.json").string();
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_score(const CommonOpts& opts, const std::string& model_path) {
    PipelineConfig cfg = resolve_config(opts);
    StageContext ctx = stage_front(cfg);

    std::filesystem::path mp =
        model_path.empty() ? cfg.out_dir / "model.json" : std::filesystem::path(model_path);
    std::ifstream mf(mp, std::ios::binary);
    if (!mf) throw Error("cannot open model: " + mp.string(), 2);
    LinearModel model = load_model(mf);

    std::filesystem::path sp = cfg.out_dir / "schema.json";
    std::ifstream sf(sp, std::ios::binary);
    if (!sf) throw Error("cannot open schema: " + sp.string(), 2);
    std::string schema_text((std::istreambuf_iterator<char>(sf)),
                            std::istreambuf_iterator<char>());
    FeatureSchema schema = schema_from_json(schema_text);

    std::vector<FeatureVector> unknown;
    for (const auto& a : ctx.part.unknown) {
        auto events = artefact_timeline_events(*find_atl(ctx.index, a.canonical_path),
                                               ctx.parsed.timeline);
        unknown.push_back(extract(a, events, schema));
    }
    std::vector<Score> scores = score_all(model, unknown, schema);

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    std::string tsv = "path\tscore\tprobability\n";
    for (std::size_t i = 0; i < unknown.size(); ++i) {
        tsv += unknown[i].artefact.canonical_path;
        tsv += '\t';
        tsv += format_double(scores[i].value);
        tsv += '\t';
        tsv += scores[i].probability ? format_double(*scores[i].probability) : "-";
        tsv += '\n';
    }
    std::ofstream out(cfg.out_dir / "scores.tsv", std::ios::binary);
    if (!out) throw Error("cannot write scores.tsv", 2);
    out << tsv;
    std::cout << "{\"scored\": " << unknown.size() << ", \"scores\": \""
              << (cfg.out_dir / "scores.tsv").string() << "\"}\n";
    return 0;
}

std::vector<RankedItem> read_scores_tsv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open scores: " + path.string(), 2);
    std::vector<RankedItem> items;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line_no == 1) continue;  // header
        auto parts = split(line, '\t');
        if (parts.size() != 3) throw MalformedLine(line_no, "expected path<TAB>score<TAB>probability");
        RankedItem item;
        item.artefact.canonical_path = parts[0];
        try {
            item.score = std::stod(parts[1]);
            if (parts[2] != "-") item.probability = std::stod(parts[2]);
        } catch (const std::exception&) {
            throw MalformedLine(line_no, "unparseable number");
        }
        items.push_back(std::move(item));
    }
    return items;
}

int cmd_rank(const CommonOpts& opts, const std::string& scores_path) {
    std::filesystem::path out_dir =
        opts.out_dir.empty() ? default_out_dir() : std::filesystem::path(opts.out_dir);
    std::filesystem::path sp =
        scores_path.empty() ? out_dir / "scores.tsv" : std::filesystem::path(scores_path);
    RankedReport report = rank(read_scores_tsv(sp));
    report.generated_at = "scores-" + to_hex(fnv1a64(sp.string()));

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream jf(out_dir / "report.json", std::ios::binary);
    std::ofstream tf(out_dir / "report.txt", std::ios::binary);
    if (!jf || !tf) throw Error("cannot write report files", 2);
    emit_report(report, jf, tf);
    std::cout << "{\"ranked\": " << report.items.size() << "}\n";
    return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& report_path) {
    PipelineConfig cfg = resolve_config(opts);
    if (cfg.catalog_path.empty() || cfg.manifest_path.empty()) {
        throw Error("eval needs catalog and manifest (config or flags)", 1);
    }
    std::filesystem::path rp =
        report_path.empty() ? cfg.out_dir / "report.json" : std::filesystem::path(report_path);
    std::ifstream rf(rp, std::ios::binary);
    if (!rf) throw Error("cannot open report: " + rp.string(), 2);
    std::string text((std::istreambuf_iterator<char>(rf)), std::istreambuf_iterator<char>());
    RankedReport report = report_from_json(text);

    HashCatalog catalog = load_catalog_file(cfg.catalog_path);
    GroundTruthManifest manifest = load_manifest_file(cfg.manifest_path);
    std::vector<std::string> truth = unknown_pertinent_paths(manifest, catalog);
    report.recall = recall_table(report, truth, cfg.eval_fractions);

    std::ofstream jf(rp, std::ios::binary);
    if (!jf) throw Error("cannot rewrite report: " + rp.string(), 2);
    std::string out = report_to_json(report);
    jf.write(out.data(), static_cast<std::streamsize>(out.size()));

    nlohmann::ordered_json j;
    for (const auto& [f, r] : report.recall) j[format_fraction(f)] = r;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_pipeline(const CommonOpts& opts) {
    PipelineConfig cfg = resolve_config(opts);
    if (cfg.timeline_path.empty() || cfg.catalog_path.empty() || cfg.manifest_path.empty()) {
        throw Error("pipeline needs timeline, catalog, and manifest (config or flags)", 1);
    }
    PipelineResult result = run_pipeline(cfg);

    nlohmann::ordered_json j;
    j["data_rows"] = result.data_rows;
    j["skipped_rows"] = result.skipped_rows;
    j["known_benign"] = result.known_benign;
    j["known_pertinent"] = result.known_pertinent;
    j["unknown"] = result.unknown;
    j["features"] = result.schema.size();
    j["ranked"] = result.report.items.size();
    if (result.recall_evaluated) {
        auto& recall = j["recall"] = nlohmann::ordered_json::object();
        for (const auto& [f, r] : result.report.recall) recall[format_fraction(f)] = r;
    }
    auto& files = j["written"] = nlohmann::ordered_json::array();
    for (const auto& p : result.written) files.push_back(p.string());
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"artefact-triage: rank file artefacts in a forensic super timeline"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string gen_scenario, gen_spec, digest, model_path, scores_path, report_path;
    double benign_fraction = 0.5, pertinent_fraction = 0.5;

    auto* summarize_cmd = app.add_subcommand("summarize", "parse a timeline and report counts");
    add_common(summarize_cmd, opts);
    auto* extract_cmd = app.add_subcommand("extract", "write one csv per artefact");
    add_common(extract_cmd, opts);
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic scenario corpus");
    add_common(gen_cmd, opts);
    gen_cmd->add_option("--scenario", gen_scenario,
                        "builtin name: scenario-a|scenario-b|scenario-c|paper-baseline");
    gen_cmd->add_option("--spec", gen_spec, "scenario spec JSON file");
    gen_cmd->add_option("--benign-fraction", benign_fraction,
                        "fraction of benign artefacts placed in the catalog");
    gen_cmd->add_option("--pertinent-fraction", pertinent_fraction,
                        "fraction of pertinent artefacts placed in the catalog");
    auto* catalog_cmd = app.add_subcommand("catalog", "validate a catalog / classify digests");
    add_common(catalog_cmd, opts);
    catalog_cmd->add_option("--digest", digest, "digest to classify");
    auto* train_cmd = app.add_subcommand("train", "train a model on catalog-known artefacts");
    add_common(train_cmd, opts);
    auto* score_cmd = app.add_subcommand("score", "score unknown artefacts with a saved model");
    add_common(score_cmd, opts);
    score_cmd->add_option("--model", model_path, "model JSON (default <out>/model.json)");
    auto* rank_cmd = app.add_subcommand("rank", "rank a scores table into a report");
    add_common(rank_cmd, opts);
    rank_cmd->add_option("--scores", scores_path, "scores tsv (default <out>/scores.tsv)");
    auto* eval_cmd = app.add_subcommand("eval", "recall@fraction against ground truth");
    add_common(eval_cmd, opts);
    eval_cmd->add_option("--report", report_path, "report JSON (default <out>/report.json)");
    auto* pipeline_cmd = app.add_subcommand("pipeline", "run the full chain end to end");
    add_common(pipeline_cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (summarize_cmd->parsed()) return cmd_summarize(opts);
        if (extract_cmd->parsed()) return cmd_extract(opts);
        if (gen_cmd->parsed()) {
            return cmd_gen(opts, gen_scenario, gen_spec, benign_fraction, pertinent_fraction);
        }
        if (catalog_cmd->parsed()) return cmd_catalog(opts, digest);
        if (train_cmd->parsed()) return cmd_train(opts);
        if (score_cmd->parsed()) return cmd_score(opts, model_path);
        if (rank_cmd->parsed()) return cmd_rank(opts, scores_path);
        if (eval_cmd->parsed()) return cmd_eval(opts, report_path);
        if (pipeline_cmd->parsed()) return cmd_pipeline(opts);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
