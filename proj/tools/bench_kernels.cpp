// Benchmarks the candidate-filtered artefact index against the straightforward
// reference scan, and the parallel extract/score kernels at 1 vs N threads.
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"

#include "triage/artefact.hpp"
#include "triage/features.hpp"
#include "triage/model.hpp"
#include "triage/scenario.hpp"

using namespace triage;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename F>
double timed(const char* label, F&& fn) {
    auto start = std::chrono::steady_clock::now();
    fn();
    double s = seconds_since(start);
    std::printf("%-28s %8.3f s\n", label, s);
    return s;
}

void set_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n);
#else
    (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bench_kernels: parallel kernels vs their serial references"};
    std::uint64_t noise = 200000;
    std::uint64_t seed = 42;
    int repeat = 1;
    app.add_option("--noise", noise, "background event count for the synthetic corpus");
    app.add_option("--seed", seed, "scenario seed");
    app.add_option("--repeat", repeat, "repetitions per measurement");
    CLI11_PARSE(app, argc, argv);

    ScenarioSpec spec = *find_builtin("scenario-a");
    spec.seed = seed;
    spec.noise_count_override = noise;

    GeneratedScenario gen;
    timed("generate corpus", [&] { gen = generate(spec); });
    std::vector<ArtefactId> artefacts;
    for (const auto& e : gen.manifest.entries) artefacts.push_back(e.artefact);
    std::printf("  events=%zu artefacts=%zu threads=%d\n", gen.timeline.size(), artefacts.size(),
                max_threads());

    ArtefactIndex ref, fast;
    double t_ref = 0.0, t_fast = 0.0;
    for (int r = 0; r < repeat; ++r) {
        t_ref += timed("index: reference scan", [&] {
            ref = build_index_reference(gen.timeline, artefacts);
        });
        set_threads(1);
        timed("index: candidate (1 thread)", [&] { fast = build_index(gen.timeline, artefacts); });
        set_threads(max_threads());
        t_fast += timed("index: candidate (par)", [&] {
            fast = build_index(gen.timeline, artefacts);
        });
    }
    bool same = ref.entries.size() == fast.entries.size();
    for (std::size_t i = 0; same && i < ref.entries.size(); ++i) {
        same = ref.entries[i].events == fast.entries[i].events;
    }
    std::printf("  results identical: %s   speedup vs reference: %.1fx\n", same ? "yes" : "NO",
                t_fast > 0 ? t_ref / t_fast : 0.0);
    if (!same) return 1;

    std::vector<const ArtefactTimeline*> pertinent;
    for (std::size_t i = 0; i < gen.manifest.entries.size(); ++i) {
        if (gen.manifest.entries[i].label == HashLabel::pertinent) {
            pertinent.push_back(&fast.entries[i]);
        }
    }
    FeatureSchema schema = build_schema(FeatureConfig{{}, 5, true, 10}, pertinent, gen.timeline);

    std::vector<FeatureVector> serial_m, par_m;
    set_threads(1);
    timed("extract (1 thread)", [&] { serial_m = extract_all(fast, gen.timeline, schema); });
    set_threads(max_threads());
    timed("extract (par)", [&] { par_m = extract_all(fast, gen.timeline, schema); });
    bool ext_same = serial_m.size() == par_m.size();
    for (std::size_t i = 0; ext_same && i < serial_m.size(); ++i) {
        ext_same = serial_m[i].values == par_m[i].values;
    }
    std::printf("  extract identical: %s\n", ext_same ? "yes" : "NO");
    if (!ext_same) return 1;

    ScalingParams params;
    auto standardized = standardize(serial_m, params);
    std::vector<int> labels(standardized.size(), -1);
    for (std::size_t i = 0; i < gen.manifest.entries.size(); ++i) {
        if (gen.manifest.entries[i].label == HashLabel::pertinent) labels[i] = 1;
    }
    TrainConfig tc;
    tc.hyper.epochs = 50;
    tc.scaling = params;
    LinearModel model = train(standardized, labels, schema, tc);

    std::vector<Score> s1, sn;
    set_threads(1);
    timed("score (1 thread)", [&] { s1 = score_all(model, serial_m, schema); });
    set_threads(max_threads());
    timed("score (par)", [&] { sn = score_all(model, serial_m, schema); });
    bool score_same = s1.size() == sn.size();
    for (std::size_t i = 0; score_same && i < s1.size(); ++i) {
        score_same = s1[i].value == sn[i].value;
    }
    std::printf("  score identical: %s\n", score_same ? "yes" : "NO");
    return score_same ? 0 : 1;
}
