#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "atsearch/bench.hpp"
#include "atsearch/engine.hpp"
#include "atsearch/errors.hpp"
#include "atsearch/models.hpp"
#include "atsearch/scene.hpp"
#include "atsearch/version.hpp"

namespace fs = std::filesystem;
using namespace atsearch;

namespace {

std::string join_args(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        out += argv[i];
    }
    return out;
}

nlohmann::json pose_json(const Pose& pose) {
    return {{"x", pose.x}, {"y", pose.y}, {"s", pose.s}};
}

nlohmann::json box_json(const Rect& box) {
    return {{"x", box.x}, {"y", box.y}, {"w", box.w}, {"h", box.h}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write " + path.string());
    out << text;
}

void write_manifest(const fs::path& path, const std::string& command,
                    const SearchConfig* config, const std::string& model_hash,
                    std::uint64_t seed, std::vector<std::string> inputs,
                    std::vector<std::string> outputs) {
    nlohmann::json j;
    j["tool"] = "atsearch";
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = seed;
    j["config"] = config ? nlohmann::json::parse(config_to_json(*config)) : nlohmann::json();
    j["model_hash"] = model_hash.empty() ? nlohmann::json() : nlohmann::json(model_hash);
    std::sort(inputs.begin(), inputs.end());
    std::sort(outputs.begin(), outputs.end());
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    write_text(path, j.dump(2) + "\n");
}

struct LoadedScene {
    std::string id;
    SceneSpec spec;
    GrayImage image;
};

std::vector<LoadedScene> load_scene_dir(const fs::path& dir, const fs::path& truth_path) {
    const auto entries = load_scene_set(truth_path);
    std::vector<LoadedScene> out;
    out.reserve(entries.size());
    for (const auto& entry : entries) {
        const fs::path pgm = dir / (entry.id + ".pgm");
        if (!fs::exists(pgm))
            throw std::invalid_argument("scene image missing: " + pgm.string());
        LoadedScene scene{entry.id, entry.spec, load_pgm(pgm)};
        if (scene.image.width != entry.spec.width || scene.image.height != entry.spec.height)
            throw std::invalid_argument("scene dims disagree with truth for " + entry.id);
        out.push_back(std::move(scene));
    }
    return out;
}

SearchConfig config_or_default(const std::string& config_path, int width, int height) {
    if (!config_path.empty()) return load_config(config_path);
    return SearchConfig::defaults_for(width, height);
}

fs::path truth_or_default(const std::string& truth_path, const fs::path& scenes_dir) {
    return truth_path.empty() ? scenes_dir / "truth.json" : fs::path(truth_path);
}

int cmd_synth(const std::string& command, const std::string& out_dir,
              const std::string& spec_file, int count, int width, int height, int targets,
              int blank_every, int clutter, const std::string& config_path, std::uint64_t seed) {
    fs::create_directories(out_dir);
    std::vector<std::string> inputs;
    std::vector<SceneSetEntry> scenes;

    if (!spec_file.empty()) {
        scenes = load_scene_set(spec_file);
        inputs.push_back(spec_file);
    } else {
        const SearchConfig cfg = config_or_default(config_path, width, height);
        if (!config_path.empty()) inputs.push_back(config_path);
        for (int n = 0; n < count; ++n) {
            Rng rng(derive_seed(seed, std::uint64_t(n)));
            const bool blank = blank_every > 0 && n % blank_every == blank_every - 1;
            SceneSpec spec = random_scene_spec(rng, width, height, blank ? 0 : targets, cfg);
            spec.clutter_blobs = clutter;
            char name[32];
            std::snprintf(name, sizeof name, "scene_%03d", n);
            scenes.push_back({name, spec});
        }
    }

    std::vector<std::string> outputs;
    for (const auto& entry : scenes) {
        const fs::path pgm = fs::path(out_dir) / (entry.id + ".pgm");
        save_pgm(synth_scene(entry.spec), pgm);
        outputs.push_back(pgm.string());
    }
    const fs::path truth = fs::path(out_dir) / "truth.json";
    save_scene_set(scenes, truth);
    outputs.push_back(truth.string());
    write_manifest(fs::path(out_dir) / "manifest.json", command, nullptr, "", seed, inputs,
                   outputs);
    std::cout << "wrote " << scenes.size() << " scenes to " << out_dir << "\n";
    return 0;
}

int cmd_train(const std::string& command, const std::string& scenes_dir,
              const std::string& truth_path, const std::string& out_path,
              const std::string& config_path, std::int64_t samples, std::uint64_t seed) {
    const fs::path truth = truth_or_default(truth_path, scenes_dir);
    const auto loaded = load_scene_dir(scenes_dir, truth);
    if (loaded.empty()) throw std::invalid_argument("train: truth file lists no scenes");
    const SearchConfig cfg =
        config_or_default(config_path, loaded[0].image.width, loaded[0].image.height);

    std::vector<TrainScene> scenes;
    scenes.reserve(loaded.size());
    for (const auto& p : loaded) scenes.push_back({p.image, p.spec.targets});

    ModelBundle bundle;
    bundle.seed = seed;
    bundle.models = train_models(scenes, cfg, samples, seed);
    bundle.table = build_distance_table(bundle.models, cfg.mc_samples, cfg.mc_seed);
    save_models(bundle, out_path);

    const fs::path out(out_path);
    const fs::path manifest = out.parent_path() / (out.stem().string() + ".manifest.json");
    std::vector<std::string> inputs{scenes_dir, truth.string()};
    if (!config_path.empty()) inputs.push_back(config_path);
    write_manifest(manifest, command, &cfg, file_hash_hex(out), seed, inputs, {out_path});
    std::cout << "trained " << bundle.models.soft_families() << " families x "
              << bundle.models.levels() << " levels x " << bundle.models.scales() + 1
              << " scales -> " << out_path << "\n";
    return 0;
}

SceneSpec truth_for_image(const fs::path& truth_path, const fs::path& image_path) {
    const auto entries = load_scene_set(truth_path);
    if (entries.empty()) throw std::invalid_argument("truth file lists no scenes");
    if (entries.size() == 1) return entries[0].spec;
    const std::string stem = image_path.stem().string();
    for (const auto& entry : entries)
        if (entry.id == stem) return entry.spec;
    throw std::invalid_argument("no truth entry for scene '" + stem + "' in " +
                                truth_path.string());
}

int cmd_search(const std::string& command, const std::string& image_path,
               const std::string& models_path, const std::string& truth_path,
               const std::string& config_path, bool multi, const std::string& trace_path,
               const std::string& out_path) {
    const GrayImage image = load_pgm(image_path);
    const SearchConfig cfg = config_or_default(config_path, image.width, image.height);
    const ModelBundle bundle = load_models(models_path);
    const SceneSpec truth = truth_for_image(truth_path, image_path);
    GroundTruthOracle oracle(oracle_targets(truth), cfg);

    nlohmann::json j;
    const bool tracing = !trace_path.empty();
    if (!multi) {
        const SearchResult res =
            run_single(image, cfg, bundle.models, bundle.table, oracle, tracing);
        j["outcome"] = outcome_name(res.outcome);
        j["pose"] = res.detection ? pose_json(res.detection->pose) : nlohmann::json();
        j["box"] = res.detection ? box_json(res.detection->box) : nlohmann::json();
        j["confidence"] = res.detection ? res.detection->confidence : 0.0;
        j["oracle_evals"] = res.oracle_evals;
        j["soft_evals"] = res.soft_evals;
        j["steps"] = res.steps;
        if (tracing) write_trace(res.trace, trace_path);
    } else {
        const MultiResult res = run_multi(image, cfg, bundle.models, bundle.table, oracle, tracing);
        j["outcome"] = res.budget_exhausted ? "budget_exhausted"
                       : res.detections.empty() ? "no_target"
                                                : "detected";
        auto& ds = j["detections"] = nlohmann::json::array();
        for (const auto& det : res.detections)
            ds.push_back({{"pose", pose_json(det.pose)},
                          {"box", box_json(det.box)},
                          {"confidence", det.confidence},
                          {"oracle_evals", det.oracle_evals},
                          {"soft_evals", det.soft_evals}});
        j["oracle_evals"] = res.oracle_evals;
        j["soft_evals"] = res.soft_evals;
        j["steps"] = res.steps;
        if (tracing) write_trace(res.trace, trace_path);
    }

    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    if (!out_path.empty()) {
        write_text(out_path, text);
        const fs::path out(out_path);
        const fs::path manifest = out.parent_path() / (out.stem().string() + ".manifest.json");
        std::vector<std::string> inputs{image_path, models_path, truth_path};
        if (!config_path.empty()) inputs.push_back(config_path);
        std::vector<std::string> outputs{out_path};
        if (tracing) outputs.push_back(trace_path);
        write_manifest(manifest, command, &cfg, file_hash_hex(models_path), 0, inputs, outputs);
    }
    return 0;
}

int cmd_bench(const std::string& command, const std::string& scenes_dir,
              const std::string& truth_path, const std::string& models_path,
              const std::string& out_dir, const std::string& config_path, std::uint64_t seed) {
    const fs::path truth = truth_or_default(truth_path, scenes_dir);
    const auto loaded = load_scene_dir(scenes_dir, truth);
    if (loaded.empty()) throw std::invalid_argument("bench: truth file lists no scenes");
    for (const auto& p : loaded)
        if (p.image.width != loaded[0].image.width || p.image.height != loaded[0].image.height)
            throw std::invalid_argument("bench: scenes must share image dimensions");
    const SearchConfig cfg =
        config_or_default(config_path, loaded[0].image.width, loaded[0].image.height);
    const ModelBundle bundle = load_models(models_path);

    std::vector<BenchScene> scenes;
    scenes.reserve(loaded.size());
    for (const auto& p : loaded) scenes.push_back({p.id, p.spec, p.image});

    const BenchReport report = bench_compare(scenes, cfg, bundle.models, bundle.table, seed);
    fs::create_directories(out_dir);
    const fs::path report_csv = fs::path(out_dir) / "report.csv";
    const fs::path timing_csv = fs::path(out_dir) / "timing.csv";
    const fs::path summary = fs::path(out_dir) / "summary.json";
    write_report_csv(report, report_csv);
    write_timing_csv(report, timing_csv);
    write_text(summary, summary_json(report) + "\n");

    std::vector<std::string> inputs{scenes_dir, truth.string(), models_path};
    if (!config_path.empty()) inputs.push_back(config_path);
    write_manifest(fs::path(out_dir) / "manifest.json", command, &cfg,
                   file_hash_hex(models_path), seed, inputs,
                   {report_csv.string(), timing_csv.string(), summary.string()});
    std::cout << summary_json(report) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential pose search with a sparse oracle budget"};
    app.require_subcommand(1);
    const std::string command = join_args(argc, argv);

    auto* synth = app.add_subcommand("synth", "Render synthetic scenes with ground truth");
    std::string sy_out_dir, sy_spec, sy_config;
    int sy_count = 10, sy_width = 256, sy_height = 256, sy_targets = 1, sy_blank_every = 5,
        sy_clutter = 2;
    std::uint64_t sy_seed = 1;
    synth->add_option("--out-dir", sy_out_dir, "Output directory")->required();
    synth->add_option("--spec", sy_spec, "Scene-set JSON (overrides generation flags)");
    synth->add_option("--count", sy_count, "Number of generated scenes");
    synth->add_option("--width", sy_width, "Scene width");
    synth->add_option("--height", sy_height, "Scene height");
    synth->add_option("--targets", sy_targets, "Targets per generated scene");
    synth->add_option("--blank-every", sy_blank_every,
                      "Every n-th generated scene is blank (0 disables)");
    synth->add_option("--clutter", sy_clutter, "Clutter blobs per scene");
    synth->add_option("--config", sy_config, "Search config JSON (for size ranges)");
    synth->add_option("--seed", sy_seed, "Generation seed");

    auto* train = app.add_subcommand("train", "Fit response models from a scene directory");
    std::string tr_scenes, tr_truth, tr_out, tr_config;
    std::int64_t tr_samples = kDefaultTrainingSamples;
    std::uint64_t tr_seed = 1;
    train->add_option("--scenes", tr_scenes, "Scene directory (PGM files)")->required();
    train->add_option("--truth", tr_truth, "Truth JSON (default: <scenes>/truth.json)");
    train->add_option("--out", tr_out, "Output model JSON")->required();
    train->add_option("--config", tr_config, "Search config JSON");
    train->add_option("--samples", tr_samples, "Samples per (family, level, scale)");
    train->add_option("--seed", tr_seed, "Training sample seed");

    auto* search = app.add_subcommand("search", "Search one image for targets");
    std::string se_image, se_models, se_truth, se_config, se_trace, se_out;
    bool se_multi = false;
    search->add_option("--image", se_image, "Input PGM image")->required();
    search->add_option("--models", se_models, "Model JSON from train")->required();
    search->add_option("--truth", se_truth, "Truth JSON backing the oracle")->required();
    search->add_option("--config", se_config, "Search config JSON");
    search->add_flag("--multi", se_multi, "Sweep for every target instead of the first");
    search->add_option("--trace", se_trace, "Write per-step trace to this file");
    search->add_option("--out", se_out, "Also write the result JSON here");

    auto* bench = app.add_subcommand("bench", "Compare search against the sliding-window baseline");
    std::string be_scenes, be_truth, be_models, be_out_dir, be_config;
    std::uint64_t be_seed = 1;
    bench->add_option("--scenes", be_scenes, "Scene directory")->required();
    bench->add_option("--truth", be_truth, "Truth JSON (default: <scenes>/truth.json)");
    bench->add_option("--models", be_models, "Model JSON from train")->required();
    bench->add_option("--out-dir", be_out_dir, "Report directory")->required();
    bench->add_option("--config", be_config, "Search config JSON");
    bench->add_option("--seed", be_seed, "Baseline scan-offset seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed())
            return cmd_synth(command, sy_out_dir, sy_spec, sy_count, sy_width, sy_height,
                             sy_targets, sy_blank_every, sy_clutter, sy_config, sy_seed);
        if (train->parsed())
            return cmd_train(command, tr_scenes, tr_truth, tr_out, tr_config, tr_samples,
                             tr_seed);
        if (search->parsed())
            return cmd_search(command, se_image, se_models, se_truth, se_config, se_multi,
                              se_trace, se_out);
        if (bench->parsed())
            return cmd_bench(command, be_scenes, be_truth, be_models, be_out_dir, be_config,
                             be_seed);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const TrainingCoverageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ModelCoverageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
