#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "atsearch/config.hpp"
#include "atsearch/geometry.hpp"
#include "atsearch/image.hpp"
#include "atsearch/oracle.hpp"
#include "atsearch/rng.hpp"

namespace atsearch {

/// One planted target: a size x size textured square centered at (x, y).
struct TargetSpec {
    int x = 0;
    int y = 0;
    int size = 0;

    [[nodiscard]] Rect box() const { return {x - size / 2, y - size / 2, size, size}; }

    friend bool operator==(const TargetSpec&, const TargetSpec&) = default;
};

struct SceneSpec {
    int width = 0;
    int height = 0;
    std::vector<TargetSpec> targets;
    double background_density = 0.05;  // fraction of pixels with a speckle
    double target_density = 0.9;       // fill rate of the target texture
    int clutter_blobs = 0;             // distractor squares at medium density
    std::uint64_t seed = 0;
};

/// Renders the spec deterministically: mid-gray canvas, salt-and-pepper
/// background, optional clutter squares, and a dense checker texture inside
/// every target box. Throws std::invalid_argument when targets leave the
/// image or overlap each other.
[[nodiscard]] GrayImage synth_scene(const SceneSpec& spec);

/// Random single- or multi-target scene spec: sizes drawn across the config's
/// scale intervals, boxes kept inside the image and pairwise disjoint.
[[nodiscard]] SceneSpec random_scene_spec(Rng& rng, int width, int height, int n_targets,
                                          const SearchConfig& config);

[[nodiscard]] std::vector<GroundTruthOracle::Target> oracle_targets(const SceneSpec& spec);

/// A named scene set: the truth file written by synthesis and consumed by
/// training, search and the benchmark. One file carries every scene.
struct SceneSetEntry {
    std::string id;
    SceneSpec spec;
};

void save_truth(const SceneSpec& spec, const std::filesystem::path& path);
[[nodiscard]] SceneSpec load_truth(const std::filesystem::path& path);
[[nodiscard]] SceneSpec scene_spec_from_json(const std::string& text);
[[nodiscard]] std::string scene_spec_to_json(const SceneSpec& spec);

void save_scene_set(std::span<const SceneSetEntry> scenes, const std::filesystem::path& path);
/// Accepts either {"scenes": [...]} or a bare single-scene object (whose id
/// becomes the file stem).
[[nodiscard]] std::vector<SceneSetEntry> load_scene_set(const std::filesystem::path& path);

}  // namespace atsearch
