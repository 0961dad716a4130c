#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atsearch/engine.hpp"
#include "atsearch/scene.hpp"

namespace atsearch {

struct SlidingWindowResult {
    std::optional<Detection> detection;
    std::int64_t oracle_evals = 0;
};

/// Baseline: raster-scan every pixel at every grid size until the oracle
/// answers positive, starting from a seeded pixel offset and wrapping.
[[nodiscard]] SlidingWindowResult sliding_window(int width, int height,
                                                 const SearchConfig& config, Oracle& oracle,
                                                 std::uint64_t seed);

struct BenchScene {
    std::string id;
    SceneSpec spec;
    GrayImage image;
};

struct BenchRow {
    std::string scene_id;
    std::string method;  // "at" or "sw"
    bool detected = false;
    bool correct = false;
    std::int64_t oracle_evals = 0;
    std::int64_t soft_evals = 0;
    double wall_ms = 0.0;  // reported separately; report.csv stays byte-stable
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::int64_t pose_space = 0;  // width x height x |size grid|
};

/// Runs the sequential search and the sliding-window baseline on every scene
/// against its planted ground truth. A detection counts as correct when its
/// center lies in some target's box and the scale interval matches; on blank
/// scenes the correct answer is no detection.
[[nodiscard]] BenchReport bench_compare(std::span<const BenchScene> scenes,
                                        const SearchConfig& config, const ModelSet& models,
                                        const DistanceTable& table, std::uint64_t seed);

/// scene_id, method, detected, correct, oracle_evals, soft_evals. Timing is
/// excluded so identical inputs give identical bytes.
void write_report_csv(const BenchReport& report, const std::filesystem::path& path);
void write_timing_csv(const BenchReport& report, const std::filesystem::path& path);
[[nodiscard]] std::string summary_json(const BenchReport& report);

}  // namespace atsearch
