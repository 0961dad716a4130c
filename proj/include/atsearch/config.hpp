#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace atsearch {

/// Inclusive target-size range in pixels for one scale index.
struct ScaleInterval {
    double lo = 0.0;
    double hi = 0.0;

    friend bool operator==(const ScaleInterval&, const ScaleInterval&) = default;
};

/// All tunables of a search run. Defaults follow the reference setup:
/// tau = 1e-3, epsilon = 1e-5, lambda = 1e-4 (one target per 100x100 pixels),
/// gamma = 5e5 oracle evaluations.
struct SearchConfig {
    std::vector<ScaleInterval> scale_intervals;
    double tau = 1e-3;
    double epsilon = 1e-5;
    std::int64_t gamma = 500000;     // max oracle evaluations
    std::int64_t max_steps = 0;      // optional iteration cap; 0 = unlimited
    double lambda = 1e-4;            // target rate per pixel (multi-target)
    std::uint64_t mc_seed = 20124;   // distance-table Monte Carlo seed
    std::int64_t mc_samples = 100000;
    int edge_threshold = 32;

    [[nodiscard]] int scales() const { return int(scale_intervals.size()); }

    /// Throws std::invalid_argument when intervals are empty, unordered or
    /// overlapping, or when epsilon/gamma/lambda are out of range.
    void validate() const;

    /// Four equal scale intervals spanning roughly 0.17..0.51 of the smaller
    /// image dimension, so desk-scale images keep a meaningful size range.
    static SearchConfig defaults_for(int width, int height);

    /// The 100..300 pixel four-interval preset from the reference setup.
    static SearchConfig preset_caltech();

    /// Size grid shared by perfect tests and the sliding-window baseline:
    /// 10% multiplicative steps from the smallest size, closed with the top
    /// of the largest interval.
    [[nodiscard]] std::vector<double> size_grid() const;

    /// Grid sizes falling in scale interval s (1-based).
    [[nodiscard]] std::vector<double> sizes_in_interval(int s) const;

    /// 1-based scale interval containing `size`, or 0 when none does.
    [[nodiscard]] int interval_of_size(double size) const;

    [[nodiscard]] std::int64_t pose_space_size(int width, int height) const {
        return std::int64_t(width) * height * std::int64_t(size_grid().size());
    }
};

[[nodiscard]] SearchConfig load_config(const std::filesystem::path& path);
void save_config(const SearchConfig& config, const std::filesystem::path& path);
[[nodiscard]] std::string config_to_json(const SearchConfig& config);
[[nodiscard]] SearchConfig config_from_json(const std::string& text);

}  // namespace atsearch
