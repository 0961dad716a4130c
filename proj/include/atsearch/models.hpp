#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "atsearch/beta.hpp"
#include "atsearch/config.hpp"
#include "atsearch/image.hpp"
#include "atsearch/scene.hpp"

namespace atsearch {

/// Fitted response densities f_s^k at every level: one Beta per
/// (family k, level i, scale s), with s = 0 meaning background.
class ModelSet {
  public:
    ModelSet() = default;
    ModelSet(int levels, int scales, int soft_families);

    [[nodiscard]] int levels() const { return levels_; }
    [[nodiscard]] int scales() const { return scales_; }
    [[nodiscard]] int soft_families() const { return soft_families_; }

    [[nodiscard]] bool has(int k, int i, int s) const;
    /// Throws ModelCoverageError when the triple was never fitted.
    [[nodiscard]] const BetaModel& at(int k, int i, int s) const;
    void set(int k, int i, int s, BetaModel model);

    /// Throws ModelCoverageError naming the first missing triple.
    void require_complete() const;

  private:
    [[nodiscard]] std::size_t slot(int k, int i, int s) const;

    int levels_ = 0;
    int scales_ = 0;
    int soft_families_ = 0;
    std::vector<BetaModel> models_;
    std::vector<char> present_;
};

/// Monte Carlo L2 distances between the fitted densities of one family/level,
/// for every unordered scale pair including background.
class DistanceTable {
  public:
    DistanceTable() = default;
    DistanceTable(int levels, int scales, int soft_families);

    [[nodiscard]] int levels() const { return levels_; }
    [[nodiscard]] int scales() const { return scales_; }
    [[nodiscard]] int soft_families() const { return soft_families_; }

    [[nodiscard]] double at(int k, int i, int s, int m) const;
    void set(int k, int i, int s, int m, double d);

    /// Largest entry across families at level i: the value a perfect test is
    /// scored with, since its answer separates any two hypotheses at least as
    /// well as the most discriminative soft family.
    [[nodiscard]] double max_at_level(int i) const;

  private:
    [[nodiscard]] std::size_t slot(int k, int i, int s, int m) const;

    int levels_ = 0;
    int scales_ = 0;
    int soft_families_ = 0;
    std::vector<double> d_;
};

[[nodiscard]] DistanceTable build_distance_table(const ModelSet& models, std::int64_t n_samples,
                                                 std::uint64_t seed);

/// Reference fit size: each (family, level, scale) sees this many responses.
inline constexpr std::int64_t kDefaultTrainingSamples = 5000;

struct TrainScene {
    GrayImage image;
    std::vector<TargetSpec> targets;
};

/// Fits every (k, i, s) by sampling query responses from the scenes:
/// scale s > 0 draws from cells holding the center of a target in interval s,
/// background draws from cells holding no target center (blank scenes cover
/// the coarse levels). Sampling is with replacement so a fixed quota applies
/// even when few distinct cells qualify. Throws TrainingCoverageError naming
/// the first triple that cannot be sampled.
[[nodiscard]] ModelSet train_models(std::span<const TrainScene> scenes, const SearchConfig& config,
                                    std::int64_t samples_per_config, std::uint64_t seed);

struct ModelBundle {
    ModelSet models;
    DistanceTable table;
    std::uint64_t seed = 0;
};

void save_models(const ModelBundle& bundle, const std::filesystem::path& path);
/// Throws std::invalid_argument on malformed files, ModelCoverageError when
/// any (k, i, s) or distance pair is missing.
[[nodiscard]] ModelBundle load_models(const std::filesystem::path& path);

[[nodiscard]] std::string file_hash_hex(const std::filesystem::path& path);

}  // namespace atsearch
