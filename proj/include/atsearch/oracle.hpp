#pragma once

#include <cstdint>
#include <vector>

#include "atsearch/config.hpp"

namespace atsearch {

struct OracleStats {
    std::int64_t evaluations = 0;
    std::int64_t positives = 0;
};

/// The expensive, error-free test: is a target of roughly `size` pixels
/// centered at (x, y)? Implementations must only spend budget through
/// evaluate() so the counters stay authoritative.
class Oracle {
  public:
    virtual ~Oracle() = default;

    bool evaluate(int x, int y, double size) {
        ++stats_.evaluations;
        const bool hit = evaluate_impl(x, y, size);
        if (hit) ++stats_.positives;
        return hit;
    }

    [[nodiscard]] const OracleStats& stats() const { return stats_; }
    void reset_stats() { stats_ = {}; }

  protected:
    virtual bool evaluate_impl(int x, int y, double size) = 0;

  private:
    OracleStats stats_;
};

/// Planted ground truth. Answers positive when some target's center lies
/// within a quarter of its own size of (x, y) on each axis and its size falls
/// in the same scale interval as the queried size.
class GroundTruthOracle final : public Oracle {
  public:
    struct Target {
        int x = 0;
        int y = 0;
        double size = 0.0;
    };

    GroundTruthOracle(std::vector<Target> targets, const SearchConfig& config)
        : targets_(std::move(targets)), config_(config) {}

  protected:
    bool evaluate_impl(int x, int y, double size) override {
        const int s = config_.interval_of_size(size);
        if (s == 0) return false;
        for (const auto& t : targets_) {
            if (config_.interval_of_size(t.size) != s) continue;
            const double tol = t.size / 4.0;
            if (std::abs(t.x - x) <= tol && std::abs(t.y - y) <= tol) return true;
        }
        return false;
    }

  private:
    std::vector<Target> targets_;
    SearchConfig config_;
};

}  // namespace atsearch
