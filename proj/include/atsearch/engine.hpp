#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "atsearch/config.hpp"
#include "atsearch/features.hpp"
#include "atsearch/models.hpp"
#include "atsearch/oracle.hpp"
#include "atsearch/posterior.hpp"

namespace atsearch {

/// k in 1..K_soft addresses a soft family at any cell; k = K_soft + s is the
/// perfect test for scale s at a pixel cell.
struct QueryId {
    int k = 0;
    CellId cell;

    friend bool operator==(const QueryId&, const QueryId&) = default;
};

[[nodiscard]] inline bool is_perfect_family(int k) { return k > kSoftFamilyCount; }

struct TraceRecord {
    std::int64_t t = 0;  // 1-based step
    int k = 0;
    int level = 0;
    std::int64_t index = 0;
    double x = 0.0;  // observed response; 1/0 for perfect tests
    double z = 0.0;  // update normalizer, 1 when no update ran
    std::int64_t oracle_evals = 0;
    std::int64_t soft_evals = 0;
};

struct Detection {
    Pose pose;
    Rect box;
    double confidence = 0.0;  // posterior mass of the pose when its test fired
    std::int64_t oracle_evals = 0;  // cumulative counts at detection time
    std::int64_t soft_evals = 0;
};

enum class Outcome { Detected, NoTarget, BudgetExhausted };

[[nodiscard]] const char* outcome_name(Outcome outcome);

struct SearchResult {
    Outcome outcome = Outcome::NoTarget;
    std::optional<Detection> detection;
    Pose map_pose = Pose::make_absent();  // final MAP, reported on budget exhaustion
    double map_prob = 0.0;
    std::int64_t oracle_evals = 0;
    std::int64_t soft_evals = 0;
    std::int64_t steps = 0;
    std::vector<TraceRecord> trace;
};

struct MultiResult {
    std::vector<Detection> detections;
    std::int64_t oracle_evals = 0;
    std::int64_t soft_evals = 0;
    std::int64_t steps = 0;
    bool budget_exhausted = false;
    std::vector<TraceRecord> trace;
};

/// Mutable state of one search pass. `asked` dedupes queries for the life of
/// the pass; multi-target sweeps start a fresh state per detection.
struct SearchState {
    Posterior posterior;
    std::unordered_set<std::uint64_t> asked;
    std::int64_t oracle_evals = 0;
    std::int64_t soft_evals = 0;
    std::int64_t steps = 0;
    std::int64_t unobserved_pixels = 0;
    bool tracing = false;
    std::vector<TraceRecord> trace;

    explicit SearchState(Posterior p) : posterior(std::move(p)) {}

    [[nodiscard]] static std::uint64_t pack(const QueryId& q) {
        return (std::uint64_t(std::uint32_t(q.k)) << 56) |
               (std::uint64_t(std::uint32_t(q.cell.level)) << 48) |
               std::uint64_t(q.cell.index);
    }
    [[nodiscard]] bool was_asked(const QueryId& q) const { return asked.contains(pack(q)); }
    void mark_asked(const QueryId& q) { asked.insert(pack(q)); }
};

/// Expected information gain of soft family k at an instantiated cell: the
/// Gini-weighted sum of pairwise model distances over scale hypotheses, with
/// the cell's complement playing the background hypothesis.
[[nodiscard]] double mutual_information(const Posterior& posterior, CellId cell, int k,
                                        const DistanceTable& table);

struct Selection {
    QueryId id;
    double score = 0.0;
};

/// Argmax of information gain over unasked queries: soft families at every
/// instantiated cell, perfect tests at frontier pixel cells (scored with the
/// level's best model separation `d_star`). Ties break toward the coarser,
/// lower-indexed, lower-k query. Empty when everything was asked.
[[nodiscard]] std::optional<Selection> select_query(const SearchState& state,
                                                    const DistanceTable& table, double d_star);

enum class StepStatus { Continue, Detected, NoTarget, PoolExhausted };

struct StepResult {
    StepStatus status = StepStatus::Continue;
    std::optional<Detection> detection;
};

/// One round of Algorithm-style search: pick the best query, observe it,
/// update the posterior. Perfect tests sweep the size grid of their scale
/// within the remaining budget; a positive stops the search, a full negative
/// sweep zeroes the pose for good.
StepResult step(SearchState& state, const IntegralSet& integrals, const ModelSet& models,
                const DistanceTable& table, double d_star, Oracle& oracle,
                const SearchConfig& config, std::int64_t budget_used_before = 0);

/// Full single-target search with absent prior 1/2.
[[nodiscard]] SearchResult run_single(const GrayImage& image, const SearchConfig& config,
                                      const ModelSet& models, const DistanceTable& table,
                                      Oracle& oracle, bool tracing = false);

/// Repeated search for all targets: each detection claims its box, erases its
/// edges, and restarts with a fresh posterior blocked on claimed regions and
/// an absent prior exp(-lambda * unclaimed area). Stops when the posterior
/// concludes absence, the budget runs out, or no live pose remains.
[[nodiscard]] MultiResult run_multi(const GrayImage& image, const SearchConfig& config,
                                    const ModelSet& models, const DistanceTable& table,
                                    Oracle& oracle, bool tracing = false);

void write_trace(std::span<const TraceRecord> trace, const std::filesystem::path& path);

}  // namespace atsearch
