#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "atsearch/lattice.hpp"

namespace atsearch {

/// Sparse posterior over (pixel, scale) poses plus the distinguished "absent"
/// hypothesis, represented as per-scale masses on an explicitly instantiated
/// quadtree subtree. Mass below the deepest instantiated cells is implicitly
/// uniform per live pixel and scale within the cell.
///
/// The instantiated cells always form a connected subtree containing the
/// root, every internal cell's mass equals the sum of its children, and the
/// frontier is the set of subtree leaves with total mass above tau.
class Posterior {
  public:
    struct CellView {
        CellId id;
        Rect rect;
        std::span<const double> mass;  // per scale, mass[s-1] for scale s
        double total = 0.0;
        bool subtree_leaf = false;
        bool frontier = false;
    };

    struct MapEstimate {
        Pose pose;  // pose.absent == true when the complement dominates
        double prob = 0.0;
    };

    Posterior() = default;
    Posterior(const Posterior& other);
    Posterior& operator=(const Posterior& other);
    Posterior(Posterior&&) noexcept = default;
    Posterior& operator=(Posterior&&) noexcept = default;

    /// prior_absent in [0, 1); present mass is spread uniformly over scales
    /// and, within the image, uniformly per pixel. The frontier starts as the
    /// root alone; updates deepen it as mass concentrates.
    static Posterior init(const Lattice& lattice, double prior_absent, int scales,
                          double tau);

    /// As init, but with rectangles excluded from the pose space at every
    /// scale (used by multi-target restarts to remove already-claimed
    /// regions). Present mass is uniform over the remaining live poses.
    static Posterior init_blocked(const Lattice& lattice, double prior_absent,
                                  int scales, double tau, std::vector<Rect> blocked);

    /// Bayes update for a query on `target` with per-scale likelihood ratios:
    /// poses inside the target at scale s are reweighted by ratios[s-1], all
    /// other poses and the absent mass by 1, then everything is renormalized.
    /// Returns the normalizer Z. Throws DegeneratePosteriorError if Z == 0
    /// and std::invalid_argument for negative ratios or degenerate targets.
    double apply_update(CellId target, std::span<const double> ratios);

    /// Permanently excludes (leaf pixel, scale) from the pose space. Call
    /// after zeroing the mass via apply_update; the exclusion survives
    /// pruning, so the pose never regains mass on later refinement.
    void mark_dead(CellId leaf, int scale);

    [[nodiscard]] MapEstimate map_estimate() const;

    void dump(std::ostream& os) const;
    [[nodiscard]] std::string dump_string() const;

    void visit(const std::function<void(const CellView&)>& fn) const;

    [[nodiscard]] const Lattice& lattice() const { return lattice_; }
    [[nodiscard]] int scales() const { return scales_; }
    [[nodiscard]] double tau() const { return tau_; }
    [[nodiscard]] double absent_mass() const { return absent_; }
    [[nodiscard]] double present_mass() const;
    [[nodiscard]] double total_mass() const;
    [[nodiscard]] std::size_t node_count() const;

    /// Implied posterior mass of a single (pixel, scale) pose.
    [[nodiscard]] double pose_mass(int px, int py, int scale) const;
    [[nodiscard]] bool is_dead(int px, int py, int scale) const;
    [[nodiscard]] std::int64_t live_pixels(const Rect& rect, int scale) const;
    [[nodiscard]] std::int64_t live_pose_count() const;

  private:
    struct Node {
        CellId id;
        Rect rect;
        std::vector<double> mass;
        std::array<std::unique_ptr<Node>, 4> child;

        [[nodiscard]] bool leaf() const {
            return !child[0] && !child[1] && !child[2] && !child[3];
        }
        [[nodiscard]] double total() const;
    };

    Node* ensure_instantiated(CellId target);
    void split_node(Node& node);
    void scale_subtree(Node& node, std::span<const double> ratios);
    void divide_all(Node& node, double z);
    void resum_path(CellId target);
    void maintain();
    void prune(Node& node);
    void refine(Node& node);
    [[nodiscard]] std::int64_t blocked_area_in(const Rect& rect) const;
    [[nodiscard]] std::vector<double> implicit_child_totals(const Node& node) const;
    [[nodiscard]] static std::unique_ptr<Node> clone(const Node& node);

    Lattice lattice_;
    int scales_ = 0;
    double tau_ = 0.0;
    double absent_ = 0.0;
    std::unique_ptr<Node> root_;
    std::vector<Rect> blocked_;
    // One exclusion set per scale; keys are y * width + x.
    std::vector<std::unordered_set<std::int64_t>> dead_;
};

[[nodiscard]] inline Posterior init_posterior(const Lattice& lattice, double prior_absent,
                                              int scales, double tau) {
    return Posterior::init(lattice, prior_absent, scales, tau);
}

}  // namespace atsearch
