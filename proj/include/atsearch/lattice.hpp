#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "atsearch/geometry.hpp"

namespace atsearch {

/// A target hypothesis: pixel center plus a scale-interval index in {1..M},
/// or the distinguished "absent" value for the complement of the image.
struct Pose {
    int x = 0;
    int y = 0;
    int s = 0;  // scale index, 1-based
    bool absent = false;

    static Pose make_absent() { return Pose{0, 0, 0, true}; }
    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Identifies one quadtree cell: level in {1..D}, index in {1..4^(level-1)}.
struct CellId {
    int level = 1;
    std::int64_t index = 1;

    friend bool operator==(const CellId&, const CellId&) = default;
    friend auto operator<=>(const CellId&, const CellId&) = default;
};

/// Quadtree decomposition of a width x height pixel grid. The lattice itself
/// is a pure descriptor: cell rectangles are computed on demand from the cell
/// id, so no per-cell storage exists here.
///
/// Splitting is by integer halving with the larger half going to the left/top
/// child, so the four children always partition the parent exactly. Children
/// that would have zero area are degenerate and are never instantiated.
class Lattice {
  public:
    Lattice() = default;
    Lattice(int width, int height);  // throws std::invalid_argument on empty dims

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] int depth() const { return depth_; }
    [[nodiscard]] Rect image_rect() const { return {0, 0, width_, height_}; }

    /// Rectangle of a cell; degenerate cells yield an empty rect.
    [[nodiscard]] Rect cell_rect(CellId id) const;

    [[nodiscard]] bool is_leaf_level(CellId id) const { return id.level == depth_; }

    /// Child slot c in {0..3}: 0 = top-left, 1 = top-right, 2 = bottom-left,
    /// 3 = bottom-right.
    [[nodiscard]] static CellId child(CellId id, int slot) {
        return {id.level + 1, (id.index - 1) * 4 + slot + 1};
    }
    [[nodiscard]] static CellId parent(CellId id) {
        return {id.level - 1, (id.index - 1) / 4 + 1};
    }
    [[nodiscard]] static int slot_in_parent(CellId id) {
        return int((id.index - 1) % 4);
    }

    /// Splits a rect into its four child rects (slot order as above).
    [[nodiscard]] static std::array<Rect, 4> split(const Rect& r);

    /// The unique cell at `level` whose rect contains pixel (px, py).
    [[nodiscard]] CellId cell_at(int level, int px, int py) const;

    /// Leaf cell of a pixel (level == depth()).
    [[nodiscard]] CellId leaf_at(int px, int py) const { return cell_at(depth_, px, py); }

    [[nodiscard]] std::int64_t cells_at_level(int level) const {
        return std::int64_t(1) << (2 * (level - 1));
    }

  private:
    int width_ = 0;
    int height_ = 0;
    int depth_ = 0;
};

/// D = 1 + ceil(log2(max(width, height))), computed in integer arithmetic.
[[nodiscard]] Lattice build_lattice(int width, int height);

}  // namespace atsearch
