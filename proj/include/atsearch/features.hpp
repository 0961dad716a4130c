#pragma once

#include <cstdint>
#include <vector>

#include "atsearch/geometry.hpp"
#include "atsearch/image.hpp"
#include "atsearch/lattice.hpp"

namespace atsearch {

inline constexpr int kOrientations = 4;    // gradient angle bins, 45 deg apart
inline constexpr int kDefaultEdgeThreshold = 32;

/// Orientation selector for edge-proportion queries.
enum class Orientation : int {
    Any = -1,
    Deg0 = 0,    // gradient along x: vertical edges
    Deg45 = 1,
    Deg90 = 2,   // gradient along y: horizontal edges
    Deg135 = 3,
};

/// Per-orientation integral tables over the binary edge maps, each entry
/// (x, y) holding the count of marked pixels in [0,x) x [0,y). Queries
/// reduce to four corner lookups. Immutable after construction;
/// erase_edges returns a new value.
class IntegralSet {
  public:
    IntegralSet() = default;

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }

    /// Edge count of one orientation (or any edge) inside the rect,
    /// which must lie within the image.
    [[nodiscard]] std::int64_t count(const Rect& rect, Orientation orientation) const;

    /// Orientation bin of a pixel, or -1 when it is not an edge.
    [[nodiscard]] int orientation_at(int x, int y) const {
        return int(orientation_map_[std::size_t(y) * std::size_t(width_) +
                                    std::size_t(x)]) -
               1;
    }

    friend IntegralSet detect_edges(const GrayImage& image, int magnitude_threshold);
    friend IntegralSet erase_edges(const IntegralSet& integrals, const Rect& rect);

  private:
    void rebuild_tables();
    [[nodiscard]] std::int64_t table_sum(int table, const Rect& rect) const;

    int width_ = 0;
    int height_ = 0;
    // 0 = not an edge, 1..4 = orientation bin + 1.
    std::vector<std::uint8_t> orientation_map_;
    // kOrientations + 1 tables of (w + 1) * (h + 1) prefix sums; the last is
    // the any-edge union.
    std::vector<std::vector<std::uint32_t>> tables_;
};

/// Marks a pixel as an edge when the larger of its central-difference
/// gradient magnitudes exceeds the threshold, quantizing the gradient angle
/// into four bins modulo 180 degrees. Border pixels are never edges.
[[nodiscard]] IntegralSet detect_edges(const GrayImage& image,
                                       int magnitude_threshold = kDefaultEdgeThreshold);

/// Fraction of edge pixels of the given orientation within the rect clipped
/// to image bounds. Throws std::invalid_argument when the clipped rect is
/// empty.
[[nodiscard]] double edge_proportion(const IntegralSet& integrals, const Rect& rect,
                                     Orientation orientation);

/// Soft query family: orientation selector plus the window enlargement
/// factor F (distinct from the target scale).
struct QueryFamilyDescriptor {
    int k = 1;  // 1-based family id
    Orientation orientation = Orientation::Any;
    int factor = 1;
};

inline constexpr int kSoftFamilyCount = 25;  // {Any, 4 directions} x {F = 1..5}

/// The fixed catalog of soft families: k=1 is (Any, F=1), k=2..5 are
/// (Any, F=2..5), k=6..9 are (direction, F=1), k=10..25 sweep factors 2..5
/// across the four directions.
[[nodiscard]] const std::vector<QueryFamilyDescriptor>& soft_family_catalog();
[[nodiscard]] QueryFamilyDescriptor soft_family(int k);

/// Window used by family queries: same center as the cell rect, extents
/// multiplied by the family factor, clipped to image bounds.
[[nodiscard]] Rect query_window(const Rect& cell_rect, int factor);

/// Edge proportion over the family's enlarged window around the cell.
[[nodiscard]] double query_value(const IntegralSet& integrals,
                                 const QueryFamilyDescriptor& family,
                                 const Rect& cell_rect);

/// New integral set with all edges inside the rect removed.
[[nodiscard]] IntegralSet erase_edges(const IntegralSet& integrals, const Rect& rect);

}  // namespace atsearch
