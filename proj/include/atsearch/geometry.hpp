#pragma once

#include <algorithm>
#include <cstdint>
#include <span>

namespace atsearch {

/// Axis-aligned pixel rectangle. (x, y) is the top-left corner; the rect
/// covers columns [x, x+w) and rows [y, y+h).
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    [[nodiscard]] std::int64_t area() const { return std::int64_t(w) * h; }
    [[nodiscard]] bool empty() const { return w <= 0 || h <= 0; }

    [[nodiscard]] bool contains(int px, int py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }

    [[nodiscard]] bool contains(const Rect& other) const {
        return other.x >= x && other.y >= y && other.x + other.w <= x + w &&
               other.y + other.h <= y + h;
    }

    /// Center pixel; for even extents this is the upper-left of the two middles.
    [[nodiscard]] int center_x() const { return x + (w - 1) / 2; }
    [[nodiscard]] int center_y() const { return y + (h - 1) / 2; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

[[nodiscard]] inline Rect intersect(const Rect& a, const Rect& b) {
    const int x0 = std::max(a.x, b.x);
    const int y0 = std::max(a.y, b.y);
    const int x1 = std::min(a.x + a.w, b.x + b.w);
    const int y1 = std::min(a.y + a.h, b.y + b.h);
    return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

[[nodiscard]] inline std::int64_t overlap_area(const Rect& a, const Rect& b) {
    return intersect(a, b).area();
}

/// Area of `frame` covered by the union of `rects`, exact for overlapping
/// rects (recursive bisection, no inclusion-exclusion blowup).
[[nodiscard]] std::int64_t rect_union_area(const Rect& frame, std::span<const Rect> rects);

}  // namespace atsearch
