#include "atsearch/geometry.hpp"

namespace atsearch {

std::int64_t rect_union_area(const Rect& frame, std::span<const Rect> rects) {
    if (frame.empty()) return 0;
    bool any = false;
    for (const Rect& b : rects) {
        const Rect ov = intersect(frame, b);
        if (ov.empty()) continue;
        if (ov == frame) return frame.area();
        any = true;
    }
    if (!any) return 0;
    if (frame.area() == 1) return 1;  // nonempty intersection covers the pixel
    Rect lo = frame, hi = frame;
    if (frame.w >= frame.h) {
        lo.w = frame.w / 2;
        hi.x = frame.x + lo.w;
        hi.w = frame.w - lo.w;
    } else {
        lo.h = frame.h / 2;
        hi.y = frame.y + lo.h;
        hi.h = frame.h - lo.h;
    }
    return rect_union_area(lo, rects) + rect_union_area(hi, rects);
}

}  // namespace atsearch
