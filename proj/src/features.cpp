#include "atsearch/features.hpp"

#include <cmath>
#include <stdexcept>

namespace atsearch {

void IntegralSet::rebuild_tables() {
    const std::size_t stride = std::size_t(width_) + 1;
    tables_.assign(kOrientations + 1,
                   std::vector<std::uint32_t>(stride * (std::size_t(height_) + 1), 0));
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const int bin = orientation_at(x, y);
            for (int t = 0; t <= kOrientations; ++t) {
                const bool hit = bin >= 0 && (t == kOrientations || t == bin);
                tables_[std::size_t(t)][(std::size_t(y) + 1) * stride + std::size_t(x) +
                                        1] =
                    tables_[std::size_t(t)][std::size_t(y) * stride + std::size_t(x) + 1] +
                    tables_[std::size_t(t)][(std::size_t(y) + 1) * stride +
                                            std::size_t(x)] -
                    tables_[std::size_t(t)][std::size_t(y) * stride + std::size_t(x)] +
                    (hit ? 1u : 0u);
            }
        }
    }
}

std::int64_t IntegralSet::table_sum(int table, const Rect& rect) const {
    const std::size_t stride = std::size_t(width_) + 1;
    const auto& t = tables_[std::size_t(table)];
    const std::size_t x0 = std::size_t(rect.x);
    const std::size_t y0 = std::size_t(rect.y);
    const std::size_t x1 = std::size_t(rect.x + rect.w);
    const std::size_t y1 = std::size_t(rect.y + rect.h);
    return std::int64_t(t[y1 * stride + x1]) - std::int64_t(t[y0 * stride + x1]) -
           std::int64_t(t[y1 * stride + x0]) + std::int64_t(t[y0 * stride + x0]);
}

std::int64_t IntegralSet::count(const Rect& rect, Orientation orientation) const {
    const int table =
        orientation == Orientation::Any ? kOrientations : int(orientation);
    return table_sum(table, rect);
}

IntegralSet detect_edges(const GrayImage& image, int magnitude_threshold) {
    if (image.width < 1 || image.height < 1) {
        throw std::invalid_argument("detect_edges requires a non-empty image");
    }
    IntegralSet set;
    set.width_ = image.width;
    set.height_ = image.height;
    set.orientation_map_.assign(std::size_t(image.width) * std::size_t(image.height),
                                0);
    for (int y = 1; y + 1 < image.height; ++y) {
        for (int x = 1; x + 1 < image.width; ++x) {
            const int gx = int(image.at(x + 1, y)) - int(image.at(x - 1, y));
            const int gy = int(image.at(x, y + 1)) - int(image.at(x, y - 1));
            if (std::max(std::abs(gx), std::abs(gy)) <= magnitude_threshold) continue;
            double angle = std::atan2(double(gy), double(gx)) * 180.0 / M_PI;
            if (angle < 0.0) angle += 180.0;  // modulo 180
            if (angle >= 180.0) angle -= 180.0;
            const int bin = int(std::lround(angle / 45.0)) % kOrientations;
            set.orientation_map_[std::size_t(y) * std::size_t(image.width) +
                                 std::size_t(x)] = std::uint8_t(bin + 1);
        }
    }
    set.rebuild_tables();
    return set;
}

double edge_proportion(const IntegralSet& integrals, const Rect& rect,
                       Orientation orientation) {
    const Rect clipped =
        intersect(rect, Rect{0, 0, integrals.width(), integrals.height()});
    if (clipped.empty()) {
        throw std::invalid_argument("edge_proportion window has no area in the image");
    }
    return double(integrals.count(clipped, orientation)) / double(clipped.area());
}

const std::vector<QueryFamilyDescriptor>& soft_family_catalog() {
    static const std::vector<QueryFamilyDescriptor> catalog = [] {
        std::vector<QueryFamilyDescriptor> fams;
        fams.push_back({1, Orientation::Any, 1});
        for (int f = 2; f <= 5; ++f) fams.push_back({int(fams.size()) + 1, Orientation::Any, f});
        for (int d = 0; d < 4; ++d) {
            fams.push_back({int(fams.size()) + 1, Orientation(d), 1});
        }
        for (int f = 2; f <= 5; ++f) {
            for (int d = 0; d < 4; ++d) {
                fams.push_back({int(fams.size()) + 1, Orientation(d), f});
            }
        }
        return fams;
    }();
    return catalog;
}

QueryFamilyDescriptor soft_family(int k) {
    const auto& catalog = soft_family_catalog();
    if (k < 1 || k > int(catalog.size())) {
        throw std::invalid_argument("soft family id out of range");
    }
    return catalog[std::size_t(k - 1)];
}

Rect query_window(const Rect& cell_rect, int factor) {
    // Same center, extents scaled by the factor.
    const int w = cell_rect.w * factor;
    const int h = cell_rect.h * factor;
    return Rect{cell_rect.x - (w - cell_rect.w) / 2, cell_rect.y - (h - cell_rect.h) / 2,
                w, h};
}

double query_value(const IntegralSet& integrals, const QueryFamilyDescriptor& family,
                   const Rect& cell_rect) {
    return edge_proportion(integrals, query_window(cell_rect, family.factor),
                           family.orientation);
}

IntegralSet erase_edges(const IntegralSet& integrals, const Rect& rect) {
    IntegralSet out = integrals;
    const Rect clipped = intersect(rect, Rect{0, 0, out.width_, out.height_});
    for (int y = clipped.y; y < clipped.y + clipped.h; ++y) {
        for (int x = clipped.x; x < clipped.x + clipped.w; ++x) {
            out.orientation_map_[std::size_t(y) * std::size_t(out.width_) +
                                 std::size_t(x)] = 0;
        }
    }
    out.rebuild_tables();
    return out;
}

}  // namespace atsearch
