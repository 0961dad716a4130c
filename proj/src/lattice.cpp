#include "atsearch/lattice.hpp"

#include <stdexcept>

namespace atsearch {

namespace {

int ceil_log2(int n) {
    int k = 0;
    while ((1 << k) < n) ++k;
    return k;
}

}  // namespace

Lattice::Lattice(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("lattice dimensions must be positive");
    }
    depth_ = 1 + ceil_log2(std::max(width, height));
}

std::array<Rect, 4> Lattice::split(const Rect& r) {
    const int wl = (r.w + 1) / 2;  // larger half to the left/top
    const int ht = (r.h + 1) / 2;
    const int wr = r.w - wl;
    const int hb = r.h - ht;
    return {Rect{r.x, r.y, wl, ht}, Rect{r.x + wl, r.y, wr, ht},
            Rect{r.x, r.y + ht, wl, hb}, Rect{r.x + wl, r.y + ht, wr, hb}};
}

Rect Lattice::cell_rect(CellId id) const {
    Rect r = image_rect();
    if (id.level == 1) return r;
    // Walk the base-4 digits of (index - 1), most significant first.
    std::int64_t path = id.index - 1;
    for (int lvl = id.level; lvl > 1; --lvl) {
        const int shift = 2 * (lvl - 2);
        const int slot = int((path >> shift) & 3);
        path &= (std::int64_t(1) << shift) - 1;
        r = split(r)[slot];
        if (r.empty()) return Rect{r.x, r.y, 0, 0};
    }
    return r;
}

CellId Lattice::cell_at(int level, int px, int py) const {
    Rect r = image_rect();
    CellId id{1, 1};
    while (id.level < level) {
        const auto quads = split(r);
        int slot = 0;
        for (int c = 0; c < 4; ++c) {
            if (!quads[c].empty() && quads[c].contains(px, py)) {
                slot = c;
                break;
            }
        }
        r = quads[slot];
        id = child(id, slot);
    }
    return id;
}

Lattice build_lattice(int width, int height) { return Lattice(width, height); }

}  // namespace atsearch
