#include <cstdlib>
#include <vector>

#include "doctest.h"

#include "atsearch/features.hpp"
#include "atsearch/image.hpp"
#include "atsearch/rng.hpp"

using namespace atsearch;

namespace {

GrayImage random_image(int w, int h, std::uint64_t seed) {
    GrayImage img(w, h);
    Rng rng(seed);
    for (auto& px : img.data) px = std::uint8_t(rng.below(256));
    return img;
}

// Independent recount straight off the orientation map.
std::int64_t recount(const IntegralSet& set, const Rect& rect, Orientation orientation) {
    std::int64_t n = 0;
    for (int y = rect.y; y < rect.y + rect.h; ++y) {
        for (int x = rect.x; x < rect.x + rect.w; ++x) {
            const int bin = set.orientation_at(x, y);
            if (bin < 0) continue;
            if (orientation == Orientation::Any || bin == int(orientation)) ++n;
        }
    }
    return n;
}

Rect random_rect(Rng& rng, int w, int h) {
    const int x = int(rng.below(w));
    const int y = int(rng.below(h));
    const int rw = 1 + int(rng.below(std::uint64_t(w - x)));
    const int rh = 1 + int(rng.below(std::uint64_t(h - y)));
    return {x, y, rw, rh};
}

}  // namespace

TEST_CASE("constant image has no edges") {
    const IntegralSet set = detect_edges(GrayImage(16, 12, 77));
    CHECK(set.count({0, 0, 16, 12}, Orientation::Any) == 0);
    CHECK(edge_proportion(set, {0, 0, 16, 12}, Orientation::Any) == 0.0);
}

TEST_CASE("vertical step lands every edge in the horizontal-gradient bin") {
    GrayImage img(16, 10, 0);
    for (int y = 0; y < 10; ++y)
        for (int x = 8; x < 16; ++x) img.at(x, y) = 200;
    const IntegralSet set = detect_edges(img);
    const Rect all{0, 0, 16, 10};
    const std::int64_t any = set.count(all, Orientation::Any);
    CHECK(any > 0);
    CHECK(set.count(all, Orientation::Deg0) == any);
    CHECK(set.count(all, Orientation::Deg45) == 0);
    CHECK(set.count(all, Orientation::Deg90) == 0);
    CHECK(set.count(all, Orientation::Deg135) == 0);
}

TEST_CASE("horizontal step lands in the vertical-gradient bin") {
    GrayImage img(10, 16, 0);
    for (int y = 8; y < 16; ++y)
        for (int x = 0; x < 10; ++x) img.at(x, y) = 200;
    const IntegralSet set = detect_edges(img);
    const Rect all{0, 0, 10, 16};
    const std::int64_t any = set.count(all, Orientation::Any);
    CHECK(any > 0);
    CHECK(set.count(all, Orientation::Deg90) == any);
}

TEST_CASE("threshold gates edges") {
    GrayImage img(8, 8, 100);
    for (int y = 0; y < 8; ++y)
        for (int x = 4; x < 8; ++x) img.at(x, y) = 140;  // contrast 40
    CHECK(detect_edges(img, 32).count({0, 0, 8, 8}, Orientation::Any) > 0);
    CHECK(detect_edges(img, 64).count({0, 0, 8, 8}, Orientation::Any) == 0);
}

TEST_CASE("integral tables match a direct recount on random images") {
    const GrayImage img = random_image(8, 8, 5);
    const IntegralSet set = detect_edges(img, 32);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            for (int h = 1; y + h <= 8; ++h) {
                for (int w = 1; x + w <= 8; ++w) {
                    const Rect r{x, y, w, h};
                    for (const auto o :
                         {Orientation::Any, Orientation::Deg0, Orientation::Deg45,
                          Orientation::Deg90, Orientation::Deg135}) {
                        CHECK(set.count(r, o) == recount(set, r, o));
                    }
                }
            }
        }
    }
}

TEST_CASE("edge proportion saturates and vanishes") {
    GrayImage img(20, 20, 0);
    // 2-pixel checker: the central difference skips one pixel, so a 1-pixel
    // checker would cancel; this phase flips every neighbour pair instead.
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) img.at(x, y) = (((x >> 1) + (y >> 1)) & 1) ? 255 : 0;
    const IntegralSet set = detect_edges(img);
    CHECK(edge_proportion(set, {4, 4, 8, 8}, Orientation::Any) == 1.0);

    const IntegralSet blank = detect_edges(GrayImage(20, 20, 128));
    CHECK(edge_proportion(blank, {4, 4, 8, 8}, Orientation::Any) == 0.0);
    CHECK_THROWS_AS((void)edge_proportion(blank, {25, 25, 4, 4}, Orientation::Any),
                    std::invalid_argument);
}

TEST_CASE("200 random rects recount exactly") {
    Rng rng(2024);
    for (int round = 0; round < 4; ++round) {
        const GrayImage img = random_image(31, 17, 100 + std::uint64_t(round));
        const IntegralSet set = detect_edges(img, 32);
        for (int n = 0; n < 50; ++n) {
            const Rect r = random_rect(rng, 31, 17);
            for (const auto o : {Orientation::Any, Orientation::Deg45}) {
                CHECK(set.count(r, o) == recount(set, r, o));
                CHECK(edge_proportion(set, r, o) ==
                      double(recount(set, r, o)) / double(r.area()));
            }
        }
    }
}

TEST_CASE("orientation counts partition the any count") {
    Rng rng(31337);
    for (int round = 0; round < 20; ++round) {
        const GrayImage img = random_image(24, 18, 500 + std::uint64_t(round));
        const IntegralSet set = detect_edges(img, 32);
        for (int n = 0; n < 10; ++n) {
            const Rect r = random_rect(rng, 24, 18);
            const std::int64_t sum =
                set.count(r, Orientation::Deg0) + set.count(r, Orientation::Deg45) +
                set.count(r, Orientation::Deg90) + set.count(r, Orientation::Deg135);
            CHECK(sum == set.count(r, Orientation::Any));
        }
    }
}

TEST_CASE("family catalog enumerates orientations by factor") {
    const auto& catalog = soft_family_catalog();
    REQUIRE(int(catalog.size()) == kSoftFamilyCount);
    CHECK(catalog[0].orientation == Orientation::Any);
    CHECK(catalog[0].factor == 1);
    for (int k = 2; k <= 5; ++k) {
        CHECK(soft_family(k).orientation == Orientation::Any);
        CHECK(soft_family(k).factor == k);
    }
    for (int k = 6; k <= 9; ++k) {
        CHECK(soft_family(k).orientation == Orientation(k - 6));
        CHECK(soft_family(k).factor == 1);
    }
    // k = 10..25: factors 2..5 swept across the four directions.
    int seen[4][6] = {};
    for (int k = 10; k <= 25; ++k) {
        const auto fam = soft_family(k);
        CHECK(fam.orientation != Orientation::Any);
        CHECK(fam.factor >= 2);
        CHECK(fam.factor <= 5);
        ++seen[int(fam.orientation)][fam.factor];
    }
    for (int o = 0; o < 4; ++o)
        for (int f = 2; f <= 5; ++f) CHECK(seen[o][f] == 1);
    for (int k = 1; k <= kSoftFamilyCount; ++k) CHECK(soft_family(k).k == k);
}

TEST_CASE("query windows scale around the cell center and clip") {
    const GrayImage img = random_image(32, 32, 9);
    const IntegralSet set = detect_edges(img);

    const Rect cell{8, 8, 4, 4};
    CHECK(query_value(set, soft_family(1), cell) ==
          edge_proportion(set, cell, Orientation::Any));

    // Corner cell, doubled window: evaluation clips to the image; recount the
    // clipped rect directly.
    const Rect corner{0, 0, 4, 4};
    const Rect raw = query_window(corner, 2);
    CHECK(raw.w == 8);
    CHECK(raw.h == 8);
    const Rect window = intersect(raw, Rect{0, 0, 32, 32});
    CHECK(window.x == 0);
    CHECK(window.y == 0);
    CHECK(query_value(set, soft_family(2), corner) ==
          double(recount(set, window, Orientation::Any)) / double(window.area()));

    // Factor 5 around the root clips to the whole image.
    const Rect root{0, 0, 32, 32};
    CHECK(query_value(set, soft_family(5), root) ==
          edge_proportion(set, {0, 0, 32, 32}, Orientation::Any));

    Rng rng(55);
    for (int n = 0; n < 100; ++n) {
        const Rect r = random_rect(rng, 32, 32);
        for (int k = 1; k <= kSoftFamilyCount; ++k) {
            const double v = query_value(set, soft_family(k), r);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("erasing edges blanks a region and nothing else") {
    const GrayImage img = random_image(24, 24, 13);
    const IntegralSet set = detect_edges(img, 32);

    const IntegralSet all_gone = erase_edges(set, {0, 0, 24, 24});
    CHECK(all_gone.count({0, 0, 24, 24}, Orientation::Any) == 0);

    const IntegralSet untouched = erase_edges(set, {5, 5, 0, 0});
    Rng rng(21);
    for (int n = 0; n < 30; ++n) {
        const Rect r = random_rect(rng, 24, 24);
        CHECK(untouched.count(r, Orientation::Any) == set.count(r, Orientation::Any));
    }

    const Rect box{6, 6, 8, 8};
    const IntegralSet erased = erase_edges(set, box);
    CHECK(erased.count(box, Orientation::Any) == 0);
    CHECK(query_value(erased, soft_family(1), box) == 0.0);
    // Outside the box nothing moved.
    CHECK(erased.count({0, 0, 24, 6}, Orientation::Any) ==
          set.count({0, 0, 24, 6}, Orientation::Any));
    CHECK(erased.count({0, 14, 24, 10}, Orientation::Deg90) ==
          set.count({0, 14, 24, 10}, Orientation::Deg90));
}
