#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "atsearch/geometry.hpp"

namespace atsearch {

/// 8-bit grayscale image, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(std::size_t(w) * std::size_t(h), fill) {}

    [[nodiscard]] std::uint8_t at(int x, int y) const {
        return data[std::size_t(y) * std::size_t(width) + std::size_t(x)];
    }
    std::uint8_t& at(int x, int y) {
        return data[std::size_t(y) * std::size_t(width) + std::size_t(x)];
    }
    [[nodiscard]] Rect rect() const { return {0, 0, width, height}; }
};

/// Binary PGM (P5, maxval 255). The writer emits a fixed header layout so
/// outputs are byte-reproducible; the loader accepts any valid P5 file.
void save_pgm(const GrayImage& image, const std::filesystem::path& path);
[[nodiscard]] GrayImage load_pgm(const std::filesystem::path& path);

}  // namespace atsearch
