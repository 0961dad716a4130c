#include "atsearch/image.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>
#include <string>

namespace atsearch {

void save_pgm(const GrayImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.data.data()),
              std::streamsize(image.data.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

int read_pgm_token(std::istream& in) {
    // Skips whitespace and '#' comment lines, then reads one decimal token.
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    if (c == EOF || !std::isdigit(c)) throw std::runtime_error("malformed PGM header");
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    return value;
}

}  // namespace

GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    char magic[2];
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5') {
        throw std::runtime_error("not a binary PGM (P5): " + path.string());
    }
    const int width = read_pgm_token(in);
    const int height = read_pgm_token(in);
    const int maxval = read_pgm_token(in);
    if (width < 1 || height < 1 || maxval != 255) {
        throw std::runtime_error("unsupported PGM geometry in " + path.string());
    }
    GrayImage image(width, height);
    in.read(reinterpret_cast<char*>(image.data.data()),
            std::streamsize(image.data.size()));
    if (in.gcount() != std::streamsize(image.data.size())) {
        throw std::runtime_error("truncated PGM payload in " + path.string());
    }
    return image;
}

}  // namespace atsearch
