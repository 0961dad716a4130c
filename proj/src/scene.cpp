#include "atsearch/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace atsearch {

namespace {

constexpr std::uint8_t kCanvas = 128;
constexpr std::uint8_t kBright = 238;
constexpr std::uint8_t kDark = 18;

void validate_spec(const SceneSpec& spec) {
    if (spec.width < 8 || spec.height < 8)
        throw std::invalid_argument("scene: image must be at least 8x8");
    if (spec.background_density < 0.0 || spec.background_density > 1.0 ||
        spec.target_density < 0.0 || spec.target_density > 1.0)
        throw std::invalid_argument("scene: densities must be in [0,1]");
    if (spec.clutter_blobs < 0) throw std::invalid_argument("scene: negative clutter count");
    const Rect frame{0, 0, spec.width, spec.height};
    for (std::size_t a = 0; a < spec.targets.size(); ++a) {
        const auto& t = spec.targets[a];
        if (t.size < 4) throw std::invalid_argument("scene: target size must be at least 4");
        const Rect box = t.box();
        if (box.x < 0 || box.y < 0 || box.x + box.w > frame.w || box.y + box.h > frame.h)
            throw std::invalid_argument("scene: target box leaves the image");
        for (std::size_t b = 0; b < a; ++b)
            if (overlap_area(box, spec.targets[b].box()) > 0)
                throw std::invalid_argument("scene: target boxes overlap");
    }
}

// Random bright/dark specks: neighbouring contrasts land in all four
// orientation bins, so per-window responses keep spread at every cell size.
void paint_texture(GrayImage& img, const Rect& box, double density, Rng& rng) {
    for (int y = box.y; y < box.y + box.h; ++y)
        for (int x = box.x; x < box.x + box.w; ++x) {
            if (!rng.bernoulli(density)) continue;
            img.at(x, y) = rng.bernoulli(0.5) ? kDark : kBright;
        }
}

}  // namespace

GrayImage synth_scene(const SceneSpec& spec) {
    validate_spec(spec);
    GrayImage img(spec.width, spec.height, kCanvas);
    Rng rng(spec.seed);

    // Sparse speckles; each lights up its four neighbours in the edge map.
    const double speckle = spec.background_density / 4.0;
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            if (!rng.bernoulli(speckle)) continue;
            img.at(x, y) = rng.bernoulli(0.5) ? std::uint8_t(kCanvas + 96) : std::uint8_t(kCanvas - 96);
        }

    for (int b = 0; b < spec.clutter_blobs; ++b) {
        int side = 8 + int(rng.below(9));
        side = std::min({side, spec.width - 2, spec.height - 2});
        for (int attempt = 0; attempt < 100; ++attempt) {
            const Rect blob{int(rng.below(std::uint64_t(spec.width - side + 1))),
                            int(rng.below(std::uint64_t(spec.height - side + 1))), side, side};
            bool clear = true;
            for (const auto& t : spec.targets) {
                Rect grown = t.box();
                grown.x -= 2;
                grown.y -= 2;
                grown.w += 4;
                grown.h += 4;
                if (overlap_area(blob, grown) > 0) {
                    clear = false;
                    break;
                }
            }
            if (!clear) continue;
            paint_texture(img, blob, 0.4, rng);
            break;
        }
    }

    for (const auto& t : spec.targets) paint_texture(img, t.box(), spec.target_density, rng);
    return img;
}

SceneSpec random_scene_spec(Rng& rng, int width, int height, int n_targets,
                            const SearchConfig& config) {
    SceneSpec spec;
    spec.width = width;
    spec.height = height;
    spec.seed = rng.next_u64();
    const int m = config.scales();
    for (int t = 0; t < n_targets; ++t) {
        bool placed = false;
        for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
            const auto& iv = config.scale_intervals[rng.below(std::uint64_t(m))];
            int size = int(std::lround(rng.uniform(iv.lo, iv.hi)));
            size = std::max(4, size);
            if (size > width || size > height) continue;
            TargetSpec cand;
            cand.size = size;
            cand.x = size / 2 + int(rng.below(std::uint64_t(width - size + 1)));
            cand.y = size / 2 + int(rng.below(std::uint64_t(height - size + 1)));
            Rect grown = cand.box();
            grown.x -= 4;
            grown.y -= 4;
            grown.w += 8;
            grown.h += 8;
            bool clear = true;
            for (const auto& other : spec.targets)
                if (overlap_area(grown, other.box()) > 0) {
                    clear = false;
                    break;
                }
            if (!clear) continue;
            spec.targets.push_back(cand);
            placed = true;
        }
        if (!placed)
            throw std::invalid_argument("scene: cannot place " + std::to_string(n_targets) +
                                        " disjoint targets in " + std::to_string(width) + "x" +
                                        std::to_string(height));
    }
    return spec;
}

std::vector<GroundTruthOracle::Target> oracle_targets(const SceneSpec& spec) {
    std::vector<GroundTruthOracle::Target> out;
    out.reserve(spec.targets.size());
    for (const auto& t : spec.targets) out.push_back({t.x, t.y, double(t.size)});
    return out;
}

namespace {

nlohmann::json spec_to_json(const SceneSpec& spec) {
    nlohmann::json j;
    j["width"] = spec.width;
    j["height"] = spec.height;
    j["background_density"] = spec.background_density;
    j["target_density"] = spec.target_density;
    j["clutter_blobs"] = spec.clutter_blobs;
    j["seed"] = spec.seed;
    auto& ts = j["targets"] = nlohmann::json::array();
    for (const auto& t : spec.targets) ts.push_back({{"x", t.x}, {"y", t.y}, {"size", t.size}});
    return j;
}

SceneSpec spec_from_json(const nlohmann::json& j) {
    SceneSpec spec;
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    spec.background_density = j.value("background_density", spec.background_density);
    spec.target_density = j.value("target_density", spec.target_density);
    spec.clutter_blobs = j.value("clutter_blobs", spec.clutter_blobs);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("targets"))
        for (const auto& t : j.at("targets"))
            spec.targets.push_back(
                {t.at("x").get<int>(), t.at("y").get<int>(), t.at("size").get<int>()});
    return spec;
}

}  // namespace

void save_truth(const SceneSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("scene: cannot write " + path.string());
    out << spec_to_json(spec).dump(2) << '\n';
}

SceneSpec load_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("scene: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        return spec_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("scene: " + path.string() + ": " + e.what());
    }
}

SceneSpec scene_spec_from_json(const std::string& text) {
    try {
        return spec_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("scene: ") + e.what());
    }
}

std::string scene_spec_to_json(const SceneSpec& spec) { return spec_to_json(spec).dump(2); }

void save_scene_set(std::span<const SceneSetEntry> scenes, const std::filesystem::path& path) {
    nlohmann::json j;
    auto& arr = j["scenes"] = nlohmann::json::array();
    for (const auto& entry : scenes) {
        nlohmann::json s = spec_to_json(entry.spec);
        s["id"] = entry.id;
        arr.push_back(std::move(s));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("scene: cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::vector<SceneSetEntry> load_scene_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("scene: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        std::vector<SceneSetEntry> out;
        if (j.contains("scenes")) {
            for (const auto& s : j.at("scenes")) {
                SceneSetEntry entry;
                entry.id = s.value("id", "scene_" + std::to_string(out.size()));
                entry.spec = spec_from_json(s);
                out.push_back(std::move(entry));
            }
        } else {
            out.push_back({path.stem().string(), spec_from_json(j)});
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("scene: " + path.string() + ": " + e.what());
    }
}

}  // namespace atsearch
