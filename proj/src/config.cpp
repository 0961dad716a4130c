#include "atsearch/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace atsearch {

void SearchConfig::validate() const {
    if (scale_intervals.empty()) throw std::invalid_argument("config: no scale intervals");
    for (std::size_t s = 0; s < scale_intervals.size(); ++s) {
        const auto& iv = scale_intervals[s];
        if (!(iv.lo > 0.0) || !(iv.hi > iv.lo))
            throw std::invalid_argument("config: scale interval must satisfy 0 < lo < hi");
        if (s > 0 && iv.lo < scale_intervals[s - 1].hi)
            throw std::invalid_argument("config: scale intervals must be ascending and disjoint");
    }
    if (!(tau >= 0.0 && tau < 1.0)) throw std::invalid_argument("config: tau must be in [0,1)");
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("config: epsilon must be in (0,0.5)");
    // gamma == 0 is the degenerate zero budget: searches exhaust immediately.
    if (gamma < 0) throw std::invalid_argument("config: gamma must be non-negative");
    if (max_steps < 0) throw std::invalid_argument("config: max_steps must be non-negative");
    if (!(lambda > 0.0)) throw std::invalid_argument("config: lambda must be positive");
    if (mc_samples < 1000) throw std::invalid_argument("config: mc_samples must be at least 1000");
    if (edge_threshold < 0 || edge_threshold > 254)
        throw std::invalid_argument("config: edge_threshold must be in [0,254]");
}

SearchConfig SearchConfig::defaults_for(int width, int height) {
    if (width < 8 || height < 8)
        throw std::invalid_argument("config: image must be at least 8x8 for default scales");
    const double dim = std::min(width, height);
    const double lo = std::max(4.0, std::round(0.17 * dim));
    const double hi = std::max(lo + 4.0, std::round(0.51 * dim));
    SearchConfig cfg;
    const double step = (hi - lo) / 4.0;
    for (int s = 0; s < 4; ++s)
        cfg.scale_intervals.push_back({lo + step * s, lo + step * (s + 1)});
    cfg.validate();
    return cfg;
}

SearchConfig SearchConfig::preset_caltech() {
    SearchConfig cfg;
    cfg.scale_intervals = {{100, 150}, {150, 200}, {200, 250}, {250, 300}};
    return cfg;
}

std::vector<double> SearchConfig::size_grid() const {
    const double lo = scale_intervals.front().lo;
    const double hi = scale_intervals.back().hi;
    std::vector<double> grid;
    for (double g = lo; g < hi; g *= 1.1) grid.push_back(g);
    grid.push_back(hi);
    return grid;
}

std::vector<double> SearchConfig::sizes_in_interval(int s) const {
    std::vector<double> out;
    for (double g : size_grid())
        if (interval_of_size(g) == s) out.push_back(g);
    return out;
}

int SearchConfig::interval_of_size(double size) const {
    const int m = scales();
    for (int s = 1; s <= m; ++s) {
        const auto& iv = scale_intervals[s - 1];
        // Half-open so shared endpoints belong to the upper interval; the top
        // of the last interval is inclusive.
        if (size >= iv.lo && (size < iv.hi || (s == m && size == iv.hi))) return s;
    }
    return 0;
}

namespace {

nlohmann::json to_json(const SearchConfig& cfg) {
    nlohmann::json j;
    auto& ivs = j["scale_intervals"] = nlohmann::json::array();
    for (const auto& iv : cfg.scale_intervals) ivs.push_back({iv.lo, iv.hi});
    j["tau"] = cfg.tau;
    j["epsilon"] = cfg.epsilon;
    j["gamma"] = cfg.gamma;
    j["max_steps"] = cfg.max_steps;
    j["lambda"] = cfg.lambda;
    j["mc_seed"] = cfg.mc_seed;
    j["mc_samples"] = cfg.mc_samples;
    j["edge_threshold"] = cfg.edge_threshold;
    return j;
}

SearchConfig from_json(const nlohmann::json& j) {
    SearchConfig cfg;
    cfg.scale_intervals.clear();
    for (const auto& iv : j.at("scale_intervals")) {
        if (!iv.is_array() || iv.size() != 2)
            throw std::invalid_argument("config: each scale interval must be a [lo, hi] pair");
        cfg.scale_intervals.push_back({iv[0].get<double>(), iv[1].get<double>()});
    }
    cfg.tau = j.value("tau", cfg.tau);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.max_steps = j.value("max_steps", cfg.max_steps);
    cfg.lambda = j.value("lambda", cfg.lambda);
    cfg.mc_seed = j.value("mc_seed", cfg.mc_seed);
    cfg.mc_samples = j.value("mc_samples", cfg.mc_samples);
    cfg.edge_threshold = j.value("edge_threshold", cfg.edge_threshold);
    cfg.validate();
    return cfg;
}

}  // namespace

SearchConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: " + path.string() + ": " + e.what());
    }
    try {
        return from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: " + path.string() + ": " + e.what());
    }
}

void save_config(const SearchConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("config: cannot write " + path.string());
    out << to_json(config).dump(2) << '\n';
}

std::string config_to_json(const SearchConfig& config) { return to_json(config).dump(2); }

SearchConfig config_from_json(const std::string& text) {
    try {
        return from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
}

}  // namespace atsearch
