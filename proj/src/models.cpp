#include "atsearch/models.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "atsearch/errors.hpp"
#include "atsearch/features.hpp"
#include "atsearch/lattice.hpp"
#include "atsearch/rng.hpp"

namespace atsearch {

namespace {

std::string triple_name(int k, int i, int s) {
    return "(k=" + std::to_string(k) + ", i=" + std::to_string(i) + ", s=" + std::to_string(s) +
           ")";
}

std::uint64_t triple_tag(int k, int i, int s) {
    return (std::uint64_t(k) << 32) | (std::uint64_t(i) << 16) | std::uint64_t(s);
}

std::uint64_t pair_tag(int k, int i, int s, int m) {
    return (triple_tag(k, i, s) << 8) | std::uint64_t(m);
}

}  // namespace

ModelSet::ModelSet(int levels, int scales, int soft_families)
    : levels_(levels), scales_(scales), soft_families_(soft_families) {
    if (levels < 1 || scales < 1 || soft_families < 1)
        throw std::invalid_argument("models: levels, scales and families must be positive");
    const std::size_t n = std::size_t(soft_families) * levels * (scales + 1);
    models_.resize(n);
    present_.assign(n, 0);
}

std::size_t ModelSet::slot(int k, int i, int s) const {
    return (std::size_t(k - 1) * levels_ + std::size_t(i - 1)) * (scales_ + 1) + std::size_t(s);
}

bool ModelSet::has(int k, int i, int s) const {
    if (k < 1 || k > soft_families_ || i < 1 || i > levels_ || s < 0 || s > scales_) return false;
    return present_[slot(k, i, s)] != 0;
}

const BetaModel& ModelSet::at(int k, int i, int s) const {
    if (!has(k, i, s)) throw ModelCoverageError("models: no model for " + triple_name(k, i, s));
    return models_[slot(k, i, s)];
}

void ModelSet::set(int k, int i, int s, BetaModel model) {
    if (k < 1 || k > soft_families_ || i < 1 || i > levels_ || s < 0 || s > scales_)
        throw std::invalid_argument("models: triple out of range " + triple_name(k, i, s));
    if (!(model.alpha > 0.0) || !(model.beta > 0.0))
        throw std::invalid_argument("models: non-positive Beta parameters for " +
                                    triple_name(k, i, s));
    models_[slot(k, i, s)] = model;
    present_[slot(k, i, s)] = 1;
}

void ModelSet::require_complete() const {
    for (int k = 1; k <= soft_families_; ++k)
        for (int i = 1; i <= levels_; ++i)
            for (int s = 0; s <= scales_; ++s)
                if (!has(k, i, s))
                    throw ModelCoverageError("models: missing model for " + triple_name(k, i, s));
}

DistanceTable::DistanceTable(int levels, int scales, int soft_families)
    : levels_(levels), scales_(scales), soft_families_(soft_families) {
    if (levels < 1 || scales < 1 || soft_families < 1)
        throw std::invalid_argument("models: levels, scales and families must be positive");
    const std::size_t n =
        std::size_t(soft_families) * levels * (scales + 1) * (scales + 1);
    d_.assign(n, std::numeric_limits<double>::quiet_NaN());
    for (int k = 1; k <= soft_families; ++k)
        for (int i = 1; i <= levels; ++i)
            for (int s = 0; s <= scales; ++s) d_[slot(k, i, s, s)] = 0.0;
}

std::size_t DistanceTable::slot(int k, int i, int s, int m) const {
    const std::size_t cell = std::size_t(k - 1) * levels_ + std::size_t(i - 1);
    return (cell * (scales_ + 1) + std::size_t(s)) * (scales_ + 1) + std::size_t(m);
}

double DistanceTable::at(int k, int i, int s, int m) const {
    if (k < 1 || k > soft_families_ || i < 1 || i > levels_ || s < 0 || s > scales_ || m < 0 ||
        m > scales_)
        throw ModelCoverageError("models: no distance for " + triple_name(k, i, s) +
                                 " vs s=" + std::to_string(m));
    const double d = d_[slot(k, i, s, m)];
    if (std::isnan(d))
        throw ModelCoverageError("models: no distance for " + triple_name(k, i, s) +
                                 " vs s=" + std::to_string(m));
    return d;
}

void DistanceTable::set(int k, int i, int s, int m, double d) {
    if (k < 1 || k > soft_families_ || i < 1 || i > levels_ || s < 0 || s > scales_ || m < 0 ||
        m > scales_)
        throw std::invalid_argument("models: distance slot out of range");
    if (!(d >= 0.0)) throw std::invalid_argument("models: distance must be non-negative");
    d_[slot(k, i, s, m)] = d;
    d_[slot(k, i, m, s)] = d;
}

double DistanceTable::max_at_level(int i) const {
    double best = 0.0;
    for (int k = 1; k <= soft_families_; ++k)
        for (int s = 0; s <= scales_; ++s)
            for (int m = s + 1; m <= scales_; ++m) best = std::max(best, at(k, i, s, m));
    return best;
}

DistanceTable build_distance_table(const ModelSet& models, std::int64_t n_samples,
                                   std::uint64_t seed) {
    models.require_complete();
    DistanceTable table(models.levels(), models.scales(), models.soft_families());
    for (int k = 1; k <= models.soft_families(); ++k)
        for (int i = 1; i <= models.levels(); ++i)
            for (int s = 0; s <= models.scales(); ++s)
                for (int m = s + 1; m <= models.scales(); ++m)
                    table.set(k, i, s, m,
                              l2_distance(models.at(k, i, s), models.at(k, i, m), n_samples,
                                          derive_seed(seed, pair_tag(k, i, s, m))));
    return table;
}

ModelSet train_models(std::span<const TrainScene> scenes, const SearchConfig& config,
                      std::int64_t samples_per_config, std::uint64_t seed) {
    config.validate();
    if (scenes.empty()) throw TrainingCoverageError("train: no scenes");
    if (samples_per_config < 10)
        throw std::invalid_argument("train: need at least 10 samples per configuration");
    const int width = scenes[0].image.width;
    const int height = scenes[0].image.height;
    for (const auto& sc : scenes)
        if (sc.image.width != width || sc.image.height != height)
            throw std::invalid_argument("train: scenes must share image dimensions");

    const Lattice lat = build_lattice(width, height);
    const int levels = lat.depth();
    const int scales = config.scales();

    std::vector<IntegralSet> integrals;
    integrals.reserve(scenes.size());
    for (const auto& sc : scenes) integrals.push_back(detect_edges(sc.image, config.edge_threshold));

    // Cells holding a matching target center, grouped by [level][scale].
    std::vector<std::vector<std::vector<std::pair<int, CellId>>>> fg(
        levels + 1, std::vector<std::vector<std::pair<int, CellId>>>(scales + 1));
    for (std::size_t n = 0; n < scenes.size(); ++n)
        for (const auto& t : scenes[n].targets) {
            const int s = config.interval_of_size(double(t.size));
            if (s == 0)
                throw std::invalid_argument("train: target size " + std::to_string(t.size) +
                                            " outside the scale intervals");
            if (t.x < 0 || t.x >= width || t.y < 0 || t.y >= height)
                throw std::invalid_argument("train: target center outside the image");
            for (int i = 1; i <= levels; ++i)
                fg[i][s].push_back({int(n), lat.cell_at(i, t.x, t.y)});
        }

    ModelSet out(levels, scales, kSoftFamilyCount);
    std::vector<double> values;
    for (int k = 1; k <= kSoftFamilyCount; ++k) {
        const QueryFamilyDescriptor family = soft_family(k);
        for (int i = 1; i <= levels; ++i) {
            for (int s = 0; s <= scales; ++s) {
                Rng rng(derive_seed(seed, triple_tag(k, i, s)));
                values.clear();
                if (s == 0) {
                    // Rejection sample (scene, cell) pairs whose rect holds no
                    // target center; blank scenes carry the coarse levels.
                    const std::int64_t cells = lat.cells_at_level(i);
                    const std::int64_t max_attempts = samples_per_config * 1000;
                    std::int64_t attempts = 0;
                    while (std::int64_t(values.size()) < samples_per_config &&
                           attempts < max_attempts) {
                        ++attempts;
                        const int n = int(rng.below(scenes.size()));
                        const CellId id{i, 1 + std::int64_t(rng.below(std::uint64_t(cells)))};
                        const Rect rect = lat.cell_rect(id);
                        if (rect.empty()) continue;
                        bool holds_center = false;
                        for (const auto& t : scenes[n].targets)
                            if (rect.contains(t.x, t.y)) {
                                holds_center = true;
                                break;
                            }
                        if (holds_center) continue;
                        values.push_back(query_value(integrals[n], family, rect));
                    }
                    if (std::int64_t(values.size()) < samples_per_config)
                        throw TrainingCoverageError(
                            "train: cannot sample background for " + triple_name(k, i, s) +
                            "; add scenes with target-free cells at this level");
                } else {
                    const auto& pool = fg[i][s];
                    if (pool.empty())
                        throw TrainingCoverageError("train: no scene provides a target for " +
                                                    triple_name(k, i, s));
                    for (std::int64_t q = 0; q < samples_per_config; ++q) {
                        const auto& [n, id] = pool[rng.below(pool.size())];
                        values.push_back(query_value(integrals[n], family, lat.cell_rect(id)));
                    }
                }
                try {
                    out.set(k, i, s, fit_beta_mle(values));
                } catch (const DegenerateSampleError&) {
                    throw TrainingCoverageError("train: responses for " + triple_name(k, i, s) +
                                                " have no spread; vary the scenes");
                }
            }
        }
    }
    return out;
}

void save_models(const ModelBundle& bundle, const std::filesystem::path& path) {
    bundle.models.require_complete();
    nlohmann::json j;
    j["version"] = 1;
    j["M"] = bundle.models.scales();
    j["D"] = bundle.models.levels();
    j["K_soft"] = bundle.models.soft_families();
    j["seed"] = bundle.seed;
    auto& ms = j["models"] = nlohmann::json::array();
    for (int k = 1; k <= bundle.models.soft_families(); ++k)
        for (int i = 1; i <= bundle.models.levels(); ++i)
            for (int s = 0; s <= bundle.models.scales(); ++s) {
                const BetaModel& b = bundle.models.at(k, i, s);
                ms.push_back(
                    {{"k", k}, {"i", i}, {"s", s}, {"alpha", b.alpha}, {"beta", b.beta}});
            }
    auto& ds = j["distance_table"] = nlohmann::json::array();
    for (int k = 1; k <= bundle.models.soft_families(); ++k)
        for (int i = 1; i <= bundle.models.levels(); ++i)
            for (int s = 0; s <= bundle.models.scales(); ++s)
                for (int m = s + 1; m <= bundle.models.scales(); ++m)
                    ds.push_back({{"k", k},
                                  {"i", i},
                                  {"s", s},
                                  {"m", m},
                                  {"d", bundle.table.at(k, i, s, m)}});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("models: cannot write " + path.string());
    out << j.dump(2) << '\n';
}

ModelBundle load_models(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("models: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("models: " + path.string() + ": " + e.what());
    }
    try {
        if (j.value("version", 0) != 1)
            throw std::invalid_argument("models: unsupported version in " + path.string());
        ModelBundle bundle;
        const int scales = j.at("M").get<int>();
        const int levels = j.at("D").get<int>();
        const int families = j.at("K_soft").get<int>();
        bundle.seed = j.value("seed", std::uint64_t(0));
        bundle.models = ModelSet(levels, scales, families);
        for (const auto& m : j.at("models"))
            bundle.models.set(m.at("k").get<int>(), m.at("i").get<int>(), m.at("s").get<int>(),
                              {m.at("alpha").get<double>(), m.at("beta").get<double>()});
        bundle.models.require_complete();
        bundle.table = DistanceTable(levels, scales, families);
        for (const auto& d : j.at("distance_table"))
            bundle.table.set(d.at("k").get<int>(), d.at("i").get<int>(), d.at("s").get<int>(),
                             d.at("m").get<int>(), d.at("d").get<double>());
        for (int k = 1; k <= families; ++k)
            for (int i = 1; i <= levels; ++i)
                for (int s = 0; s <= scales; ++s)
                    for (int m = s + 1; m <= scales; ++m) (void)bundle.table.at(k, i, s, m);
        return bundle;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("models: " + path.string() + ": " + e.what());
    }
}

std::string file_hash_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("hash: cannot open " + path.string());
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize p = 0; p < got; ++p) {
            h ^= std::uint8_t(buf[p]);
            h *= 1099511628211ULL;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

}  // namespace atsearch
