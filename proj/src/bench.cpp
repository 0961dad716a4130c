#include "atsearch/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "atsearch/rng.hpp"

namespace atsearch {

SlidingWindowResult sliding_window(int width, int height, const SearchConfig& config,
                                   Oracle& oracle, std::uint64_t seed) {
    config.validate();
    if (width < 1 || height < 1) throw std::invalid_argument("bench: empty image");
    const std::vector<double> grid = config.size_grid();
    const std::int64_t pixels = std::int64_t(width) * height;
    Rng rng(seed);
    const std::int64_t start = std::int64_t(rng.below(std::uint64_t(pixels)));

    SlidingWindowResult res;
    for (std::int64_t n = 0; n < pixels; ++n) {
        const std::int64_t p = (start + n) % pixels;
        const int x = int(p % width);
        const int y = int(p / width);
        for (double g : grid) {
            ++res.oracle_evals;
            if (!oracle.evaluate(x, y, g)) continue;
            const int side = std::max(1, int(std::lround(g)));
            const Rect box =
                intersect({x - side / 2, y - side / 2, side, side}, Rect{0, 0, width, height});
            res.detection = Detection{Pose{x, y, config.interval_of_size(g), false}, box, 1.0,
                                      res.oracle_evals, 0};
            return res;
        }
    }
    return res;
}

namespace {

bool detection_correct(const SceneSpec& spec, const SearchConfig& config, const Pose& pose) {
    for (const auto& t : spec.targets) {
        if (config.interval_of_size(double(t.size)) != pose.s) continue;
        if (t.box().contains(pose.x, pose.y)) return true;
    }
    return false;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / double(v.size());
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
        return (hi + v[mid - 1]) / 2.0;
    }
    return hi;
}

}  // namespace

BenchReport bench_compare(std::span<const BenchScene> scenes, const SearchConfig& config,
                          const ModelSet& models, const DistanceTable& table,
                          std::uint64_t seed) {
    config.validate();
    BenchReport report;
    if (scenes.empty()) return report;  // vacuous input: empty report
    report.pose_space = config.pose_space_size(scenes[0].image.width, scenes[0].image.height);

    using clock = std::chrono::steady_clock;
    for (std::size_t n = 0; n < scenes.size(); ++n) {
        const BenchScene& scene = scenes[n];
        const bool has_targets = !scene.spec.targets.empty();

        {
            GroundTruthOracle oracle(oracle_targets(scene.spec), config);
            const auto t0 = clock::now();
            const SearchResult sr = run_single(scene.image, config, models, table, oracle);
            const auto t1 = clock::now();
            BenchRow row;
            row.scene_id = scene.id;
            row.method = "at";
            row.detected = sr.outcome == Outcome::Detected;
            row.correct = has_targets
                              ? (row.detected && detection_correct(scene.spec, config,
                                                                   sr.detection->pose))
                              : !row.detected;
            row.oracle_evals = sr.oracle_evals;
            row.soft_evals = sr.soft_evals;
            row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            report.rows.push_back(std::move(row));
        }
        {
            GroundTruthOracle oracle(oracle_targets(scene.spec), config);
            const auto t0 = clock::now();
            const SlidingWindowResult sw = sliding_window(
                scene.image.width, scene.image.height, config, oracle, derive_seed(seed, n));
            const auto t1 = clock::now();
            BenchRow row;
            row.scene_id = scene.id;
            row.method = "sw";
            row.detected = sw.detection.has_value();
            row.correct = has_targets
                              ? (row.detected && detection_correct(scene.spec, config,
                                                                   sw.detection->pose))
                              : !row.detected;
            row.oracle_evals = sw.oracle_evals;
            row.soft_evals = 0;
            row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

void write_report_csv(const BenchReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("bench: cannot write " + path.string());
    out << "scene_id,method,detected,correct,oracle_evals,soft_evals\n";
    for (const auto& r : report.rows)
        out << r.scene_id << ',' << r.method << ',' << int(r.detected) << ',' << int(r.correct)
            << ',' << r.oracle_evals << ',' << r.soft_evals << '\n';
}

void write_timing_csv(const BenchReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("bench: cannot write " + path.string());
    out << "scene_id,method,wall_ms\n";
    char buf[64];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%.3f", r.wall_ms);
        out << r.scene_id << ',' << r.method << ',' << buf << '\n';
    }
}

std::string summary_json(const BenchReport& report) {
    nlohmann::json j;
    j["pose_space"] = report.pose_space;
    for (const char* method : {"at", "sw"}) {
        std::vector<double> evals;
        std::vector<double> walls;
        int detected = 0;
        int correct = 0;
        int rows = 0;
        for (const auto& r : report.rows) {
            if (r.method != method) continue;
            ++rows;
            evals.push_back(double(r.oracle_evals));
            walls.push_back(r.wall_ms);
            detected += r.detected;
            correct += r.correct;
        }
        nlohmann::json m;
        m["scenes"] = rows;
        m["detected"] = detected;
        m["correct"] = correct;
        m["mean_oracle_evals"] = mean_of(evals);
        m["median_oracle_evals"] = median_of(evals);
        m["mean_wall_ms"] = mean_of(walls);
        j[method] = std::move(m);
    }
    const double at_mean = j["at"]["mean_oracle_evals"].get<double>();
    const double sw_mean = j["sw"]["mean_oracle_evals"].get<double>();
    j["evals_ratio_sw_over_at"] = at_mean > 0.0 ? sw_mean / at_mean : 0.0;

    // Histogram of search evals, for eyeballing the heavy tail against the
    // baseline's flat cost.
    std::vector<double> at_evals;
    for (const auto& r : report.rows)
        if (r.method == "at") at_evals.push_back(double(r.oracle_evals));
    double hi = 0.0;
    for (double e : at_evals) hi = std::max(hi, e);
    const int bins = 10;
    const double width = hi > 0.0 ? hi / bins : 1.0;
    auto& hist = j["at_evals_histogram"] = nlohmann::json::array();
    for (int b = 0; b < bins; ++b) {
        const double lo = width * b;
        const double up = width * (b + 1);
        int count = 0;
        for (double e : at_evals)
            if (e >= lo && (e < up || (b == bins - 1 && e <= up))) ++count;
        hist.push_back({{"lo", lo}, {"hi", up}, {"count", count}});
    }
    std::int64_t within = 0;
    std::int64_t at_rows = 0;
    for (const auto& r : report.rows)
        if (r.method == "at") {
            ++at_rows;
            if (double(r.oracle_evals) <= 0.05 * double(report.pose_space)) ++within;
        }
    j["at_within_5pct_pose_space"] = at_rows > 0 ? double(within) / double(at_rows) : 0.0;
    return j.dump(2);
}

}  // namespace atsearch
