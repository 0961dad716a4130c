#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <vector>

#include "doctest.h"

#include "atsearch/engine.hpp"
#include "atsearch/errors.hpp"
#include "atsearch/rng.hpp"
#include "atsearch/scene.hpp"
#include "support/flat_search.hpp"
#include "support/trained_fixture.hpp"

using namespace atsearch;
using atsearch::testing::FlatPosterior;
using atsearch::testing::fixture_config;
using atsearch::testing::fixture_scene;
using atsearch::testing::trained_fixture;

namespace {

// An all-identical model set makes every soft query uninformative (r = 1).
ModelSet flat_models(int levels, int scales) {
    ModelSet models(levels, scales, kSoftFamilyCount);
    for (int k = 1; k <= kSoftFamilyCount; ++k)
        for (int i = 1; i <= levels; ++i)
            for (int s = 0; s <= scales; ++s) models.set(k, i, s, {2.0, 2.0});
    return models;
}

DistanceTable zero_table(int levels, int scales) {
    DistanceTable table(levels, scales, kSoftFamilyCount);
    for (int k = 1; k <= kSoftFamilyCount; ++k)
        for (int i = 1; i <= levels; ++i)
            for (int s = 0; s <= scales; ++s)
                for (int m = s + 1; m <= scales; ++m) table.set(k, i, s, m, 0.0);
    return table;
}

SearchConfig tiny_config() {
    SearchConfig cfg;
    cfg.scale_intervals = {{4, 9}};
    cfg.validate();
    return cfg;
}

}  // namespace

TEST_CASE("mutual information reproduces the two-hypothesis product") {
    const Lattice lat = build_lattice(4, 4);
    const Posterior p = Posterior::init(lat, 0.5, 1, 1e-3);
    DistanceTable table = zero_table(lat.depth(), 1);
    table.set(1, 1, 0, 1, 0.4);
    // Root carries u = 0.5; I = u0 * u1 * d = 0.5 * 0.5 * 0.4.
    CHECK(mutual_information(p, {1, 1}, 1, table) == doctest::Approx(0.1));
    // A family with zero distance is worthless everywhere.
    CHECK(mutual_information(p, {1, 1}, 2, table) == 0.0);
}

TEST_CASE("mutual information vanishes without mass") {
    const Lattice lat = build_lattice(4, 4);
    Posterior p = Posterior::init(lat, 0.0, 1, 1e-3);
    const double kill[] = {0.0};
    (void)p.apply_update({2, 4}, kill);  // bottom-right quarter now empty
    DistanceTable table = zero_table(lat.depth(), 1);
    for (int i = 1; i <= lat.depth(); ++i) table.set(1, i, 0, 1, 0.4);
    CHECK(mutual_information(p, {2, 4}, 1, table) == 0.0);
    CHECK(mutual_information(p, {2, 1}, 1, table) > 0.0);
}

TEST_CASE("selection walks the information argmax") {
    const Lattice lat = build_lattice(4, 4);
    SearchState state(Posterior::init(lat, 0.5, 1, 1e-3));
    DistanceTable table = zero_table(lat.depth(), 1);
    table.set(7, 1, 0, 1, 0.9);  // only family 7 at the root is informative

    const auto first = select_query(state, table, 0.9);
    REQUIRE(first.has_value());
    CHECK(first->id == QueryId{7, {1, 1}});
    CHECK(first->score == doctest::Approx(0.25 * 0.9));

    state.mark_asked(first->id);
    const auto second = select_query(state, table, 0.9);
    REQUIRE(second.has_value());
    CHECK(second->id != first->id);
    CHECK(second->score <= first->score);
    // With every remaining score zero the tie-break walks to the lowest
    // (level, index, k): family 1 at the root.
    CHECK(second->id == QueryId{1, {1, 1}});
}

TEST_CASE("concentrated mass summons the perfect test") {
    const Lattice lat = build_lattice(4, 4);
    Posterior p = Posterior::init(lat, 0.5, 1, 1e-3);
    const double boost[] = {5000.0};
    (void)p.apply_update(lat.leaf_at(2, 2), boost);
    REQUIRE(p.pose_mass(2, 2, 1) > 0.9);
    SearchState state(std::move(p));
    DistanceTable table = zero_table(lat.depth(), 1);
    for (int i = 1; i <= lat.depth(); ++i) table.set(1, i, 0, 1, 0.3);

    // With a single scale the soft query on the hot cell scores u(1-u)d too,
    // and the tie-break prefers the lower family id; once it is spent the
    // perfect test dominates every other soft candidate.
    const auto first = select_query(state, table, 0.3);
    REQUIRE(first.has_value());
    CHECK(first->id == QueryId{1, lat.leaf_at(2, 2)});
    state.mark_asked(first->id);

    const auto pick = select_query(state, table, 0.3);
    REQUIRE(pick.has_value());
    CHECK(is_perfect_family(pick->id.k));
    CHECK(pick->id.cell == lat.leaf_at(2, 2));
    CHECK(pick->score > 0.0);
    CHECK(pick->score == doctest::Approx(first->score));
}

TEST_CASE("steps on an uninformative family leave the posterior alone") {
    const SearchConfig cfg = tiny_config();
    const Lattice lat = build_lattice(8, 8);
    const ModelSet models = flat_models(lat.depth(), 1);
    DistanceTable table = zero_table(lat.depth(), 1);
    // Family 1 informative at every level, so soft queries keep outranking
    // the perfect tests; the root query wins the first step.
    for (int i = 1; i <= lat.depth(); ++i) table.set(1, i, 0, 1, 0.5);
    const GrayImage img(8, 8, 128);
    const IntegralSet integrals = detect_edges(img);
    GroundTruthOracle oracle({}, cfg);

    SearchState state(Posterior::init(lat, 0.5, 1, cfg.tau));
    const double before = state.posterior.absent_mass();
    const StepResult r = step(state, integrals, models, table, 0.5, oracle, cfg);
    CHECK(r.status == StepStatus::Continue);
    CHECK(state.posterior.absent_mass() == doctest::Approx(before).epsilon(1e-12));
    CHECK(state.soft_evals == 1);
    CHECK(state.oracle_evals == 0);
    REQUIRE(state.trace.empty());  // tracing off by default
    state.tracing = true;
    (void)step(state, integrals, models, table, 0.5, oracle, cfg);
    CHECK(state.trace.size() == 1);
    CHECK(state.trace[0].z == doctest::Approx(1.0));
}

TEST_CASE("a perfect positive detects, a perfect negative kills the pose") {
    const SearchConfig cfg = tiny_config();
    const Lattice lat = build_lattice(8, 8);
    const ModelSet models = flat_models(lat.depth(), 1);
    const DistanceTable table = zero_table(lat.depth(), 1);
    const GrayImage img(8, 8, 128);
    const IntegralSet integrals = detect_edges(img);

    // Concentrated past 1 - epsilon: the engine then forces the confirming
    // perfect test regardless of the (zero) information scores.
    auto concentrated = [&](int px, int py) {
        Posterior p = Posterior::init(lat, 0.5, 1, cfg.tau);
        const double boost[] = {1e8};
        (void)p.apply_update(lat.leaf_at(px, py), boost);
        REQUIRE(p.pose_mass(px, py, 1) > 1.0 - cfg.epsilon);
        return p;
    };

    SUBCASE("positive") {
        GroundTruthOracle oracle({{4, 4, 6}}, cfg);
        SearchState state(concentrated(4, 4));
        const StepResult r = step(state, integrals, models, table, 0.0, oracle, cfg);
        REQUIRE(r.status == StepStatus::Detected);
        REQUIRE(r.detection.has_value());
        CHECK(r.detection->pose == Pose{4, 4, 1, false});
        CHECK(cfg.interval_of_size(double(r.detection->box.w)) == 1);
        CHECK(r.detection->confidence > 0.9);
        CHECK(state.oracle_evals > 0);
    }

    SUBCASE("negative") {
        GroundTruthOracle oracle({}, cfg);
        SearchState state(concentrated(4, 4));
        const StepResult r = step(state, integrals, models, table, 0.0, oracle, cfg);
        CHECK(r.status != StepStatus::Detected);
        CHECK(state.posterior.pose_mass(4, 4, 1) == 0.0);
        CHECK(state.posterior.is_dead(4, 4, 1));
        CHECK(state.oracle_evals == std::int64_t(cfg.sizes_in_interval(1).size()));
    }
}

TEST_CASE("single search finds a planted target") {
    const auto& fx = trained_fixture();
    const SceneSpec spec = fixture_scene(1, 1);
    const GrayImage img = synth_scene(spec);
    GroundTruthOracle oracle(oracle_targets(spec), fx.config);
    const SearchResult res =
        run_single(img, fx.config, fx.models, fx.table, oracle, true);
    REQUIRE(res.outcome == Outcome::Detected);
    REQUIRE(res.detection.has_value());
    const TargetSpec& target = spec.targets[0];
    CHECK(target.box().contains(res.detection->pose.x, res.detection->pose.y));
    CHECK(res.detection->pose.s == fx.config.interval_of_size(target.size));
    CHECK(res.oracle_evals > 0);
    CHECK(res.oracle_evals == oracle.stats().evaluations);
    CHECK(res.soft_evals > 0);
    CHECK(res.steps == std::int64_t(res.trace.size()));

    // The trace never repeats a query.
    std::set<std::tuple<int, int, std::int64_t>> seen;
    for (const auto& rec : res.trace)
        CHECK(seen.insert({rec.k, rec.level, rec.index}).second);
}

TEST_CASE("single search is deterministic") {
    const auto& fx = trained_fixture();
    const SceneSpec spec = fixture_scene(2, 1);
    const GrayImage img = synth_scene(spec);
    GroundTruthOracle oracle_a(oracle_targets(spec), fx.config);
    GroundTruthOracle oracle_b(oracle_targets(spec), fx.config);
    const SearchResult a = run_single(img, fx.config, fx.models, fx.table, oracle_a, true);
    const SearchResult b = run_single(img, fx.config, fx.models, fx.table, oracle_b, true);
    CHECK(a.outcome == b.outcome);
    CHECK(a.oracle_evals == b.oracle_evals);
    CHECK(a.soft_evals == b.soft_evals);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t n = 0; n < a.trace.size(); ++n) {
        CHECK(a.trace[n].k == b.trace[n].k);
        CHECK(a.trace[n].level == b.trace[n].level);
        CHECK(a.trace[n].index == b.trace[n].index);
        CHECK(a.trace[n].x == b.trace[n].x);
        CHECK(a.trace[n].z == b.trace[n].z);
    }
}

TEST_CASE("blank scenes end in no-target with few oracle calls") {
    const auto& fx = trained_fixture();
    SceneSpec spec;
    spec.width = 64;
    spec.height = 64;
    spec.seed = 4242;
    const GrayImage img = synth_scene(spec);
    GroundTruthOracle oracle({}, fx.config);
    const SearchResult res = run_single(img, fx.config, fx.models, fx.table, oracle);
    CHECK(res.outcome == Outcome::NoTarget);
    CHECK(res.detection == std::nullopt);
    CHECK(res.oracle_evals < fx.config.pose_space_size(64, 64) / 100);
}

TEST_CASE("zero budget exhausts immediately but still reports a map estimate") {
    const auto& fx = trained_fixture();
    SearchConfig cfg = fx.config;
    cfg.gamma = 0;
    const SceneSpec spec = fixture_scene(3, 1);
    const GrayImage img = synth_scene(spec);
    GroundTruthOracle oracle(oracle_targets(spec), cfg);
    const SearchResult res = run_single(img, cfg, fx.models, fx.table, oracle);
    CHECK(res.outcome == Outcome::BudgetExhausted);
    CHECK(res.steps == 0);
    CHECK(res.oracle_evals == 0);
    CHECK(res.map_pose.absent);  // the untouched uniform prior: absent 0.5 wins
    CHECK(res.map_prob == doctest::Approx(0.5));

    // A step cap alone also terminates with the budget verdict.
    SearchConfig capped = fx.config;
    capped.max_steps = 5;
    GroundTruthOracle oracle2(oracle_targets(spec), capped);
    const SearchResult res2 = run_single(img, capped, fx.models, fx.table, oracle2);
    CHECK(res2.steps <= 5);
}

TEST_CASE("detection is sound against the oracle") {
    const auto& fx = trained_fixture();
    for (int n = 10; n < 16; ++n) {
        const SceneSpec spec = fixture_scene(n, n % 3 == 0 ? 0 : 1);
        const GrayImage img = synth_scene(spec);
        GroundTruthOracle oracle(oracle_targets(spec), fx.config);
        const SearchResult res = run_single(img, fx.config, fx.models, fx.table, oracle);
        if (res.outcome != Outcome::Detected) continue;
        // A reported pose must match a planted target: same scale interval,
        // centre within a quarter of the true size.
        const Pose& p = res.detection->pose;
        bool match = false;
        for (const auto& t : spec.targets)
            match = match || (fx.config.interval_of_size(double(t.size)) == p.s &&
                              std::abs(t.x - p.x) * 4 <= t.size &&
                              std::abs(t.y - p.y) * 4 <= t.size);
        CHECK(match);
        CHECK(res.detection->box.w >= 1);
        CHECK(res.detection->box.contains(p.x, p.y));
    }
}

TEST_CASE("exhaustive fallback still finds the target") {
    // Uninformative models, tau 0, unlimited budget: the search must fall
    // back to enumerating perfect tests and find the planted target anyway.
    SearchConfig cfg = tiny_config();
    cfg.tau = 0.0;
    const int side = 8;
    const ModelSet models = flat_models(build_lattice(side, side).depth(), 1);
    const DistanceTable table = zero_table(models.levels(), 1);
    SceneSpec spec;
    spec.width = side;
    spec.height = side;
    spec.targets = {{4, 4, 6}};
    spec.seed = 8;
    const GrayImage img = synth_scene(spec);
    GroundTruthOracle oracle(oracle_targets(spec), cfg);
    const SearchResult res = run_single(img, cfg, models, table, oracle);
    REQUIRE(res.outcome == Outcome::Detected);
    CHECK(spec.targets[0].box().contains(res.detection->pose.x, res.detection->pose.y));
}

TEST_CASE("selection agrees with the flat recomputation during a real run") {
    const auto& fx = trained_fixture();
    const SceneSpec spec = fixture_scene(4, 1);
    const GrayImage img = synth_scene(spec);
    const IntegralSet integrals = detect_edges(img, fx.config.edge_threshold);
    const Lattice lat = build_lattice(64, 64);
    const double d_star = fx.table.max_at_level(lat.depth());

    SearchState state(Posterior::init(lat, 0.5, fx.config.scales(), fx.config.tau));
    FlatPosterior flat(lat, 0.5, fx.config.scales());
    GroundTruthOracle oracle(oracle_targets(spec), fx.config);

    for (int t = 0; t < 40; ++t) {
        // Stop before the engine would force a confirming perfect test.
        const auto est = state.posterior.map_estimate();
        if (!est.pose.absent &&
            state.posterior.pose_mass(est.pose.x, est.pose.y, est.pose.s) >
                1.0 - fx.config.epsilon)
            break;
        const auto expected = flat_select(state.posterior, flat, state, fx.table);
        const auto chosen = select_query(state, fx.table, d_star);
        REQUIRE(chosen.has_value());
        REQUIRE(expected.has_value());
        CHECK(chosen->id == expected->id);
        CHECK(chosen->score == doctest::Approx(expected->score).scale(1.0).epsilon(1e-9));
        if (is_perfect_family(chosen->id.k)) break;
        // Mirror the update into the flat posterior before the next round.
        const QueryFamilyDescriptor family = soft_family(chosen->id.k);
        const Rect rect = lat.cell_rect(chosen->id.cell);
        const double x = query_value(integrals, family, rect);
        std::vector<double> ratios(std::size_t(fx.config.scales()));
        for (int s = 1; s <= fx.config.scales(); ++s)
            ratios[std::size_t(s - 1)] =
                likelihood_ratio(fx.models.at(chosen->id.k, chosen->id.cell.level, s),
                                 fx.models.at(chosen->id.k, chosen->id.cell.level, 0), x);
        (void)flat.apply_update(rect, ratios);
        const StepResult r =
            step(state, integrals, fx.models, fx.table, d_star, oracle, fx.config);
        REQUIRE(r.status == StepStatus::Continue);
    }
}

TEST_CASE("multi-target sweep collects every planted target") {
    const auto& fx = trained_fixture();
    SceneSpec spec;
    spec.width = 64;
    spec.height = 64;
    spec.clutter_blobs = 2;  // same background texture as the training corpus
    spec.targets = {{12, 12, 13}, {46, 14, 14}, {30, 48, 13}};
    spec.seed = 33;
    const GrayImage img = synth_scene(spec);
    GroundTruthOracle oracle(oracle_targets(spec), fx.config);
    const MultiResult res = run_multi(img, fx.config, fx.models, fx.table, oracle);
    REQUIRE(res.detections.size() == 3);
    CHECK_FALSE(res.budget_exhausted);
    std::set<std::size_t> matched;
    for (const auto& det : res.detections) {
        bool found = false;
        for (std::size_t n = 0; n < spec.targets.size(); ++n) {
            if (spec.targets[n].box().contains(det.pose.x, det.pose.y) &&
                fx.config.interval_of_size(double(spec.targets[n].size)) == det.pose.s) {
                matched.insert(n);
                found = true;
            }
        }
        CHECK(found);
    }
    CHECK(matched.size() == 3);
}

TEST_CASE("multi-target stops clean on a blank scene") {
    const auto& fx = trained_fixture();
    SceneSpec spec;
    spec.width = 64;
    spec.height = 64;
    spec.seed = 99;
    const GrayImage img = synth_scene(spec);
    GroundTruthOracle oracle({}, fx.config);
    const MultiResult res = run_multi(img, fx.config, fx.models, fx.table, oracle);
    CHECK(res.detections.empty());
    CHECK_FALSE(res.budget_exhausted);
}

TEST_CASE("trace files hold one record per line") {
    const auto& fx = trained_fixture();
    const SceneSpec spec = fixture_scene(5, 1);
    const GrayImage img = synth_scene(spec);
    GroundTruthOracle oracle(oracle_targets(spec), fx.config);
    const SearchResult res = run_single(img, fx.config, fx.models, fx.table, oracle, true);
    REQUIRE(!res.trace.empty());

    const auto path = std::filesystem::temp_directory_path() / "atsearch_trace_test.txt";
    write_trace(res.trace, path);
    std::ifstream in(path);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string token;
        int fields = 0;
        while (ls >> token) ++fields;
        CHECK(fields == 8);
        ++lines;
    }
    CHECK(lines == res.trace.size());
    CHECK(res.trace.front().t == 1);
    CHECK(res.trace.back().t == std::int64_t(res.trace.size()));
}

TEST_CASE("incompatible models are rejected") {
    const auto& fx = trained_fixture();
    const GrayImage img(64, 64, 128);
    GroundTruthOracle oracle({}, fx.config);
    SearchConfig wrong = fx.config;
    wrong.scale_intervals = {{11, 22}, {22, 33}, {33, 44}};
    CHECK_THROWS_AS((void)run_single(img, wrong, fx.models, fx.table, oracle),
                    std::invalid_argument);
    const GrayImage small(16, 16, 128);
    CHECK_THROWS_AS((void)run_single(small, fx.config, fx.models, fx.table, oracle),
                    std::invalid_argument);
}
