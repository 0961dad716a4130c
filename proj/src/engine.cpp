#include "atsearch/engine.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <tuple>

#include "atsearch/errors.hpp"

namespace atsearch {

const char* outcome_name(Outcome outcome) {
    switch (outcome) {
        case Outcome::Detected: return "detected";
        case Outcome::NoTarget: return "no_target";
        case Outcome::BudgetExhausted: return "budget_exhausted";
    }
    return "unknown";
}

namespace {

double mi_from_masses(std::span<const double> mass, int k, int level, const DistanceTable& table) {
    const int scales = int(mass.size());
    double total = 0.0;
    for (double m : mass) total += m;
    const double u0 = std::max(0.0, 1.0 - total);  // complement: elsewhere or absent
    double info = 0.0;
    for (int s = 1; s <= scales; ++s) {
        const double us = mass[s - 1];
        if (us <= 0.0) continue;
        info += u0 * us * table.at(k, level, 0, s);
        for (int m = s + 1; m <= scales; ++m)
            info += us * mass[m - 1] * table.at(k, level, s, m);
    }
    return info;
}

void check_compat(const Lattice& lat, const SearchConfig& config, const ModelSet& models,
                  const DistanceTable& table) {
    if (models.levels() != lat.depth() || models.scales() != config.scales() ||
        models.soft_families() != kSoftFamilyCount)
        throw std::invalid_argument("engine: models do not match the image depth or scale count");
    if (table.levels() != models.levels() || table.scales() != models.scales() ||
        table.soft_families() != models.soft_families())
        throw std::invalid_argument("engine: distance table does not match the models");
}

}  // namespace

double mutual_information(const Posterior& posterior, CellId cell, int k,
                          const DistanceTable& table) {
    if (k < 1 || k > table.soft_families())
        throw std::invalid_argument("engine: soft family out of range");
    std::optional<double> found;
    posterior.visit([&](const Posterior::CellView& view) {
        if (view.id == cell) found = mi_from_masses(view.mass, k, cell.level, table);
    });
    if (!found) throw std::invalid_argument("engine: cell is not instantiated");
    return *found;
}

std::optional<Selection> select_query(const SearchState& state, const DistanceTable& table,
                                      double d_star) {
    const Posterior& post = state.posterior;
    const int soft = table.soft_families();
    const int scales = table.scales();
    const int depth = post.lattice().depth();
    std::optional<Selection> best;
    auto better = [&best](double score, const QueryId& q) {
        if (!best) return true;
        if (score != best->score) return score > best->score;
        return std::make_tuple(q.cell.level, q.cell.index, q.k) <
               std::make_tuple(best->id.cell.level, best->id.cell.index, best->id.k);
    };
    post.visit([&](const Posterior::CellView& view) {
        for (int k = 1; k <= soft; ++k) {
            const QueryId q{k, view.id};
            if (state.was_asked(q)) continue;
            const double score = mi_from_masses(view.mass, k, view.id.level, table);
            if (better(score, q)) best = Selection{q, score};
        }
        if (view.id.level == depth && view.frontier) {
            for (int s = 1; s <= scales; ++s) {
                const QueryId q{soft + s, view.id};
                if (state.was_asked(q)) continue;
                const double us = view.mass[s - 1];
                const double score = us * (1.0 - us) * d_star;
                if (better(score, q)) best = Selection{q, score};
            }
        }
    });
    return best;
}

StepResult step(SearchState& state, const IntegralSet& integrals, const ModelSet& models,
                const DistanceTable& table, double d_star, Oracle& oracle,
                const SearchConfig& config, std::int64_t budget_used_before) {
    const Lattice& lat = state.posterior.lattice();
    const int soft = table.soft_families();
    StepResult out;

    // A pose holding nearly all mass is confirmed directly; information gain
    // alone would keep preferring soft queries that can no longer change the
    // answer.
    std::optional<Selection> sel;
    const auto me = state.posterior.map_estimate();
    if (!me.pose.absent &&
        state.posterior.pose_mass(me.pose.x, me.pose.y, me.pose.s) > 1.0 - config.epsilon) {
        const QueryId forced{soft + me.pose.s, lat.leaf_at(me.pose.x, me.pose.y)};
        if (!state.was_asked(forced)) sel = Selection{forced, 1.0};
    }
    if (!sel) sel = select_query(state, table, d_star);
    if (!sel) {
        out.status = StepStatus::PoolExhausted;
        return out;
    }

    const QueryId q = sel->id;
    ++state.steps;
    const std::int64_t t = state.steps;
    const Rect rect = lat.cell_rect(q.cell);

    if (!is_perfect_family(q.k)) {
        const double x = query_value(integrals, soft_family(q.k), rect);
        ++state.soft_evals;
        std::vector<double> ratios(std::size_t(table.scales()));
        for (int s = 1; s <= table.scales(); ++s)
            ratios[s - 1] =
                likelihood_ratio(models.at(q.k, q.cell.level, s), models.at(q.k, q.cell.level, 0), x);
        const double z = state.posterior.apply_update(q.cell, ratios);
        state.mark_asked(q);
        if (state.tracing)
            state.trace.push_back(
                {t, q.k, q.cell.level, q.cell.index, x, z, state.oracle_evals, state.soft_evals});
    } else {
        const int s = q.k - soft;
        const int px = rect.x;
        const int py = rect.y;  // pixel cell
        const double confidence = state.posterior.pose_mass(px, py, s);
        bool positive = false;
        bool complete = true;
        for (double g : config.sizes_in_interval(s)) {
            if (budget_used_before + state.oracle_evals >= config.gamma) {
                complete = false;  // sweep cut short: no conclusion, no update
                break;
            }
            ++state.oracle_evals;
            if (oracle.evaluate(px, py, g)) {
                positive = true;
                break;
            }
        }
        if (positive) {
            state.mark_asked(q);
            // A match pins down the interval, not the exact size; the box spans
            // the interval's upper bound so it covers every pose that could
            // still match the same target.
            const int side = int(std::lround(config.scale_intervals[std::size_t(s - 1)].hi)) + 2;
            const Rect box = intersect({px - side / 2, py - side / 2, side, side}, lat.image_rect());
            out.detection =
                Detection{Pose{px, py, s, false}, box, confidence, state.oracle_evals,
                          state.soft_evals};
            out.status = StepStatus::Detected;
            if (state.tracing)
                state.trace.push_back({t, q.k, q.cell.level, q.cell.index, 1.0, 1.0,
                                       state.oracle_evals, state.soft_evals});
            return out;
        }
        if (!complete) {
            if (state.tracing)
                state.trace.push_back({t, q.k, q.cell.level, q.cell.index, 0.0, 1.0,
                                       state.oracle_evals, state.soft_evals});
            return out;
        }
        std::vector<double> ratios(std::size_t(table.scales()), 1.0);
        ratios[s - 1] = 0.0;
        const double z = state.posterior.apply_update(q.cell, ratios);
        state.posterior.mark_dead(q.cell, s);
        state.mark_asked(q);
        if (state.tracing)
            state.trace.push_back(
                {t, q.k, q.cell.level, q.cell.index, 0.0, z, state.oracle_evals, state.soft_evals});
    }

    if (state.posterior.absent_mass() > 1.0 - config.epsilon ||
        state.posterior.live_pose_count() == 0)
        out.status = StepStatus::NoTarget;
    return out;
}

SearchResult run_single(const GrayImage& image, const SearchConfig& config, const ModelSet& models,
                        const DistanceTable& table, Oracle& oracle, bool tracing) {
    config.validate();
    const Lattice lat = build_lattice(image.width, image.height);
    check_compat(lat, config, models, table);
    const IntegralSet integrals = detect_edges(image, config.edge_threshold);
    const double d_star = table.max_at_level(lat.depth());

    SearchState state(Posterior::init(lat, 0.5, config.scales(), config.tau));
    state.tracing = tracing;
    state.unobserved_pixels = std::int64_t(image.width) * image.height;

    SearchResult res;
    for (;;) {
        if (state.oracle_evals >= config.gamma ||
            (config.max_steps > 0 && state.steps >= config.max_steps)) {
            res.outcome = Outcome::BudgetExhausted;
            break;
        }
        const StepResult sr = step(state, integrals, models, table, d_star, oracle, config);
        if (sr.status == StepStatus::Detected) {
            res.outcome = Outcome::Detected;
            res.detection = sr.detection;
            break;
        }
        if (sr.status == StepStatus::NoTarget) {
            res.outcome = Outcome::NoTarget;
            break;
        }
        if (sr.status == StepStatus::PoolExhausted) {
            res.outcome = state.posterior.absent_mass() > 0.5 ? Outcome::NoTarget
                                                              : Outcome::BudgetExhausted;
            break;
        }
    }
    const auto me = state.posterior.map_estimate();
    res.map_pose = me.pose;
    res.map_prob = me.prob;
    res.oracle_evals = state.oracle_evals;
    res.soft_evals = state.soft_evals;
    res.steps = state.steps;
    res.trace = std::move(state.trace);
    return res;
}

MultiResult run_multi(const GrayImage& image, const SearchConfig& config, const ModelSet& models,
                      const DistanceTable& table, Oracle& oracle, bool tracing) {
    config.validate();
    const Lattice lat = build_lattice(image.width, image.height);
    check_compat(lat, config, models, table);
    IntegralSet integrals = detect_edges(image, config.edge_threshold);
    const double d_star = table.max_at_level(lat.depth());

    MultiResult res;
    std::vector<Rect> claimed;
    for (;;) {
        const std::int64_t unclaimed =
            std::int64_t(image.width) * image.height - rect_union_area(lat.image_rect(), claimed);
        if (unclaimed <= 0) break;
        const double prior_absent = std::exp(-config.lambda * double(unclaimed));

        SearchState state(
            Posterior::init_blocked(lat, prior_absent, config.scales(), config.tau, claimed));
        state.tracing = tracing;
        state.unobserved_pixels = unclaimed;
        if (state.posterior.live_pose_count() == 0) break;

        bool stop_all = false;
        bool detected = false;
        for (;;) {
            if (res.oracle_evals + state.oracle_evals >= config.gamma ||
                (config.max_steps > 0 && res.steps + state.steps >= config.max_steps)) {
                res.budget_exhausted = true;
                stop_all = true;
                break;
            }
            const StepResult sr =
                step(state, integrals, models, table, d_star, oracle, config, res.oracle_evals);
            if (sr.status == StepStatus::Detected) {
                Detection det = *sr.detection;
                det.oracle_evals += res.oracle_evals;  // cumulative across the sweep
                det.soft_evals += res.soft_evals;
                res.detections.push_back(det);
                claimed.push_back(det.box);
                integrals = erase_edges(integrals, det.box);
                detected = true;
                break;
            }
            if (sr.status == StepStatus::NoTarget) {
                stop_all = true;
                break;
            }
            if (sr.status == StepStatus::PoolExhausted) {
                res.budget_exhausted = state.posterior.absent_mass() <= 0.5;
                stop_all = true;
                break;
            }
        }
        res.oracle_evals += state.oracle_evals;
        res.soft_evals += state.soft_evals;
        res.steps += state.steps;
        if (tracing) res.trace.insert(res.trace.end(), state.trace.begin(), state.trace.end());
        if (stop_all || !detected) break;
    }
    return res;
}

void write_trace(std::span<const TraceRecord> trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("trace: cannot write " + path.string());
    char line[256];
    for (const auto& r : trace) {
        std::snprintf(line, sizeof line, "%lld %d %d %lld %.12g %.12g %lld %lld\n",
                      static_cast<long long>(r.t), r.k, r.level, static_cast<long long>(r.index),
                      r.x, r.z, static_cast<long long>(r.oracle_evals),
                      static_cast<long long>(r.soft_evals));
        out << line;
    }
}

}  // namespace atsearch
