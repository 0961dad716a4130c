#pragma once

// Beta-distributed draws for test fixtures, via Marsaglia-Tsang gamma
// sampling. Independent of the library's fitting code on purpose: these
// generate the samples the estimator is judged against.

#include <cmath>
#include <numbers>

#include "atsearch/rng.hpp"

namespace atsearch::testing {

inline double normal01(Rng& rng) {
    const double u1 = rng.uniform01();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double gamma_draw(Rng& rng, double shape) {
    if (shape < 1.0)
        return gamma_draw(rng, shape + 1.0) * std::pow(rng.uniform01(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = normal01(rng);
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = rng.uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

inline double beta_draw(Rng& rng, double alpha, double beta) {
    const double x = gamma_draw(rng, alpha);
    const double y = gamma_draw(rng, beta);
    return x / (x + y);
}

}  // namespace atsearch::testing
