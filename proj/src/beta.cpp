#include "atsearch/beta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "atsearch/errors.hpp"
#include "atsearch/rng.hpp"

namespace atsearch {

double log_beta_function(double alpha, double beta) {
    return std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta);
}

double beta_pdf(const BetaModel& model, double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument("beta_pdf argument outside [0, 1]");
    }
    const double a = model.alpha;
    const double b = model.beta;
    if (x == 0.0) {
        if (a > 1.0) return 0.0;
        if (a == 1.0) return std::exp(-log_beta_function(a, b));
        return std::numeric_limits<double>::infinity();
    }
    if (x == 1.0) {
        if (b > 1.0) return 0.0;
        if (b == 1.0) return std::exp(-log_beta_function(a, b));
        return std::numeric_limits<double>::infinity();
    }
    return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
                    log_beta_function(a, b));
}

double likelihood_ratio(const BetaModel& fg, const BetaModel& bg, double x) {
    const double num = beta_pdf(fg, x);
    const double den = beta_pdf(bg, x);
    const bool num_inf = std::isinf(num);
    const bool den_inf = std::isinf(den);
    if (num_inf && den_inf) return 1.0;
    if (num == 0.0 && den == 0.0) return 1.0;
    if (den == 0.0 || num_inf) return kLikelihoodRatioCap;
    if (den_inf) return 0.0;
    return std::min(num / den, kLikelihoodRatioCap);
}

double digamma(double x) {
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
    return result;
}

double trigamma(double x) {
    double result = 0.0;
    while (x < 6.0) {
        result += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += inv * (1.0 + 0.5 * inv +
                     inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 / 42.0)));
    return result;
}

BetaModel fit_beta_mle(std::span<const double> samples) {
    if (samples.size() < 10) {
        throw std::invalid_argument("beta fit requires at least 10 samples");
    }
    constexpr double kClamp = 1e-6;
    std::vector<double> x(samples.begin(), samples.end());
    for (double& v : x) v = std::clamp(v, kClamp, 1.0 - kClamp);

    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) {
        throw DegenerateSampleError("beta fit: samples carry no spread");
    }

    const double n = double(x.size());
    double mean = 0.0;
    for (const double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (const double v : x) var += (v - mean) * (v - mean);
    var /= n;
    if (var <= 0.0) {
        throw DegenerateSampleError("beta fit: samples carry no spread");
    }

    double mean_log = 0.0;
    double mean_log1m = 0.0;
    for (const double v : x) {
        mean_log += std::log(v);
        mean_log1m += std::log1p(-v);
    }
    mean_log /= n;
    mean_log1m /= n;

    // Method-of-moments start.
    double common = mean * (1.0 - mean) / var - 1.0;
    if (!(common > 0.0)) common = 1.0;
    double a = std::clamp(mean * common, 1e-3, 1e6);
    double b = std::clamp((1.0 - mean) * common, 1e-3, 1e6);

    for (int iter = 0; iter < 100; ++iter) {
        const double psi_ab = digamma(a + b);
        const double g1 = psi_ab - digamma(a) + mean_log;
        const double g2 = psi_ab - digamma(b) + mean_log1m;
        if (std::max(std::abs(g1), std::abs(g2)) < 1e-8) break;

        const double tri_ab = trigamma(a + b);
        const double h11 = tri_ab - trigamma(a);
        const double h22 = tri_ab - trigamma(b);
        const double det = h11 * h22 - tri_ab * tri_ab;
        if (det == 0.0 || !std::isfinite(det)) break;
        double da = -(h22 * g1 - tri_ab * g2) / det;
        double db = -(h11 * g2 - tri_ab * g1) / det;

        // Backtrack to stay in the positive quadrant.
        double step = 1.0;
        while (a + step * da <= 0.0 || b + step * db <= 0.0) step *= 0.5;
        a += step * da;
        b += step * db;
        a = std::clamp(a, 1e-6, 1e8);
        b = std::clamp(b, 1e-6, 1e8);
    }
    return BetaModel{a, b};
}

double l2_distance(const BetaModel& a, const BetaModel& b, std::int64_t n_samples,
                   std::uint64_t seed) {
    if (n_samples < 1000) {
        throw std::invalid_argument("l2_distance requires n_samples >= 1000");
    }
    Rng rng(seed);
    double acc = 0.0;
    for (std::int64_t i = 0; i < n_samples; ++i) {
        const double x = rng.uniform01();  // strictly inside (0, 1)
        const double diff = beta_pdf(a, x) - beta_pdf(b, x);
        acc += diff * diff;
    }
    return acc / double(n_samples);
}

}  // namespace atsearch
