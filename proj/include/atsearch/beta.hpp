#pragma once

#include <cstdint>
#include <span>

namespace atsearch {

/// Two-parameter Beta density on [0, 1].
struct BetaModel {
    double alpha = 1.0;
    double beta = 1.0;

    friend bool operator==(const BetaModel&, const BetaModel&) = default;
};

/// Ratios are capped here when the background density underflows, so a single
/// query can never collapse the posterior onto one cell.
inline constexpr double kLikelihoodRatioCap = 1e6;

/// Density of `model` at x in [0, 1]. At the endpoints the usual limit
/// conventions apply: 0 when the corresponding shape parameter exceeds 1,
/// +infinity when it is below 1.
[[nodiscard]] double beta_pdf(const BetaModel& model, double x);

[[nodiscard]] double log_beta_function(double alpha, double beta);

/// fg.pdf(x) / bg.pdf(x) with the conventions: 1 when both densities vanish
/// (or both diverge), kLikelihoodRatioCap when only the background vanishes.
/// Always finite.
[[nodiscard]] double likelihood_ratio(const BetaModel& fg, const BetaModel& bg,
                                      double x);

/// Maximum-likelihood Beta fit: method-of-moments start, then Newton on the
/// digamma system. Samples are clamped to [1e-6, 1 - 1e-6] first. Requires
/// >= 10 samples; throws DegenerateSampleError when they carry no spread.
[[nodiscard]] BetaModel fit_beta_mle(std::span<const double> samples);

/// Monte-Carlo estimate of the squared L2 distance between the two densities,
/// integral of (f_a - f_b)^2 over [0, 1], from n_samples uniform draws.
/// Bit-deterministic for a given seed.
[[nodiscard]] double l2_distance(const BetaModel& a, const BetaModel& b,
                                 std::int64_t n_samples, std::uint64_t seed);

[[nodiscard]] double digamma(double x);
[[nodiscard]] double trigamma(double x);

}  // namespace atsearch
