#pragma once

#include <cstdint>

namespace atsearch {

/// splitmix64 step; used both as a stand-alone mixer for deriving independent
/// substream seeds and as the engine behind Rng.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a substream seed from a master seed and a stream tag, so that
/// per-(k,i,s) work is reproducible regardless of evaluation order.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    std::uint64_t s = master ^ (0x6a09e667f3bcc909ULL + tag * 0x9e3779b97f4a7c15ULL);
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

/// Small deterministic generator (xoshiro-free, splitmix-driven). All draws
/// are built from explicit integer arithmetic so streams are identical across
/// standard libraries, which the bit-reproducibility contracts rely on.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform double strictly inside (0, 1).
    double uniform01() {
        return (double((next_u64() >> 11)) + 0.5) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). n must be >= 1.
    std::uint64_t below(std::uint64_t n) {
        // Rejection-free modulo is fine here; n is tiny relative to 2^64.
        return next_u64() % n;
    }

    int range(int lo, int hi_inclusive) {
        return lo + int(below(std::uint64_t(hi_inclusive - lo + 1)));
    }

    bool bernoulli(double p) { return uniform01() < p; }

  private:
    std::uint64_t state_;
};

}  // namespace atsearch
