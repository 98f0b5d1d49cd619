#pragma once

#include <cstdint>
#include <random>

namespace heraldsim {

/// SplitMix64 mixing step; used to derive substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seedable random stream backed by mt19937_64. Independent substreams are
/// derived from (seed, counter) with SplitMix64 so that per-arm draws and
/// parallel trials never share state.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    static RngStream substream(std::uint64_t seed, std::uint64_t counter) {
        return RngStream(splitmix64(splitmix64(seed) ^ splitmix64(counter)));
    }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    /// Uniform integer in [lo, hi).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi - 1)(engine_);
    }

    std::int64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<std::int64_t>(mean)(engine_);
    }

    double normal(double mean, double sigma) {
        if (sigma <= 0.0) return mean;
        return std::normal_distribution<double>(mean, sigma)(engine_);
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return std::bernoulli_distribution(p)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

} // namespace heraldsim
