#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace plantcap {

/// Seeded RNG with explicitly implemented draws (no std::*_distribution), so
/// that identical seeds give identical streams on every platform and build.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Independent stream derived from (master, stream) via splitmix64 mixing.
    /// Used to hand chains and replicates their own generators.
    static Rng derive(std::uint64_t master, std::uint64_t stream);

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (two uniforms per call, no cached spare).
    double normal();
    double normal(double mu, double sd) { return mu + sd * normal(); }

    /// Uniform integer on [lo, hi] inclusive, rejection-sampled to avoid bias.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    std::int64_t binomial(std::int64_t n, double p);

    /// Sequential conditional-binomial multinomial draw.
    std::vector<std::int64_t> multinomial(std::int64_t n, std::span<const double> probs);

  private:
    std::mt19937_64 gen_;
};

} // namespace plantcap
