#include "plantcap/rng.hpp"

#include <cmath>
#include <numbers>

namespace plantcap {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

} // namespace

Rng Rng::derive(std::uint64_t master, std::uint64_t stream) {
    return Rng(splitmix64(splitmix64(master) ^ splitmix64(stream + 0x51ed27f4a7c15ull)));
}

double Rng::normal() {
    // Box-Muller; u1 bounded away from 0 so log() stays finite.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo);
    if (span == 0) return lo;
    std::uint64_t mask = span;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    std::uint64_t draw;
    do {
        draw = gen_() & mask;
    } while (draw > span);
    return lo + static_cast<std::int64_t>(draw);
}

std::int64_t Rng::binomial(std::int64_t n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::int64_t k = 0;
    for (std::int64_t i = 0; i < n; ++i)
        if (uniform() < p) ++k;
    return k;
}

std::vector<std::int64_t> Rng::multinomial(std::int64_t n, std::span<const double> probs) {
    std::vector<std::int64_t> out(probs.size(), 0);
    double rest = 1.0;
    std::int64_t left = n;
    for (std::size_t j = 0; j + 1 < probs.size() && left > 0; ++j) {
        const double q = rest > 0.0 ? probs[j] / rest : 1.0;
        out[j] = binomial(left, q > 1.0 ? 1.0 : q);
        left -= out[j];
        rest -= probs[j];
    }
    if (!probs.empty()) out[probs.size() - 1] = left;
    return out;
}

} // namespace plantcap
