#pragma once
// Seed derivation and the few sampling primitives the simulator needs.
//
// All draws go through std::mt19937_64 (fully specified by the standard) and
// the hand-written transforms below, so a given seed produces the same stream
// on every conforming toolchain. std::*_distribution is avoided on purpose:
// its algorithms are implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace pooled {

using Seed = std::uint64_t;
using Engine = std::mt19937_64;

/// Purpose tags keep the streams for different random objects independent.
enum class StreamTag : std::uint64_t {
    labels = 0x6c6162656c73ULL,
    design = 0x64657369676eULL,
    noise = 0x6e6f697365ULL,
    tie_break = 0x746965ULL,
    bootstrap = 0x626f6f74ULL,
    instance = 0x696e7374ULL,
    simplex = 0x73696d706cULL,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// hash(master, index, tag); distinct (index, tag) pairs give unrelated seeds.
inline constexpr Seed derive_seed(Seed master, std::uint64_t index, StreamTag tag) noexcept {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ splitmix64(index + 0x632be59bd9b4e019ULL));
    return splitmix64(h ^ static_cast<std::uint64_t>(tag));
}

inline Engine make_engine(Seed seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Engine(seq);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Engine& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by rejection; bound > 0.
inline std::uint64_t uniform_below(Engine& gen, std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = gen();
    while (x >= limit) x = gen();
    return x % bound;
}

inline bool bernoulli(Engine& gen, double q) { return uniform01(gen) < q; }

/// Standard normal by Box-Muller, cosine branch only (one normal per two uniforms).
inline double standard_normal(Engine& gen) {
    double u1 = uniform01(gen);
    while (u1 <= 0.0) u1 = uniform01(gen);
    const double u2 = uniform01(gen);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Exp(1) variate by inversion.
inline double standard_exponential(Engine& gen) {
    double u = uniform01(gen);
    while (u <= 0.0) u = uniform01(gen);
    return -std::log(u);
}

}  // namespace pooled
