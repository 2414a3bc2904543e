#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace fgm {

// Deterministic, platform-stable random streams.
//
// std::mt19937_64's output sequence is fully specified by the standard, but the
// distribution adaptors are not, so uniforms and normals are derived here by
// explicit bit manipulation / Box-Muller.  Substreams are keyed by
// (seed, purpose, index) through a splitmix64 hash so that independent parts of
// a construction (scores vs. observation noise vs. fold shuffles) never share a
// stream and never depend on call order across parts.
//
// Purpose tags in use:
//   "scores"        latent score draws in sample_dataset
//   "noise"         observation noise in sample_dataset
//   "modelC/edges"  Model C power-law edge sampling (index = retry attempt)
//   "modelC/omega"  Model C Omega entry draws (index = retry attempt)
//   "modelD/blocks" Model D block Bernoulli draws
//   "folds"         cross-validation fold shuffles (index = node)
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
    // FNV-1a, stable across platforms.
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Substream keyed by (seed, purpose, index).
    Rng(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0)
        : engine_(splitmix64(splitmix64(seed ^ hash_tag(purpose)) ^ index)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer uniform on [0, n) by rejection (exact, platform-stable).
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller; the partner variate is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        constexpr double two_pi = 6.283185307179586476925286766559;
        spare_ = r * std::sin(two_pi * u2);
        have_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

    // Fisher-Yates shuffle, stable across platforms.
    template <typename Vec>
    void shuffle(Vec& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace fgm
