// SPDX-License-Identifier: MIT
//
// Deterministic random-number utilities.
//
// All stochastic parts of the library (multistart initialization, scan
// sampling) must be bit-reproducible for a fixed master seed.  The mt19937_64
// engine is fully specified by the C++ standard, but the standard
// *distributions* are not, so the uniform/gaussian/simplex transforms are
// implemented here by hand on top of the raw 64-bit stream.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace cvp {

/// SplitMix64 step; used to derive independent substream seeds from a master
/// seed without correlation between consecutive stream indices.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic RNG: a seeded mt19937_64 plus portable transforms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Substream `idx` of master seed `master`: Rng(substream_seed(m, i)).
    static std::uint64_t substream_seed(std::uint64_t master, std::uint64_t idx) {
        return splitmix64(master ^ splitmix64(idx + 0x51ed2701a9b4c16dull));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the Marsaglia polar method (sqrt/log only, so the
    /// value depends on nothing but the engine stream and basic libm calls).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    /// A point of the probability simplex, ~ Dirichlet(1,...,1).
    std::vector<double> simplex(std::size_t n) {
        std::vector<double> w(n);
        double total = 0.0;
        for (auto& wi : w) {
            // -log(U) with U in (0,1]; uniform() is in [0,1) so flip it.
            wi = -std::log(1.0 - uniform());
            total += wi;
        }
        for (auto& wi : w) wi /= total;
        return w;
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace cvp
