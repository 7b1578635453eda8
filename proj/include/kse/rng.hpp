#pragma once

#include <cstdint>

#include "kse/errors.hpp"
#include "kse/field.hpp"

namespace kse {

// splitmix64: tiny, well-mixed, and identical on every platform, which is
// what seeded initial data needs for bit-reproducible runs. Doubles come
// from the top 53 bits, so streams are exactly reproducible too.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double symmetric() { return 2.0 * uniform() - 1.0; }
};

// Random real-valued band-limited field: independent coefficients on the
// square |k1|,|k2| <= k_max, conjugate-symmetrized, zero mean. The stream is
// consumed in a fixed row-major mode order regardless of which draws end up
// used, so the result depends only on (seed, k_max), not on traversal
// short-cuts.
inline SpectralField random_band_field(const GridPtr& grid, int k_max, SplitMix64& rng) {
    if (k_max < 1) throw ConfigError("random_band_field: k_max must be >= 1");
    if (static_cast<double>(k_max) >= grid->dealias_cutoff || k_max >= grid->nyquist)
        throw ConfigError("random_band_field: k_max must sit inside the dealiased band");
    SpectralField f(grid);
    for (int k1 = -k_max; k1 <= k_max; ++k1) {
        for (int k2 = -k_max; k2 <= k_max; ++k2) {
            const double re = rng.symmetric();
            const double im = rng.symmetric();
            if (k1 == 0 && k2 == 0) continue;           // zero mean
            if (k1 < 0 || (k1 == 0 && k2 < 0)) continue;  // mirror fills these
            f.at(k1, k2) = Complex(re, im);
            f.at(-k1, -k2) = Complex(re, -im);
        }
    }
    return f;
}

}  // namespace kse
