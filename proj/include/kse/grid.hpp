#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "kse/errors.hpp"
#include "kse/fft.hpp"

namespace kse {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Immutable description of an n x n periodic grid together with the tables
// every spectral operation needs: integer wavenumbers in FFT index order,
// the 2/3-rule dealiasing mask, and the DFT plan for this size. Built once
// by build_grid() and shared (read-only) between all fields on the grid.
//
// Physical samples live at x_j = -L/2 + j*L/n per axis; coefficients are
// indexed by integer modes k with components in [-n/2, n/2). Differential
// operators scale k by 2*pi/L, which is the identity for the default
// domain length 2*pi.
struct GridSpec {
    int n = 0;                    // modes per axis (even, >= 4)
    double domain_length = kTwoPi;
    int nyquist = 0;              // n/2
    double dealias_cutoff = 0.0;  // n/3, kept as a double on purpose
    double wavenumber_scale = 1.0;  // 2*pi / domain_length
    std::vector<int> wavenumbers;   // per-axis mode for index i: i < n/2 ? i : i - n
    std::vector<std::uint8_t> dealias_mask;  // n*n entries, 1 = keep
    FftPlan plan;

    explicit GridSpec(int n_, double length)
        : n(n_),
          domain_length(length),
          nyquist(n_ / 2),
          dealias_cutoff(n_ / 3.0),
          wavenumber_scale(kTwoPi / length),
          plan(n_) {
        wavenumbers.resize(n);
        for (int i = 0; i < n; ++i) wavenumbers[i] = (i < nyquist) ? i : i - n;
        dealias_mask.resize(size());
        for (int i1 = 0; i1 < n; ++i1) {
            for (int i2 = 0; i2 < n; ++i2) {
                const int a = std::abs(wavenumbers[i1]);
                const int b = std::abs(wavenumbers[i2]);
                const int m = (a > b) ? a : b;
                dealias_mask[index(i1, i2)] = (static_cast<double>(m) < dealias_cutoff) ? 1 : 0;
            }
        }
    }

    std::size_t size() const { return static_cast<std::size_t>(n) * n; }
    int index(int i1, int i2) const { return i1 * n + i2; }

    // Wavenumber components of the flattened coefficient index.
    int k1_at(std::size_t idx) const { return wavenumbers[idx / n]; }
    int k2_at(std::size_t idx) const { return wavenumbers[idx % n]; }

    // FFT storage index of integer mode (k1, k2), components in [-n/2, n/2).
    int mode_index(int k1, int k2) const {
        const int i1 = (k1 >= 0) ? k1 : k1 + n;
        const int i2 = (k2 >= 0) ? k2 : k2 + n;
        return index(i1, i2);
    }

    double dx() const { return domain_length / n; }
    double x_coord(int j) const { return -0.5 * domain_length + j * dx(); }
};

using GridPtr = std::shared_ptr<const GridSpec>;

inline GridPtr build_grid(int n, double domain_length = kTwoPi) {
    if (n < 4) throw ConfigError("build_grid: n must be at least 4");
    if (n % 2 != 0) throw ConfigError("build_grid: n must be even");
    if (!(domain_length > 0.0)) throw ConfigError("build_grid: domain_length must be positive");
    return std::make_shared<const GridSpec>(n, domain_length);
}

}  // namespace kse
