#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "kse/errors.hpp"

namespace kse {

using Complex = std::complex<double>;

namespace detail {

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline int next_pow2(int n) {
    int m = 1;
    while (m < n) m <<= 1;
    return m;
}

// Unnormalized iterative radix-2 kernel. `tw` holds e^{-2*pi*i*j/n} for
// j < n/2, `rev` the bit-reversal permutation. sign = -1 forward, +1 inverse.
// Loop structure is fixed, so repeated calls reduce in the same order and
// results are bit-reproducible.
inline void fft_pow2(Complex* a, int n, int sign, const std::vector<Complex>& tw,
                     const std::vector<int>& rev) {
    for (int i = 0; i < n; ++i) {
        int j = rev[i];
        if (j > i) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int half = len >> 1;
        const int step = n / len;
        for (int start = 0; start < n; start += len) {
            for (int j = 0; j < half; ++j) {
                Complex w = tw[j * step];
                if (sign > 0) w = std::conj(w);
                const Complex u = a[start + j];
                const Complex v = a[start + j + half] * w;
                a[start + j] = u + v;
                a[start + j + half] = u - v;
            }
        }
    }
}

}  // namespace detail

// One-axis DFT plan of fixed length. Power-of-two lengths run the radix-2
// kernel directly; any other length goes through Bluestein's chirp-z
// reduction to a padded power-of-two convolution. All twiddle tables are
// computed once at construction; transform() is const and allocates its own
// scratch, so a single plan can be shared freely.
class FftPlan {
  public:
    explicit FftPlan(int n) : n_(n) {
        if (n < 1) throw ConfigError("FftPlan: length must be positive");
        if (detail::is_pow2(n_)) {
            init_pow2_tables(n_, tw_, rev_);
        } else {
            m_ = detail::next_pow2(2 * n_ - 1);
            init_pow2_tables(m_, tw_, rev_);
            // Chirp c_j = e^{-i*pi*j^2/n}; angles reduced with j^2 mod 2n in
            // exact integer arithmetic so large j loses no precision.
            chirp_.resize(n_);
            for (int j = 0; j < n_; ++j) {
                const std::int64_t q = (static_cast<std::int64_t>(j) * j) % (2 * n_);
                const double ang = -M_PI * static_cast<double>(q) / n_;
                chirp_[j] = Complex(std::cos(ang), std::sin(ang));
            }
            bhat_fwd_ = chirp_spectrum(-1);
            bhat_inv_ = chirp_spectrum(+1);
        }
    }

    int size() const { return n_; }

    // In-place unnormalized DFT: X_k = sum_j x_j e^{sign * 2*pi*i*j*k/n}.
    void transform(Complex* data, int sign) const {
        if (detail::is_pow2(n_)) {
            detail::fft_pow2(data, n_, sign, tw_, rev_);
            return;
        }
        // Bluestein: X_k = c_k^s * IFFT_m(FFT_m(x_j c_j^s) .* Bhat)_k where
        // c^s is the chirp (conjugated for sign=+1) and Bhat its paired
        // circular-convolution spectrum.
        const std::vector<Complex>& bhat = (sign < 0) ? bhat_fwd_ : bhat_inv_;
        std::vector<Complex> a(m_, Complex(0.0, 0.0));
        for (int j = 0; j < n_; ++j) {
            const Complex c = (sign < 0) ? chirp_[j] : std::conj(chirp_[j]);
            a[j] = data[j] * c;
        }
        detail::fft_pow2(a.data(), m_, -1, tw_, rev_);
        for (int j = 0; j < m_; ++j) a[j] *= bhat[j];
        detail::fft_pow2(a.data(), m_, +1, tw_, rev_);
        const double inv_m = 1.0 / m_;
        for (int k = 0; k < n_; ++k) {
            const Complex c = (sign < 0) ? chirp_[k] : std::conj(chirp_[k]);
            data[k] = a[k] * inv_m * c;
        }
    }

  private:
    static void init_pow2_tables(int n, std::vector<Complex>& tw, std::vector<int>& rev) {
        tw.resize(n / 2);
        for (int j = 0; j < n / 2; ++j) {
            const double ang = -2.0 * M_PI * j / n;
            tw[j] = Complex(std::cos(ang), std::sin(ang));
        }
        rev.assign(n, 0);
        int lg = 0;
        while ((1 << lg) < n) ++lg;
        for (int i = 0; i < n; ++i) {
            int r = 0;
            for (int b = 0; b < lg; ++b)
                if (i & (1 << b)) r |= 1 << (lg - 1 - b);
            rev[i] = r;
        }
    }

    // Spectrum of the circularly embedded conjugate chirp for one sign.
    std::vector<Complex> chirp_spectrum(int sign) const {
        std::vector<Complex> b(m_, Complex(0.0, 0.0));
        for (int j = 0; j < n_; ++j) {
            const Complex cj = (sign < 0) ? std::conj(chirp_[j]) : chirp_[j];
            b[j] = cj;
            if (j > 0) b[m_ - j] = cj;
        }
        detail::fft_pow2(b.data(), m_, -1, tw_, rev_);
        return b;
    }

    int n_;
    int m_ = 0;  // padded length for the Bluestein path
    std::vector<Complex> tw_;
    std::vector<int> rev_;
    std::vector<Complex> chirp_;
    std::vector<Complex> bhat_fwd_;
    std::vector<Complex> bhat_inv_;
};

// Unnormalized 2D DFT over an n*n row-major array: rows first, then columns,
// always in that order so reductions are reproducible bit for bit.
inline void fft2(const FftPlan& plan, Complex* data, int sign) {
    const int n = plan.size();
    for (int r = 0; r < n; ++r) plan.transform(data + static_cast<std::size_t>(r) * n, sign);
    std::vector<Complex> col(n);
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) col[r] = data[static_cast<std::size_t>(r) * n + c];
        plan.transform(col.data(), sign);
        for (int r = 0; r < n; ++r) data[static_cast<std::size_t>(r) * n + c] = col[r];
    }
}

}  // namespace kse
