#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <span>
#include <vector>

#include "kse/errors.hpp"
#include "kse/grid.hpp"

namespace kse {

// A scalar field on the torus stored by its Fourier coefficients f_hat(k),
// row-major in FFT index order. The represented function is
//   f(x) = sum_k f_hat(k) e^{i (2*pi/L) k . x},
// so the inverse transform carries no prefactor and the forward transform
// divides by n^2. real_valued marks fields whose samples are real (the
// coefficients then satisfy conjugate symmetry up to roundoff).
class SpectralField {
  public:
    SpectralField() = default;
    explicit SpectralField(GridPtr grid, bool real_valued = true)
        : grid_(std::move(grid)), real_(real_valued), coeffs_(grid_->size(), Complex(0.0, 0.0)) {}

    const GridSpec& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    bool real_valued() const { return real_; }
    void set_real_valued(bool v) { real_ = v; }

    std::vector<Complex>& coeffs() { return coeffs_; }
    const std::vector<Complex>& coeffs() const { return coeffs_; }

    // Coefficient of integer mode (k1, k2); components must lie in [-n/2, n/2).
    Complex& at(int k1, int k2) { return coeffs_[grid_->mode_index(k1, k2)]; }
    const Complex& at(int k1, int k2) const { return coeffs_[grid_->mode_index(k1, k2)]; }

    bool compatible_with(const SpectralField& other) const {
        return grid_.get() == other.grid_.get() ||
               (grid_->n == other.grid().n && grid_->domain_length == other.grid().domain_length);
    }

  private:
    GridPtr grid_;
    bool real_ = true;
    std::vector<Complex> coeffs_;
};

namespace detail {

// Sample points start at -L/2, which shifts the plain DFT by half a period:
// e^{i k . (-L/2) * 2*pi/L} = (-1)^{k1+k2}, i.e. a sign flip on odd index
// parity (n is even, so index parity equals mode parity).
inline void apply_origin_twiddle(const GridSpec& g, Complex* a) {
    for (int i1 = 0; i1 < g.n; ++i1)
        for (int i2 = 0; i2 < g.n; ++i2)
            if ((i1 + i2) & 1) a[g.index(i1, i2)] = -a[g.index(i1, i2)];
}

}  // namespace detail

inline std::vector<Complex> to_physical_complex(const SpectralField& f) {
    const GridSpec& g = f.grid();
    std::vector<Complex> out(f.coeffs());
    detail::apply_origin_twiddle(g, out.data());
    fft2(g.plan, out.data(), +1);
    return out;
}

// Physical samples of a real-valued field, row-major: out[j1*n + j2] is the
// value at (x_{j1}, x_{j2}). The imaginary residue of the inverse transform
// is dropped; it is roundoff for conjugate-symmetric coefficients.
inline std::vector<double> to_physical(const SpectralField& f) {
    std::vector<Complex> tmp = to_physical_complex(f);
    std::vector<double> out(tmp.size());
    for (std::size_t i = 0; i < tmp.size(); ++i) out[i] = tmp[i].real();
    return out;
}

inline SpectralField to_spectral(const GridPtr& grid, std::span<const Complex> samples,
                                 bool real_valued = false) {
    if (samples.size() != grid->size())
        throw ShapeError("to_spectral: sample array does not match grid size");
    SpectralField f(grid, real_valued);
    std::copy(samples.begin(), samples.end(), f.coeffs().begin());
    fft2(grid->plan, f.coeffs().data(), -1);
    const double inv_n2 = 1.0 / static_cast<double>(grid->size());
    for (Complex& c : f.coeffs()) c *= inv_n2;
    detail::apply_origin_twiddle(*grid, f.coeffs().data());
    return f;
}

inline SpectralField to_spectral(const GridPtr& grid, std::span<const double> samples) {
    if (samples.size() != grid->size())
        throw ShapeError("to_spectral: sample array does not match grid size");
    std::vector<Complex> tmp(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) tmp[i] = Complex(samples[i], 0.0);
    return to_spectral(grid, std::span<const Complex>(tmp), /*real_valued=*/true);
}

inline void dealias_inplace(SpectralField& f) {
    const GridSpec& g = f.grid();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!g.dealias_mask[i]) f.coeffs()[i] = Complex(0.0, 0.0);
}

inline SpectralField dealias(const SpectralField& f) {
    SpectralField out = f;
    dealias_inplace(out);
    return out;
}

enum class DiffOp { D1, D2, Laplacian, Bilaplacian };

// Spectral differentiation: multiplies f_hat(k) by ik_j, -|k|^2, or |k|^4
// with k scaled by 2*pi/L. The unpaired Nyquist modes are zeroed first so
// odd-order derivatives of real fields stay real.
inline SpectralField spectral_derivative(const SpectralField& f, DiffOp op) {
    const GridSpec& g = f.grid();
    SpectralField out = f;
    const double s = g.wavenumber_scale;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const int k1 = g.k1_at(i);
        const int k2 = g.k2_at(i);
        if (k1 == -g.nyquist || k2 == -g.nyquist) {
            out.coeffs()[i] = Complex(0.0, 0.0);
            continue;
        }
        const double sk1 = s * k1;
        const double sk2 = s * k2;
        const double k2sum = sk1 * sk1 + sk2 * sk2;
        switch (op) {
            case DiffOp::D1:
                out.coeffs()[i] *= Complex(0.0, sk1);
                break;
            case DiffOp::D2:
                out.coeffs()[i] *= Complex(0.0, sk2);
                break;
            case DiffOp::Laplacian:
                out.coeffs()[i] *= -k2sum;
                break;
            case DiffOp::Bilaplacian:
                out.coeffs()[i] *= k2sum * k2sum;
                break;
        }
    }
    return out;
}

// Fractional Laplacian Lambda^s = (-Delta)^{s/2}: multiplies by |k|^s, with
// the k = 0 mode sent to zero for every s (including s = 0).
inline SpectralField lambda_power(const SpectralField& f, double s) {
    const GridSpec& g = f.grid();
    SpectralField out = f;
    const double ws = g.wavenumber_scale;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const int k1 = g.k1_at(i);
        const int k2 = g.k2_at(i);
        if (k1 == 0 && k2 == 0) {
            out.coeffs()[i] = Complex(0.0, 0.0);
            continue;
        }
        const double kk = ws * std::sqrt(static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
        out.coeffs()[i] *= std::pow(kk, s);
    }
    return out;
}

enum class NormFlavor { L2, Homogeneous, Inhomogeneous };

// Coefficient-space Sobolev norms:
//   L2:            sqrt( sum |f_hat|^2 )
//   Homogeneous:   sqrt( sum |k|^{2s} |f_hat|^2 ), k = 0 contributes nothing
//   Inhomogeneous: sqrt( sum (1 + |k|^s)^2 |f_hat|^2 )
// Sums run over all retained modes in storage order.
inline double sobolev_norm(const SpectralField& f, double s, NormFlavor flavor) {
    if (s < 0.0) throw ConfigError("sobolev_norm: order s must be nonnegative");
    const GridSpec& g = f.grid();
    const double ws = g.wavenumber_scale;
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double a2 = std::norm(f.coeffs()[i]);
        if (flavor == NormFlavor::L2) {
            acc += a2;
            continue;
        }
        const int k1 = g.k1_at(i);
        const int k2 = g.k2_at(i);
        const double kk = ws * std::sqrt(static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
        if (flavor == NormFlavor::Homogeneous) {
            const double w = (k1 == 0 && k2 == 0) ? 0.0 : std::pow(kk, s);
            acc += w * w * a2;
        } else {
            const double w = 1.0 + ((k1 == 0 && k2 == 0) ? 0.0 : std::pow(kk, s));
            acc += w * w * a2;
        }
    }
    return std::sqrt(acc);
}

inline double l2_norm(const SpectralField& f) { return sobolev_norm(f, 0.0, NormFlavor::L2); }

// Max of |f| over the grid samples (one inverse transform).
inline double linf_norm(const SpectralField& f) {
    const std::vector<double> p = to_physical(f);
    double m = 0.0;
    for (double v : p) m = std::max(m, std::abs(v));
    return m;
}

// Largest deviation from conjugate symmetry f_hat(-k) = conj(f_hat(k)) over
// paired modes; a reality check for diagnostics and tests.
inline double conjugate_symmetry_residual(const SpectralField& f) {
    const GridSpec& g = f.grid();
    double worst = 0.0;
    for (int i1 = 0; i1 < g.n; ++i1) {
        for (int i2 = 0; i2 < g.n; ++i2) {
            const int k1 = g.wavenumbers[i1];
            const int k2 = g.wavenumbers[i2];
            if (k1 == -g.nyquist || k2 == -g.nyquist) continue;
            const Complex a = f.coeffs()[g.index(i1, i2)];
            const Complex b = f.coeffs()[g.mode_index(-k1, -k2)];
            worst = std::max(worst, std::abs(a - std::conj(b)));
        }
    }
    return worst;
}

// A two-component field (velocity); both components share one grid.
struct VectorField {
    SpectralField u1;
    SpectralField u2;

    VectorField() = default;
    VectorField(SpectralField a, SpectralField b) : u1(std::move(a)), u2(std::move(b)) {
        if (!u1.compatible_with(u2)) throw ShapeError("VectorField: components on different grids");
    }
    explicit VectorField(const GridPtr& grid) : u1(grid), u2(grid) {}

    const GridSpec& grid() const { return u1.grid(); }
};

inline double l2_norm(const VectorField& u) {
    const double a = l2_norm(u.u1);
    const double b = l2_norm(u.u2);
    return std::sqrt(a * a + b * b);
}

inline double sobolev_norm(const VectorField& u, double s, NormFlavor flavor) {
    const double a = sobolev_norm(u.u1, s, flavor);
    const double b = sobolev_norm(u.u2, s, flavor);
    return std::sqrt(a * a + b * b);
}

inline VectorField dealias(const VectorField& u) { return VectorField(dealias(u.u1), dealias(u.u2)); }

}  // namespace kse
