#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "kse/errors.hpp"
#include "kse/etd.hpp"
#include "kse/field.hpp"
#include "kse/models.hpp"

namespace kse {

// One sampled row of run diagnostics. Scalar runs report the potential in
// the u1 slots (l2_u2 = 0) and derive the advecting velocity as grad(phi)
// for the cubic integrals.
struct DiagnosticsRecord {
    double t = 0.0;
    double l2_u1 = 0.0;
    double l2_u2 = 0.0;
    double h1 = 0.0;
    double linf_u1 = 0.0;
    double nonlinear_energy = 0.0;  // integral of (u . grad)u . u
    double drift_x = 0.0;           // integral of the advection term, component 1
    double drift_y = 0.0;
    double spectrum_tail = 0.0;     // max |u_hat| within two bands of the dealias cutoff
    double peak_amp = 0.0;          // max |u_hat| overall (reference scale for the tail)
    std::optional<double> cosim_err;
    std::vector<double> spectrum;   // shell energies E(kappa), kappa = 0..kappa_max
};

namespace detail {

// Shell index: Euclidean |k| rounded to the nearest integer.
inline int shell_of(int k1, int k2) {
    const double kk = std::sqrt(static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
    return static_cast<int>(std::floor(kk + 0.5));
}

}  // namespace detail

// Radial energy spectrum E(kappa) = sum over the shell of |u_hat|^2, summed
// across components. The shells partition all modes, so sum_kappa E(kappa)
// recovers the squared coefficient L2 norm exactly (up to regrouping).
inline std::vector<double> energy_spectrum(const std::vector<SpectralField>& u) {
    const GridSpec& g = u[0].grid();
    const int kappa_max = detail::shell_of(g.nyquist, g.nyquist);
    std::vector<double> shells(kappa_max + 1, 0.0);
    for (const SpectralField& f : u)
        for (std::size_t i = 0; i < g.size(); ++i)
            shells[detail::shell_of(g.k1_at(i), g.k2_at(i))] += std::norm(f.coeffs()[i]);
    return shells;
}

// Largest coefficient magnitude among retained modes within two integer
// bands of the dealias cutoff -- the a-posteriori resolution indicator.
inline double spectrum_tail_amplitude(const std::vector<SpectralField>& u) {
    const GridSpec& g = u[0].grid();
    double tail = 0.0;
    for (const SpectralField& f : u) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            const int m = std::max(std::abs(g.k1_at(i)), std::abs(g.k2_at(i)));
            const double md = static_cast<double>(m);
            if (md >= g.dealias_cutoff - 2.0 && md < g.dealias_cutoff)
                tail = std::max(tail, std::abs(f.coeffs()[i]));
        }
    }
    return tail;
}

inline double peak_amplitude(const std::vector<SpectralField>& u) {
    double peak = 0.0;
    for (const SpectralField& f : u)
        for (const Complex& c : f.coeffs()) peak = std::max(peak, std::abs(c));
    return peak;
}

// PASS iff the near-cutoff tail is negligible against the spectral peak.
// The default threshold factor is double-precision epsilon.
inline bool resolution_check(const DiagnosticsRecord& rec, double eps_factor = 2.2204e-16) {
    if (rec.spectrum_tail == 0.0) return true;
    return rec.spectrum_tail < eps_factor * rec.peak_amp;
}

inline DiagnosticsRecord sample_diagnostics(const SimState& s, const ModelParams& p) {
    DiagnosticsRecord rec;
    rec.t = s.t;
    const GridSpec& g = s.fields[0].grid();
    const GridPtr grid = s.fields[0].grid_ptr();

    // Advecting velocity: the fields themselves, or grad(phi) in scalar form.
    SpectralField v1hat, v2hat;
    if (p.model == Model::KseScalar) {
        rec.l2_u1 = l2_norm(s.fields[0]);
        rec.l2_u2 = 0.0;
        rec.h1 = sobolev_norm(s.fields[0], 1.0, NormFlavor::Inhomogeneous);
        rec.linf_u1 = linf_norm(s.fields[0]);
        v1hat = spectral_derivative(s.fields[0], DiffOp::D1);
        v2hat = spectral_derivative(s.fields[0], DiffOp::D2);
    } else {
        rec.l2_u1 = l2_norm(s.fields[0]);
        rec.l2_u2 = l2_norm(s.fields[1]);
        const double h1a = sobolev_norm(s.fields[0], 1.0, NormFlavor::Inhomogeneous);
        const double h1b = sobolev_norm(s.fields[1], 1.0, NormFlavor::Inhomogeneous);
        rec.h1 = std::sqrt(h1a * h1a + h1b * h1b);
        rec.linf_u1 = linf_norm(s.fields[0]);
        v1hat = s.fields[0];
        v2hat = s.fields[1];
    }

    // Cubic integrals by midpoint quadrature, which is exact for these
    // dealiased trigonometric polynomials (degree < n per axis keeps the
    // zero mode alias-free).
    const std::vector<double> v1 = to_physical(v1hat);
    const std::vector<double> v2 = to_physical(v2hat);
    const std::vector<double> d11 = to_physical(spectral_derivative(v1hat, DiffOp::D1));
    const std::vector<double> d21 = to_physical(spectral_derivative(v1hat, DiffOp::D2));
    const std::vector<double> d12 = to_physical(spectral_derivative(v2hat, DiffOp::D1));
    const std::vector<double> d22 = to_physical(spectral_derivative(v2hat, DiffOp::D2));
    const double cell = g.dx() * g.dx();
    double energy = 0.0, dx_acc = 0.0, dy_acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double a1 = v1[i] * d11[i] + v2[i] * d21[i];
        const double a2 = v1[i] * d12[i] + v2[i] * d22[i];
        dx_acc += a1;
        dy_acc += a2;
        energy += a1 * v1[i] + a2 * v2[i];
    }
    rec.nonlinear_energy = cell * energy;
    rec.drift_x = cell * dx_acc;
    rec.drift_y = cell * dy_acc;

    rec.spectrum = energy_spectrum(s.fields);
    rec.spectrum_tail = spectrum_tail_amplitude(s.fields);
    rec.peak_amp = peak_amplitude(s.fields);

    for (double v : {rec.l2_u1, rec.l2_u2, rec.h1, rec.linf_u1, rec.nonlinear_energy, rec.drift_x,
                     rec.drift_y, rec.spectrum_tail, rec.peak_amp})
        if (!std::isfinite(v)) throw BlowupError(s.t, v, "non-finite diagnostic sample");
    return rec;
}

// Running check of sup_t ||u1(t)||_inf <= ||u1(0)||_inf, with a relative
// tolerance for discretization noise.
struct MaxPrincipleReport {
    bool pass = true;
    double initial = 0.0;
    double max_excess = 0.0;  // worst linf(t) - linf(0) seen (can be negative)
    double tolerance = 0.0;   // absolute: rel_tol * linf(0)
};

inline MaxPrincipleReport max_principle_monitor(const std::vector<double>& linf_series,
                                                double linf_initial, double rel_tol = 1e-6) {
    MaxPrincipleReport rep;
    rep.initial = linf_initial;
    rep.tolerance = rel_tol * linf_initial;
    double worst = -std::numeric_limits<double>::infinity();
    for (double v : linf_series) worst = std::max(worst, v - linf_initial);
    rep.max_excess = linf_series.empty() ? 0.0 : worst;
    rep.pass = rep.max_excess <= rep.tolerance;
    return rep;
}

// Pointwise L-inf distance between a velocity field and the gradient of a
// potential evolved alongside it. Identical construction at t = 0 gives an
// exact zero; afterwards this measures vector/scalar trajectory divergence.
inline double cosim_error(const VectorField& u, const SpectralField& phi) {
    if (!u.u1.compatible_with(phi)) throw ShapeError("cosim_error: fields on different grids");
    const SpectralField g1 = spectral_derivative(phi, DiffOp::D1);
    const SpectralField g2 = spectral_derivative(phi, DiffOp::D2);
    SpectralField e1(u.u1.grid_ptr());
    SpectralField e2(u.u1.grid_ptr());
    for (std::size_t i = 0; i < e1.coeffs().size(); ++i) {
        e1.coeffs()[i] = u.u1.coeffs()[i] - g1.coeffs()[i];
        e2.coeffs()[i] = u.u2.coeffs()[i] - g2.coeffs()[i];
    }
    return std::max(linf_norm(e1), linf_norm(e2));
}

}  // namespace kse
