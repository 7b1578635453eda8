#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "kse/errors.hpp"
#include "kse/field.hpp"
#include "kse/models.hpp"

namespace kse {

// Projection onto the Euclidean ball of integer modes |k| <= radius. Unlike
// the square 2/3-rule mask this cuts on |k| itself; it is the truncation the
// low-mode reference system evolves inside.
inline SpectralField ball_project(const SpectralField& f, double radius) {
    const GridSpec& g = f.grid();
    const auto r2 = static_cast<long long>(std::floor(radius * radius + 1e-9));
    SpectralField out = f;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const long long k1 = g.k1_at(i);
        const long long k2 = g.k2_at(i);
        if (k1 * k1 + k2 * k2 > r2) out.coeffs()[i] = Complex(0.0, 0.0);
    }
    return out;
}

// Dense low-mode state: every integer mode in the square [-n, n]^2 is stored,
// with the ball |k| <= n as the active set (entries outside stay zero). Two
// components, advective coupling, exact convolution sums -- no transforms,
// no aliasing, an independent check on the pseudo-spectral path.
struct GalerkinState {
    int n_trunc = 0;
    double t = 0.0;
    std::vector<std::vector<Complex>> coeffs;  // [component][(k1+n)*(2n+1)+(k2+n)]

    GalerkinState() = default;
    GalerkinState(int n, int components) : n_trunc(n) {
        if (n < 1) throw ConfigError("GalerkinState: truncation radius must be >= 1");
        coeffs.assign(components, std::vector<Complex>(static_cast<std::size_t>(width()) * width(),
                                                       Complex(0.0, 0.0)));
    }

    int width() const { return 2 * n_trunc + 1; }
    int components() const { return static_cast<int>(coeffs.size()); }
    std::size_t idx(int k1, int k2) const {
        return static_cast<std::size_t>(k1 + n_trunc) * width() + (k2 + n_trunc);
    }
    bool in_ball(int k1, int k2) const { return k1 * k1 + k2 * k2 <= n_trunc * n_trunc; }

    Complex& at(int c, int k1, int k2) { return coeffs[c][idx(k1, k2)]; }
    const Complex& at(int c, int k1, int k2) const { return coeffs[c][idx(k1, k2)]; }
};

inline GalerkinState galerkin_from_fields(const std::vector<SpectralField>& u, int n_trunc) {
    GalerkinState s(n_trunc, static_cast<int>(u.size()));
    const GridSpec& g = u[0].grid();
    if (n_trunc >= g.nyquist)
        throw ConfigError("galerkin_from_fields: truncation exceeds grid resolution");
    for (int c = 0; c < s.components(); ++c)
        for (int k1 = -n_trunc; k1 <= n_trunc; ++k1)
            for (int k2 = -n_trunc; k2 <= n_trunc; ++k2)
                if (s.in_ball(k1, k2)) s.at(c, k1, k2) = u[c].at(k1, k2);
    return s;
}

inline std::vector<SpectralField> galerkin_to_fields(const GalerkinState& s, const GridPtr& grid) {
    if (s.n_trunc >= grid->nyquist)
        throw ConfigError("galerkin_to_fields: truncation exceeds grid resolution");
    std::vector<SpectralField> out;
    for (int c = 0; c < s.components(); ++c) {
        SpectralField f(grid);
        for (int k1 = -s.n_trunc; k1 <= s.n_trunc; ++k1)
            for (int k2 = -s.n_trunc; k2 <= s.n_trunc; ++k2)
                if (s.in_ball(k1, k2)) f.at(k1, k2) = s.at(c, k1, k2);
        out.push_back(std::move(f));
    }
    return out;
}

namespace detail {

inline double galerkin_sigma(const ModelParams& p, int c, int k1, int k2) {
    const double kk = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
    if (p.model == Model::Rkse && c == 0) return -p.nu * kk;
    return p.lambda * kk - kk * kk;
}

}  // namespace detail

// Right-hand side of the truncated system: sigma(k) u_c(k) minus the exact
// convolution of the advection term, projected back onto the ball. Works on
// the unit-scale (2*pi-periodic) torus.
inline GalerkinState galerkin_rhs(const GalerkinState& s, const ModelParams& p) {
    validate(p);
    if (p.model == Model::KseScalar)
        throw ConfigError("galerkin_rhs: low-mode system is defined for the vector models");
    if (s.components() != 2) throw ShapeError("galerkin_rhs: expected a two-component state");

    const int n = s.n_trunc;
    GalerkinState out(n, 2);
    out.t = s.t;
    for (int c = 0; c < 2; ++c) {
        for (int k1 = -n; k1 <= n; ++k1) {
            for (int k2 = -n; k2 <= n; ++k2) {
                if (!s.in_ball(k1, k2)) continue;
                Complex conv(0.0, 0.0);
                for (int p1 = -n; p1 <= n; ++p1) {
                    for (int p2 = -n; p2 <= n; ++p2) {
                        if (!s.in_ball(p1, p2)) continue;
                        const int q1 = k1 - p1;
                        const int q2 = k2 - p2;
                        if (q1 < -n || q1 > n || q2 < -n || q2 > n || !s.in_ball(q1, q2)) continue;
                        if (p.nonlinearity == Nonlinearity::Advective) {
                            // u_j(p) * (i q_j) u_c(q)
                            const Complex dot = s.at(0, p1, p2) * Complex(0.0, q1) +
                                                s.at(1, p1, p2) * Complex(0.0, q2);
                            conv += dot * s.at(c, q1, q2);
                        } else {
                            conv += s.at(0, p1, p2) * s.at(0, q1, q2) +
                                    s.at(1, p1, p2) * s.at(1, q1, q2);
                        }
                    }
                }
                if (p.nonlinearity == Nonlinearity::GradSq) {
                    const double kc = (c == 0) ? k1 : k2;
                    conv *= Complex(0.0, 0.5 * kc);
                }
                out.at(c, k1, k2) =
                    detail::galerkin_sigma(p, c, k1, k2) * s.at(c, k1, k2) - conv;
            }
        }
    }
    return out;
}

namespace detail {

inline void galerkin_axpy(GalerkinState& y, double a, const GalerkinState& x) {
    for (int c = 0; c < y.components(); ++c)
        for (std::size_t i = 0; i < y.coeffs[c].size(); ++i) y.coeffs[c][i] += a * x.coeffs[c][i];
}

}  // namespace detail

inline void galerkin_rk4_step(GalerkinState& s, const ModelParams& p, double dt) {
    const GalerkinState k1 = galerkin_rhs(s, p);
    GalerkinState y2 = s;
    detail::galerkin_axpy(y2, 0.5 * dt, k1);
    const GalerkinState k2 = galerkin_rhs(y2, p);
    GalerkinState y3 = s;
    detail::galerkin_axpy(y3, 0.5 * dt, k2);
    const GalerkinState k3 = galerkin_rhs(y3, p);
    GalerkinState y4 = s;
    detail::galerkin_axpy(y4, dt, k3);
    const GalerkinState k4 = galerkin_rhs(y4, p);
    detail::galerkin_axpy(s, dt / 6.0, k1);
    detail::galerkin_axpy(s, dt / 3.0, k2);
    detail::galerkin_axpy(s, dt / 3.0, k3);
    detail::galerkin_axpy(s, dt / 6.0, k4);
    s.t += dt;
}

// Fixed-step classical RK4 march to t_final; the trajectory includes the
// initial state and every accepted step. The stiffest retained mode must sit
// inside the explicit stability window, hence the precondition on sigma*dt.
inline std::vector<GalerkinState> integrate_galerkin(const GalerkinState& s0, const ModelParams& p,
                                                     double dt, double t_final) {
    if (!(dt > 0.0)) throw ConfigError("integrate_galerkin: dt must be positive");
    if (t_final < s0.t) throw ConfigError("integrate_galerkin: t_final precedes initial time");
    double sigma_min = 0.0;
    for (int c = 0; c < s0.components(); ++c)
        for (int k1 = -s0.n_trunc; k1 <= s0.n_trunc; ++k1)
            for (int k2 = -s0.n_trunc; k2 <= s0.n_trunc; ++k2)
                if (s0.in_ball(k1, k2))
                    sigma_min = std::min(sigma_min, detail::galerkin_sigma(p, c, k1, k2));
    if (sigma_min * dt < -2.5)
        throw ConfigError("integrate_galerkin: dt outside the explicit stability window");

    std::vector<GalerkinState> traj;
    traj.push_back(s0);
    GalerkinState s = s0;
    while (s.t < t_final - 1e-12 * std::max(1.0, t_final)) {
        const double step = std::min(dt, t_final - s.t);
        galerkin_rk4_step(s, p, step);
        if (step < dt) s.t = t_final;  // partial closing step lands exactly
        traj.push_back(s);
    }
    return traj;
}

// Paper-form inhomogeneous H^1 norm of a low-mode state (both components).
inline double galerkin_h1_norm(const GalerkinState& s) {
    double acc = 0.0;
    for (int c = 0; c < s.components(); ++c)
        for (int k1 = -s.n_trunc; k1 <= s.n_trunc; ++k1)
            for (int k2 = -s.n_trunc; k2 <= s.n_trunc; ++k2) {
                if (!s.in_ball(k1, k2)) continue;
                const double kk = std::sqrt(static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
                const double w = 1.0 + kk;
                acc += w * w * std::norm(s.at(c, k1, k2));
            }
    return std::sqrt(acc);
}

// Algebraic-blowup envelope for the H^1 norm:
//   h(t) <= (1 + h0) / (1 - 4 c t (1 + h0)^4)^{1/4} - 1,
// valid while the denominator stays positive. fit_growth_constant returns
// the smallest c >= 0 for which every sample sits on or under the envelope.
struct GrowthFit {
    double h0 = 0.0;
    double c_fit = 0.0;
    double t_blowup = 0.0;  // where the fitted envelope ceases to exist (inf if c = 0)
};

inline double growth_envelope(double t, double h0, double c) {
    const double a = 1.0 + h0;
    const double den = 1.0 - 4.0 * c * t * a * a * a * a;
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    return a / std::pow(den, 0.25) - 1.0;
}

inline GrowthFit h1_growth_check(const std::vector<double>& times, const std::vector<double>& h1) {
    if (times.size() != h1.size() || times.empty())
        throw ShapeError("h1_growth_check: mismatched or empty sample arrays");
    GrowthFit fit;
    fit.h0 = h1.front();
    const double a = 1.0 + fit.h0;
    const double a4 = a * a * a * a;
    double c = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double dt = times[i] - times.front();
        if (dt <= 0.0) continue;
        const double ratio = a / (1.0 + h1[i]);
        const double ci = (1.0 - ratio * ratio * ratio * ratio) / (4.0 * dt * a4);
        c = std::max(c, ci);
    }
    fit.c_fit = c;
    fit.t_blowup = (c > 0.0) ? 1.0 / (4.0 * c * a4) : std::numeric_limits<double>::infinity();
    return fit;
}

inline GrowthFit h1_growth_check(const std::vector<GalerkinState>& traj) {
    std::vector<double> t, h;
    t.reserve(traj.size());
    h.reserve(traj.size());
    for (const GalerkinState& s : traj) {
        t.push_back(s.t);
        h.push_back(galerkin_h1_norm(s));
    }
    return h1_growth_check(t, h);
}

}  // namespace kse
