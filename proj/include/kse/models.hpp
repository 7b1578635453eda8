#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "kse/errors.hpp"
#include "kse/field.hpp"

namespace kse {

// KseVector : two-component u, advective (or gradient-form) nonlinearity,
//             destabilized fourth-order linear part in both components.
// KseScalar : potential form; phi evolves with -1/2 |grad phi|^2 and the
//             same linear symbol, and u = grad phi recovers KseVector.
// Rkse      : reduced system; component 1 is passively advected and feels
//             only viscous damping -nu*|k|^2, component 2 matches KseVector.
enum class Model { KseVector, KseScalar, Rkse };

// Vector-model nonlinearity: classical advection -(u . grad) u_c, or the
// equivalent-on-gradients divergence form -1/2 d_c |u|^2.
enum class Nonlinearity { Advective, GradSq };

struct ModelParams {
    Model model = Model::KseVector;
    double lambda = 1.0;  // strength of the destabilizing -lambda*Laplacian term
    double nu = 1.0;      // viscosity of the first reduced component (Rkse only)
    Nonlinearity nonlinearity = Nonlinearity::Advective;

    int components() const { return model == Model::KseScalar ? 1 : 2; }
};

inline void validate(const ModelParams& p) {
    if (!(p.lambda > 0.0)) throw ConfigError("ModelParams: lambda must be positive");
    if (p.model == Model::Rkse && !(p.nu > 0.0))
        throw ConfigError("ModelParams: nu must be positive for the reduced model");
    if (!std::isfinite(p.lambda) || !std::isfinite(p.nu))
        throw ConfigError("ModelParams: parameters must be finite");
}

// Diagonal linear symbol per component and mode, in storage order. The
// growing branch lambda*|k|^2 - |k|^4 peaks at |k|^2 = lambda/2 and the
// k = 0 entry is exactly zero for every component.
struct LinearSymbol {
    int components = 0;
    std::vector<std::vector<double>> sigma;  // [component][mode index]

    double max_sigma() const {
        double m = 0.0;
        for (const auto& comp : sigma)
            for (double v : comp) m = std::max(m, v);
        return m;
    }
};

inline LinearSymbol linear_symbol(const ModelParams& p, const GridSpec& g) {
    validate(p);
    LinearSymbol sym;
    sym.components = p.components();
    sym.sigma.assign(sym.components, std::vector<double>(g.size(), 0.0));
    const double ws = g.wavenumber_scale;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double k1 = ws * g.k1_at(i);
        const double k2 = ws * g.k2_at(i);
        const double kk = k1 * k1 + k2 * k2;
        const double kse = p.lambda * kk - kk * kk;
        switch (p.model) {
            case Model::KseVector:
            case Model::KseScalar:
                for (int c = 0; c < sym.components; ++c) sym.sigma[c][i] = kse;
                break;
            case Model::Rkse:
                sym.sigma[0][i] = -p.nu * kk;
                sym.sigma[1][i] = kse;
                break;
        }
    }
    return sym;
}

namespace detail {

inline void require_same_grid(const SpectralField& a, const SpectralField& b, const char* who) {
    if (!a.compatible_with(b)) throw ShapeError(std::string(who) + ": operands on different grids");
}

}  // namespace detail

// Nonlinear term of d/dt u for a field set (2 components for the vector
// models, 1 for the scalar form). Products are formed in physical space and
// the result is dealiased, so for band-limited input (support below n/3) the
// retained modes carry the exact convolution. The sign convention is that of
// the right-hand side: the advection term enters negated.
inline std::vector<SpectralField> nonlinear_rhs_set(const std::vector<SpectralField>& u,
                                                    const ModelParams& p) {
    if (static_cast<int>(u.size()) != p.components())
        throw ShapeError("nonlinear_rhs: field count does not match model");
    const GridPtr grid = u[0].grid_ptr();
    const GridSpec& g = *grid;
    const std::size_t sz = g.size();

    if (p.model == Model::KseScalar) {
        // -1/2 |grad phi|^2
        const std::vector<double> g1 = to_physical(spectral_derivative(u[0], DiffOp::D1));
        const std::vector<double> g2 = to_physical(spectral_derivative(u[0], DiffOp::D2));
        std::vector<double> w(sz);
        for (std::size_t i = 0; i < sz; ++i) w[i] = -0.5 * (g1[i] * g1[i] + g2[i] * g2[i]);
        SpectralField out = to_spectral(grid, std::span<const double>(w));
        dealias_inplace(out);
        return {std::move(out)};
    }

    detail::require_same_grid(u[0], u[1], "nonlinear_rhs");

    if (p.nonlinearity == Nonlinearity::GradSq) {
        // -1/2 d_c (u1^2 + u2^2): one forward transform of the speed-squared
        // field, then two spectral derivatives.
        const std::vector<double> p1 = to_physical(u[0]);
        const std::vector<double> p2 = to_physical(u[1]);
        std::vector<double> s(sz);
        for (std::size_t i = 0; i < sz; ++i) s[i] = p1[i] * p1[i] + p2[i] * p2[i];
        SpectralField shat = to_spectral(grid, std::span<const double>(s));
        std::vector<SpectralField> out;
        out.reserve(2);
        for (DiffOp op : {DiffOp::D1, DiffOp::D2}) {
            SpectralField w = spectral_derivative(shat, op);
            for (Complex& c : w.coeffs()) c *= -0.5;
            dealias_inplace(w);
            out.push_back(std::move(w));
        }
        return out;
    }

    // Advective form: -(u1 d1 + u2 d2) u_c for each component c.
    const std::vector<double> p1 = to_physical(u[0]);
    const std::vector<double> p2 = to_physical(u[1]);
    std::vector<SpectralField> out;
    out.reserve(2);
    for (int c = 0; c < 2; ++c) {
        const std::vector<double> d1 = to_physical(spectral_derivative(u[c], DiffOp::D1));
        const std::vector<double> d2 = to_physical(spectral_derivative(u[c], DiffOp::D2));
        std::vector<double> w(sz);
        for (std::size_t i = 0; i < sz; ++i) w[i] = -(p1[i] * d1[i] + p2[i] * d2[i]);
        SpectralField what = to_spectral(grid, std::span<const double>(w));
        dealias_inplace(what);
        out.push_back(std::move(what));
    }
    return out;
}

inline VectorField nonlinear_rhs(const VectorField& u, const ModelParams& p) {
    std::vector<SpectralField> r = nonlinear_rhs_set({u.u1, u.u2}, p);
    return VectorField(std::move(r[0]), std::move(r[1]));
}

inline SpectralField nonlinear_rhs(const SpectralField& phi, const ModelParams& p) {
    if (p.model != Model::KseScalar)
        throw ShapeError("nonlinear_rhs: single-field overload is for the scalar model");
    return std::move(nonlinear_rhs_set({phi}, p)[0]);
}

// Full right-hand side d/dt u = sigma(k) u_hat + N(u), used by the reference
// integrators and the direct RHS tests; the ETD stepper applies the linear
// part exactly and consumes only the nonlinear piece.
inline std::vector<SpectralField> full_rhs_set(const std::vector<SpectralField>& u,
                                               const ModelParams& p, const LinearSymbol& sym) {
    std::vector<SpectralField> out = nonlinear_rhs_set(u, p);
    for (std::size_t c = 0; c < out.size(); ++c)
        for (std::size_t i = 0; i < out[c].coeffs().size(); ++i)
            out[c].coeffs()[i] += sym.sigma[c][i] * u[c].coeffs()[i];
    return out;
}

inline VectorField full_rhs(const VectorField& u, const ModelParams& p, const LinearSymbol& sym) {
    std::vector<SpectralField> r = full_rhs_set({u.u1, u.u2}, p, sym);
    return VectorField(std::move(r[0]), std::move(r[1]));
}

// Largest pointwise advection speed, the quantity the CFL condition needs:
// max over components of ||u_c||_inf for vector models, and the same for
// u = grad phi in the scalar form.
inline double advection_speed(const std::vector<SpectralField>& u, const ModelParams& p) {
    if (p.model == Model::KseScalar) {
        const double a = linf_norm(spectral_derivative(u[0], DiffOp::D1));
        const double b = linf_norm(spectral_derivative(u[0], DiffOp::D2));
        return std::max(a, b);
    }
    return std::max(linf_norm(u[0]), linf_norm(u[1]));
}

}  // namespace kse
