#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "kse/errors.hpp"
#include "kse/field.hpp"
#include "kse/models.hpp"

namespace kse {

// Contour used to evaluate the phi-function weights: M equally spaced points
// on a circle of radius r centered at each z0 = sigma*dt. The half-offset
// angles 2*pi*(j+1/2)/M keep the points away from the real axis, so z never
// hits the removable singularity at 0 even when z0 = -r, and conjugate pairs
// cancel the imaginary residue to roundoff. M must be even for that pairing.
struct ContourSpec {
    int points = 32;
    double radius = 1.0;
};

// Fourth-order exponential time differencing tables, one entry per mode and
// component: E = e^{sigma dt}, E2 = e^{sigma dt/2}, the half-step weight q,
// and the final-combination weights alpha/beta/gamma. At sigma = 0 these
// reduce to the classical Runge-Kutta values dt/2, dt/6, dt/6, dt/6.
struct IntegratorCoefficients {
    double dt = 0.0;
    int components = 0;
    ContourSpec contour;
    std::vector<std::vector<double>> E, E2, q, alpha, beta, gamma;
    // Largest imaginary part discarded when the contour averages were taken
    // real; should sit at roundoff scale.
    double max_imag_residue = 0.0;
};

// Contour average of phi_1(z) = (e^z - 1)/z centered at z0; exposed for
// direct comparison against series evaluation in tests.
inline Complex phi1_contour(Complex z0, ContourSpec contour = {}) {
    if (contour.points < 2 || contour.points % 2 != 0)
        throw ConfigError("phi1_contour: contour points must be even and >= 2");
    Complex acc(0.0, 0.0);
    for (int j = 0; j < contour.points; ++j) {
        const double theta = 2.0 * M_PI * (j + 0.5) / contour.points;
        const Complex z = z0 + contour.radius * Complex(std::cos(theta), std::sin(theta));
        acc += (std::exp(z) - 1.0) / z;
    }
    return acc / static_cast<double>(contour.points);
}

inline IntegratorCoefficients etd_coefficients(const LinearSymbol& sym, double dt,
                                               ContourSpec contour = {}) {
    if (!(dt > 0.0)) throw ConfigError("etd_coefficients: dt must be positive");
    if (contour.points < 2 || contour.points % 2 != 0)
        throw ConfigError("etd_coefficients: contour points must be even and >= 2");
    if (!(contour.radius > 0.0)) throw ConfigError("etd_coefficients: contour radius must be positive");

    IntegratorCoefficients C;
    C.dt = dt;
    C.components = sym.components;
    C.contour = contour;
    const std::size_t nmodes = sym.sigma.empty() ? 0 : sym.sigma[0].size();
    for (auto* t : {&C.E, &C.E2, &C.q, &C.alpha, &C.beta, &C.gamma})
        t->assign(sym.components, std::vector<double>(nmodes, 0.0));

    const int M = contour.points;
    std::vector<Complex> ring(M);
    for (int j = 0; j < M; ++j) {
        const double theta = 2.0 * M_PI * (j + 0.5) / M;
        ring[j] = contour.radius * Complex(std::cos(theta), std::sin(theta));
    }

    double worst_imag = 0.0;
    for (int c = 0; c < sym.components; ++c) {
        for (std::size_t i = 0; i < nmodes; ++i) {
            const double z0 = sym.sigma[c][i] * dt;
            C.E[c][i] = std::exp(z0);
            C.E2[c][i] = std::exp(0.5 * z0);
            Complex aq(0.0, 0.0), aa(0.0, 0.0), ab(0.0, 0.0), ag(0.0, 0.0);
            for (int j = 0; j < M; ++j) {
                const Complex z = z0 + ring[j];
                const Complex ez = std::exp(z);
                const Complex ez2 = std::exp(0.5 * z);
                const Complex z2 = z * z;
                const Complex z3 = z2 * z;
                aq += (ez2 - 1.0) / z;
                aa += (-4.0 - z + ez * (4.0 - 3.0 * z + z2)) / z3;
                ab += (2.0 + z + ez * (-2.0 + z)) / z3;
                ag += (-4.0 - 3.0 * z - z2 + ez * (4.0 - z)) / z3;
            }
            const double scale = dt / M;
            const Complex vq = scale * aq;
            const Complex va = scale * aa;
            const Complex vb = scale * ab;
            const Complex vg = scale * ag;
            C.q[c][i] = vq.real();
            C.alpha[c][i] = va.real();
            C.beta[c][i] = vb.real();
            C.gamma[c][i] = vg.real();
            for (const Complex& v : {vq, va, vb, vg})
                worst_imag = std::max(worst_imag, std::abs(v.imag()));
        }
    }
    C.max_imag_residue = worst_imag;
    return C;
}

// Step-size and safety policy for a run.
struct StepControls {
    double cfl = 0.5;
    double dt_max = 1e-3;
    // Cached coefficients are reused while the desired dt stays within this
    // relative window; beyond it the exponential tables are rebuilt.
    double dt_rebuild_threshold = 0.02;
    ContourSpec contour;
    double blowup_linf = 1e8;
    double speed_floor = 1e-12;  // keeps cfl_dt finite for quiescent fields
    bool enable_nonlinearity = true;  // test hook: false integrates the pure linear flow
    // When set, every nonlinear evaluation and step result is projected onto
    // the Euclidean ball |k| <= radius (integer modes). This turns the
    // stepper into the exact truncated system the low-mode reference ODE
    // integrates, for cross-validation.
    std::optional<double> projection_radius;
};

struct SimState {
    double t = 0.0;
    long step_count = 0;
    std::vector<SpectralField> fields;
};

// One accepted step of the time loop, in step-log column order.
struct StepRecord {
    long step = 0;
    double t = 0.0;
    double dt = 0.0;
    double max_speed = 0.0;
    bool coeff_rebuilt = false;
};

inline double cfl_dt(double max_speed, const GridSpec& g, const StepControls& ctl) {
    const double speed = std::max(max_speed, ctl.speed_floor);
    return std::min(ctl.cfl * g.dx() / speed, ctl.dt_max);
}

// ETD-RK4 time stepper for one model on one grid. Owns the linear symbol and
// a coefficient cache keyed by dt; states move through it by value-reference.
class EtdIntegrator {
  public:
    EtdIntegrator(GridPtr grid, ModelParams params, StepControls controls = {})
        : grid_(std::move(grid)),
          params_(params),
          controls_(controls),
          symbol_(linear_symbol(params, *grid_)) {
        if (controls_.projection_radius) {
            const double R = *controls_.projection_radius;
            if (!(R > 0.0)) throw ConfigError("EtdIntegrator: projection radius must be positive");
            const auto r2 = static_cast<std::int64_t>(std::floor(R * R + 1e-9));
            ball_mask_.resize(grid_->size());
            for (std::size_t i = 0; i < grid_->size(); ++i) {
                const std::int64_t k1 = grid_->k1_at(i);
                const std::int64_t k2 = grid_->k2_at(i);
                ball_mask_[i] = (k1 * k1 + k2 * k2 <= r2) ? 1 : 0;
            }
        }
    }

    const GridPtr& grid() const { return grid_; }
    const ModelParams& params() const { return params_; }
    const StepControls& controls() const { return controls_; }
    const LinearSymbol& symbol() const { return symbol_; }
    const IntegratorCoefficients* cached_coefficients() const {
        return coeffs_ ? &*coeffs_ : nullptr;
    }

    SimState make_state(std::vector<SpectralField> fields, double t0 = 0.0) const {
        if (static_cast<int>(fields.size()) != params_.components())
            throw ShapeError("make_state: field count does not match model");
        SimState s;
        s.t = t0;
        s.fields = std::move(fields);
        for (SpectralField& f : s.fields) {
            if (f.grid().n != grid_->n) throw ShapeError("make_state: field grid does not match");
            dealias_inplace(f);
            project(f);
        }
        return s;
    }

    double max_speed(const SimState& s) const { return advection_speed(s.fields, params_); }

    double cfl_dt(const SimState& s) const { return kse::cfl_dt(max_speed(s), *grid_, controls_); }

    // Take exactly one step of size dt (tables rebuilt unless dt matches the
    // cache to near machine precision).
    void step(SimState& s, double dt) {
        if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
        ensure_coefficients(dt, 1e-12);
        apply_and_commit(s);
    }

    // March the state to t_target exactly, choosing dt from the CFL bound and
    // dividing each stretch evenly so the final step is never a sliver.
    // Returns one record per accepted step. on_step, when given, runs after
    // each committed step with the dt just taken -- the hook a co-simulation
    // uses to drive a companion state through the identical dt sequence.
    std::vector<StepRecord> advance_to(SimState& s, double t_target,
                                       const std::function<void(double)>& on_step = {}) {
        if (t_target < s.t)
            throw ConfigError("advance_to: target time precedes current state");
        std::vector<StepRecord> log;
        while (true) {
            const double remaining = t_target - s.t;
            if (remaining <= 0.0) break;
            const double speed = max_speed(s);
            if (!std::isfinite(speed) || speed > controls_.blowup_linf)
                throw BlowupError(s.t, speed, "solution left the finite regime");
            const double dt_bound = kse::cfl_dt(speed, *grid_, controls_);
            const auto nsub = std::max<long>(1, static_cast<long>(std::ceil(remaining / dt_bound - 1e-12)));
            const double dt_even = remaining / static_cast<double>(nsub);
            // The final partial step must land on t_target exactly, so the
            // reuse window collapses once a single step remains.
            const double window = (nsub == 1) ? 1e-9 : controls_.dt_rebuild_threshold;
            const bool rebuilt = ensure_coefficients(dt_even, window);
            apply_and_commit(s);
            if (nsub == 1)
                s.t = t_target;
            log.push_back({s.step_count, s.t, coeffs_->dt, speed, rebuilt});
            if (on_step) on_step(coeffs_->dt);
        }
        return log;
    }

  private:
    // Rebuild the exponential tables unless the cached dt is within rel_tol
    // of the request; returns true when a rebuild happened.
    bool ensure_coefficients(double dt, double rel_tol) {
        if (coeffs_ && std::abs(dt / coeffs_->dt - 1.0) <= rel_tol) return false;
        coeffs_ = etd_coefficients(symbol_, dt, controls_.contour);
        return true;
    }

    void project(SpectralField& f) const {
        if (ball_mask_.empty()) return;
        for (std::size_t i = 0; i < ball_mask_.size(); ++i)
            if (!ball_mask_[i]) f.coeffs()[i] = Complex(0.0, 0.0);
    }

    std::vector<SpectralField> nonlinear(const std::vector<SpectralField>& u) const {
        if (!controls_.enable_nonlinearity) {
            std::vector<SpectralField> zero;
            zero.reserve(u.size());
            for (const SpectralField& f : u) zero.emplace_back(f.grid_ptr(), f.real_valued());
            return zero;
        }
        std::vector<SpectralField> out = nonlinear_rhs_set(u, params_);
        for (SpectralField& f : out) project(f);
        return out;
    }

    // One ETD-RK4 update of the fields; commits into the state only after the
    // result passes the finiteness check, so a blow-up leaves the last good
    // fields in place.
    void apply_and_commit(SimState& s) {
        const IntegratorCoefficients& C = *coeffs_;
        const std::size_t nm = grid_->size();
        const int nc = params_.components();
        const std::vector<SpectralField>& u = s.fields;

        auto blend = [&](const std::vector<SpectralField>& base, const std::vector<double>& eb,
                         int c, const SpectralField& nl, const std::vector<double>& w) {
            SpectralField out(grid_, base[c].real_valued() && nl.real_valued());
            for (std::size_t i = 0; i < nm; ++i)
                out.coeffs()[i] = eb[i] * base[c].coeffs()[i] + w[i] * nl.coeffs()[i];
            return out;
        };

        const std::vector<SpectralField> Nu = nonlinear(u);
        std::vector<SpectralField> a, b;
        a.reserve(nc);
        for (int c = 0; c < nc; ++c) a.push_back(blend(u, C.E2[c], c, Nu[c], C.q[c]));
        const std::vector<SpectralField> Na = nonlinear(a);
        b.reserve(nc);
        for (int c = 0; c < nc; ++c) b.push_back(blend(u, C.E2[c], c, Na[c], C.q[c]));
        const std::vector<SpectralField> Nb = nonlinear(b);
        std::vector<SpectralField> cc;
        cc.reserve(nc);
        for (int c = 0; c < nc; ++c) {
            SpectralField f(grid_, u[c].real_valued());
            for (std::size_t i = 0; i < nm; ++i)
                f.coeffs()[i] = C.E2[c][i] * a[c].coeffs()[i] +
                                C.q[c][i] * (2.0 * Nb[c].coeffs()[i] - Nu[c].coeffs()[i]);
            cc.push_back(std::move(f));
        }
        const std::vector<SpectralField> Nc = nonlinear(cc);

        std::vector<SpectralField> next;
        next.reserve(nc);
        for (int c = 0; c < nc; ++c) {
            SpectralField f(grid_, u[c].real_valued());
            for (std::size_t i = 0; i < nm; ++i) {
                f.coeffs()[i] = C.E[c][i] * u[c].coeffs()[i] + C.alpha[c][i] * Nu[c].coeffs()[i] +
                                2.0 * C.beta[c][i] * (Na[c].coeffs()[i] + Nb[c].coeffs()[i]) +
                                C.gamma[c][i] * Nc[c].coeffs()[i];
            }
            dealias_inplace(f);
            project(f);
            next.push_back(std::move(f));
        }

        for (const SpectralField& f : next) {
            for (const Complex& v : f.coeffs()) {
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                    throw BlowupError(s.t + C.dt, std::numeric_limits<double>::infinity(),
                                      "non-finite coefficient after step");
            }
        }
        s.fields = std::move(next);
        s.t += C.dt;
        ++s.step_count;
    }

    GridPtr grid_;
    ModelParams params_;
    StepControls controls_;
    LinearSymbol symbol_;
    std::optional<IntegratorCoefficients> coeffs_;
    std::vector<std::uint8_t> ball_mask_;
};

}  // namespace kse
