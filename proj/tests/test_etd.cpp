#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <vector>

#include "kse/etd.hpp"
#include "oracles.hpp"

using kse::Complex;

namespace {

bool bits_equal(const kse::SpectralField& a, const kse::SpectralField& b) {
    return a.coeffs().size() == b.coeffs().size() &&
           std::memcmp(a.coeffs().data(), b.coeffs().data(),
                       a.coeffs().size() * sizeof(Complex)) == 0;
}

kse::ModelParams vector_params(double lambda = 5.01) {
    kse::ModelParams p;
    p.model = kse::Model::KseVector;
    p.lambda = lambda;
    return p;
}

std::vector<kse::SpectralField> small_band_pair(const kse::GridPtr& g, double amp,
                                                std::uint64_t seed) {
    kse::SpectralField a = oracle::random_field(g, 4, seed);
    kse::SpectralField b = oracle::random_field(g, 4, seed + 1);
    for (auto& v : a.coeffs()) v *= amp;
    for (auto& v : b.coeffs()) v *= amp;
    return {std::move(a), std::move(b)};
}

}  // namespace

TEST_CASE("contour average reproduces phi_1 away from and at the singularity") {
    auto direct = [](Complex z) { return (std::exp(z) - 1.0) / z; };
    for (Complex z0 : {Complex(-1.0, 0.0), Complex(-10.0, 0.0), Complex(2.0, 0.0),
                       Complex(0.0, 1.0), Complex(0.3, -0.7)}) {
        CHECK(std::abs(kse::phi1_contour(z0) - direct(z0)) < 1e-13);
    }
    // z0 = 0 sits on the removable singularity; the half-offset contour never
    // touches it and the average equals phi_1(0) = 1.
    CHECK(std::abs(kse::phi1_contour(Complex(0.0, 0.0)) - 1.0) < 1e-14);
    CHECK(std::abs(kse::phi1_contour(Complex(0.0, 0.0)) -
                   oracle::phi_series(1, Complex(0.0, 0.0))) < 1e-14);
    CHECK(std::abs(kse::phi1_contour(Complex(-1.0, 0.0)) -
                   oracle::phi_series(1, Complex(-1.0, 0.0))) < 1e-13);

    CHECK_THROWS_AS(kse::phi1_contour(Complex(0.0, 0.0), {3, 1.0}), kse::ConfigError);
}

TEST_CASE("coefficient tables: limits at sigma = 0 and closed forms at sigma*dt = -1") {
    const double dt = 0.0125;
    kse::LinearSymbol sym;
    sym.components = 1;
    sym.sigma = {{0.0, -1.0 / dt}};

    const kse::IntegratorCoefficients C = kse::etd_coefficients(sym, dt);

    // sigma = 0 entry: the classical RK4 limits.
    CHECK(C.E[0][0] == 1.0);
    CHECK(C.E2[0][0] == 1.0);
    CHECK(std::abs(C.q[0][0] - dt / 2.0) < 1e-12 * dt);
    CHECK(std::abs(C.alpha[0][0] - dt / 6.0) < 1e-12 * dt);
    CHECK(std::abs(C.beta[0][0] - dt / 6.0) < 1e-12 * dt);
    CHECK(std::abs(C.gamma[0][0] - dt / 6.0) < 1e-12 * dt);

    // sigma*dt = z = -1 entry: evaluate the defining expressions directly.
    const double e1 = std::exp(-1.0);
    CHECK(std::abs(C.E[0][1] - e1) < 1e-15);
    CHECK(std::abs(C.E2[0][1] - std::exp(-0.5)) < 1e-15);
    const double q_exact = dt * (std::exp(-0.5) - 1.0) / (-1.0);
    const double alpha_exact = dt * ((-4.0 + 1.0) + e1 * (4.0 + 3.0 + 1.0)) / (-1.0);
    const double beta_exact = dt * ((2.0 - 1.0) + e1 * (-2.0 - 1.0)) / (-1.0);
    const double gamma_exact = dt * ((-4.0 + 3.0 - 1.0) + e1 * (4.0 + 1.0)) / (-1.0);
    CHECK(std::abs(C.q[0][1] - q_exact) < 1e-13 * dt);
    CHECK(std::abs(C.alpha[0][1] - alpha_exact) < 1e-13 * dt);
    CHECK(std::abs(C.beta[0][1] - beta_exact) < 1e-13 * dt);
    CHECK(std::abs(C.gamma[0][1] - gamma_exact) < 1e-13 * dt);

    CHECK(C.max_imag_residue < 1e-13 * dt);

    CHECK_THROWS_AS(kse::etd_coefficients(sym, -1.0), kse::ConfigError);
    CHECK_THROWS_AS(kse::etd_coefficients(sym, dt, {5, 1.0}), kse::ConfigError);
    CHECK_THROWS_AS(kse::etd_coefficients(sym, dt, {32, 0.0}), kse::ConfigError);
}

TEST_CASE("coefficient tables stay finite across the realistic symbol range") {
    const kse::GridPtr g = kse::build_grid(64);
    const kse::LinearSymbol sym = kse::linear_symbol(vector_params(), *g);
    const kse::IntegratorCoefficients C = kse::etd_coefficients(sym, 1e-3);
    for (int c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < g->size(); ++i) {
            for (const auto* tab : {&C.E, &C.E2, &C.q, &C.alpha, &C.beta, &C.gamma}) {
                REQUIRE(std::isfinite((*tab)[c][i]));
            }
            // The weights are positive and bounded by dt for decaying modes.
            CHECK(C.q[c][i] >= 0.0);
            CHECK(C.q[c][i] <= 1e-3 * std::max(1.0, C.E2[c][i]));
        }
    }
    CHECK(C.max_imag_residue < 1e-16);
}

TEST_CASE("nonlinearity disabled: the stepper applies the exact linear flow") {
    const kse::GridPtr g = kse::build_grid(32);
    kse::StepControls ctl;
    ctl.enable_nonlinearity = false;
    ctl.dt_max = 1e-3;
    kse::EtdIntegrator integ(g, vector_params(), ctl);

    kse::SimState s = integ.make_state(small_band_pair(g, 0.3, 11));
    const std::vector<kse::SpectralField> u0 = s.fields;
    const double T = 0.01;
    integ.advance_to(s, T);
    REQUIRE(s.t == T);

    const kse::LinearSymbol& sym = integ.symbol();
    double worst = 0.0;
    for (int c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < g->size(); ++i) {
            const Complex expect = std::exp(sym.sigma[c][i] * T) * u0[c].coeffs()[i];
            worst = std::max(worst, std::abs(s.fields[c].coeffs()[i] - expect));
        }
    }
    CHECK(worst < 1e-11);
}

TEST_CASE("self-convergence of the full step is fourth order") {
    const kse::GridPtr g = kse::build_grid(32);
    kse::EtdIntegrator integ(g, vector_params());
    const std::vector<kse::SpectralField> u0 = small_band_pair(g, 0.5, 21);
    const double T = 0.01;

    auto run_fixed = [&](int nsteps) {
        kse::SimState s = integ.make_state(u0);
        const double dt = T / nsteps;
        for (int i = 0; i < nsteps; ++i) integ.step(s, dt);
        return s.fields;
    };

    const std::vector<kse::SpectralField> ref = run_fixed(128);
    std::vector<double> err;
    for (int nsteps : {4, 8, 16}) {
        const std::vector<kse::SpectralField> f = run_fixed(nsteps);
        err.push_back(std::max(oracle::max_coeff_diff(f[0], ref[0]),
                               oracle::max_coeff_diff(f[1], ref[1])));
    }
    REQUIRE(err[0] > 1e-13);  // must sit well above roundoff for the ratios to mean anything
    const double p12 = std::log2(err[0] / err[1]);
    const double p23 = std::log2(err[1] / err[2]);
    CHECK(p12 > 3.4);
    CHECK(p12 < 4.6);
    CHECK(p23 > 3.4);
    CHECK(p23 < 4.6);
}

TEST_CASE("advance_to: even division, exact landing, and split-path determinism") {
    const kse::GridPtr g = kse::build_grid(32);
    kse::EtdIntegrator a(g, vector_params());
    kse::EtdIntegrator b(g, vector_params());
    const std::vector<kse::SpectralField> u0 = small_band_pair(g, 0.2, 31);

    kse::SimState sa = a.make_state(u0);
    kse::SimState sb = b.make_state(u0);

    const std::vector<kse::StepRecord> log = a.advance_to(sa, 8e-3);
    b.advance_to(sb, 4e-3);
    REQUIRE(sb.t == 4e-3);
    b.advance_to(sb, 8e-3);

    REQUIRE(sa.t == 8e-3);
    REQUIRE(sb.t == 8e-3);
    REQUIRE(log.size() == 8);  // quiescent field: dt_max = 1e-3 binds
    CHECK(log.front().coeff_rebuilt);
    for (std::size_t i = 1; i < log.size(); ++i) CHECK_FALSE(log[i].coeff_rebuilt);
    for (const kse::StepRecord& r : log) CHECK(r.dt == 1e-3);

    // Stopping halfway and resuming must replay the identical dt sequence.
    CHECK(bits_equal(sa.fields[0], sb.fields[0]));
    CHECK(bits_equal(sa.fields[1], sb.fields[1]));

    // No-op advance: empty log, state untouched.
    const std::vector<kse::SpectralField> before = sa.fields;
    CHECK(a.advance_to(sa, sa.t).empty());
    CHECK(sa.t == 8e-3);
    CHECK(bits_equal(sa.fields[0], before[0]));
    CHECK_THROWS_AS(a.advance_to(sa, 4e-3), kse::ConfigError);
}

TEST_CASE("cfl_dt: bound, cap, and quiescent floor") {
    const kse::GridPtr g = kse::build_grid(32);
    kse::StepControls ctl;
    ctl.cfl = 0.5;
    ctl.dt_max = 1e-3;
    CHECK(kse::cfl_dt(4.0, *g, ctl) == 1e-3);
    ctl.dt_max = 1.0;
    CHECK(kse::cfl_dt(4.0, *g, ctl) == 0.5 * g->dx() / 4.0);
    CHECK(kse::cfl_dt(0.0, *g, ctl) == 1.0);  // speed floor keeps the bound finite
    ctl.dt_max = 1e-3;
    // A fast field tightens the bound below dt_max.
    const double fast = 1e4;
    CHECK(kse::cfl_dt(fast, *g, ctl) == 0.5 * g->dx() / fast);
}

TEST_CASE("blow-up guard trips on excessive speed and preserves the last good state") {
    const kse::GridPtr g = kse::build_grid(32);
    kse::StepControls ctl;
    ctl.blowup_linf = 1e-3;  // absurdly low threshold: any O(1) field trips it
    kse::EtdIntegrator integ(g, vector_params(), ctl);
    kse::SimState s = integ.make_state(small_band_pair(g, 1.0, 41));
    const std::vector<kse::SpectralField> keep = s.fields;

    REQUIRE_THROWS_AS(integ.advance_to(s, 1e-2), kse::BlowupError);
    CHECK(s.t == 0.0);
    CHECK(s.step_count == 0);
    CHECK(bits_equal(s.fields[0], keep[0]));
    CHECK(bits_equal(s.fields[1], keep[1]));

    try {
        integ.advance_to(s, 1e-2);
        FAIL("expected blow-up");
    } catch (const kse::BlowupError& e) {
        CHECK(e.t == 0.0);
        CHECK(e.norm > ctl.blowup_linf);
    }
}

TEST_CASE("non-finite coefficients abort the step without committing") {
    // A symbol large enough that exp overflows: the post-step finiteness check
    // must fire and the pre-step state must survive.
    const kse::GridPtr g = kse::build_grid(16);
    kse::ModelParams p = vector_params(1e9);
    kse::StepControls ctl;
    ctl.dt_max = 1e-3;
    kse::EtdIntegrator integ(g, p, ctl);
    kse::SimState s = integ.make_state(small_band_pair(g, 0.1, 51));
    const std::vector<kse::SpectralField> keep = s.fields;

    REQUIRE_THROWS_AS(integ.advance_to(s, 1e-3), kse::BlowupError);
    CHECK(s.t == 0.0);
    CHECK(bits_equal(s.fields[0], keep[0]));

    // Direct NaN injection trips the speed guard instead.
    kse::EtdIntegrator sane(g, vector_params(), {});
    kse::SimState sn = sane.make_state(small_band_pair(g, 0.1, 61));
    sn.fields[0].coeffs()[3] = Complex(std::nan(""), 0.0);
    CHECK_THROWS_AS(sane.advance_to(sn, 1e-3), kse::BlowupError);
}

TEST_CASE("make_state validates shape and applies the dealias mask") {
    const kse::GridPtr g = kse::build_grid(32);
    kse::EtdIntegrator integ(g, vector_params());
    CHECK_THROWS_AS(integ.make_state({kse::SpectralField(g)}), kse::ShapeError);
    const kse::GridPtr g2 = kse::build_grid(16);
    CHECK_THROWS_AS(integ.make_state({kse::SpectralField(g2), kse::SpectralField(g2)}),
                    kse::ShapeError);

    kse::SpectralField dirty(g);
    dirty.at(15, 0) = Complex(1.0, 0.0);  // outside the kept block for n = 32
    dirty.at(1, 0) = Complex(0.0, -0.5);
    kse::SimState s = integ.make_state({dirty, kse::SpectralField(g)});
    CHECK(s.fields[0].at(15, 0) == Complex(0.0, 0.0));
    CHECK(s.fields[0].at(1, 0) == Complex(0.0, -0.5));
}

TEST_CASE("projection mode confines the dynamics to the retained ball") {
    const kse::GridPtr g = kse::build_grid(32);
    kse::StepControls ctl;
    ctl.projection_radius = 3.0;
    kse::EtdIntegrator integ(g, vector_params(), ctl);
    kse::SimState s = integ.make_state(small_band_pair(g, 0.5, 71));
    integ.advance_to(s, 5e-3);
    for (const kse::SpectralField& f : s.fields) {
        for (std::size_t i = 0; i < g->size(); ++i) {
            const long k1 = g->k1_at(i), k2 = g->k2_at(i);
            if (k1 * k1 + k2 * k2 > 9) CHECK(f.coeffs()[i] == Complex(0.0, 0.0));
        }
    }
}
