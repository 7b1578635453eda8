#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "kse/diagnostics.hpp"
#include "oracles.hpp"

using kse::Complex;

namespace {

kse::SimState state_of(std::vector<kse::SpectralField> fields, double t = 0.0) {
    kse::SimState s;
    s.t = t;
    s.fields = std::move(fields);
    return s;
}

kse::ModelParams vec_params() {
    kse::ModelParams p;
    p.model = kse::Model::KseVector;
    p.lambda = 5.01;
    return p;
}

}  // namespace

TEST_CASE("shell spectrum: single-mode value and exact energy partition") {
    const kse::GridPtr g = kse::build_grid(32);
    kse::SpectralField f(g);
    const double a = 0.75;
    f.at(1, 0) = Complex(0.0, -a / 2.0);
    f.at(-1, 0) = Complex(0.0, a / 2.0);
    kse::SpectralField z(g);

    // a*sin(x1): E(1) = 2 * (a/2)^2 = a^2/2, all other shells empty.
    const std::vector<double> shells = kse::energy_spectrum({f, z});
    REQUIRE(shells.size() >= 2);
    CHECK(shells[1] == Catch::Approx(a * a / 2.0).epsilon(1e-14));
    double rest = 0.0;
    for (std::size_t k = 0; k < shells.size(); ++k)
        if (k != 1) rest += shells[k];
    CHECK(rest == 0.0);

    // Shells partition the modes: their sum is the squared coefficient norm.
    const kse::SpectralField r1 = oracle::random_field(g, 9, 17);
    const kse::SpectralField r2 = oracle::random_field(g, 9, 18);
    const std::vector<double> sh = kse::energy_spectrum({r1, r2});
    double total = 0.0;
    for (double v : sh) total += v;
    const double direct =
        kse::l2_norm(r1) * kse::l2_norm(r1) + kse::l2_norm(r2) * kse::l2_norm(r2);
    CHECK(total == Catch::Approx(direct).epsilon(1e-12));
}

TEST_CASE("tail amplitude scans exactly the two bands below the cutoff") {
    const kse::GridPtr g = kse::build_grid(128);  // cutoff 128/3: bands 41 and 42
    kse::SpectralField f(g);
    f.at(40, 0) = Complex(1.0, 0.0);
    CHECK(kse::spectrum_tail_amplitude({f}) == 0.0);
    f.at(41, 0) = Complex(0.5, 0.0);
    CHECK(kse::spectrum_tail_amplitude({f}) == 0.5);
    f.at(0, 42) = Complex(0.75, 0.0);
    CHECK(kse::spectrum_tail_amplitude({f}) == 0.75);
    f.at(43, 0) = Complex(2.0, 0.0);  // past the cutoff: never scanned
    CHECK(kse::spectrum_tail_amplitude({f}) == 0.75);
    CHECK(kse::peak_amplitude({f}) == 2.0);

    kse::DiagnosticsRecord rec;
    rec.spectrum_tail = 0.0;
    rec.peak_amp = 1.0;
    CHECK(kse::resolution_check(rec));
    rec.spectrum_tail = 1e-18;
    CHECK(kse::resolution_check(rec));
    rec.spectrum_tail = 1e-10;
    CHECK_FALSE(kse::resolution_check(rec));
    CHECK(kse::resolution_check(rec, 1e-9));
}

TEST_CASE("cubic integrals vanish where the structure demands it") {
    const kse::GridPtr g = kse::build_grid(16);

    // One-dimensional shear u = (f(x2), 0): (u.grad)u = 0 identically.
    kse::SpectralField shear(g);
    shear.at(0, 1) = Complex(0.3, -0.1);
    shear.at(0, -1) = Complex(0.3, 0.1);
    shear.at(0, 3) = Complex(-0.2, 0.05);
    shear.at(0, -3) = Complex(-0.2, -0.05);
    kse::SimState s = state_of({shear, kse::SpectralField(g)});
    kse::DiagnosticsRecord rec = kse::sample_diagnostics(s, vec_params());
    CHECK(std::abs(rec.drift_x) < 1e-14);
    CHECK(std::abs(rec.drift_y) < 1e-14);
    CHECK(std::abs(rec.nonlinear_energy) < 1e-14);

    // Divergence-free field: the energy integral vanishes, the drift does not
    // have to. u = (d2 psi, -d1 psi) for a random stream function psi.
    kse::SpectralField psi = oracle::random_field(g, 5, 23);
    for (auto& v : psi.coeffs()) v *= 0.1;
    kse::SpectralField w1 = kse::spectral_derivative(psi, kse::DiffOp::D2);
    kse::SpectralField w2 = kse::spectral_derivative(psi, kse::DiffOp::D1);
    for (auto& v : w2.coeffs()) v = -v;
    s = state_of({std::move(w1), std::move(w2)});
    rec = kse::sample_diagnostics(s, vec_params());
    CHECK(std::abs(rec.nonlinear_energy) < 1e-10);

    // Gradient field: the drift integral vanishes exactly in the mean
    // (integral of grad(|grad phi|^2 / 2)), the energy does not have to.
    kse::SpectralField phi = oracle::random_field(g, 5, 29);
    for (auto& v : phi.coeffs()) v *= 0.1;
    const kse::SpectralField p1 = kse::spectral_derivative(phi, kse::DiffOp::D1);
    const kse::SpectralField p2 = kse::spectral_derivative(phi, kse::DiffOp::D2);
    s = state_of({p1, p2});
    rec = kse::sample_diagnostics(s, vec_params());
    CHECK(std::abs(rec.drift_x) < 1e-10);
    CHECK(std::abs(rec.drift_y) < 1e-10);
}

TEST_CASE("cubic integrals match high-resolution quadrature on a hand field") {
    // u = (sin(x1+x2), cos(x1)): compare the three integrals against direct
    // midpoint quadrature of the closed-form integrand on a finer grid.
    const kse::GridPtr g = kse::build_grid(32);
    kse::SpectralField u1(g), u2(g);
    u1.at(1, 1) = Complex(0.0, -0.5);
    u1.at(-1, -1) = Complex(0.0, 0.5);
    u2.at(1, 0) = Complex(0.5, 0.0);
    u2.at(-1, 0) = Complex(0.5, 0.0);

    kse::SimState s = state_of({u1, u2});
    const kse::DiagnosticsRecord rec = kse::sample_diagnostics(s, vec_params());

    auto a1 = [](double x, double y) {
        const double s1 = std::sin(x + y), c1 = std::cos(x + y);
        return s1 * c1 + std::cos(x) * c1;
    };
    auto a2 = [](double x, double y) {
        // u . grad u2 = u1 * d1(cos x) + u2 * 0
        return std::sin(x + y) * (-std::sin(x));
    };
    const double qx = oracle::quadrature_torus(a1, 256);
    const double qy = oracle::quadrature_torus(a2, 256);
    const double qe = oracle::quadrature_torus(
        [&](double x, double y) {
            return a1(x, y) * std::sin(x + y) + a2(x, y) * std::cos(x);
        },
        256);
    CHECK(rec.drift_x == Catch::Approx(qx).margin(1e-12));
    CHECK(rec.drift_y == Catch::Approx(qy).margin(1e-12));
    CHECK(rec.nonlinear_energy == Catch::Approx(qe).margin(1e-12));
}

TEST_CASE("scalar records report the potential and derive its gradient flow") {
    const kse::GridPtr g = kse::build_grid(16);
    kse::SpectralField phi(g);
    phi.at(1, 0) = Complex(0.0, -0.5);
    phi.at(-1, 0) = Complex(0.0, 0.5);

    kse::ModelParams p;
    p.model = kse::Model::KseScalar;
    p.lambda = 5.01;
    kse::SimState s = state_of({phi});
    const kse::DiagnosticsRecord rec = kse::sample_diagnostics(s, p);

    CHECK(rec.l2_u1 == Catch::Approx(kse::l2_norm(phi)).epsilon(1e-14));
    CHECK(rec.l2_u2 == 0.0);
    CHECK(rec.linf_u1 == Catch::Approx(1.0).epsilon(1e-12));
    // v = grad(phi) = (cos x1, 0): drift of v . grad v vanishes for gradients.
    CHECK(std::abs(rec.drift_x) < 1e-12);
    CHECK(std::abs(rec.drift_y) < 1e-12);
}

TEST_CASE("non-finite fields raise a blow-up diagnosis") {
    const kse::GridPtr g = kse::build_grid(16);
    kse::SpectralField f(g);
    f.at(1, 0) = Complex(std::numeric_limits<double>::infinity(), 0.0);
    kse::SimState s = state_of({f, kse::SpectralField(g)}, 0.25);
    try {
        kse::sample_diagnostics(s, vec_params());
        FAIL("expected blow-up");
    } catch (const kse::BlowupError& e) {
        CHECK(e.t == 0.25);
    }
}

TEST_CASE("max principle monitor flags growth beyond tolerance") {
    const kse::MaxPrincipleReport ok =
        kse::max_principle_monitor({1.0, 0.9, 0.95, 1.0000001}, 1.0, 1e-6);
    CHECK(ok.pass);
    CHECK(ok.max_excess == Catch::Approx(1e-7).epsilon(1e-6));

    const kse::MaxPrincipleReport bad =
        kse::max_principle_monitor({1.0, 1.001}, 1.0, 1e-6);
    CHECK_FALSE(bad.pass);
    CHECK(bad.max_excess == Catch::Approx(1e-3).epsilon(1e-9));

    const kse::MaxPrincipleReport empty = kse::max_principle_monitor({}, 1.0);
    CHECK(empty.pass);
    CHECK(empty.max_excess == 0.0);
}

TEST_CASE("cosimulation error is zero by construction and sees perturbations") {
    const kse::GridPtr g = kse::build_grid(32);
    const kse::SpectralField phi = oracle::random_field(g, 6, 37);
    kse::VectorField u(kse::spectral_derivative(phi, kse::DiffOp::D1),
                       kse::spectral_derivative(phi, kse::DiffOp::D2));
    CHECK(kse::cosim_error(u, phi) == 0.0);

    // Perturb one velocity mode by eps: the error is the sup of that mode's
    // physical contribution, |eps e^{ik.x}| + |conj| = 2 eps at the peak
    // (up to the cancellation roundoff of adding eps to an O(1) coefficient).
    const double eps = 1e-6;
    u.u1.at(2, 1) += Complex(eps, 0.0);
    u.u1.at(-2, -1) += Complex(eps, 0.0);
    CHECK(kse::cosim_error(u, phi) == Catch::Approx(2.0 * eps).margin(1e-13));

    const kse::GridPtr g2 = kse::build_grid(16);
    CHECK_THROWS_AS(kse::cosim_error(u, kse::SpectralField(g2)), kse::ShapeError);
}
