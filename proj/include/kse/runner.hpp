#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kse/config.hpp"
#include "kse/diagnostics.hpp"
#include "kse/errors.hpp"
#include "kse/etd.hpp"
#include "kse/ksef.hpp"
#include "kse/rng.hpp"
#include "kse/runner_io.hpp"
#include "kse/version.hpp"

namespace kse {

// Model state plus, for co-simulation, the potential whose gradient the
// vector state was built from.
struct InitialData {
    std::vector<SpectralField> fields;
    std::optional<SpectralField> phi;
};

// The reference low-mode potential: phi0 = sin(x+y) + sin(x) + sin(y),
// written directly in coefficient space (sin(a) contributes -i/2 and +i/2 at
// the +/- mode pair). Exact on every grid with n >= 4.
inline SpectralField reference_potential(const GridPtr& grid) {
    SpectralField phi(grid);
    const Complex lower(0.0, -0.5), upper(0.0, 0.5);
    phi.at(1, 1) = lower;
    phi.at(-1, -1) = upper;
    phi.at(1, 0) = lower;
    phi.at(-1, 0) = upper;
    phi.at(0, 1) = lower;
    phi.at(0, -1) = upper;
    return phi;
}

namespace detail {

// Scale factor C that normalizes the physical L2 norm of grad(phi) to one:
// the integral norm is domain_length times the coefficient norm in 2D.
inline double gradient_normalization(const SpectralField& phi) {
    const double a = l2_norm(spectral_derivative(phi, DiffOp::D1));
    const double b = l2_norm(spectral_derivative(phi, DiffOp::D2));
    const double coeff = std::sqrt(a * a + b * b);
    if (!(coeff > 0.0)) throw ConfigError("initial_data: potential has a vanishing gradient");
    return 1.0 / (phi.grid().domain_length * coeff);
}

inline void scale_field(SpectralField& f, double c) {
    for (Complex& v : f.coeffs()) v *= c;
}

}  // namespace detail

inline InitialData initial_data(const GridPtr& grid, const RunConfig& cfg) {
    InitialData out;
    SpectralField phi(grid);
    switch (cfg.init) {
        case RunConfig::InitKind::SineSum:
            phi = reference_potential(grid);
            break;
        case RunConfig::InitKind::RandomBand: {
            SplitMix64 rng(cfg.seed);
            phi = random_band_field(grid, cfg.band_kmax, rng);
            break;
        }
        case RunConfig::InitKind::File: {
            if (cfg.params.model == Model::KseScalar) {
                out.fields.push_back(read_snapshot(cfg.init_path + "_phi.ksef", grid));
                return out;
            }
            out.fields.push_back(read_snapshot(cfg.init_path + "_u1.ksef", grid));
            out.fields.push_back(read_snapshot(cfg.init_path + "_u2.ksef", grid));
            if (cfg.cosim) out.phi = read_snapshot(cfg.init_path + "_phi.ksef", grid);
            return out;
        }
    }

    const double c = detail::gradient_normalization(phi);
    detail::scale_field(phi, c);
    if (cfg.params.model == Model::KseScalar) {
        out.fields.push_back(std::move(phi));
        return out;
    }
    out.fields.push_back(spectral_derivative(phi, DiffOp::D1));
    out.fields.push_back(spectral_derivative(phi, DiffOp::D2));
    if (cfg.cosim) out.phi = std::move(phi);
    return out;
}

// Output root override: relative output directories resolve under
// KSE_OUT_DIR when the variable is set and nonempty.
inline std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
    std::filesystem::path dir = cfg.output_dir;
    if (const char* env = std::getenv("KSE_OUT_DIR"))
        if (env[0] != '\0' && dir.is_relative()) dir = std::filesystem::path(env) / dir;
    return dir;
}

struct RunResult {
    std::filesystem::path out_dir;
    std::vector<DiagnosticsRecord> records;
    std::vector<StepRecord> steps;
    bool resolution_warning = false;
    bool blew_up = false;
    double blowup_t = 0.0;
    double blowup_norm = 0.0;
    double final_t = 0.0;
    long total_steps = 0;
    double wall_seconds = 0.0;
};

namespace detail {

inline std::vector<double> sample_times(double t_final, double ds) {
    std::vector<double> ts{0.0};
    if (!(t_final > 0.0)) return ts;
    long i = 1;
    while (true) {
        const double t = ds * static_cast<double>(i);
        if (t >= t_final - 0.5 * ds) break;
        ts.push_back(t);
        ++i;
    }
    ts.push_back(t_final);
    return ts;
}

inline bool near_multiple(double t, double interval, long& index_out) {
    const double m = std::floor(t / interval + 0.5);
    index_out = static_cast<long>(m);
    return std::abs(t - m * interval) <= 1e-9 * std::max(1.0, interval);
}

inline std::string snapshot_name(long index, const char* component) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "snap_%04ld_%s.ksef", index, component);
    return buf;
}

}  // namespace detail

// Execute one configured run, writing diagnostics.csv, spectrum.csv,
// steps.csv, snapshots, and manifest.txt into the resolved output directory.
// A blow-up is caught, the last good fields are persisted, and the result
// reports it rather than throwing; configuration problems still throw.
inline RunResult run(const RunConfig& cfg) {
    const auto wall0 = std::chrono::steady_clock::now();
    RunResult res;

    GridPtr grid = build_grid(cfg.n, cfg.domain_length);
    InitialData init = initial_data(grid, cfg);

    EtdIntegrator integ(grid, cfg.params, cfg.controls);
    SimState state = integ.make_state(std::move(init.fields));

    std::optional<EtdIntegrator> shadow_integ;
    std::optional<SimState> shadow;
    if (cfg.cosim) {
        ModelParams sp = cfg.params;
        sp.model = Model::KseScalar;
        shadow_integ.emplace(grid, sp, cfg.controls);
        shadow = shadow_integ->make_state({std::move(*init.phi)});
    }

    res.out_dir = resolve_output_dir(cfg);
    std::filesystem::create_directories(res.out_dir);
    CsvWriter diag(res.out_dir / "diagnostics.csv");
    CsvWriter spec(res.out_dir / "spectrum.csv");
    CsvWriter steps(res.out_dir / "steps.csv");
    diag.raw_line(cfg.cosim
                      ? "t,l2_u1,l2_u2,h1,linf_u1,nonlinear_energy,drift_x,drift_y,spectrum_tail,cosim_err"
                      : "t,l2_u1,l2_u2,h1,linf_u1,nonlinear_energy,drift_x,drift_y,spectrum_tail");
    spec.raw_line("t,kappa,E");
    steps.raw_line("step,t,dt,max_speed,coeff_rebuilt");

    const std::vector<double> ts = detail::sample_times(cfg.t_final, cfg.sample_interval);

    auto emit_sample = [&](const DiagnosticsRecord& rec) {
        std::vector<double> row{rec.t,          rec.l2_u1,   rec.l2_u2,   rec.h1,
                                rec.linf_u1,    rec.nonlinear_energy,     rec.drift_x,
                                rec.drift_y,    rec.spectrum_tail};
        if (rec.cosim_err) row.push_back(*rec.cosim_err);
        diag.numeric_row(row);
        for (std::size_t k = 0; k < rec.spectrum.size(); ++k)
            spec.numeric_row({rec.t, static_cast<double>(k), rec.spectrum[k]});
    };

    auto snapshot_state = [&](long index) {
        const char* first = (cfg.params.model == Model::KseScalar) ? "phi" : "u1";
        write_snapshot(res.out_dir / detail::snapshot_name(index, first), state.fields[0]);
        if (cfg.params.model != Model::KseScalar)
            write_snapshot(res.out_dir / detail::snapshot_name(index, "u2"), state.fields[1]);
        if (shadow)
            write_snapshot(res.out_dir / detail::snapshot_name(index, "phi"), shadow->fields[0]);
    };

    auto observe = [&]() {
        DiagnosticsRecord rec = sample_diagnostics(state, cfg.params);
        if (shadow)
            rec.cosim_err = cosim_error(VectorField(state.fields[0], state.fields[1]),
                                        shadow->fields[0]);
        if (!resolution_check(rec)) res.resolution_warning = true;
        emit_sample(rec);
        long snap_index = 0;
        if (detail::near_multiple(rec.t, cfg.snapshot_interval, snap_index)) snapshot_state(snap_index);
        res.records.push_back(std::move(rec));
    };

    auto follower = [&](double dt) {
        if (shadow) shadow_integ->step(*shadow, dt);
    };

    try {
        observe();  // t = 0 row and snapshot
        for (std::size_t i = 1; i < ts.size(); ++i) {
            std::vector<StepRecord> log = integ.advance_to(state, ts[i], follower);
            for (const StepRecord& r : log) {
                steps.numeric_row_with_flag(r.step, r.t, r.dt, r.max_speed, r.coeff_rebuilt);
                res.steps.push_back(r);
            }
            observe();
        }
    } catch (const BlowupError& e) {
        res.blew_up = true;
        res.blowup_t = e.t;
        res.blowup_norm = e.norm;
        const char* first = (cfg.params.model == Model::KseScalar) ? "phi" : "u1";
        write_snapshot(res.out_dir / ("blowup_" + std::string(first) + ".ksef"), state.fields[0]);
        if (cfg.params.model != Model::KseScalar)
            write_snapshot(res.out_dir / "blowup_u2.ksef", state.fields[1]);
    }

    res.final_t = state.t;
    res.total_steps = state.step_count;
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

    std::ofstream manifest(res.out_dir / "manifest.txt");
    manifest << "# run manifest\n";
    manifest << "code_version = " << kVersionString << "\n\n";
    manifest << render_config(cfg);
    manifest << "\n[result]\n";
    manifest << "total_steps = " << res.total_steps << "\n";
    manifest << "final_t = " << format_g17(res.final_t) << "\n";
    manifest << "resolution_warning = " << (res.resolution_warning ? 1 : 0) << "\n";
    manifest << "blowup = " << (res.blew_up ? 1 : 0) << "\n";
    if (res.blew_up) {
        manifest << "blowup_t = " << format_g17(res.blowup_t) << "\n";
        manifest << "blowup_norm = " << format_g17(res.blowup_norm) << "\n";
    }
    manifest << "wall_seconds = " << format_g17(res.wall_seconds) << "\n";
    return res;
}

// ---------------------------------------------------------------------------
// Fixtures: a frozen config + golden diagnostics.csv that later builds can
// re-execute and diff. Layout:
//   fixture_dir/config.cfg        canonical config
//   fixture_dir/diagnostics.csv   golden output
//   fixture_dir/tolerances.cfg    optional "column = abs_tol" lines
// Replay reruns into fixture_dir/_replay and compares cell by cell; columns
// without a tolerance entry must match as exact strings (bit-identical).

inline void create_fixture(RunConfig cfg, const std::filesystem::path& fixture_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fixture_dir);
    cfg.output_dir = (fixture_dir / "golden").string();
    const RunResult r = run(cfg);
    if (r.blew_up) throw ConfigError("create_fixture: run blew up; fixture not frozen");
    fs::copy_file(r.out_dir / "diagnostics.csv", fixture_dir / "diagnostics.csv",
                  fs::copy_options::overwrite_existing);
    std::ofstream out(fixture_dir / "config.cfg");
    out << render_config(cfg);
}

struct ReplayReport {
    bool pass = false;
    std::string message;
    std::filesystem::path replay_dir;
};

inline ReplayReport replay_fixture(const std::filesystem::path& fixture_dir) {
    namespace fs = std::filesystem;
    if (!fs::exists(fixture_dir / "config.cfg") || !fs::exists(fixture_dir / "diagnostics.csv"))
        throw ConfigError("replay_fixture: " + fixture_dir.string() +
                          " lacks config.cfg or diagnostics.csv");
    RunConfig cfg = load_config(fixture_dir / "config.cfg");
    cfg.output_dir = (fixture_dir / "_replay").string();
    const RunResult r = run(cfg);

    ReplayReport rep;
    rep.replay_dir = r.out_dir;
    if (r.blew_up) {
        rep.message = "replay blew up at t = " + format_g17(r.blowup_t);
        return rep;
    }
    const CsvTable golden = read_csv(fixture_dir / "diagnostics.csv");
    const CsvTable fresh = read_csv(r.out_dir / "diagnostics.csv");
    const auto tol = read_tolerances(fixture_dir / "tolerances.cfg");
    const detail::TableDiff diff = detail::diff_tables(golden, fresh, tol);
    rep.pass = diff.pass;
    rep.message = diff.message;
    return rep;
}

}  // namespace kse
