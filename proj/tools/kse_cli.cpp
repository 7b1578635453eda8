// Command-line front end for the solver library.
//
//   kse run <config>...      execute configured runs (--jobs N in parallel)
//   kse cosim <config>       vector/scalar co-simulation (forces cosim mode)
//   kse replay <fixture>     re-execute a frozen fixture and diff diagnostics
//   kse spectrum <snapshot>  print the radial energy spectrum of a snapshot
//
// Exit codes: 0 success, 2 configuration error, 3 blow-up, 4 fixture
// mismatch, 1 anything else.

#include <atomic>
#include <cstdio>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "kse/kse.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBlowup = 3;
constexpr int kExitMismatch = 4;

int run_one(const std::string& path, bool force_cosim) {
    kse::RunConfig cfg = kse::load_config(path);
    if (force_cosim) {
        cfg.cosim = true;
        if (cfg.params.model != kse::Model::KseVector)
            throw kse::ConfigError("cosim requires model.type = kse");
    }
    const kse::RunResult r = kse::run(cfg);
    std::printf("%s: t = %s, %ld steps, out = %s%s%s\n", path.c_str(),
                kse::format_g17(r.final_t).c_str(), r.total_steps, r.out_dir.string().c_str(),
                r.resolution_warning ? " [resolution warning]" : "",
                r.blew_up ? " [blow-up]" : "");
    if (r.blew_up) {
        std::fprintf(stderr, "%s: blow-up at t = %s (norm %s); last good state persisted\n",
                     path.c_str(), kse::format_g17(r.blowup_t).c_str(),
                     kse::format_g17(r.blowup_norm).c_str());
        return kExitBlowup;
    }
    return kExitOk;
}

int run_many(const std::vector<std::string>& paths, int jobs, bool force_cosim) {
    if (jobs <= 1 || paths.size() <= 1) {
        int rc = kExitOk;
        for (const std::string& p : paths) {
            const int one = run_one(p, force_cosim);
            if (one != kExitOk) rc = one;
        }
        return rc;
    }
    // Independent configs may run concurrently; each one stays sequential
    // inside, so per-run outputs are as reproducible as in serial mode.
    std::atomic<std::size_t> next{0};
    std::atomic<int> rc{kExitOk};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= paths.size()) break;
            try {
                const int one = run_one(paths[i], force_cosim);
                if (one != kExitOk) rc.store(one);
            } catch (const kse::ConfigError& e) {
                std::fprintf(stderr, "%s: config error: %s\n", paths[i].c_str(), e.what());
                rc.store(kExitConfig);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "%s: error: %s\n", paths[i].c_str(), e.what());
                rc.store(kExitError);
            }
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min<std::size_t>(jobs, paths.size());
    pool.reserve(nthreads);
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
    return rc.load();
}

int spectrum_main(const std::string& snapshot) {
    const kse::SpectralField f = kse::read_snapshot(snapshot);
    const std::vector<double> shells = kse::energy_spectrum({f});
    std::printf("# kappa E\n");
    for (std::size_t k = 0; k < shells.size(); ++k)
        std::printf("%zu %s\n", k, kse::format_g17(shells[k]).c_str());
    return kExitOk;
}

int replay_main(const std::string& fixture) {
    const kse::ReplayReport rep = kse::replay_fixture(fixture);
    std::printf("%s: %s\n", fixture.c_str(), rep.message.c_str());
    return rep.pass ? kExitOk : kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pseudo-spectral solver for Kuramoto-Sivashinsky-type systems on the 2D torus"};
    app.require_subcommand(1);

    std::vector<std::string> run_configs;
    int jobs = 1;
    CLI::App* cmd_run = app.add_subcommand("run", "execute one or more configured runs");
    cmd_run->add_option("config", run_configs, "config file(s)")->required()->expected(-1);
    cmd_run->add_option("--jobs", jobs, "run independent configs concurrently")->default_val(1);

    std::string cosim_config;
    CLI::App* cmd_cosim = app.add_subcommand("cosim", "lockstep vector/scalar co-simulation");
    cmd_cosim->add_option("config", cosim_config, "config file")->required();

    std::string fixture_dir;
    CLI::App* cmd_replay = app.add_subcommand("replay", "re-execute a fixture and compare");
    cmd_replay->add_option("fixture", fixture_dir, "fixture directory")->required();

    std::string snapshot_path;
    CLI::App* cmd_spectrum = app.add_subcommand("spectrum", "radial energy spectrum of a snapshot");
    cmd_spectrum->add_option("snapshot", snapshot_path, "KSEF snapshot file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (cmd_run->parsed()) return run_many(run_configs, jobs, /*force_cosim=*/false);
        if (cmd_cosim->parsed()) return run_many({cosim_config}, 1, /*force_cosim=*/true);
        if (cmd_replay->parsed()) return replay_main(fixture_dir);
        if (cmd_spectrum->parsed()) return spectrum_main(snapshot_path);
    } catch (const kse::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const kse::BlowupError& e) {
        std::fprintf(stderr, "blow-up at t = %s: %s\n", kse::format_g17(e.t).c_str(), e.what());
        return kExitBlowup;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitError;
}
