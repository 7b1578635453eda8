#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include "kse/errors.hpp"
#include "kse/etd.hpp"
#include "kse/models.hpp"

namespace kse {

// Complete description of one run: model, grid, stepping policy, initial
// data, and output plumbing. Parsed from a plain-text key = value file with
// [section] headers; everything has a default except the model type and
// t_final.
struct RunConfig {
    ModelParams params;
    int n = 128;
    double domain_length = kTwoPi;
    double t_final = -1.0;
    StepControls controls;
    double sample_interval = 1e-3;
    double snapshot_interval = 0.2;

    enum class InitKind { SineSum, File, RandomBand };
    InitKind init = InitKind::SineSum;
    std::string init_path;   // snapshot prefix for InitKind::File
    int band_kmax = 4;
    std::uint64_t seed = 1;

    bool cosim = false;
    std::string output_dir = "out";
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v, int line) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line) + ": bad number '" + v + "'");
    }
    if (used != v.size())
        throw ConfigError("config line " + std::to_string(line) + ": bad number '" + v + "'");
    return x;
}

inline long long parse_int(const std::string& v, int line) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line) + ": bad integer '" + v + "'");
    }
    if (used != v.size())
        throw ConfigError("config line " + std::to_string(line) + ": bad integer '" + v + "'");
    return x;
}

inline bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config line " + std::to_string(line) + ": bad boolean '" + v + "'");
}

}  // namespace detail

inline RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string section;
    std::string raw;
    int line = 0;
    bool saw_model = false, saw_tfinal = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find('#');
        if (hash != std::string::npos) s.erase(hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("config line " + std::to_string(line) + ": malformed section header");
            section = detail::trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line) + ": expected key = value");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config line " + std::to_string(line) + ": expected key = value");

        const std::string qual = section + "." + key;
        if (qual == "model.type") {
            saw_model = true;
            if (val == "kse")
                cfg.params.model = Model::KseVector;
            else if (val == "kse_scalar")
                cfg.params.model = Model::KseScalar;
            else if (val == "rkse")
                cfg.params.model = Model::Rkse;
            else
                throw ConfigError("config line " + std::to_string(line) + ": unknown model '" + val + "'");
        } else if (qual == "model.lambda") {
            cfg.params.lambda = detail::parse_double(val, line);
        } else if (qual == "model.nu") {
            cfg.params.nu = detail::parse_double(val, line);
        } else if (qual == "model.nonlinearity") {
            if (val == "advective")
                cfg.params.nonlinearity = Nonlinearity::Advective;
            else if (val == "grad_sq")
                cfg.params.nonlinearity = Nonlinearity::GradSq;
            else
                throw ConfigError("config line " + std::to_string(line) + ": unknown nonlinearity '" +
                                  val + "'");
        } else if (qual == "grid.n") {
            cfg.n = static_cast<int>(detail::parse_int(val, line));
        } else if (qual == "grid.domain_length") {
            cfg.domain_length = detail::parse_double(val, line);
        } else if (qual == "time.t_final") {
            saw_tfinal = true;
            cfg.t_final = detail::parse_double(val, line);
        } else if (qual == "time.cfl") {
            cfg.controls.cfl = detail::parse_double(val, line);
        } else if (qual == "time.dt_max") {
            cfg.controls.dt_max = detail::parse_double(val, line);
        } else if (qual == "time.sample_interval") {
            cfg.sample_interval = detail::parse_double(val, line);
        } else if (qual == "integrator.contour_points") {
            cfg.controls.contour.points = static_cast<int>(detail::parse_int(val, line));
        } else if (qual == "integrator.contour_radius") {
            cfg.controls.contour.radius = detail::parse_double(val, line);
        } else if (qual == "initial.kind") {
            if (val == "sine_sum")
                cfg.init = RunConfig::InitKind::SineSum;
            else if (val == "file")
                cfg.init = RunConfig::InitKind::File;
            else if (val == "random_band")
                cfg.init = RunConfig::InitKind::RandomBand;
            else
                throw ConfigError("config line " + std::to_string(line) + ": unknown initial kind '" +
                                  val + "'");
        } else if (qual == "initial.path") {
            cfg.init_path = val;
        } else if (qual == "initial.k_max") {
            cfg.band_kmax = static_cast<int>(detail::parse_int(val, line));
        } else if (qual == "initial.seed") {
            cfg.seed = static_cast<std::uint64_t>(detail::parse_int(val, line));
        } else if (qual == "output.directory") {
            cfg.output_dir = val;
        } else if (qual == "output.snapshot_interval") {
            cfg.snapshot_interval = detail::parse_double(val, line);
        } else if (qual == "output.cosim") {
            cfg.cosim = detail::parse_bool(val, line);
        } else {
            throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + qual + "'");
        }
    }
    if (!saw_model) throw ConfigError("config: missing required key model.type");
    if (!saw_tfinal) throw ConfigError("config: missing required key time.t_final");

    validate(cfg.params);
    if (cfg.n < 4 || cfg.n % 2 != 0) throw ConfigError("config: grid.n must be even and >= 4");
    if (!(cfg.domain_length > 0.0)) throw ConfigError("config: grid.domain_length must be positive");
    if (cfg.t_final < 0.0) throw ConfigError("config: time.t_final must be nonnegative");
    if (!(cfg.sample_interval > 0.0)) throw ConfigError("config: time.sample_interval must be positive");
    if (!(cfg.snapshot_interval > 0.0))
        throw ConfigError("config: output.snapshot_interval must be positive");
    if (!(cfg.controls.cfl > 0.0) || !(cfg.controls.dt_max > 0.0))
        throw ConfigError("config: time.cfl and time.dt_max must be positive");
    if (cfg.controls.contour.points < 2 || cfg.controls.contour.points % 2 != 0)
        throw ConfigError("config: integrator.contour_points must be even and >= 2");
    if (cfg.cosim && cfg.params.model != Model::KseVector)
        throw ConfigError("config: cosim requires model.type = kse");
    if (cfg.init == RunConfig::InitKind::File && cfg.init_path.empty())
        throw ConfigError("config: initial.path required when initial.kind = file");
    if (cfg.output_dir.empty()) throw ConfigError("config: output.directory must not be empty");
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in);
}

// Canonical text form of a config; parse(render(cfg)) == cfg. Written into
// manifests and fixtures so a run can be reproduced from its outputs alone.
inline std::string render_config(const RunConfig& cfg) {
    std::ostringstream os;
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    os << "[model]\n";
    os << "type = "
       << (cfg.params.model == Model::KseVector
               ? "kse"
               : (cfg.params.model == Model::KseScalar ? "kse_scalar" : "rkse"))
       << "\n";
    os << "lambda = " << num(cfg.params.lambda) << "\n";
    if (cfg.params.model == Model::Rkse) os << "nu = " << num(cfg.params.nu) << "\n";
    os << "nonlinearity = "
       << (cfg.params.nonlinearity == Nonlinearity::Advective ? "advective" : "grad_sq") << "\n\n";
    os << "[grid]\n";
    os << "n = " << cfg.n << "\n";
    os << "domain_length = " << num(cfg.domain_length) << "\n\n";
    os << "[time]\n";
    os << "t_final = " << num(cfg.t_final) << "\n";
    os << "cfl = " << num(cfg.controls.cfl) << "\n";
    os << "dt_max = " << num(cfg.controls.dt_max) << "\n";
    os << "sample_interval = " << num(cfg.sample_interval) << "\n\n";
    os << "[integrator]\n";
    os << "contour_points = " << cfg.controls.contour.points << "\n";
    os << "contour_radius = " << num(cfg.controls.contour.radius) << "\n\n";
    os << "[initial]\n";
    switch (cfg.init) {
        case RunConfig::InitKind::SineSum:
            os << "kind = sine_sum\n";
            break;
        case RunConfig::InitKind::File:
            os << "kind = file\n";
            os << "path = " << cfg.init_path << "\n";
            break;
        case RunConfig::InitKind::RandomBand:
            os << "kind = random_band\n";
            os << "k_max = " << cfg.band_kmax << "\n";
            os << "seed = " << cfg.seed << "\n";
            break;
    }
    os << "\n[output]\n";
    os << "directory = " << cfg.output_dir << "\n";
    os << "snapshot_interval = " << num(cfg.snapshot_interval) << "\n";
    os << "cosim = " << (cfg.cosim ? "true" : "false") << "\n";
    return os.str();
}

}  // namespace kse
