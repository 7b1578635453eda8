#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "kse/errors.hpp"

namespace kse {

// Shortest round-trip decimal form of a double. All numeric CSV output goes
// through this, so identical runs produce byte-identical files.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
        if (!out_) throw ConfigError("CsvWriter: cannot open " + path.string());
    }

    void raw_line(const std::string& line) { out_ << line << "\n"; }

    void numeric_row(const std::vector<double>& vals) {
        std::string line;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (i) line += ',';
            line += format_g17(vals[i]);
        }
        out_ << line << "\n";
    }

    // Step-log row: integer step, three numeric columns, 0/1 flag.
    void numeric_row_with_flag(long step, double t, double dt, double speed, bool flag) {
        out_ << step << ',' << format_g17(t) << ',' << format_g17(dt) << ','
             << format_g17(speed) << ',' << (flag ? 1 : 0) << "\n";
    }

  private:
    std::ofstream out_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("read_csv: cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (std::getline(in, line)) t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.rows.push_back(split_csv_line(line));
    }
    return t;
}

// Optional per-column absolute tolerances, one "column = tol" line each.
// Missing file means every column must match exactly.
inline std::map<std::string, double> read_tolerances(const std::filesystem::path& path) {
    std::map<std::string, double> tol;
    std::ifstream in(path);
    if (!in) return tol;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r\n");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r\n");
            return s.substr(a, b - a + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string val = strip(line.substr(eq + 1));
        if (key.empty()) continue;
        try {
            tol[key] = std::stod(val);
        } catch (const std::exception&) {
            throw ConfigError("tolerances line " + std::to_string(lineno) + ": bad number '" + val +
                              "'");
        }
    }
    return tol;
}

namespace detail {

struct TableDiff {
    bool pass = false;
    std::string message;
};

inline TableDiff diff_tables(const CsvTable& golden, const CsvTable& fresh,
                             const std::map<std::string, double>& tol) {
    TableDiff d;
    if (golden.header != fresh.header) {
        d.message = "header mismatch";
        return d;
    }
    if (golden.rows.size() != fresh.rows.size()) {
        d.message = "row count mismatch: golden " + std::to_string(golden.rows.size()) +
                    " vs replay " + std::to_string(fresh.rows.size());
        return d;
    }
    for (std::size_t r = 0; r < golden.rows.size(); ++r) {
        const auto& gr = golden.rows[r];
        const auto& fr = fresh.rows[r];
        if (gr.size() != fr.size()) {
            d.message = "row " + std::to_string(r + 1) + ": cell count mismatch";
            return d;
        }
        for (std::size_t c = 0; c < gr.size(); ++c) {
            const std::string& col = (c < golden.header.size()) ? golden.header[c] : "";
            const auto it = tol.find(col);
            bool ok;
            if (it != tol.end()) {
                ok = std::abs(std::stod(gr[c]) - std::stod(fr[c])) <= it->second;
            } else {
                ok = (gr[c] == fr[c]);
            }
            if (!ok) {
                d.message = "first divergence at row " + std::to_string(r + 1) + ", column '" + col +
                            "': expected " + gr[c] + ", got " + fr[c];
                return d;
            }
        }
    }
    d.pass = true;
    d.message = "replay matches golden output (" + std::to_string(golden.rows.size()) + " rows)";
    return d;
}

}  // namespace detail

}  // namespace kse
