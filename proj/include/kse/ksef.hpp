#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "kse/errors.hpp"
#include "kse/field.hpp"

namespace kse {

// KSEF snapshot format, version 1. Fixed little-endian layout:
//   bytes 0..3   magic "KSEF"
//   bytes 4..7   u32 version (= 1)
//   bytes 8..11  u32 n (modes per axis)
//   bytes 12..19 f64 domain_length
//   byte  20     u8 reality flag (1 = real-valued field)
//   byte  21..   n*n coefficient pairs (re f64, im f64), row-major in FFT
//                index order (k1 outer, k2 inner)
// Doubles are serialized bit-exactly, so write/read round trips reproduce
// the field to the last bit on any platform.
namespace ksef {

inline constexpr std::uint32_t kVersion = 1;

namespace detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

inline void put_f64(std::string& buf, double x) {
    const auto v = std::bit_cast<std::uint64_t>(x);
    for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
    return v;
}

inline double get_f64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    return std::bit_cast<double>(v);
}

}  // namespace detail
}  // namespace ksef

inline void write_snapshot(const std::filesystem::path& path, const SpectralField& f) {
    const GridSpec& g = f.grid();
    std::string buf;
    buf.reserve(21 + g.size() * 16);
    buf += "KSEF";
    ksef::detail::put_u32(buf, ksef::kVersion);
    ksef::detail::put_u32(buf, static_cast<std::uint32_t>(g.n));
    ksef::detail::put_f64(buf, g.domain_length);
    buf.push_back(f.real_valued() ? 1 : 0);
    for (const Complex& c : f.coeffs()) {
        ksef::detail::put_f64(buf, c.real());
        ksef::detail::put_f64(buf, c.imag());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("write_snapshot: cannot open " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw ConfigError("write_snapshot: write failed for " + path.string());
}

inline SpectralField read_snapshot(const std::filesystem::path& path, GridPtr grid = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("read_snapshot: cannot open " + path.string());
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() < 21 || raw.compare(0, 4, "KSEF") != 0)
        throw ConfigError("read_snapshot: not a KSEF file: " + path.string());
    const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
    const std::uint32_t version = ksef::detail::get_u32(p + 4);
    if (version != ksef::kVersion)
        throw ConfigError("read_snapshot: unsupported KSEF version in " + path.string());
    const std::uint32_t n = ksef::detail::get_u32(p + 8);
    const double length = ksef::detail::get_f64(p + 12);
    const bool real = raw[20] != 0;
    const std::size_t expect = 21 + static_cast<std::size_t>(n) * n * 16;
    if (raw.size() != expect)
        throw ConfigError("read_snapshot: truncated or oversized payload in " + path.string());

    if (grid) {
        if (grid->n != static_cast<int>(n) || grid->domain_length != length)
            throw ConfigError("read_snapshot: snapshot grid does not match " + path.string());
    } else {
        grid = build_grid(static_cast<int>(n), length);
    }
    SpectralField f(grid, real);
    const unsigned char* q = p + 21;
    for (std::size_t i = 0; i < f.coeffs().size(); ++i) {
        const double re = ksef::detail::get_f64(q);
        const double im = ksef::detail::get_f64(q + 8);
        f.coeffs()[i] = Complex(re, im);
        q += 16;
    }
    return f;
}

}  // namespace kse
