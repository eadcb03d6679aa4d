#pragma once

// GridFile: newline-delimited ASCII key=value header, a blank line, then
// n_rows * n_cols little-endian IEEE-754 float64 values in row-major order.
//
//   format=uwbr-grid/1
//   kind=spacetime|radon|semblance
//   n_rows=..., n_cols=...
//   row_axis.start/step/unit, col_axis.start/step/unit
//   producer=..., scenario_hash=...
//   optional: geometry.*, record.* (source time axis), window.*

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "uwbr/core.hpp"
#include "uwbr/radon.hpp"
#include "uwbr/semblance.hpp"
#include "uwbr/wavefield.hpp"

namespace uwbr::io {

inline constexpr const char* kProducer = "uwbr 0.1.0";
inline constexpr const char* kFormatTag = "uwbr-grid/1";

class IoError : public Error {
public:
    using Error::Error;
};

enum class GridKind { spacetime, radon, semblance };

inline std::string to_string(GridKind k) {
    switch (k) {
        case GridKind::spacetime: return "spacetime";
        case GridKind::radon: return "radon";
        case GridKind::semblance: return "semblance";
    }
    return "spacetime";
}

struct GridFile {
    GridKind kind = GridKind::spacetime;
    Matrix<double> values;
    UniformAxis rows;
    UniformAxis cols;
    std::string row_unit = "s";
    std::string col_unit = "m";
    std::optional<ArrayGeometry> geometry;
    std::optional<UniformAxis> record;  // time axis of the data a Radon/semblance grid came from
    std::optional<Window> window;
    std::string producer = kProducer;
    std::string scenario_hash = "0000000000000000";
};

/// Shortest decimal text that parses back to the identical double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

inline double parse_double(std::string_view text, std::size_t line) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw ParseError(line, "expected a number, got '" + std::string(text) + "'");
    return v;
}

inline std::size_t parse_count(std::string_view text, std::size_t line) {
    std::size_t v = 0;
    const auto* end = text.data() + text.size();
    auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw ParseError(line, "expected a non-negative integer, got '" + std::string(text) + "'");
    return v;
}

/// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string header_text(const GridFile& g) {
    std::ostringstream os;
    auto kv = [&](const std::string& k, const std::string& v) { os << k << '=' << v << '\n'; };
    kv("format", kFormatTag);
    kv("kind", to_string(g.kind));
    kv("n_rows", std::to_string(g.values.rows()));
    kv("n_cols", std::to_string(g.values.cols()));
    kv("row_axis.start", format_double(g.rows.start));
    kv("row_axis.step", format_double(g.rows.step));
    kv("row_axis.unit", g.row_unit);
    kv("col_axis.start", format_double(g.cols.start));
    kv("col_axis.step", format_double(g.cols.step));
    kv("col_axis.unit", g.col_unit);
    if (g.geometry) {
        kv("geometry.element_count", std::to_string(g.geometry->element_count));
        kv("geometry.spacing", format_double(g.geometry->spacing));
        kv("geometry.carrier_wavelength", format_double(g.geometry->carrier_wavelength));
    }
    if (g.record) {
        kv("record.start", format_double(g.record->start));
        kv("record.step", format_double(g.record->step));
        kv("record.size", std::to_string(g.record->size));
    }
    if (g.window) {
        kv("window.shape", std::string(to_string(g.window->shape)));
        kv("window.length", std::to_string(g.window->length));
    }
    kv("producer", g.producer);
    kv("scenario_hash", g.scenario_hash);
    kv("payload", "float64-le");
    os << '\n';
    return os.str();
}

inline void append_le(std::string& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

inline double read_le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    return std::bit_cast<double>(bits);
}

inline std::string encode(const GridFile& g) {
    require(g.values.rows() == g.rows.size && g.values.cols() == g.cols.size, "grid axes must match the value matrix");
    std::string out = header_text(g);
    out.reserve(out.size() + 8 * g.values.size());
    for (double v : g.values.data()) append_le(out, v);
    return out;
}

inline void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string read_bytes(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline void write_grid(const std::filesystem::path& path, const GridFile& g) { write_bytes(path, encode(g)); }

/// Parses a GridFile image; header problems raise ParseError with the line.
inline GridFile decode(const std::string& bytes) {
    std::map<std::string, std::pair<std::string, std::size_t>> kv;
    std::size_t pos = 0, line = 0;
    bool terminated = false;
    while (pos < bytes.size()) {
        const auto nl = bytes.find('\n', pos);
        if (nl == std::string::npos) break;
        ++line;
        const std::string text = bytes.substr(pos, nl - pos);
        pos = nl + 1;
        if (text.empty()) {
            terminated = true;
            break;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos || eq == 0) throw ParseError(line, "expected key=value, got '" + text + "'");
        kv[text.substr(0, eq)] = {text.substr(eq + 1), line};
    }
    if (!terminated) throw ParseError(line + 1, "header not terminated by a blank line");

    auto get = [&](const std::string& key) -> const std::pair<std::string, std::size_t>& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError(line, "missing header key '" + key + "'");
        return it->second;
    };
    auto num = [&](const std::string& key) {
        const auto& [v, l] = get(key);
        return parse_double(v, l);
    };
    auto count = [&](const std::string& key) {
        const auto& [v, l] = get(key);
        return parse_count(v, l);
    };

    if (const auto& [tag, l] = get("format"); tag != kFormatTag) throw ParseError(l, "unsupported format '" + tag + "'");
    GridFile g;
    const auto& [kind, kind_line] = get("kind");
    if (kind == "spacetime") g.kind = GridKind::spacetime;
    else if (kind == "radon") g.kind = GridKind::radon;
    else if (kind == "semblance") g.kind = GridKind::semblance;
    else throw ParseError(kind_line, "unknown grid kind '" + kind + "'");
    if (auto it = kv.find("payload"); it != kv.end() && it->second.first != "float64-le")
        throw ParseError(it->second.second, "unsupported payload encoding '" + it->second.first + "'");

    const std::size_t n_rows = count("n_rows"), n_cols = count("n_cols");
    g.rows = {num("row_axis.start"), num("row_axis.step"), n_rows};
    g.cols = {num("col_axis.start"), num("col_axis.step"), n_cols};
    g.row_unit = get("row_axis.unit").first;
    g.col_unit = get("col_axis.unit").first;
    if (kv.count("geometry.element_count"))
        g.geometry = ArrayGeometry{count("geometry.element_count"), num("geometry.spacing"),
                                   num("geometry.carrier_wavelength")};
    if (kv.count("record.start")) g.record = UniformAxis{num("record.start"), num("record.step"), count("record.size")};
    if (kv.count("window.shape")) {
        const auto& [shape, l] = get("window.shape");
        try {
            g.window = Window{window_shape_from(shape), count("window.length")};
        } catch (const std::invalid_argument& e) {
            throw ParseError(l, e.what());
        }
    }
    if (auto it = kv.find("producer"); it != kv.end()) g.producer = it->second.first;
    if (auto it = kv.find("scenario_hash"); it != kv.end()) g.scenario_hash = it->second.first;

    const std::size_t expected = 8 * n_rows * n_cols;
    if (bytes.size() - pos != expected)
        throw ParseError(line, "payload holds " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                                   std::to_string(expected));
    g.values = Matrix<double>(n_rows, n_cols);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    for (std::size_t i = 0; i < n_rows * n_cols; ++i) g.values.data()[i] = read_le(p + 8 * i);
    return g;
}

inline GridFile read_grid(const std::filesystem::path& path) { return decode(read_bytes(path)); }

// ---------------------------------------------------------------------------
// Conversions between domain grids and GridFile
// ---------------------------------------------------------------------------

inline GridFile to_file(const SpaceTimeGrid& d, std::string hash) {
    GridFile g;
    g.kind = GridKind::spacetime;
    g.values = d.samples;
    g.rows = d.time;
    g.cols = {d.geometry.x(0), d.geometry.spacing, d.geometry.element_count};
    g.row_unit = "s";
    g.col_unit = "m";
    g.geometry = d.geometry;
    g.scenario_hash = std::move(hash);
    return g;
}

inline GridFile to_file(const RadonGrid& r, const ArrayGeometry& geometry, const UniformAxis& record,
                        std::string hash) {
    GridFile g;
    g.kind = GridKind::radon;
    g.values = r.samples;
    g.rows = r.tau;
    g.cols = r.slowness;
    g.row_unit = "s";
    g.col_unit = "s/m";
    g.geometry = geometry;
    g.record = record;
    g.scenario_hash = std::move(hash);
    return g;
}

inline GridFile to_file(const SemblanceGrid& s, const ArrayGeometry& geometry, const UniformAxis& record,
                        std::string hash) {
    GridFile g;
    g.kind = GridKind::semblance;
    g.values = s.values;
    g.rows = s.tau;
    g.cols = s.slowness;
    g.row_unit = "s";
    g.col_unit = "s/m";
    g.geometry = geometry;
    g.record = record;
    g.window = s.window;
    g.scenario_hash = std::move(hash);
    return g;
}

inline void expect_kind(const GridFile& g, GridKind kind) {
    if (g.kind != kind) throw IoError("expected a " + to_string(kind) + " grid, got " + to_string(g.kind));
}

inline SpaceTimeGrid to_spacetime(const GridFile& g) {
    expect_kind(g, GridKind::spacetime);
    if (!g.geometry) throw IoError("spacetime grid lacks geometry.* keys");
    SpaceTimeGrid d{g.values, g.rows, *g.geometry};
    d.validate();
    return d;
}

inline RadonGrid to_radon(const GridFile& g) {
    expect_kind(g, GridKind::radon);
    return {g.values, g.rows, g.cols};
}

inline SemblanceGrid to_semblance(const GridFile& g) {
    expect_kind(g, GridKind::semblance);
    const Matrix<double> unknown(g.values.rows(), g.values.cols());
    return {g.values, unknown, unknown, g.rows, g.cols, g.window.value_or(Window{})};
}

// ---------------------------------------------------------------------------
// Plot export
// ---------------------------------------------------------------------------

enum class ExportFormat { csv, binary };

/// CSV: first row is the column-axis values (first cell names the axes),
/// then one row per row-axis sample, led by its axis value.
inline std::string to_csv(const GridFile& g) {
    std::string out = "row_axis[" + g.row_unit + "]\\col_axis[" + g.col_unit + "]";
    for (std::size_t c = 0; c < g.cols.size; ++c) out += "," + format_double(g.cols[c]);
    out += '\n';
    for (std::size_t r = 0; r < g.rows.size; ++r) {
        out += format_double(g.rows[r]);
        for (std::size_t c = 0; c < g.cols.size; ++c) out += "," + format_double(g.values(r, c));
        out += '\n';
    }
    return out;
}

/// Values of a CSV written by to_csv, row-major, without the axis labels.
inline Matrix<double> read_csv_values(const std::string& text) {
    std::istringstream is(text);
    std::string row;
    std::size_t line = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(is, row)) {
        ++line;
        if (line == 1 || row.empty()) continue;
        std::vector<double> vals;
        std::size_t start = 0;
        bool first = true;
        while (start <= row.size()) {
            auto comma = row.find(',', start);
            if (comma == std::string::npos) comma = row.size();
            if (!first) vals.push_back(parse_double(std::string_view(row).substr(start, comma - start), line));
            first = false;
            start = comma + 1;
        }
        rows.push_back(std::move(vals));
    }
    Matrix<double> m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) throw ParseError(r + 2, "ragged CSV row");
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

inline void export_plot_data(const std::filesystem::path& grid_file, const std::filesystem::path& out,
                             ExportFormat format) {
    const auto g = read_grid(grid_file);
    write_bytes(out, format == ExportFormat::csv ? to_csv(g) : encode(g));
}

}  // namespace uwbr::io
