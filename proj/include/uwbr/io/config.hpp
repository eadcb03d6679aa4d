#pragma once

// Scenario files: INI-style sections mirroring the library modules.
//
//   [array]        element_count, carrier_freq (Hz)
//   [pulse]        center_freq, bandwidth (Hz, single-sided), amplitude
//   [source]       repeatable; kind = far | near
//                  far:  slowness (s/m) or sin_angle, delay (s)
//                  near: x0, z0 (m), delay (s)
//                  optional per-source center_freq, bandwidth, amplitude
//   [sampling]     dt, t_start, n_t (each number or auto), noise_std, seed
//   [radon]        n_p, upsample, tau_start, tau_count (auto or number)
//   [semblance]    window, window_length (auto or number), epsilon
//   [filter]       guard_cells, taper_cells
//   [localization] far_field_threshold, k_max, coherent_gate
//
// '#' and ';' start comments. Every error carries the offending line.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "uwbr/core.hpp"
#include "uwbr/io/grid_file.hpp"
#include "uwbr/semblance.hpp"
#include "uwbr/trace_interp.hpp"
#include "uwbr/wavefield.hpp"

namespace uwbr::io {

class ConfigError : public ParseError {
public:
    using ParseError::ParseError;
};

struct ScenarioConfig {
    struct Array {
        std::size_t element_count = 251;
        double carrier_freq = 24e9;
    } array;
    PulseSpec pulse;
    std::vector<SourceSpec> sources;
    struct Sampling {
        std::optional<double> dt;
        std::optional<double> t_start;
        std::optional<std::size_t> n_t;
        double noise_std = 0.0;
        std::uint64_t seed = 0;
    } sampling;
    struct Radon {
        std::size_t n_p = 501;
        std::size_t upsample = kDefaultUpsample;
        std::optional<double> tau_start;
        std::optional<std::size_t> tau_count;
    } radon;
    struct Semblance {
        WindowShape window = WindowShape::rectangular;
        std::optional<std::size_t> window_length;
        double epsilon = 0.2;
    } semblance;
    struct Filter {
        std::size_t guard_cells = 1;
        std::size_t taper_cells = 2;
    } filter;
    struct Localization {
        double far_field_threshold = 0.95;
        std::size_t k_max = 16;
        double coherent_gate = 0.25;
    } localization;

    std::string hash = fnv1a_hex("");
};

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    std::size_t line;
};

struct Section {
    std::string name;
    std::size_t line;
    std::map<std::string, Entry> keys;
};

inline std::vector<Section> tokenize(const std::string& text) {
    std::vector<Section> out;
    std::istringstream is(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(is, raw)) {
        ++line;
        if (auto c = raw.find_first_of("#;"); c != std::string::npos) raw.erase(c);
        const auto s = trim(raw);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3) throw ConfigError(line, "malformed section header '" + s + "'");
            out.push_back({trim(s.substr(1, s.size() - 2)), line, {}});
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "expected key = value, got '" + s + "'");
        if (out.empty()) throw ConfigError(line, "key outside of any section");
        auto key = trim(s.substr(0, eq));
        auto value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(line, "empty key");
        if (value.empty()) throw ConfigError(line, "empty value for '" + key + "'");
        if (!out.back().keys.emplace(key, Entry{value, line}).second)
            throw ConfigError(line, "duplicate key '" + key + "' in [" + out.back().name + "]");
    }
    return out;
}

/// Typed, range-checked access to one section's keys.
class Reader {
public:
    explicit Reader(const Section& s) : s_(s) {}

    bool has(const std::string& key) const { return s_.keys.count(key) != 0; }
    std::size_t line_of(const std::string& key) const { return has(key) ? s_.keys.at(key).line : s_.line; }

    double number(const std::string& key, double fallback, const std::function<bool(double)>& ok,
                  const char* rule) {
        if (!has(key)) return fallback;
        return checked(key, to_double(key), ok, rule);
    }

    std::optional<double> number_or_auto(const std::string& key, const std::function<bool(double)>& ok,
                                         const char* rule) {
        if (!has(key) || entry(key).value == "auto") return std::nullopt;
        return checked(key, to_double(key), ok, rule);
    }

    std::size_t count(const std::string& key, std::size_t fallback, std::size_t min_value) {
        if (!has(key)) return fallback;
        const auto v = to_count(key);
        if (v < min_value) fail(key, "must be >= " + std::to_string(min_value));
        return v;
    }

    std::optional<std::size_t> count_or_auto(const std::string& key, std::size_t min_value) {
        if (!has(key) || entry(key).value == "auto") return std::nullopt;
        return count(key, 0, min_value);
    }

    std::string text(const std::string& key, std::string fallback) {
        return has(key) ? entry(key).value : std::move(fallback);
    }

    [[noreturn]] void fail(const std::string& key, const std::string& why) const {
        throw ConfigError(line_of(key), "[" + s_.name + "] " + key + " " + why);
    }

    /// Rejects keys outside `allowed`.
    void only(std::initializer_list<const char*> allowed) const {
        for (const auto& [k, e] : s_.keys) {
            bool known = false;
            for (const char* a : allowed) known = known || k == a;
            if (!known) throw ConfigError(e.line, "unknown key '" + k + "' in [" + s_.name + "]");
        }
    }

private:
    const Entry& entry(const std::string& key) const { return s_.keys.at(key); }

    double to_double(const std::string& key) const {
        const auto& e = entry(key);
        try {
            return parse_double(e.value, e.line);
        } catch (const ParseError&) {
            throw ConfigError(e.line, "[" + s_.name + "] " + key + ": expected a number, got '" + e.value + "'");
        }
    }

    std::size_t to_count(const std::string& key) const {
        const auto& e = entry(key);
        try {
            return parse_count(e.value, e.line);
        } catch (const ParseError&) {
            throw ConfigError(e.line,
                              "[" + s_.name + "] " + key + ": expected a non-negative integer, got '" + e.value + "'");
        }
    }

    double checked(const std::string& key, double v, const std::function<bool(double)>& ok, const char* rule) const {
        if (!std::isfinite(v) || !ok(v)) fail(key, std::string("must be ") + rule);
        return v;
    }

    const Section& s_;
};

inline bool positive(double v) { return v > 0.0; }
inline bool non_negative(double v) { return v >= 0.0; }
inline bool any_value(double) { return true; }
inline bool open_unit(double v) { return v > 0.0 && v < 1.0; }

}  // namespace detail

inline ScenarioConfig parse_config(const std::string& text) {
    using namespace detail;
    ScenarioConfig cfg;
    cfg.hash = fnv1a_hex(text);
    const auto sections = tokenize(text);

    // [pulse] first so per-source pulses inherit it regardless of file order.
    std::map<std::string, std::size_t> seen;
    for (const auto& s : sections) {
        if (s.name != "source" && seen.count(s.name))
            throw ConfigError(s.line, "duplicate section [" + s.name + "]");
        seen[s.name] = s.line;
        if (s.name != "pulse") continue;
        Reader r(s);
        r.only({"center_freq", "bandwidth", "amplitude"});
        cfg.pulse.center_freq = r.number("center_freq", cfg.pulse.center_freq, positive, "> 0");
        cfg.pulse.bandwidth = r.number("bandwidth", cfg.pulse.bandwidth, positive, "> 0");
        cfg.pulse.amplitude = r.number("amplitude", cfg.pulse.amplitude, any_value, "finite");
        if (cfg.pulse.bandwidth > cfg.pulse.center_freq) r.fail("bandwidth", "must not exceed center_freq");
    }

    for (const auto& s : sections) {
        Reader r(s);
        if (s.name == "pulse") {
            continue;
        } else if (s.name == "array") {
            r.only({"element_count", "carrier_freq"});
            cfg.array.element_count = r.count("element_count", cfg.array.element_count, 2);
            cfg.array.carrier_freq = r.number("carrier_freq", cfg.array.carrier_freq, positive, "> 0");
        } else if (s.name == "source") {
            r.only({"kind", "slowness", "sin_angle", "delay", "x0", "z0", "center_freq", "bandwidth", "amplitude"});
            SourceSpec src;
            src.pulse = cfg.pulse;
            src.pulse.center_freq = r.number("center_freq", src.pulse.center_freq, positive, "> 0");
            src.pulse.bandwidth = r.number("bandwidth", src.pulse.bandwidth, positive, "> 0");
            src.pulse.amplitude = r.number("amplitude", src.pulse.amplitude, any_value, "finite");
            if (src.pulse.bandwidth > src.pulse.center_freq) r.fail("bandwidth", "must not exceed center_freq");
            const double delay = r.number("delay", 0.0, any_value, "finite");
            const auto kind = r.text("kind", "");
            if (kind == "far") {
                if (r.has("x0") || r.has("z0")) r.fail(r.has("x0") ? "x0" : "z0", "is only valid for near sources");
                if (r.has("slowness") == r.has("sin_angle"))
                    throw ConfigError(s.line, "[source] far source needs exactly one of slowness, sin_angle");
                double p = 0.0;
                if (r.has("slowness"))
                    p = r.number("slowness", 0.0, [](double v) { return std::abs(v) <= 1.0 / kSpeedOfLight; },
                                 "within [-1/c, 1/c]");
                else
                    p = r.number("sin_angle", 0.0, [](double v) { return std::abs(v) <= 1.0; }, "within [-1, 1]") /
                        kSpeedOfLight;
                src.kind = FarField{p, delay};
            } else if (kind == "near") {
                if (r.has("slowness") || r.has("sin_angle"))
                    r.fail(r.has("slowness") ? "slowness" : "sin_angle", "is only valid for far sources");
                if (!r.has("z0")) throw ConfigError(s.line, "[source] near source needs z0");
                src.kind = NearField{r.number("x0", 0.0, any_value, "finite"),
                                     r.number("z0", 0.0, positive, "> 0"), delay};
            } else {
                r.fail("kind", "must be 'far' or 'near'");
            }
            cfg.sources.push_back(src);
        } else if (s.name == "sampling") {
            r.only({"dt", "t_start", "n_t", "noise_std", "seed"});
            cfg.sampling.dt = r.number_or_auto("dt", positive, "> 0 or auto");
            cfg.sampling.t_start = r.number_or_auto("t_start", any_value, "finite or auto");
            cfg.sampling.n_t = r.count_or_auto("n_t", 1);
            cfg.sampling.noise_std = r.number("noise_std", 0.0, non_negative, ">= 0");
            cfg.sampling.seed = r.count("seed", 0, 0);
        } else if (s.name == "radon") {
            r.only({"n_p", "upsample", "tau_start", "tau_count"});
            cfg.radon.n_p = r.count("n_p", cfg.radon.n_p, 2);
            cfg.radon.upsample = r.count("upsample", cfg.radon.upsample, 1);
            cfg.radon.tau_start = r.number_or_auto("tau_start", any_value, "finite or auto");
            cfg.radon.tau_count = r.count_or_auto("tau_count", 1);
        } else if (s.name == "semblance") {
            r.only({"window", "window_length", "epsilon"});
            try {
                cfg.semblance.window = window_shape_from(r.text("window", "rectangular"));
            } catch (const std::invalid_argument&) {
                r.fail("window", "must be rectangular, raised_cosine or blackman_harris");
            }
            cfg.semblance.window_length = r.count_or_auto("window_length", 1);
            cfg.semblance.epsilon = r.number("epsilon", cfg.semblance.epsilon, open_unit, "in (0, 1)");
        } else if (s.name == "filter") {
            r.only({"guard_cells", "taper_cells"});
            cfg.filter.guard_cells = r.count("guard_cells", cfg.filter.guard_cells, 0);
            cfg.filter.taper_cells = r.count("taper_cells", cfg.filter.taper_cells, 0);
        } else if (s.name == "localization") {
            r.only({"far_field_threshold", "k_max", "coherent_gate"});
            cfg.localization.far_field_threshold =
                r.number("far_field_threshold", cfg.localization.far_field_threshold, open_unit, "in (0, 1)");
            cfg.localization.k_max = r.count("k_max", cfg.localization.k_max, 2);
            cfg.localization.coherent_gate =
                r.number("coherent_gate", cfg.localization.coherent_gate, [](double v) { return v >= 0 && v < 1; },
                         "in [0, 1)");
        } else {
            throw ConfigError(s.line, "unknown section [" + s.name + "]");
        }
    }
    return cfg;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_bytes(path));
}

// ---------------------------------------------------------------------------
// Derived quantities
// ---------------------------------------------------------------------------

inline ArrayGeometry geometry_of(const ScenarioConfig& cfg) {
    return make_array(cfg.array.element_count, cfg.array.carrier_freq);
}

inline UniformAxis time_axis_of(const ScenarioConfig& cfg) {
    const double dt = cfg.sampling.dt.value_or(default_dt(cfg.sources, cfg.pulse));
    auto axis = default_time_axis(geometry_of(cfg), cfg.sources, dt);
    if (cfg.sampling.t_start) {
        const double end = axis.back();
        axis.start = *cfg.sampling.t_start;
        if (!cfg.sampling.n_t)
            axis.size = end >= axis.start ? static_cast<std::size_t>(std::ceil((end - axis.start) / dt)) + 1 : 1;
    }
    if (cfg.sampling.n_t) axis.size = *cfg.sampling.n_t;
    return axis;
}

inline UniformAxis slowness_axis_of(const ScenarioConfig& cfg) { return default_slowness_axis(cfg.radon.n_p); }

inline UniformAxis tau_axis_of(const ScenarioConfig& cfg, const SpaceTimeGrid& data) {
    auto tau = default_tau_axis(data, slowness_axis_of(cfg));
    if (cfg.radon.tau_start) {
        const double end = tau.back();
        tau.start = *cfg.radon.tau_start;
        tau.size = end >= tau.start ? static_cast<std::size_t>(std::ceil((end - tau.start) / tau.step)) + 1 : 1;
    }
    if (cfg.radon.tau_count) tau.size = *cfg.radon.tau_count;
    return tau;
}

inline Window window_of(const ScenarioConfig& cfg, double dt) {
    Window w = default_window(cfg.pulse, dt);
    w.shape = cfg.semblance.window;
    if (cfg.semblance.window_length) w.length = *cfg.semblance.window_length;
    return w;
}

}  // namespace uwbr::io
