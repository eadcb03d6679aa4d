#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <random>
#include <vector>

#include "uwbr/io/config.hpp"
#include "uwbr/wavefield.hpp"

namespace uwbr::test {

inline constexpr double c = kSpeedOfLight;

inline std::filesystem::path scenario_path(const char* name) {
    return std::filesystem::path(UWBR_SCENARIO_DIR) / name;
}

inline io::ScenarioConfig reference_config() { return io::load_config(scenario_path("reference.ini")); }

/// Default pulse used by the small unit-test arrays.
inline PulseSpec test_pulse() { return {16e9, 8e9, 1.0}; }

inline SourceSpec far(double sin_angle, double delay, PulseSpec pulse = test_pulse()) {
    return {FarField{sin_angle / c, delay}, pulse};
}

inline SourceSpec near(double x0, double z0, double delay, PulseSpec pulse = test_pulse()) {
    return {NearField{x0, z0, delay}, pulse};
}

inline SpaceTimeGrid synth(const ArrayGeometry& g, const std::vector<SourceSpec>& sources, double noise = 0.0,
                           std::uint64_t seed = 0) {
    const double dt = default_dt(sources, test_pulse());
    return synthesize(g, sources, default_time_axis(g, sources, dt), noise, seed);
}

/// |sum_i x_i exp(-2 pi i f t_i)|, evaluated directly.
inline double dft_magnitude(const std::vector<double>& x, double t0, double dt, double f) {
    std::complex<double> acc{};
    for (std::size_t i = 0; i < x.size(); ++i)
        acc += x[i] * std::polar(1.0, -2.0 * kPi * f * (t0 + static_cast<double>(i) * dt));
    return std::abs(acc);
}

/// Plain two-point linear interpolation with zero outside the record.
inline double linear_sample(const std::vector<double>& trace, double t0, double dt, double t) {
    const double u = (t - t0) / dt;
    if (u < 0.0 || u > static_cast<double>(trace.size() - 1)) return 0.0;
    const auto i = static_cast<std::size_t>(std::floor(u));
    if (i + 1 >= trace.size()) return trace.back();
    const double w = u - static_cast<double>(i);
    return (1.0 - w) * trace[i] + w * trace[i + 1];
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Relative L2 error of b against a after the least-squares scalar fit a ~ s b.
inline double fitted_relative_error(std::span<const double> a, std::span<const double> b, double* scale = nullptr) {
    double ab = 0.0, bb = 0.0, aa = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        bb += b[i] * b[i];
        aa += a[i] * a[i];
    }
    const double s = bb > 0.0 ? ab / bb : 0.0;
    if (scale) *scale = s;
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) err += (a[i] - s * b[i]) * (a[i] - s * b[i]);
    return std::sqrt(err / aa);
}

/// Matrix entry with the largest |value|.
inline std::pair<std::size_t, std::size_t> argmax_abs(const Matrix<double>& m) {
    std::size_t br = 0, bc = 0;
    double best = -1.0;
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t col = 0; col < m.cols(); ++col)
            if (std::abs(m(r, col)) > best) {
                best = std::abs(m(r, col));
                br = r;
                bc = col;
            }
    return {br, bc};
}

}  // namespace uwbr::test
