#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "uwbr/core.hpp"
#include "uwbr/radon.hpp"
#include "uwbr/trace_interp.hpp"
#include "uwbr/wavefield.hpp"

namespace uwbr {

enum class WindowShape { rectangular, raised_cosine, blackman_harris };

inline std::string_view to_string(WindowShape s) {
    switch (s) {
        case WindowShape::rectangular: return "rectangular";
        case WindowShape::raised_cosine: return "raised_cosine";
        case WindowShape::blackman_harris: return "blackman_harris";
    }
    return "rectangular";
}

inline WindowShape window_shape_from(std::string_view name) {
    if (name == "rectangular") return WindowShape::rectangular;
    if (name == "raised_cosine") return WindowShape::raised_cosine;
    if (name == "blackman_harris") return WindowShape::blackman_harris;
    throw std::invalid_argument("unknown window shape '" + std::string(name) + "'");
}

/// Smoothing window applied along tau to the coherent and total energy.
struct Window {
    WindowShape shape = WindowShape::rectangular;
    std::size_t length = 1;

    // Tapered shapes use (i+1)/(L+1) so no tap is exactly zero.
    std::vector<double> weights() const {
        require(length >= 1, "window length must be >= 1");
        std::vector<double> w(length, 1.0);
        const double denom = static_cast<double>(length + 1);
        for (std::size_t i = 0; i < length; ++i) {
            const double u = 2.0 * kPi * static_cast<double>(i + 1) / denom;
            switch (shape) {
                case WindowShape::rectangular: break;
                case WindowShape::raised_cosine: w[i] = 0.5 - 0.5 * std::cos(u); break;
                case WindowShape::blackman_harris:
                    w[i] = 0.35875 - 0.48829 * std::cos(u) + 0.14128 * std::cos(2 * u) - 0.01168 * std::cos(3 * u);
                    break;
            }
        }
        return w;
    }
};

/// Rectangular window spanning one pulse duration (6 sigma_t).
inline Window default_window(const PulseSpec& pulse, double dt) {
    const auto len = static_cast<std::size_t>(std::lround(6.0 * pulse.sigma() / dt));
    return {WindowShape::rectangular, std::max<std::size_t>(1, len)};
}

/// Cells whose windowed total energy is below this fraction of the grid's
/// maximum are treated as empty. Without it, numerically vanishing pulse
/// tails and record-edge cells fed by one or two traces score near 1.
inline constexpr double kSemblanceEnergyFloor = 1e-6;

struct SemblanceGrid {
    Matrix<double> values;           // [n_tau x n_p], each in [0, 1]
    Matrix<double> coherent_power;   // windowed ((1/M') sum f)^2, same shape
    Matrix<double> coverage;         // M' / M at each cell, before windowing
    UniformAxis tau;
    UniformAxis slowness;
    Window window;
};

namespace detail {

// Centered convolution with zero extension at both ends.
inline std::vector<double> smooth(std::span<const double> x, std::span<const double> w) {
    const std::size_t n = x.size();
    const auto half = static_cast<std::ptrdiff_t>((w.size() - 1) / 2);
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const auto src = static_cast<std::ptrdiff_t>(j) + static_cast<std::ptrdiff_t>(i) - half;
            if (src >= 0 && src < static_cast<std::ptrdiff_t>(n)) acc += w[i] * x[static_cast<std::size_t>(src)];
        }
        out[j] = acc;
    }
    return out;
}

}  // namespace detail

/// Windowed semblance
///   s(tau, p) = [((1/M') sum_n f~)^2 * w] / [((1/M') sum_n f~^2) * w]
/// where M' counts the traces whose sample point lies inside the record and
/// '*' is convolution along tau. Empty cells (zero denominator) are 0.
inline SemblanceGrid semblance(const TraceInterpolator& f, const ArrayGeometry& geometry,
                               const UniformAxis& slowness, const UniformAxis& tau, const Window& window,
                               double energy_floor = kSemblanceEnergyFloor) {
    require(window.length >= 1, "semblance: window length must be >= 1");
    SemblanceGrid out{Matrix<double>(tau.size, slowness.size), Matrix<double>(tau.size, slowness.size),
                      Matrix<double>(tau.size, slowness.size), tau, slowness, window};
    const auto xs = geometry.element_x();
    const auto w = window.weights();
    parallel_for(slowness.size, [&](std::size_t k) {
        const double p = slowness[k];
        std::vector<double> coherent(tau.size), total(tau.size);
        for (std::size_t j = 0; j < tau.size; ++j) {
            double sum = 0.0, sumsq = 0.0;
            std::size_t used = 0;
            for (std::size_t n = 0; n < xs.size(); ++n) {
                double v;
                if (!f.sample(n, tau[j] + p * xs[n], v)) continue;
                sum += v;
                sumsq += v * v;
                ++used;
            }
            if (used == 0) continue;
            out.coverage(j, k) = static_cast<double>(used) / static_cast<double>(xs.size());
            const double mean = sum / static_cast<double>(used);
            coherent[j] = mean * mean;
            total[j] = sumsq / static_cast<double>(used);
        }
        const auto num = detail::smooth(coherent, w);
        const auto den = detail::smooth(total, w);
        for (std::size_t j = 0; j < tau.size; ++j) {
            out.values(j, k) = den[j];  // ratio formed below, once the floor is known
            out.coherent_power(j, k) = num[j];
        }
    });
    const auto dens = out.values.data();
    const double peak = dens.empty() ? 0.0 : *std::max_element(dens.begin(), dens.end());
    const double floor = energy_floor * peak;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double den = out.values.data()[i];
        out.values.data()[i] = (den > 0.0 && den >= floor) ? out.coherent_power.data()[i] / den : 0.0;
    }
    return out;
}

inline SemblanceGrid semblance(const SpaceTimeGrid& data, const UniformAxis& slowness, const UniformAxis& tau,
                               const Window& window, std::size_t upsample = kDefaultUpsample,
                               double energy_floor = kSemblanceEnergyFloor) {
    return semblance(TraceInterpolator(data, upsample), data.geometry, slowness, tau, window, energy_floor);
}

// ---------------------------------------------------------------------------
// Slowness profile and plane-wave detection
// ---------------------------------------------------------------------------

struct SlownessProfile {
    std::vector<double> values;  // S(p) in [0, 1]
    UniformAxis slowness;
};

/// S(p) = sum_tau s(tau, p), normalised to a maximum of one.
inline SlownessProfile slowness_profile(const SemblanceGrid& s) {
    SlownessProfile out{std::vector<double>(s.slowness.size, 0.0), s.slowness};
    for (std::size_t j = 0; j < s.values.rows(); ++j)
        for (std::size_t k = 0; k < s.values.cols(); ++k) out.values[k] += s.values(j, k);
    const double peak = out.values.empty() ? 0.0 : *std::max_element(out.values.begin(), out.values.end());
    if (peak > 0.0)
        for (double& v : out.values) v /= peak;
    return out;
}

/// Closed slowness interval [p_low, p_high] spanning grid cells first..last.
struct SlownessBand {
    double p_low = 0.0;
    double p_high = 0.0;
    std::size_t first = 0;
    std::size_t last = 0;

    bool contains(double p) const { return p >= p_low && p <= p_high; }
};

/// Maximal runs of consecutive cells with S(p) >= epsilon.
inline std::vector<SlownessBand> detect_plane_waves(const SlownessProfile& profile, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("detect_plane_waves: epsilon must lie in (0, 1)");
    std::vector<SlownessBand> bands;
    const auto& v = profile.values;
    for (std::size_t k = 0; k < v.size();) {
        if (v[k] < epsilon) {
            ++k;
            continue;
        }
        std::size_t end = k;
        while (end + 1 < v.size() && v[end + 1] >= epsilon) ++end;
        bands.push_back({profile.slowness[k], profile.slowness[end], k, end});
        k = end + 1;
    }
    return bands;
}

}  // namespace uwbr
