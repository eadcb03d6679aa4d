#pragma once

// Linear Radon transform (slant stack) over a linear array, its
// ramp-filtered backprojection inverse, the stationary-phase peak locus of
// a near-field source, and hyperbolic stacking along spherical moveout.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "uwbr/core.hpp"
#include "uwbr/fft.hpp"
#include "uwbr/trace_interp.hpp"
#include "uwbr/wavefield.hpp"

namespace uwbr {

/// Sampled f_r(tau, p): rows are delays, columns are slownesses.
struct RadonGrid {
    Matrix<double> samples;
    UniformAxis tau;
    UniformAxis slowness;
};

/// Overall gain of inverse_radon. The continuous pair (dx-weighted slant
/// stack, |f| ramp, dp-weighted backprojection) is unit-gain; a plane-wave
/// round trip on the reference array lands within 1% of it, so no extra
/// scale is applied.
inline constexpr double kInverseRadonScale = 1.0;

/// Delay axis on the data's sample grid, wide enough that every line
/// t = tau + p x through the record is represented for |p| <= max|p|.
inline UniformAxis default_tau_axis(const SpaceTimeGrid& data, const UniformAxis& slowness) {
    const double pmax = std::max(std::abs(slowness.front()), std::abs(slowness.back()));
    const double reach = pmax * 0.5 * data.geometry.length();
    const auto pad = static_cast<std::size_t>(std::ceil(reach / data.dt() - 1e-9));
    return {data.t_start() - static_cast<double>(pad) * data.dt(), data.dt(), data.n_t() + 2 * pad};
}

/// Sum over elements of f~(tau + p x_n, x_n): the true-time-delay sum.
inline double ttd_sum(const TraceInterpolator& f, std::span<const double> xs, double tau, double p) {
    double sum = 0.0;
    for (std::size_t n = 0; n < xs.size(); ++n) sum += f(n, tau + p * xs[n]);
    return sum;
}

/// TTD beam value at a single (tau, p); forward_radon equals dx times this.
inline double ttd_equivalence_check(const SpaceTimeGrid& data, double tau, double p,
                                    std::size_t upsample = kDefaultUpsample) {
    const TraceInterpolator f(data, upsample);
    const auto xs = data.geometry.element_x();
    return ttd_sum(f, xs, tau, p);
}

inline RadonGrid forward_radon(const TraceInterpolator& f, const ArrayGeometry& geometry,
                               const UniformAxis& slowness, const UniformAxis& tau) {
    require(!slowness.empty() && !tau.empty(), "forward_radon: axes must be non-empty");
    RadonGrid out{Matrix<double>(tau.size, slowness.size), tau, slowness};
    const auto xs = geometry.element_x();
    const double dx = geometry.spacing;
    parallel_for(slowness.size, [&](std::size_t k) {
        const double p = slowness[k];
        for (std::size_t j = 0; j < tau.size; ++j) out.samples(j, k) = dx * ttd_sum(f, xs, tau[j], p);
    });
    return out;
}

/// f_r(tau_j, p_k) = dx * sum_n f~(tau_j + p_k x_n, x_n).
inline RadonGrid forward_radon(const SpaceTimeGrid& data, const UniformAxis& slowness, const UniformAxis& tau,
                               std::size_t upsample = kDefaultUpsample) {
    return forward_radon(TraceInterpolator(data, upsample), data.geometry, slowness, tau);
}

inline RadonGrid forward_radon(const SpaceTimeGrid& data, std::size_t upsample = kDefaultUpsample) {
    const auto p = default_slowness_axis();
    return forward_radon(data, p, default_tau_axis(data, p), upsample);
}

/// Ramp response |omega| / (2 pi) = |f| in Hz.
inline double ramp_response(double frequency_hz) { return std::abs(frequency_hz); }

/// Ramp-filters one delay column (spacing dtau) and returns it refined by
/// `upsample` for backprojection.
inline std::vector<double> ramp_filter(std::span<const double> column, double dtau,
                                       std::size_t upsample = kDefaultUpsample) {
    return fft::filter_and_upsample(column, dtau, upsample, ramp_response);
}

struct InverseRadonOptions {
    std::size_t upsample = kDefaultUpsample;
    double scale = kInverseRadonScale;
};

/// Filtered backprojection:
///   f^(t_i, x_n) = scale * dp * sum_k g~(t_i - p_k x_n, p_k)
/// where g is each slowness column ramp-filtered along tau.
inline SpaceTimeGrid inverse_radon(const RadonGrid& radon, const ArrayGeometry& geometry,
                                   const UniformAxis& time, const InverseRadonOptions& options = {}) {
    require(!time.empty() && time.step > 0.0, "inverse_radon: time axis must be non-empty");
    const std::size_t n_p = radon.slowness.size;
    std::vector<std::vector<double>> filtered(n_p);
    parallel_for(n_p, [&](std::size_t k) {
        filtered[k] = ramp_filter(radon.samples.column(k), radon.tau.step, options.upsample);
    });
    const auto g = TraceInterpolator::from_fine(filtered, radon.tau.start,
                                                radon.tau.step / static_cast<double>(options.upsample));

    SpaceTimeGrid out{Matrix<double>(time.size, geometry.element_count), time, geometry};
    const double weight = options.scale * radon.slowness.step;
    parallel_for(geometry.element_count, [&](std::size_t n) {
        const double x = geometry.x(n);
        for (std::size_t i = 0; i < time.size; ++i) {
            double sum = 0.0;
            for (std::size_t k = 0; k < n_p; ++k) sum += g(k, time[i] - radon.slowness[k] * x);
            out.samples(i, n) = weight * sum;
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Near-field peak locus
// ---------------------------------------------------------------------------

/// Quadratic relation between (tau - t0) and p satisfied by the Radon peaks
/// of a point source at (x0, z0):
///   tt*(tau-t0)^2 + tp*(tau-t0)*p + pp*p^2 = rhs
/// with tt = 1, tp = 2 x0, pp = x0^2 + z0^2, rhs = z0^2 / c^2.
struct EllipseLocus {
    double x0 = 0.0;
    double z0 = 1.0;
    double t0 = 0.0;
    double tt = 1.0;
    double tp = 0.0;
    double pp = 0.0;
    double rhs = 0.0;

    static EllipseLocus of(double x0, double z0, double t0) {
        require(z0 > 0.0, "ellipse_locus: z0 must be positive");
        return {x0, z0, t0, 1.0, 2.0 * x0, x0 * x0 + z0 * z0, z0 * z0 / (kSpeedOfLight * kSpeedOfLight)};
    }

    /// Left side minus right side; zero on the locus.
    double residual(double tau, double p) const {
        const double d = tau - t0;
        return tt * d * d + tp * d * p + pp * p * p - rhs;
    }

    /// Causal branch tau(p) = t0 - p x0 + (z0/c) sqrt(1 - c^2 p^2).
    std::optional<double> delay(double p) const {
        const double cp = kSpeedOfLight * p;
        if (std::abs(cp) >= 1.0) return std::nullopt;
        return t0 - p * x0 + (z0 / kSpeedOfLight) * std::sqrt(1.0 - cp * cp);
    }

    /// Element position whose local moveout slope equals p.
    std::optional<double> stationary_x(double p) const {
        const double cp = kSpeedOfLight * p;
        if (std::abs(cp) >= 1.0) return std::nullopt;
        return x0 + z0 * cp / std::sqrt(1.0 - cp * cp);
    }
};

struct LocusPoint {
    double slowness = 0.0;
    double delay = 0.0;
    double stationary_x = 0.0;
    bool aperture_supported = false;
};

struct EllipseSample {
    EllipseLocus locus;
    std::vector<LocusPoint> points;  // only |p| < 1/c
};

inline EllipseSample ellipse_locus(double x0, double z0, double t0, const UniformAxis& slowness,
                                   const ArrayGeometry& geometry) {
    EllipseSample out{EllipseLocus::of(x0, z0, t0), {}};
    const double half = 0.5 * geometry.length();
    for (std::size_t k = 0; k < slowness.size; ++k) {
        const double p = slowness[k];
        const auto tau = out.locus.delay(p);
        if (!tau) continue;
        const double xs = *out.locus.stationary_x(p);
        out.points.push_back({p, *tau, xs, xs >= -half && xs <= half});
    }
    return out;
}

/// Delay of the envelope maximum in each slowness column.
inline std::vector<double> column_peak_delays(const RadonGrid& radon) {
    std::vector<double> out(radon.slowness.size);
    parallel_for(radon.slowness.size, [&](std::size_t k) {
        const auto env = fft::envelope(radon.samples.column(k));
        const auto it = std::max_element(env.begin(), env.end());
        out[k] = radon.tau[static_cast<std::size_t>(it - env.begin())];
    });
    return out;
}

// ---------------------------------------------------------------------------
// Hyperbolic stack
// ---------------------------------------------------------------------------

/// Emission-time axis on the data's sample spacing that covers every
/// emission time t with t + R_n/c inside the record for some element.
inline UniformAxis default_emission_axis(const SpaceTimeGrid& data, double x0, double z0) {
    double rmin = std::numeric_limits<double>::infinity();
    double rmax = 0.0;
    for (std::size_t n = 0; n < data.geometry.element_count; ++n) {
        const double r = std::hypot(data.geometry.x(n) - x0, z0);
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    const double dt = data.dt();
    const double start = data.t_start() - rmax / kSpeedOfLight;
    const double stop = data.time.back() - rmin / kSpeedOfLight;
    return {start, dt, static_cast<std::size_t>(std::floor((stop - start) / dt)) + 1};
}

/// a^(t) = (1/M) sum_n R_n f~(t + R_n/c, x_n), R_n = |(x_n - x0, z0)|.
/// Undoes spherical spreading, so a matched source returns its emitted pulse.
inline std::vector<double> hyperbolic_stack(const TraceInterpolator& f, const ArrayGeometry& geometry, double x0,
                                            double z0, const UniformAxis& emission) {
    require(z0 > 0.0, "hyperbolic_stack: z0 must be positive");
    const std::size_t m = geometry.element_count;
    std::vector<double> range(m);
    for (std::size_t n = 0; n < m; ++n) range[n] = std::hypot(geometry.x(n) - x0, z0);
    std::vector<double> out(emission.size);
    const double inv_m = 1.0 / static_cast<double>(m);
    parallel_for(emission.size, [&](std::size_t i) {
        double sum = 0.0;
        for (std::size_t n = 0; n < m; ++n) sum += range[n] * f(n, emission[i] + range[n] / kSpeedOfLight);
        out[i] = inv_m * sum;
    });
    return out;
}

inline std::vector<double> hyperbolic_stack(const SpaceTimeGrid& data, double x0, double z0,
                                            const UniformAxis& emission, std::size_t upsample = kDefaultUpsample) {
    return hyperbolic_stack(TraceInterpolator(data, upsample), data.geometry, x0, z0, emission);
}

}  // namespace uwbr
