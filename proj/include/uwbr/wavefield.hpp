#pragma once

// Synthetic space/time data for a uniform linear array: plane-wave
// (far-field) and spherical-wave (near-field) arrivals of modulated
// Gaussian pulses, plus optional seeded white noise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "uwbr/core.hpp"

namespace uwbr {

/// Uniform linear array centred on x = 0, z = 0.
struct ArrayGeometry {
    std::size_t element_count = 0;
    double spacing = 0.0;             // dx (m)
    double carrier_wavelength = 0.0;  // lambda_c (m)

    static ArrayGeometry uniform(std::size_t count, double dx, double wavelength) {
        require(count >= 2, "array needs at least two elements");
        require(dx > 0.0 && std::isfinite(dx), "element spacing must be positive");
        require(wavelength > 0.0 && std::isfinite(wavelength), "carrier wavelength must be positive");
        return {count, dx, wavelength};
    }

    double length() const { return static_cast<double>(element_count - 1) * spacing; }

    /// x-coordinate of element n; exactly antisymmetric about the centre.
    double x(std::size_t n) const {
        return (static_cast<double>(n) - 0.5 * static_cast<double>(element_count - 1)) * spacing;
    }

    std::vector<double> element_x() const {
        std::vector<double> out(element_count);
        for (std::size_t n = 0; n < element_count; ++n) out[n] = x(n);
        return out;
    }

    friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;
};

/// Half-wavelength-spaced array at the given carrier frequency.
inline ArrayGeometry make_array(std::size_t element_count, double carrier_freq) {
    if (element_count < 2) throw std::invalid_argument("make_array: element_count must be >= 2");
    if (!(carrier_freq > 0.0)) throw std::invalid_argument("make_array: carrier_freq must be positive");
    const double wavelength = kSpeedOfLight / carrier_freq;
    return ArrayGeometry::uniform(element_count, kSpeedOfLight / (2.0 * carrier_freq), wavelength);
}

/// Gaussian-envelope pulse modulated onto a cosine carrier.
///
/// The envelope width is tied to the single-sided bandwidth so that the
/// spectrum magnitude at center_freq +/- bandwidth is e^-2 of its peak:
/// sigma_t = 1 / (pi * bandwidth).
struct PulseSpec {
    double center_freq = 16e9;  // f0 (Hz)
    double bandwidth = 8e9;     // single-sided B_ss (Hz)
    double amplitude = 1.0;

    double sigma() const { return 1.0 / (kPi * bandwidth); }
    double highest_frequency() const { return center_freq + bandwidth; }

    void validate() const {
        if (!(center_freq > 0.0)) throw std::invalid_argument("pulse center frequency must be positive");
        if (!(bandwidth > 0.0) || bandwidth > center_freq)
            throw std::invalid_argument("pulse bandwidth must satisfy 0 < B <= f0");
        if (!std::isfinite(amplitude)) throw std::invalid_argument("pulse amplitude must be finite");
    }
};

/// a(t) * cos(2 pi f0 t) with a(t) = amplitude * exp(-t^2 / (2 sigma_t^2)).
inline double gaussian_pulse(double t, const PulseSpec& pulse) {
    const double s = pulse.sigma();
    return pulse.amplitude * std::exp(-t * t / (2.0 * s * s)) * std::cos(2.0 * kPi * pulse.center_freq * t);
}

struct FarField {
    double slowness = 0.0;  // s/m, |s| <= 1/c
    double delay = 0.0;     // t0 (s)
};

struct NearField {
    double x0 = 0.0;     // m
    double z0 = 1.0;     // m, > 0
    double delay = 0.0;  // t0 (s)
};

struct SourceSpec {
    std::variant<FarField, NearField> kind;
    PulseSpec pulse;

    bool is_near() const { return std::holds_alternative<NearField>(kind); }

    void validate() const {
        pulse.validate();
        if (const auto* ff = std::get_if<FarField>(&kind)) {
            if (!(std::abs(ff->slowness) <= 1.0 / kSpeedOfLight))
                throw std::invalid_argument("far-field slowness must satisfy |s| <= 1/c");
        } else {
            const auto& nf = std::get<NearField>(kind);
            if (!(nf.z0 > 0.0)) throw std::invalid_argument("near-field source needs z0 > 0");
        }
    }

    /// Propagation delay to an element at x, and the amplitude factor
    /// (1 for plane waves, 1/R for spherical waves).
    std::pair<double, double> arrival(double x) const {
        if (const auto* ff = std::get_if<FarField>(&kind)) return {ff->delay + ff->slowness * x, 1.0};
        const auto& nf = std::get<NearField>(kind);
        const double r = std::hypot(x - nf.x0, nf.z0);
        return {nf.delay + r / kSpeedOfLight, 1.0 / r};
    }
};

/// Sampled f(t, x): rows are time samples, columns are array elements.
struct SpaceTimeGrid {
    Matrix<double> samples;
    UniformAxis time;
    ArrayGeometry geometry;

    std::size_t n_t() const { return time.size; }
    double dt() const { return time.step; }
    double t_start() const { return time.start; }

    std::vector<double> trace(std::size_t n) const { return samples.column(n); }

    void validate() const {
        require(time.step > 0.0 && time.size >= 1, "time axis must have dt > 0 and n_t >= 1");
        require(samples.rows() == time.size, "sample rows must match the time axis");
        require(samples.cols() == geometry.element_count, "sample columns must match the element count");
        for (double v : samples.data())
            if (!std::isfinite(v)) throw std::invalid_argument("space/time samples must be finite");
    }
};

/// 4x oversampling of the highest significant frequency over all sources.
inline double default_dt(std::span<const SourceSpec> sources, const PulseSpec& fallback) {
    double fmax = fallback.highest_frequency();
    for (const auto& s : sources) fmax = std::max(fmax, s.pulse.highest_frequency());
    return 1.0 / (4.0 * fmax);
}

/// Time axis covering every arrival on every element with 5 sigma_t margins.
inline UniformAxis default_time_axis(const ArrayGeometry& geometry, std::span<const SourceSpec> sources,
                                     double dt) {
    require(dt > 0.0, "dt must be positive");
    if (sources.empty()) return {0.0, dt, 256};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : sources) {
        const double margin = 5.0 * s.pulse.sigma();
        for (std::size_t n = 0; n < geometry.element_count; ++n) {
            const double t = s.arrival(geometry.x(n)).first;
            lo = std::min(lo, t - margin);
            hi = std::max(hi, t + margin);
        }
    }
    const double start = std::floor(lo / dt) * dt;
    const auto count = static_cast<std::size_t>(std::ceil((hi - start) / dt)) + 1;
    return {start, dt, count};
}

/// Superposes every source on every element and adds N(0, noise_std^2)
/// per sample. Noise is drawn row-major from a 64-bit Mersenne Twister so a
/// given seed is reproducible bit for bit.
inline SpaceTimeGrid synthesize(const ArrayGeometry& geometry, std::span<const SourceSpec> sources,
                                const UniformAxis& time, double noise_std = 0.0, std::uint64_t seed = 0) {
    require(time.step > 0.0 && time.size >= 1, "synthesize: dt must be positive and n_t >= 1");
    require(noise_std >= 0.0, "synthesize: noise_std must be non-negative");
    for (const auto& s : sources) s.validate();

    SpaceTimeGrid grid{Matrix<double>(time.size, geometry.element_count), time, geometry};
    parallel_for(geometry.element_count, [&](std::size_t n) {
        const double x = geometry.x(n);
        for (const auto& s : sources) {
            const auto [delay, gain] = s.arrival(x);
            for (std::size_t i = 0; i < time.size; ++i)
                grid.samples(i, n) += gain * gaussian_pulse(time[i] - delay, s.pulse);
        }
    });
    if (noise_std > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, noise_std);
        for (double& v : grid.samples.data()) v += noise(rng);
    }
    return grid;
}

}  // namespace uwbr
