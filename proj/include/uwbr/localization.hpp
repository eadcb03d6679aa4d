#pragma once

// Near-field source localisation from sub-array angle-of-arrival estimates.
//
// The array is split into contiguous sub-arrays, doubling the count until
// every sub-array sees the arrival as a plane wave (peak semblance above a
// threshold). Each sub-array's semblance peak gives a slowness, i.e. a ray
// from its centre; the rays are intersected in the least-squares sense and
// the source pulse is recovered by stacking the raw data along the
// hyperbola of the fused position.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "uwbr/core.hpp"
#include "uwbr/radon.hpp"
#include "uwbr/semblance.hpp"
#include "uwbr/trace_interp.hpp"
#include "uwbr/wavefield.hpp"

namespace uwbr {

class LocalizationError : public Error {
public:
    LocalizationError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// No sub-array count up to k_max made every sub-array plane-wave-like.
class AdaptivePartitionError : public LocalizationError {
public:
    AdaptivePartitionError(std::size_t best_k, double best_min_peak)
        : LocalizationError("adaptive_partition",
                            "source too close or array too coarse: no k <= k_max reached the far-field threshold "
                            "(best k = " + std::to_string(best_k) +
                                ", min peak semblance = " + std::to_string(best_min_peak) + ")"),
          best_k_(best_k) {}
    std::size_t best_k() const noexcept { return best_k_; }

private:
    std::size_t best_k_;
};

struct SubArray {
    std::size_t first = 0;  // index of the first element in the parent array
    std::size_t count = 0;
    double center = 0.0;    // x_c (m)
    double length = 0.0;    // (count - 1) * dx (m)
};

struct AoAEstimate {
    double center = 0.0;          // sub-array centre x_c (m)
    double slowness = 0.0;        // p^ (s/m)
    double delay = 0.0;           // tau^ at the sub-array centre (s)
    double peak_semblance = 0.0;
};

struct PositionEstimate {
    double x = 0.0;
    double z = 0.0;
    double residual = 0.0;  // RMS perpendicular ray distance (m)
    std::vector<AoAEstimate> rays;
};

/// 2 L^2 / lambda.
inline double fraunhofer_distance(double aperture, double wavelength) {
    return 2.0 * aperture * aperture / wavelength;
}

/// k contiguous balanced sub-arrays; the first (M mod k) get one extra element.
inline std::vector<SubArray> partition(const ArrayGeometry& geometry, std::size_t k) {
    const std::size_t m = geometry.element_count;
    if (k < 2 || k > m) throw std::invalid_argument("partition: k must satisfy 2 <= k <= element count");
    std::vector<SubArray> out;
    out.reserve(k);
    const std::size_t base = m / k;
    const std::size_t extra = m % k;
    std::size_t first = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t count = base + (i < extra ? 1 : 0);
        const double center = 0.5 * (geometry.x(first) + geometry.x(first + count - 1));
        out.push_back({first, count, center, static_cast<double>(count - 1) * geometry.spacing});
        first += count;
    }
    return out;
}

/// Copies the sub-array's traces into a grid whose geometry is re-centred
/// on the sub-array, so delays refer to the sub-array centre.
inline SpaceTimeGrid extract_subarray(const SpaceTimeGrid& data, const SubArray& sub) {
    require(sub.count >= 2 && sub.first + sub.count <= data.geometry.element_count,
            "extract_subarray: sub-array needs >= 2 elements inside the parent");
    SpaceTimeGrid out{Matrix<double>(data.n_t(), sub.count), data.time,
                      ArrayGeometry::uniform(sub.count, data.geometry.spacing, data.geometry.carrier_wavelength)};
    for (std::size_t i = 0; i < data.n_t(); ++i)
        for (std::size_t n = 0; n < sub.count; ++n) out.samples(i, n) = data.samples(i, sub.first + n);
    return out;
}

struct AoAOptions {
    std::size_t slowness_count = 501;
    Window window{WindowShape::rectangular, 23};
    std::size_t upsample = kDefaultUpsample;
    /// Cells whose windowed coherent power is below this fraction of the
    /// grid maximum are ignored when searching for the semblance peak.
    double coherent_gate = 0.25;
};

/// Cells reached by fewer than this fraction of the sub-array's traces are
/// ignored by the peak search; with one or two traces semblance is
/// trivially near 1.
inline constexpr double kMinPeakCoverage = 0.5;

/// Semblance peak of one sub-array on explicit axes, with 3-point
/// parabolic refinement in p. Cells whose windowed coherent power is below
/// `coherent_gate` times the maximum are skipped, as are cells with less
/// than kMinPeakCoverage of the traces inside the record.
inline AoAEstimate estimate_aoa(const SpaceTimeGrid& sub_data, double center, const UniformAxis& p_axis,
                                const UniformAxis& tau, const Window& window,
                                std::size_t upsample = kDefaultUpsample, double coherent_gate = 0.25) {
    const auto s = semblance(sub_data, p_axis, tau, window, upsample);

    auto covered = [&](std::size_t j, std::size_t k) { return s.coverage(j, k) >= kMinPeakCoverage; };
    double pmax = 0.0;
    for (std::size_t j = 0; j < tau.size; ++j)
        for (std::size_t k = 0; k < p_axis.size; ++k)
            if (covered(j, k)) pmax = std::max(pmax, s.coherent_power(j, k));
    if (!(pmax > 0.0)) throw LocalizationError("estimate_aoa", "no arrival detected");
    const double gate = coherent_gate * pmax;

    std::size_t bj = 0, bk = 0;
    double best = -1.0;
    for (std::size_t j = 0; j < tau.size; ++j)
        for (std::size_t k = 0; k < p_axis.size; ++k)
            if (covered(j, k) && s.coherent_power(j, k) >= gate && s.values(j, k) > best) {
                best = s.values(j, k);
                bj = j;
                bk = k;
            }

    double offset = 0.0;
    if (bk > 0 && bk + 1 < p_axis.size) {
        const double l = s.values(bj, bk - 1), c = s.values(bj, bk), r = s.values(bj, bk + 1);
        const double curvature = l - 2.0 * c + r;
        if (curvature < 0.0) offset = std::clamp(0.5 * (l - r) / curvature, -0.5, 0.5);
    }
    const double p_hat = std::clamp(p_axis[bk] + offset * p_axis.step, -1.0 / kSpeedOfLight, 1.0 / kSpeedOfLight);
    return {center, p_hat, tau[bj], std::clamp(best, 0.0, 1.0)};
}

inline AoAEstimate estimate_aoa(const SpaceTimeGrid& sub_data, double center, const AoAOptions& options = {}) {
    const auto p_axis = default_slowness_axis(options.slowness_count);
    return estimate_aoa(sub_data, center, p_axis, default_tau_axis(sub_data, p_axis), options.window,
                        options.upsample, options.coherent_gate);
}

struct AdaptivePartition {
    std::size_t k = 0;
    std::vector<SubArray> subarrays;
    std::vector<AoAEstimate> estimates;
};

/// Peak semblance of every sub-array for k sub-arrays; a sub-array with no
/// detectable arrival scores 0.
inline std::vector<AoAEstimate> subarray_estimates(const SpaceTimeGrid& data, const std::vector<SubArray>& parts,
                                                   const AoAOptions& options, std::size_t* silent = nullptr) {
    std::vector<AoAEstimate> out;
    out.reserve(parts.size());
    if (silent) *silent = 0;
    for (const auto& sub : parts) {
        try {
            out.push_back(estimate_aoa(extract_subarray(data, sub), sub.center, options));
        } catch (const LocalizationError&) {
            out.push_back({sub.center, 0.0, 0.0, 0.0});
            if (silent) ++*silent;
        }
    }
    return out;
}

/// Doubles k = 2, 4, 8, ... <= k_max until every sub-array's peak semblance
/// reaches far_field_threshold.
inline AdaptivePartition adaptive_partition(const SpaceTimeGrid& data, double far_field_threshold, std::size_t k_max,
                                            const AoAOptions& options = {}) {
    if (!(far_field_threshold > 0.0 && far_field_threshold < 1.0))
        throw std::invalid_argument("adaptive_partition: threshold must lie in (0, 1)");
    std::size_t best_k = 0;
    double best_min = -1.0;
    const std::size_t m = data.geometry.element_count;
    bool any_arrival = false;
    for (std::size_t k = 2; k <= k_max && 2 * k <= m; k *= 2) {
        auto parts = partition(data.geometry, k);
        std::size_t silent = 0;
        auto est = subarray_estimates(data, parts, options, &silent);
        any_arrival = any_arrival || silent < parts.size();
        double lowest = 1.0;
        for (const auto& e : est) lowest = std::min(lowest, e.peak_semblance);
        if (lowest > best_min) {
            best_min = lowest;
            best_k = k;
        }
        if (lowest >= far_field_threshold) return {k, std::move(parts), std::move(est)};
    }
    if (!any_arrival) throw LocalizationError("adaptive_partition", "no arrival detected");
    throw AdaptivePartitionError(best_k, std::max(best_min, 0.0));
}

/// Largest eigenvalue ratio accepted for the 2x2 normal equations.
inline constexpr double kMaxTriangulationCondition = 1e10;

/// Least-squares intersection of the rays leaving (x_c, 0) toward the
/// source. A source at x0 < x_c produces positive local moveout
/// (c p = (x_c - x0) / R), so the ray direction is (-c p, sqrt(1 - c^2 p^2)).
inline PositionEstimate triangulate(const std::vector<AoAEstimate>& estimates) {
    if (estimates.size() < 2) throw LocalizationError("triangulate", "need at least two estimates");
    double a00 = 0, a01 = 0, a11 = 0, b0 = 0, b1 = 0;
    std::vector<std::pair<double, double>> dirs;
    for (const auto& e : estimates) {
        const double s = std::clamp(kSpeedOfLight * e.slowness, -1.0, 1.0);
        const double dx = -s, dz = std::sqrt(1.0 - s * s);
        dirs.emplace_back(dx, dz);
        // P = I - d d^T ; accumulate P and P * (x_c, 0)
        const double p00 = 1.0 - dx * dx, p01 = -dx * dz, p11 = 1.0 - dz * dz;
        a00 += p00;
        a01 += p01;
        a11 += p11;
        b0 += p00 * e.center;
        b1 += p01 * e.center;
    }
    const double tr = a00 + a11;
    const double det = a00 * a11 - a01 * a01;
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    const double lmax = 0.5 * tr + disc, lmin = 0.5 * tr - disc;
    if (!(lmin > 0.0) || lmax / lmin > kMaxTriangulationCondition)
        throw LocalizationError("triangulate", "ill-conditioned triangulation (near-parallel rays)");

    PositionEstimate out;
    out.x = (a11 * b0 - a01 * b1) / det;
    out.z = (a00 * b1 - a01 * b0) / det;
    if (!(out.z > 0.0)) throw LocalizationError("triangulate", "behind-array solution (z <= 0)");
    double ss = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double rx = out.x - estimates[i].center, rz = out.z;
        const double cross = rx * dirs[i].second - rz * dirs[i].first;
        ss += cross * cross;
    }
    out.residual = std::sqrt(ss / static_cast<double>(estimates.size()));
    out.rays = estimates;
    return out;
}

struct LocalizationConfig {
    double far_field_threshold = 0.95;
    std::size_t k_max = 16;
    AoAOptions aoa;
};

struct Extraction {
    PositionEstimate position;
    AdaptivePartition partition;
    UniformAxis emission;           // time axis of the envelope
    std::vector<double> envelope;   // hyperbolic stack at the estimate
    double peak_time = 0.0;         // argmax |envelope|
    double peak_value = 0.0;        // |envelope| at peak_time
};

/// adaptive_partition -> estimate_aoa -> triangulate on `filtered`, then a
/// hyperbolic stack of `original` at the fused position.
inline Extraction localize_and_extract(const SpaceTimeGrid& filtered, const SpaceTimeGrid& original,
                                       const LocalizationConfig& config = {}) {
    Extraction out;
    out.partition = adaptive_partition(filtered, config.far_field_threshold, config.k_max, config.aoa);
    out.position = triangulate(out.partition.estimates);

    const TraceInterpolator f(original, config.aoa.upsample);
    out.emission = default_emission_axis(original, out.position.x, out.position.z);
    out.envelope = hyperbolic_stack(f, original.geometry, out.position.x, out.position.z, out.emission);

    std::size_t best = 0;
    for (std::size_t i = 1; i < out.envelope.size(); ++i)
        if (std::abs(out.envelope[i]) > std::abs(out.envelope[best])) best = i;
    out.peak_time = out.emission[best];
    out.peak_value = std::abs(out.envelope[best]);
    return out;
}

/// Coherent gain of an extraction: the stack sum M * peak_value over the
/// best single trace of `reference` after 1/R amplitude compensation.
/// `reference` should hold only the arrival being extracted.
inline double coherent_gain(const Extraction& e, const SpaceTimeGrid& reference) {
    double single = 0.0;
    for (std::size_t n = 0; n < reference.geometry.element_count; ++n) {
        const double r = std::hypot(reference.geometry.x(n) - e.position.x, e.position.z);
        for (std::size_t i = 0; i < reference.n_t(); ++i)
            single = std::max(single, r * std::abs(reference.samples(i, n)));
    }
    const double m = static_cast<double>(reference.geometry.element_count);
    return single > 0.0 ? m * e.peak_value / single : 0.0;
}

}  // namespace uwbr
