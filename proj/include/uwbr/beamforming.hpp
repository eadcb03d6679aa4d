#pragma once

// True-time-delay and phase-shift beamformers and the beam-squint rule.

#include <cmath>
#include <complex>
#include <vector>

#include "uwbr/core.hpp"
#include "uwbr/fft.hpp"
#include "uwbr/radon.hpp"
#include "uwbr/trace_interp.hpp"
#include "uwbr/wavefield.hpp"

namespace uwbr {

/// a^(t_i) = sum_n f~(t_i + tau + p x_n, x_n).
inline std::vector<double> ttd_beamform(const SpaceTimeGrid& data, double tau, double p, const UniformAxis& time,
                                        std::size_t upsample = kDefaultUpsample) {
    const TraceInterpolator f(data, upsample);
    const auto xs = data.geometry.element_x();
    std::vector<double> out(time.size);
    for (std::size_t i = 0; i < time.size; ++i) out[i] = ttd_sum(f, xs, time[i] + tau, p);
    return out;
}

struct PhaseShiftBeam {
    std::vector<double> magnitude;
    std::vector<double> real;
};

/// Narrowband steering: each trace's analytic signal is rotated by the
/// carrier phase of its TTD advance, exp(+i w_c p x_n), and summed. No
/// time shift is applied, so the envelope misalignment that TTD removes
/// is left in place. Output is on the data's own time axis.
inline PhaseShiftBeam phase_shift_beamform(const SpaceTimeGrid& data, double p, double carrier_freq) {
    require(carrier_freq > 0.0, "phase_shift_beamform: carrier_freq must be positive");
    const std::size_t m = data.geometry.element_count;
    const double wc = 2.0 * kPi * carrier_freq;
    std::vector<std::complex<double>> sum(data.n_t());
    for (std::size_t n = 0; n < m; ++n) {
        const auto z = fft::analytic_signal(data.trace(n));
        const auto rot = std::polar(1.0, wc * p * data.geometry.x(n));
        for (std::size_t i = 0; i < z.size(); ++i) sum[i] += z[i] * rot;
    }
    PhaseShiftBeam out{std::vector<double>(sum.size()), std::vector<double>(sum.size())};
    for (std::size_t i = 0; i < sum.size(); ++i) {
        out.magnitude[i] = std::abs(sum[i]);
        out.real[i] = sum[i].real();
    }
    return out;
}

struct SquintReport {
    double bandwidth_ratio = 0.0;  // B / f_c, B two-sided
    double aperture_ratio = 0.0;   // L / lambda_c
    double product = 0.0;
    bool ttd_required = false;     // product > 1/2, strictly
    double worst_phase_error = 0.0;  // pi * B * |p| * L / 2 (rad)
};

/// Beam-squint check for a pulse steered to slowness p. The carrier is the
/// pulse centre frequency and the two-sided bandwidth is 2 * B_ss.
inline SquintReport squint_report(const ArrayGeometry& geometry, const PulseSpec& pulse, double p) {
    pulse.validate();
    const double b = 2.0 * pulse.bandwidth;
    const double lambda = kSpeedOfLight / pulse.center_freq;
    const double length = geometry.length();
    SquintReport r;
    r.bandwidth_ratio = b / pulse.center_freq;
    r.aperture_ratio = length / lambda;
    r.product = r.bandwidth_ratio * r.aperture_ratio;
    r.ttd_required = r.product > 0.5;
    r.worst_phase_error = kPi * b * std::abs(p) * length / 2.0;
    return r;
}

}  // namespace uwbr
