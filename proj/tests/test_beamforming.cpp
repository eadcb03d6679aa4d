#include <gtest/gtest.h>

#include "support.hpp"
#include "uwbr/beamforming.hpp"
#include "uwbr/fft.hpp"

using namespace uwbr;
using uwbr::test::c;

namespace {

struct Peaks {
    double ttd;
    double phase_shift;
};

/// Envelope peaks of the TTD beam (steered with tau = 0) and the
/// phase-shift beam for one plane wave at slowness sin_angle / c.
Peaks beam_peaks(const ArrayGeometry& g, const PulseSpec& pulse, double sin_angle) {
    const std::vector<SourceSpec> s{test::far(sin_angle, 0.0, pulse)};
    const auto d = synthesize(g, s, default_time_axis(g, s, default_dt(s, pulse)));
    const auto ttd = ttd_beamform(d, 0.0, sin_angle / c, d.time);
    const auto ps = phase_shift_beamform(d, sin_angle / c, pulse.center_freq);
    return {test::max_abs(fft::envelope(ttd)), test::max_abs(ps.magnitude)};
}

}  // namespace

TEST(TtdBeamform, ZeroData) {
    const auto d = synthesize(make_array(8, 24e9), std::vector<SourceSpec>{}, {0.0, 1e-11, 50});
    EXPECT_EQ(test::max_abs(ttd_beamform(d, 0.0, 0.2 / c, d.time)), 0.0);
    EXPECT_EQ(test::max_abs(phase_shift_beamform(d, 0.2 / c, 16e9).magnitude), 0.0);
}

TEST(TtdBeamform, MatchedPlaneWavePeaksAtElementCount) {
    const auto g = make_array(48, 24e9);
    for (double s : {-0.7, 0.0, 0.33}) {
        const auto d = test::synth(g, {test::far(s, 0.2e-9)});
        const auto out = ttd_beamform(d, 0.2e-9, s / c, {-1e-10, 0.25e-12, 801});
        EXPECT_NEAR(test::max_abs(out), 48.0, 0.01 * 48.0) << "s = " << s;
    }
}

TEST(TtdBeamform, DelaySweepReproducesRadonColumn) {
    const auto g = make_array(24, 24e9);
    const auto d = test::synth(g, {test::far(0.4, 0.1e-9), test::near(0.0, 0.3, 0.0)});
    const auto p = default_slowness_axis(11);
    const auto tau = default_tau_axis(d, p);
    const auto r = forward_radon(d, p, tau);
    for (std::size_t k : {2u, 5u, 9u}) {
        const auto beam = ttd_beamform(d, 0.0, p[k], tau);
        const auto col = r.samples.column(k);
        for (std::size_t j = 0; j < tau.size; ++j) EXPECT_NEAR(beam[j], col[j] / g.spacing, 1e-9);
    }
}

TEST(PhaseShiftBeamform, RejectsNonPositiveCarrier) {
    const auto d = synthesize(make_array(4, 24e9), std::vector<SourceSpec>{}, {0.0, 1e-11, 16});
    EXPECT_THROW(phase_shift_beamform(d, 0.0, 0.0), std::invalid_argument);
}

TEST(PhaseShiftBeamform, BroadsideMatchesTtdForAnyBandwidth) {
    const auto g = make_array(64, 24e9);
    for (double b : {0.16e9, 2e9, 8e9, 16e9}) {
        const auto pk = beam_peaks(g, {16e9, b, 1.0}, 0.0);
        EXPECT_NEAR(pk.phase_shift / pk.ttd, 1.0, 0.01) << "B_ss = " << b;
    }
}

TEST(PhaseShiftBeamform, LosesCoherenceForWidebandSteeredBeam) {
    const auto g = make_array(64, 24e9);
    for (double s : {0.3, 0.9, -0.9}) {
        const auto pk = beam_peaks(g, {16e9, 8e9, 1.0}, s);
        EXPECT_LT(pk.phase_shift, pk.ttd) << "s = " << s;
    }
}

TEST(PhaseShiftBeamform, NarrowbandAgreesWithTtd) {
    const auto g = make_array(64, 24e9);
    const auto pk = beam_peaks(g, {16e9, 16e9 / 100, 1.0}, 0.1);
    EXPECT_NEAR(pk.phase_shift / pk.ttd, 1.0, 0.01);
}

TEST(PhaseShiftBeamform, CoherenceLossGrowsWithBandwidth) {
    const auto g = make_array(64, 24e9);
    double previous = 0.0;
    for (double b : {0.25e9, 1e9, 2e9, 4e9, 8e9, 16e9}) {
        const auto pk = beam_peaks(g, {16e9, b, 1.0}, 0.5);
        const double loss = pk.ttd / pk.phase_shift;
        EXPECT_GE(loss, previous - 1e-9) << "B_ss = " << b;
        previous = loss;
    }
    EXPECT_GT(previous, 2.0);
}

TEST(SquintReport, ReferenceParametersRequireTtd) {
    const auto r = squint_report(make_array(251, 24e9), {16e9, 8e9, 1.0}, 0.9 / c);
    EXPECT_DOUBLE_EQ(r.bandwidth_ratio, 1.0);
    EXPECT_NEAR(r.aperture_ratio, 1.5614 / (c / 16e9), 1e-2);
    EXPECT_NEAR(r.product, 83.33, 0.01);
    EXPECT_TRUE(r.ttd_required);
    EXPECT_DOUBLE_EQ(r.worst_phase_error, kPi * 16e9 * (0.9 / c) * make_array(251, 24e9).length() / 2);
}

TEST(SquintReport, NarrowbandLimitAndStrictBoundary) {
    const auto tiny = squint_report(make_array(251, 24e9), {16e9, 1e-3, 1.0}, 0.0);
    EXPECT_NEAR(tiny.product, 0.0, 1e-9);
    EXPECT_FALSE(tiny.ttd_required);

    // B / f_c = 1/2 and L = lambda_c puts the product exactly on 1/2.
    const double lambda = c / 16e9;
    const auto edge = squint_report(ArrayGeometry::uniform(2, lambda, lambda), {16e9, 4e9, 1.0}, 0.0);
    EXPECT_EQ(edge.product, 0.5);
    EXPECT_FALSE(edge.ttd_required);
}

TEST(SquintReport, ProductIsLinearInBandwidthAndAperture) {
    const auto g1 = ArrayGeometry::uniform(11, 0.01, 0.0125);
    const auto g2 = ArrayGeometry::uniform(21, 0.01, 0.0125);  // twice the length
    const auto base = squint_report(g1, {16e9, 2e9, 1.0}, 0.0);
    EXPECT_NEAR(squint_report(g1, {16e9, 4e9, 1.0}, 0.0).product, 2.0 * base.product, 1e-12);
    EXPECT_NEAR(squint_report(g2, {16e9, 2e9, 1.0}, 0.0).product, 2.0 * base.product, 1e-12);
}
