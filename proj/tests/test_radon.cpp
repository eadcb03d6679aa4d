#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "uwbr/radon.hpp"

using namespace uwbr;
using uwbr::test::c;

namespace {

SpaceTimeGrid random_grid(std::size_t m, std::size_t n_t, std::uint64_t seed) {
    const auto g = make_array(m, 24e9);
    return synthesize(g, std::vector<SourceSpec>{}, {0.0, 1.0 / 96e9, n_t}, 1.0, seed);
}

}  // namespace

TEST(ForwardRadon, ZeroDataGivesZeroGrid) {
    const auto d = synthesize(make_array(16, 24e9), std::vector<SourceSpec>{}, {0.0, 1e-11, 64});
    const auto r = forward_radon(d, default_slowness_axis(21), {-2e-10, 1e-11, 100});
    EXPECT_EQ(test::max_abs(r.samples.data()), 0.0);
    EXPECT_EQ(ttd_equivalence_check(d, 1e-10, 0.3 / c), 0.0);
}

TEST(ForwardRadon, EqualsSpacingTimesTtdSumEverywhere) {
    const auto d = random_grid(24, 80, 3);
    const auto p = default_slowness_axis(31);
    const auto tau = default_tau_axis(d, p);
    for (std::size_t upsample : {1u, 8u}) {
        const auto r = forward_radon(d, p, tau, upsample);
        for (std::size_t j = 0; j < tau.size; j += 7)
            for (std::size_t k = 0; k < p.size; ++k)
                EXPECT_EQ(r.samples(j, k), d.geometry.spacing * ttd_equivalence_check(d, tau[j], p[k], upsample));
    }
}

TEST(ForwardRadon, Linearity) {
    const auto a = random_grid(16, 64, 1), b = random_grid(16, 64, 2);
    SpaceTimeGrid mix = a;
    for (std::size_t i = 0; i < mix.samples.size(); ++i)
        mix.samples.data()[i] = 2.5 * a.samples.data()[i] - 0.75 * b.samples.data()[i];
    const auto p = default_slowness_axis(21);
    const auto tau = default_tau_axis(a, p);
    const auto ra = forward_radon(a, p, tau), rb = forward_radon(b, p, tau), rm = forward_radon(mix, p, tau);
    const double scale = test::max_abs(rm.samples.data());
    for (std::size_t i = 0; i < rm.samples.size(); ++i)
        EXPECT_NEAR(rm.samples.data()[i], 2.5 * ra.samples.data()[i] - 0.75 * rb.samples.data()[i], 1e-12 * scale);
}

TEST(ForwardRadon, MatchedPlaneWaveSumsToElementCount) {
    // sin = 0.5 moves the wave by exactly one sample per element.
    const auto g = make_array(33, 24e9);
    const auto d = test::synth(g, {test::far(0.5, 0.0)});
    ASSERT_NEAR(0.5 / c * g.spacing, d.dt(), 1e-25);
    EXPECT_NEAR(ttd_equivalence_check(d, 0.0, 0.5 / c), 33.0, 1e-6);
    EXPECT_NEAR(ttd_equivalence_check(d, 0.0, 0.5 / c, 1), 33.0, 1e-12);
}

TEST(ForwardRadon, PlaneWavePeakAtSourceCell) {
    const auto g = make_array(64, 24e9);
    const auto p = default_slowness_axis(101);
    for (double s : {-0.83, -0.2, 0.0, 0.37, 0.91}) {
        const double t0 = 0.4e-9;
        const auto d = test::synth(g, {test::far(s, t0)});
        const auto tau = default_tau_axis(d, p);
        const auto r = forward_radon(d, p, tau);
        const auto [j, k] = test::argmax_abs(r.samples);
        EXPECT_LE(std::abs(p[k] - s / c), p.step) << "s = " << s;
        EXPECT_LE(std::abs(tau[j] - t0), tau.step) << "s = " << s;
    }
}

TEST(RampFilter, ZeroResponseAtDc) {
    EXPECT_EQ(ramp_response(0.0), 0.0);
    EXPECT_DOUBLE_EQ(ramp_response(-3e9), 3e9);
    const double dt = 1e-11;
    const std::vector<double> flat(4096, 1.0);
    const auto out = ramp_filter(flat, dt, 1);
    // A filter that passed DC would leave ~1/(2 dt) here.
    EXPECT_LT(std::abs(out[2048]), 1e-3 * 0.5 / dt);
}

TEST(RampFilter, GainEqualsFrequencyForATone) {
    const double dt = 1e-11, f = 7e9;
    std::vector<double> tone(2048);
    for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = std::cos(2 * kPi * f * static_cast<double>(i) * dt);
    const auto out = ramp_filter(tone, dt, 4);
    for (std::size_t i = 900; i < 1100; ++i) EXPECT_NEAR(out[4 * i] / f, tone[i], 0.02);
}

TEST(InverseRadon, ZeroGridGivesZeroData) {
    const auto g = make_array(16, 24e9);
    RadonGrid r{Matrix<double>(120, 21), {-1e-10, 1e-11, 120}, default_slowness_axis(21)};
    const auto out = inverse_radon(r, g, {0.0, 1e-11, 64});
    EXPECT_EQ(test::max_abs(out.samples.data()), 0.0);
}

TEST(InverseRadon, PlaneWaveRoundTrip) {
    const auto g = make_array(101, 24e9);
    for (double s : {-0.6, 0.0, 0.45, 0.9}) {
        const auto d = test::synth(g, {test::far(s, 0.5e-9)});
        const auto r = forward_radon(d);
        const auto back = inverse_radon(r, g, d.time);
        double scale = 0.0;
        EXPECT_LE(test::fitted_relative_error(d.samples.data(), back.samples.data(), &scale), 0.15) << "s = " << s;
        EXPECT_NEAR(scale, 1.0, 0.1);
    }
}

TEST(EllipseLocus, BroadsideDelay) {
    const auto e = EllipseLocus::of(0.0, 2.0, 1e-9);
    EXPECT_DOUBLE_EQ(*e.delay(0.0), 1e-9 + 2.0 / c);
    EXPECT_FALSE(e.delay(1.0 / c).has_value());
    EXPECT_FALSE(e.delay(-1.2 / c).has_value());
    EXPECT_THROW(EllipseLocus::of(0.0, 0.0, 0.0), std::invalid_argument);
}

TEST(EllipseLocus, QuadraticFormVanishesOnCausalBranch) {
    const auto e = EllipseLocus::of(0.3, 1.7, 2e-9);
    for (double s = -0.95; s <= 0.95; s += 0.05) {
        const double p = s / c, tau = *e.delay(p);
        // Normalise by the size of the individual terms (s^2).
        EXPECT_NEAR(e.residual(tau, p) / e.rhs, 0.0, 1e-12);
        // The stationary element sees moveout slope p.
        const double xs = *e.stationary_x(p);
        EXPECT_NEAR((xs - 0.3) / std::hypot(xs - 0.3, 1.7), s, 1e-12);
        // tau is the intercept of the tangent line at the stationary point.
        EXPECT_NEAR(tau, 2e-9 + std::hypot(xs - 0.3, 1.7) / c - p * xs, 1e-20);
    }
}

TEST(EllipseLocus, ApertureSupportFlag) {
    const auto g = make_array(101, 24e9);
    const auto axis = default_slowness_axis(101);
    const auto sample = ellipse_locus(0.1, 0.5, 0.0, axis, g);
    std::size_t propagating = 0;
    for (std::size_t k = 0; k < axis.size; ++k) propagating += std::abs(c * axis[k]) < 1.0 ? 1 : 0;
    EXPECT_EQ(sample.points.size(), propagating);
    EXPECT_GE(sample.points.size(), 99u);
    for (const auto& pt : sample.points)
        EXPECT_EQ(pt.aperture_supported, std::abs(pt.stationary_x) <= g.length() / 2);
}

TEST(EllipseLocus, MatchesRadonColumnPeaks) {
    const auto g = make_array(101, 24e9);
    const double x0 = 0.05, z0 = 0.4, t0 = 0.0;
    const auto d = test::synth(g, {test::near(x0, z0, t0)});
    const auto p = default_slowness_axis(201);
    const auto r = forward_radon(d, p, default_tau_axis(d, p));
    const auto peaks = column_peak_delays(r);
    const auto sample = ellipse_locus(x0, z0, t0, p, g);
    const double tol = std::max(r.tau.step, std::abs(p.step * x0));
    std::size_t supported = 0, hits = 0;
    for (const auto& pt : sample.points) {
        if (!pt.aperture_supported) continue;
        ++supported;
        const auto k = static_cast<std::size_t>(std::lround(p.position(pt.slowness)));
        if (std::abs(peaks[k] - pt.delay) <= tol) ++hits;
    }
    ASSERT_GT(supported, 20u);
    EXPECT_GE(static_cast<double>(hits), 0.95 * static_cast<double>(supported));
}

TEST(HyperbolicStack, ZeroDataGivesZero) {
    const auto d = synthesize(make_array(8, 24e9), std::vector<SourceSpec>{}, {0.0, 1e-11, 64});
    const auto out = hyperbolic_stack(d, 0.0, 1.0, default_emission_axis(d, 0.0, 1.0));
    EXPECT_EQ(test::max_abs(out), 0.0);
}

TEST(HyperbolicStack, MatchedSourceRecoversPulse) {
    const auto g = make_array(101, 24e9);
    const double x0 = -0.1, z0 = 0.6, t0 = 0.25e-9;
    const auto d = test::synth(g, {test::near(x0, z0, t0)});
    const auto axis = default_emission_axis(d, x0, z0);
    const auto out = hyperbolic_stack(d, x0, z0, axis);
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.size(); ++i)
        if (std::abs(out[i]) > std::abs(out[best])) best = i;
    EXPECT_LE(std::abs(axis[best] - t0), d.dt());
    EXPECT_NEAR(out[best], gaussian_pulse(axis[best] - t0, test::test_pulse()), 0.02);
    EXPECT_NEAR(std::abs(out[best]), 1.0, 0.15);

    const auto off = hyperbolic_stack(d, x0 + 0.15, z0 - 0.2, axis);
    EXPECT_LT(test::max_abs(off), std::abs(out[best]));
}
