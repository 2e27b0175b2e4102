#include <gtest/gtest.h>

#include "support.hpp"

using namespace llrelax;
using testsupport::rel;

namespace {

constexpr double um = units::micrometer;
constexpr double ms = units::millisecond;

// Smoothed light-cone profile: var = A (z - s softplus((z - zc) / s)), zc = v t.
VarianceField synthetic_front(double v, const std::vector<double>& times, double dt, double xi) {
    VarianceField f;
    f.regime = Regime::homogeneous;
    f.positions = arange(0.0, 60 * um, 0.05 * um);
    f.healing_length = xi;
    for (double t : times)
        for (double tt : {t - dt, t, t + dt}) f.times.push_back(tt);
    const double s = 0.3 * um;
    for (double t : f.times)
        for (double z : f.positions) {
            const double x = (z - v * t) / s;
            const double softplus = x > 30 ? x : std::log1p(std::exp(x));
            f.values.push_back(0.1 / um * (z - s * softplus));
        }
    return f;
}

double contrast_closed_form(double l0, double L) { return 2.0 * (l0 / L) * (l0 / L) * (L / l0 - 1.0 + std::exp(-L / l0)); }

}  // namespace

TEST(Pcf, ExponentialOfVariance) {
    VarianceField v;
    v.positions = {0.0, 1.0, 2.0};
    v.times = {0.0};
    v.values = {0.0, 2.0, 4.0};
    const auto c = pcf(v);
    EXPECT_EQ(c.at(0, 0), 1.0);
    EXPECT_NEAR(c.at(0, 1), 0.36787944117144233, 1e-15);
    EXPECT_NEAR(c.at(0, 2), std::exp(-2.0), 1e-15);
    v.values[1] = -1.0;
    EXPECT_THROW(pcf(v), std::domain_error);
}

TEST(Pcf, PrethermalFormIsExponential) {
    const auto p = derive_params(testsupport::homogeneous_box(46 * units::per_micrometer, 100 * um));
    for (double z : {0.0, 3 * um, 16 * um, 40 * um})
        EXPECT_NEAR(std::exp(-0.5 * prethermal_variance(z, p)), std::exp(-z / p.l0), 1e-14);
}

TEST(Pcf, InitialTimeIsFullyCoherent) {
    const auto p = derive_params(testsupport::homogeneous_box(46 * units::per_micrometer, 100 * um));
    const auto f = sample_variance_field(build_modes(p, 100 * um), Regime::homogeneous,
                                         arange(0.0, 50 * um, 1 * um), 0.0, {0.0, 5 * ms}, p.xi_h);
    const auto c = pcf(f);
    for (std::size_t z = 0; z < f.positions.size(); ++z) EXPECT_EQ(c.at(0, z), 1.0);
}

TEST(FrontExtraction, SyntheticFrontGivesSlope) {
    const double v = 3.0e-3;
    std::vector<double> times;
    for (double t = 1 * ms; t <= 10 * ms; t += 1 * ms) times.push_back(t);
    // one field per detection time, three rows each
    FrontTrace all;
    for (double t : times) {
        const auto f = synthetic_front(v, {t}, 0.01 * ms, 0.4 * um);
        for (const auto& p : extract_front(f).points) all.points.push_back(p);
    }
    ASSERT_EQ(all.points.size(), times.size());
    const auto fit = fit_velocity(all, 0.0, 10 * ms);
    EXPECT_LT(rel(fit.velocity, v), 1e-3);
    EXPECT_LT(std::abs(fit.intercept), 0.05 * um);
    EXPECT_EQ(all.velocity, fit.velocity);
}

TEST(FrontExtraction, FitNeedsThreeDetections) {
    FrontTrace t;
    t.points = {{1 * ms, 2 * um, 1.0}, {2 * ms, 4 * um, 1.0}, {20 * ms, 40 * um, 1.0}};
    EXPECT_THROW(fit_velocity(t, 0.0, 10 * ms), DetectionFailure);
}

TEST(FrontExtraction, HomogeneousFrontAtTwiceSoundSpeedTimesTime) {
    const auto p = testsupport::box_with_sound_speed(1e-3, 100 * um);
    const auto m = build_modes(p, 100 * um);
    const auto seps = arange(0.0, 30 * um, 0.25 * p.xi_h);
    const auto trace = front_trace(m, Regime::homogeneous, seps, 0.0, {5 * ms}, p.xi_h);
    ASSERT_EQ(trace.points.size(), 1u);
    EXPECT_NEAR(trace.points[0].z, 10 * um, p.xi_h);
}

TEST(FrontExtraction, HomogeneousVelocityIsTwiceSoundSpeed) {
    const auto p = derive_params(testsupport::homogeneous_box(46 * units::per_micrometer, 300 * um));
    const auto m = build_modes(p, 300 * um);
    const auto seps = arange(0.0, 45 * um, 0.25 * p.xi_h);
    auto trace = front_trace(m, Regime::homogeneous, seps, 0.0, arange(1 * ms, 10 * ms, 0.5 * ms), p.xi_h);
    const auto fit = fit_velocity(trace, 1 * ms - 1e-9, 10 * ms);
    EXPECT_LT(rel(fit.velocity, 2.0 * p.c), 0.02);
    EXPECT_GE(fit.count, 18u);
}

TEST(FrontExtraction, TrappedFrontBendsNearCloudEdge) {
    // small cloud: the front reaches R/2 within 20 ms and falls behind the early linear fit
    const auto p = derive_params(testsupport::reference_trap(3000.0));
    const auto m = build_legendre_modes(p);
    const auto seps = arange(0.0, 0.9 * p.R, 0.25 * p.xi_h);
    auto trace = front_trace(m, Regime::thomas_fermi, seps, 0.0, arange(1 * ms, 20 * ms, 1 * ms), p.xi_h);
    const auto early = fit_velocity(trace, 0.0, 6 * ms);
    double worst = 0.0;
    for (const auto& pt : trace.points)
        if (pt.z > 0.5 * p.R) worst = std::max(worst, (early.intercept + early.velocity * pt.t - pt.z) / pt.z);
    EXPECT_GT(worst, 0.02);
}

TEST(Contrast, ClosedFormForExponentialCorrelation) {
    const double l0 = 16 * um;
    for (double L : {5 * um, 20 * um, 90 * um}) {
        PairCorrelation pc;
        pc.points = contrast_points(L, 1601);
        const std::size_t n = pc.points.size();
        pc.values.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                pc.values[i * n + j] = std::exp(-std::abs(pc.points[i] - pc.points[j]) / l0);
        EXPECT_LT(rel(mean_squared_contrast(pc, L), contrast_closed_form(l0, L)), 1e-6) << L;
        // independent quadrature of the same double integral
        const double inner = adaptive_simpson(
            [&](double z) {
                return adaptive_simpson([&](double zp) { return std::exp(-std::abs(z - zp) / l0); }, -0.5 * L, z,
                                        1e-14 * L) *
                       2.0;
            },
            -0.5 * L, 0.5 * L, 1e-14 * L * L);
        EXPECT_LT(rel(inner / (L * L), contrast_closed_form(l0, L)), 1e-8);
    }
}

TEST(Contrast, TrivialLimits) {
    const auto p = derive_params(testsupport::reference_trap());
    const auto m = build_legendre_modes(p);
    EXPECT_NEAR(ContrastEvaluator(m, 50 * um, 101)(0.0), 1.0, 1e-14);
    EXPECT_EQ(mean_squared_contrast(pair_correlation(m, {0.0}, 30 * ms), 0.0), 1.0);
    EXPECT_THROW(ContrastEvaluator(m, 2.5 * p.R, 11), std::domain_error);
}

TEST(Contrast, EvaluatorMatchesDirectPairSum) {
    const auto p = derive_params(testsupport::reference_trap());
    const auto m = build_legendre_modes(p);
    const ContrastEvaluator eval(m, 50 * um, 51);
    for (double t : {3 * ms, 40 * ms, 202 * ms}) {
        const auto pc = pair_correlation(m, contrast_points(50 * um, 51), t);
        EXPECT_NEAR(eval(t), mean_squared_contrast(pc, 50 * um), 1e-12);
    }
}

TEST(Contrast, GridRefinementIsStable) {
    const auto p = derive_params(testsupport::reference_trap());
    const auto m = build_legendre_modes(p);
    const ContrastEvaluator coarse(m, 50 * um, 101), fine(m, 50 * um, 201);
    for (double t : {10 * ms, 100 * ms, 202 * ms}) EXPECT_NEAR(coarse(t), fine(t), 2e-3);
}

TEST(Recurrence, HomogeneousFullRecurrences) {
    const auto p = derive_params(testsupport::homogeneous_box(46 * units::per_micrometer, 100 * um));
    const auto m = build_modes(p, 100 * um);
    const double trev = recurrence_time(100 * um, p.c);
    ASSERT_NEAR(trev / ms, 100.0 / (2.0 * p.c / units::mm_per_s) , 1e-9);
    const ContrastEvaluator eval(m, 50 * um, 101);
    EXPECT_NEAR(eval(trev), 1.0, 1e-10);
    EXPECT_NEAR(eval(2.0 * trev), 1.0, 1e-10);
    const auto trace = contrast_trace(eval, arange(0.0, 60 * ms, 0.5 * ms));
    const auto ranked = recurrence_scan(trace, [&eval](double t) { return eval(t); });
    ASSERT_GE(ranked.size(), 2u);
    std::vector<double> top{ranked[0].time, ranked[1].time};
    std::sort(top.begin(), top.end());
    EXPECT_NEAR(top[0], trev, 1e-6 * trev);
    EXPECT_NEAR(top[1], 2.0 * trev, 1e-6 * trev);
    EXPECT_NEAR(ranked[0].strength, 1.0, 1e-9);
    EXPECT_NEAR(ranked[1].strength, 1.0, 1e-9);
}

TEST(Recurrence, ScanRequiresFineSampling) {
    ContrastTrace t;
    t.times = {0.0, 1 * ms, 2 * ms};
    t.values = {1.0, 0.5, 0.7};
    EXPECT_THROW(recurrence_scan(t), std::invalid_argument);
}

TEST(Recurrence, ScanSkipsInitialDecay) {
    ContrastTrace t;
    t.times = arange(0.0, 5 * ms, 0.5 * ms);
    t.values = {1.0, 0.8, 0.6, 0.5, 0.7, 0.9, 0.6, 0.65, 0.62, 0.4, 0.3};
    const auto r = recurrence_scan(t);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_DOUBLE_EQ(r[0].time, 2.5 * ms);
    EXPECT_DOUBLE_EQ(r[0].strength, 0.9);
    EXPECT_DOUBLE_EQ(r[1].time, 3.5 * ms);
}

TEST(ModeAmplitudes, ZerosAndEnvelope) {
    const double w = units::angular(7.0);
    std::vector<double> freqs;
    for (int j = 1; j <= 5; ++j) freqs.push_back(mode_frequency(j, w));
    const double fifth = 5.0 * pi / freqs[1];
    EXPECT_NEAR(fifth / ms, 206.2, 0.1);
    const auto a = mode_amplitude_trace(freqs, {fifth, pi / freqs[0], 0.5 * pi / freqs[4]}, 5);
    EXPECT_LT(a[1][0] * freqs[1] * freqs[1], 1e-24);
    EXPECT_LT(a[0][1] * freqs[0] * freqs[0], 1e-24);
    for (std::size_t j = 0; j + 1 < freqs.size(); ++j) EXPECT_GT(1.0 / (freqs[j] * freqs[j]), 1.0 / (freqs[j + 1] * freqs[j + 1]));
    EXPECT_NEAR(a[4][2], 1.0 / (freqs[4] * freqs[4]), 1e-18);
}

TEST(Fields, GridHelpers) {
    const auto l = linspace(0.0, 1.0, 5);
    ASSERT_EQ(l.size(), 5u);
    EXPECT_EQ(l.back(), 1.0);
    const auto a = arange(0.0, 1.0, 0.25);
    ASSERT_EQ(a.size(), 5u);
    EXPECT_NEAR(a.back(), 1.0, 1e-15);
}

TEST(Fields, TruncationFlagFollowsDoubling) {
    const auto p = derive_params(testsupport::homogeneous_box(46 * units::per_micrometer, 100 * um));
    const auto f = sample_variance_field(build_modes(p, 100 * um, 2000), Regime::homogeneous,
                                         arange(2 * um, 30 * um, 2 * um), 0.0, {2 * ms, 6 * ms}, p.xi_h);
    EXPECT_EQ(f.truncation.modes, 2000u);
    EXPECT_TRUE(f.truncation.converged);
    EXPECT_LT(f.truncation.doubling_change, 0.005);
}
