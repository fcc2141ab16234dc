#include "lctune/antenna.hpp"
#include "lctune/error.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lctune;

TEST(Antenna, ResonantFrequency) {
    EXPECT_NEAR(resonant_frequency(1e-9, 1e-12), 1.0 / (2 * M_PI * std::sqrt(1e-21)), 1e-3);
    EXPECT_THROW(resonant_frequency(0.0, 1e-12), DomainError);
}

TEST(Antenna, CalibrationHitsBothAnchors) {
    const auto m = calibrate(8.0, 4.15e9, 47.1, 3.09e9);
    EXPECT_NEAR(frequency_from_eps(m, 8.0), 4.15e9, 1e-5);
    EXPECT_NEAR(frequency_from_eps(m, 47.1), 3.09e9, 1e-5);
    EXPECT_LT(frequency_from_eps(m, 30.0), frequency_from_eps(m, 20.0));
    EXPECT_THROW(calibrate(47.1, 4.15e9, 8.0, 3.09e9), CalibrationError);
    EXPECT_THROW(calibrate(8.0, 3.0e9, 47.1, 3.09e9), CalibrationError);
    EXPECT_THROW(frequency_from_eps(m, -1.0), DomainError);
}

TEST(Antenna, BandwidthOfTheSeriesBranch) {
    const auto m = calibrate(8.0, 4.15e9, 47.1, 3.09e9);
    for (const double eps : {14.0, 20.0, 32.0}) {
        const double f0 = frequency_from_eps(m, eps);
        std::vector<double> f;
        for (int i = 0; i <= 20000; ++i) f.push_back(f0 * (0.98 + 0.04 * i / 20000.0));
        // |S11|^2 = 0.1 where Q (u - 1/u) = +-2/3.
        EXPECT_NEAR(bandwidth_minus10db(s11_curve(m, eps, f)), 2.0 * f0 / (3.0 * m.q_factor), 2e3);
    }
    EXPECT_NEAR(bandwidth_minus10db(s11_curve(m, 20.0, [] {
                    std::vector<double> f;
                    for (int i = 0; i <= 3000; ++i) f.push_back(3.0e9 + 1.5e9 * i / 3000.0);
                    return f;
                }())),
                17e6, 0.1e6);
}

TEST(Antenna, BandwidthErrors) {
    const auto m = calibrate(8.0, 4.15e9, 47.1, 3.09e9);
    EXPECT_THROW(bandwidth_minus10db(s11_curve(m, 20.0, {1e9, 2e9})), DomainError);
    EXPECT_THROW(s11_curve(m, 20.0, {2e9, 1e9}), InputError);
}

TEST(Antenna, BandCoverageInterpolates) {
    const std::vector<TuningRow> rows{{0.0, 8.0, 4.0e9}, {1.0, 20.0, 3.6e9}, {2.0, 40.0, 3.2e9}};
    const auto b = band_coverage(rows, 3.3e9, 3.8e9);
    ASSERT_TRUE(b.covered);
    EXPECT_NEAR(b.v_low, 0.5, 1e-12);
    EXPECT_NEAR(b.v_high, 1.75, 1e-12);
    EXPECT_FALSE(band_coverage(rows, 3.0e9, 3.8e9).covered);
}

TEST(Spiral, EndpointsFollowTheRadii) {
    SpiralParams p;
    const auto path = spiral_path(p, 64);
    ASSERT_EQ(path.size(), 193u);
    EXPECT_NEAR(std::hypot(path.front().x, path.front().y), p.r0, 1e-15);
    EXPECT_NEAR(std::hypot(path.back().x, path.back().y), p.r1, 1e-12);
    p.form = SpiralForm::exponential;
    const auto e = spiral_path(p, 64);
    EXPECT_NEAR(std::hypot(e.back().x, e.back().y), p.r1, 1e-12);
    p.r1 = p.r0;
    EXPECT_THROW(spiral_path(p), InputError);
    EXPECT_GT(spiral_inductance_estimate(SpiralParams{}), 0.0);
}
