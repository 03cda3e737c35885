#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chewseg/derived_signals.hpp"
#include "chewseg/error.hpp"

using namespace chewseg;

namespace {

Quaternion axis_angle(double ax, double ay, double az, double deg) {
    const double h = deg * std::numbers::pi / 360.0;
    const double n = std::sqrt(ax * ax + ay * ay + az * az);
    return {std::cos(h), std::sin(h) * ax / n, std::sin(h) * ay / n, std::sin(h) * az / n};
}

Quaternion random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    return Quaternion{g(rng), g(rng), g(rng), g(rng)}.normalized();
}

}  // namespace

TEST(Lfa, ClosedFormRotations) {
    EXPECT_DOUBLE_EQ(lean_forward_angle({1, 0, 0, 0}), 0.0);
    const double s = std::sqrt(0.5);
    EXPECT_NEAR(lean_forward_angle({s, s, 0, 0}), 90.0, 1e-9);
    EXPECT_DOUBLE_EQ(lean_forward_angle({0, 1, 0, 0}), 180.0);
    EXPECT_NEAR(lean_forward_angle(axis_angle(0, 1, 0, 37.0)), 37.0, 1e-9);
}

TEST(Lfa, NonUnitIsNormalizedZeroThrows) {
    EXPECT_NEAR(lean_forward_angle({2, 2, 0, 0}), 90.0, 1e-9);
    EXPECT_THROW(lean_forward_angle({0, 0, 0, 0}), InvalidArgument);
}

TEST(Lfa, SignFlipAndYawInvariance) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> yaw(-180, 180);
    for (int i = 0; i < 1000; ++i) {
        const auto q = random_unit(rng);
        const double a = lean_forward_angle(q);
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, 180.0);
        EXPECT_NEAR(lean_forward_angle(-q), a, 1e-9);
        const auto z = axis_angle(0, 0, 1, yaw(rng));
        EXPECT_NEAR(lean_forward_angle(q * z), a, 1e-9);
        EXPECT_NEAR(lean_forward_angle(z * q), a, 1e-9);
    }
}

TEST(Energy, SumOfSquares) {
    EXPECT_DOUBLE_EQ(energy({0, 0, 0}), 0.0);
    EXPECT_DOUBLE_EQ(energy({1, 2, 2}), 9.0);
    EXPECT_DOUBLE_EQ(energy({-3, 4, 0}), 25.0);
}

TEST(Energy, RotationInvariant) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (int i = 0; i < 500; ++i) {
        const Vec3 a{g(rng), g(rng), g(rng)};
        const auto q = random_unit(rng);
        const auto r = q * Quaternion{0, a.x, a.y, a.z} * Quaternion{q.w, -q.x, -q.y, -q.z};
        EXPECT_NEAR(energy({r.x, r.y, r.z}), energy(a), 1e-9);
    }
}

TEST(Derive, SingleFrame) {
    Session s;
    s.frames.push_back({1.0, 50.0, 200.0, {1, 0, 0, 0}, {0, 0, 1}});
    const auto d = derive(s);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_DOUBLE_EQ(d.lfa[0], 0.0);
    EXPECT_DOUBLE_EQ(d.energy[0], 1.0);
    EXPECT_DOUBLE_EQ(d.prox[0], 50.0);
    EXPECT_DOUBLE_EQ(d.ambient[0], 200.0);
    EXPECT_THROW(derive(Session{}), InvalidArgument);
}

TEST(Derive, RampIsMonotoneAndShapesMatch) {
    Session s;
    const int n = 301;
    for (int i = 0; i < n; ++i) {
        SensorFrame f;
        f.t = 1000.0 + i * 0.05;
        f.q = axis_angle(1, 0, 0, 30.0 * i / (n - 1));
        f.accel = {0.1 * i, 0, 1};
        s.frames.push_back(f);
    }
    const auto d = derive(s);
    ASSERT_EQ(d.t.size(), static_cast<std::size_t>(n));
    ASSERT_EQ(d.prox.size(), d.t.size());
    ASSERT_EQ(d.ambient.size(), d.t.size());
    ASSERT_EQ(d.lfa.size(), d.t.size());
    ASSERT_EQ(d.energy.size(), d.t.size());
    EXPECT_NEAR(d.lfa.front(), 0.0, 1e-5);
    EXPECT_NEAR(d.lfa.back(), 30.0, 1e-9);
    for (int i = 1; i < n; ++i) {
        EXPECT_GT(d.lfa[i], d.lfa[i - 1]);
        EXPECT_NEAR(d.lfa[i], 30.0 * i / (n - 1), 1e-5);
        EXPECT_NEAR(d.energy[i], 0.01 * i * i + 1.0, 1e-9);
    }
    // deterministic
    const auto again = derive(s);
    EXPECT_EQ(again.lfa, d.lfa);
    EXPECT_EQ(again.energy, d.energy);
}

TEST(Derive, CsvRoundTrip) {
    Session s;
    for (int i = 0; i < 5; ++i) s.frames.push_back({1'700'000'000.0 + i * 0.05, 10.0 * i, 300, {1, 0, 0, 0}, {0, 0, 1}});
    const auto d = derive(s);
    const auto back = parse_derived_csv(format_derived_csv(d));
    ASSERT_EQ(back.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_NEAR(back.t[i], d.t[i], 1e-6);
        EXPECT_NEAR(back.prox[i], d.prox[i], 1e-9);
        EXPECT_NEAR(back.lfa[i], d.lfa[i], 1e-6);
    }
}
