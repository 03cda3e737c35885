#include <gtest/gtest.h>

#include <random>

#include "chewseg/error.hpp"
#include "chewseg/peaks.hpp"
#include "oracles.hpp"

using namespace chewseg;

namespace {

std::vector<double> times(std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * 0.05;
    return t;
}

std::vector<Peak> peaks_of(const std::vector<double>& x, double min_prom = kDefaultMinProminence) {
    return find_prominent_peaks(x, times(x.size()), min_prom);
}

}  // namespace

TEST(Peaks, FlatSignalHasNoPeaks) { EXPECT_TRUE(peaks_of({5, 5, 5, 5}).empty()); }

TEST(Peaks, SingleSummit) {
    const auto p = peaks_of({0, 10, 0}, 4.5);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0].index, 1u);
    EXPECT_DOUBLE_EQ(p[0].prominence, 10.0);
    EXPECT_DOUBLE_EQ(p[0].height, 10.0);
}

TEST(Peaks, SmallBumpsBesideTallPeakAreRejected) {
    const std::vector<double> x{0, 3, 1, 8, 1, 3, 0};
    const auto p = peaks_of(x, 4.5);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0].index, 3u);
    EXPECT_DOUBLE_EQ(p[0].prominence, 8.0);
    // each 3-bump is separated from the 8 by a saddle at 1, so it rises 2
    // above its higher base (1), not 3
    const auto prom = prominences(x);
    EXPECT_DOUBLE_EQ(prom[1], 2.0);
    EXPECT_DOUBLE_EQ(prom[5], 2.0);
}

TEST(Peaks, PlateauResolvesToLeftmostSample) {
    const auto m = local_maxima(std::vector<double>{0, 4, 4, 4, 0});
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m[0], 1u);
    // a shoulder that keeps rising is not a peak
    EXPECT_TRUE(local_maxima(std::vector<double>{0, 4, 4, 5}).empty());
}

TEST(Peaks, EndpointsAreNeverPeaks) {
    EXPECT_TRUE(peaks_of({10, 0, 0, 10}, 1.0).empty());
    EXPECT_TRUE(local_maxima(std::vector<double>{9, 9, 1}).empty());
}

TEST(Peaks, InputErrors) {
    EXPECT_THROW(find_prominent_peaks(std::vector<double>{0, 1, 0}, std::vector<double>{0, 1}, 1.0), InvalidArgument);
    EXPECT_THROW(find_prominent_peaks(std::vector<double>{0, 1}, std::vector<double>{0, 1}, 1.0), InvalidArgument);
    EXPECT_THROW(peaks_of({0, 1, 0}, 0.0), InvalidArgument);
}

TEST(Peaks, ProminenceMatchesNaiveScan) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 3 + rng() % 40;
        std::vector<double> x(n);
        // small integer alphabet forces plenty of ties and plateaus
        for (auto& v : x) v = static_cast<double>(rng() % 6);
        const auto maxima = local_maxima(x);
        ASSERT_EQ(maxima, oracle::local_maxima_naive(x)) << "trial " << trial;
        const auto prom = prominences(x);
        for (auto i : maxima) ASSERT_DOUBLE_EQ(prom[i], oracle::prominence_naive(x, i)) << "trial " << trial << " i " << i;
    }
}

TEST(Peaks, OffsetScaleAndThresholdProperties) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 4.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(200);
        for (auto& v : x) v = g(rng);
        const auto base = peaks_of(x, 3.0);

        auto shifted = x;
        for (auto& v : shifted) v += 123.25;
        const auto ps = peaks_of(shifted, 3.0);
        ASSERT_EQ(ps.size(), base.size());
        for (std::size_t i = 0; i < ps.size(); ++i) {
            EXPECT_EQ(ps[i].index, base[i].index);
            EXPECT_NEAR(ps[i].prominence, base[i].prominence, 1e-9);
        }

        auto scaled = x;
        for (auto& v : scaled) v *= 2.0;
        const auto pk = peaks_of(scaled, 6.0);
        ASSERT_EQ(pk.size(), base.size());
        for (std::size_t i = 0; i < pk.size(); ++i) EXPECT_DOUBLE_EQ(pk[i].prominence, 2.0 * base[i].prominence);

        const auto higher = peaks_of(x, 5.0);
        EXPECT_LE(higher.size(), base.size());
        const auto maxima = local_maxima(x);
        for (const auto& p : base) {
            EXPECT_TRUE(std::find(maxima.begin(), maxima.end(), p.index) != maxima.end());
            EXPECT_GE(p.prominence, 3.0);
            EXPECT_LE(p.prominence, p.height - *std::min_element(x.begin(), x.end()) + 1e-12);
        }
        for (const auto& p : higher) {
            EXPECT_TRUE(std::any_of(base.begin(), base.end(), [&](const Peak& q) { return q.index == p.index; }));
        }
        EXPECT_EQ(count_prominent_peaks(x, 3.0), base.size());
    }
}

TEST(Peaks, CsvRoundTrip) {
    std::vector<double> x{0, 10, 0, 7, 0};
    auto t = times(x.size());
    for (auto& v : t) v += 1'700'000'000.0;
    const auto p = find_prominent_peaks(x, t, 4.5);
    const auto back = parse_peaks_csv(format_peaks_csv(p));
    ASSERT_EQ(back.size(), p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        EXPECT_DOUBLE_EQ(back[i].t, p[i].t);
        EXPECT_DOUBLE_EQ(back[i].height, p[i].height);
        EXPECT_DOUBLE_EQ(back[i].prominence, p[i].prominence);
    }
}
