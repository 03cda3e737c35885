#include <gtest/gtest.h>

#include <random>

#include "chewseg/episodes.hpp"
#include "chewseg/error.hpp"
#include "oracles.hpp"

using namespace chewseg;

namespace {

CandidateSubsequence cand(double c1, double c2) {
    CandidateSubsequence c;
    c.c1 = c1;
    c.c2 = c2;
    c.length = 3;
    return c;
}

std::vector<SecondScore> run(std::int64_t from, std::int64_t to, int score = 1) {
    std::vector<SecondScore> out;
    for (auto s = from; s <= to; ++s) out.push_back({s, score});
    return out;
}

Cluster range(std::int64_t from, std::int64_t to) {
    Cluster c;
    for (auto s = from; s <= to; ++s) c.push_back(s);
    return c;
}

}  // namespace

TEST(ScoreSeconds, CoverageOfOneCandidate) {
    const auto s = score_seconds({cand(10.2, 13.8)});
    EXPECT_EQ(s, (std::vector<SecondScore>{{10, 1}, {11, 1}, {12, 1}, {13, 1}}));
}

TEST(ScoreSeconds, IdenticalCandidatesAdd) {
    const auto s = score_seconds({cand(10.2, 13.8), cand(10.2, 13.8)});
    EXPECT_EQ(s, (std::vector<SecondScore>{{10, 2}, {11, 2}, {12, 2}, {13, 2}}));
}

TEST(ScoreSeconds, OverlappingCandidates) {
    const auto s = score_seconds({cand(0, 10), cand(5, 15)});
    ASSERT_EQ(s.size(), 16u);
    for (const auto& x : s) EXPECT_EQ(x.score, (x.second >= 5 && x.second <= 10) ? 2 : 1) << x.second;
    EXPECT_TRUE(score_seconds({}).empty());
}

TEST(ScoreSeconds, MassEqualsSumOfCoveredSeconds) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> start(1'700'000'000.0, 1'700'000'600.0), len(0.5, 40.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<CandidateSubsequence> cs;
        std::int64_t expected = 0;
        for (int i = 0; i < 20; ++i) {
            const double a = start(rng);
            const double b = a + len(rng);
            cs.push_back(cand(a, b));
            expected += static_cast<std::int64_t>(std::floor(b)) - static_cast<std::int64_t>(std::floor(a)) + 1;
        }
        std::int64_t mass = 0;
        const auto s = score_seconds(cs);
        for (std::size_t i = 0; i < s.size(); ++i) {
            mass += s[i].score;
            EXPECT_GE(s[i].score, 1);
            if (i) EXPECT_LT(s[i - 1].second, s[i].second);
        }
        EXPECT_EQ(mass, expected);
    }
}

TEST(Dbscan, SingleSecondIsNoise) {
    EXPECT_TRUE(cluster({{100, 1}}, {30.0, 2, true}).empty());
}

TEST(Dbscan, DenseRunIsOneCluster) {
    const auto c = cluster(run(0, 59), {5.0, 3, true});
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0], range(0, 59));
}

TEST(Dbscan, FarApartRunsStaySeparate) {
    auto pts = run(0, 59);
    const auto second = run(59 + 50, 59 + 50 + 59);
    pts.insert(pts.end(), second.begin(), second.end());
    const DbscanConfig cfg{5.0, 3, true};
    const auto c = cluster(pts, cfg);
    EXPECT_EQ(c.size(), 2u);
    EXPECT_EQ(oracle::as_set(c), oracle::dbscan_naive(pts, cfg));
}

TEST(Dbscan, DefaultsDropAnIsolatedShortCandidate) {
    const DbscanConfig cfg;
    EXPECT_TRUE(cluster(score_seconds({cand(500.1, 502.9)}), cfg).empty());
    const auto bout = cluster(score_seconds({cand(1000.0, 1030.0)}), cfg);
    ASSERT_EQ(bout.size(), 1u);
    EXPECT_EQ(bout[0], range(1000, 1030));
}

TEST(Dbscan, ScoreWeightingCountsMultiplicity) {
    // five seconds with score 3: weighted mass 15, unweighted 5
    const auto pts = run(0, 4, 3);
    EXPECT_EQ(cluster(pts, {30.0, 15, true}).size(), 1u);
    EXPECT_TRUE(cluster(pts, {30.0, 15, false}).empty());
}

TEST(Dbscan, BorderJoinsNearestCoreEarlierOnTie) {
    // two core groups 20 s apart with a lone point in the middle: eps 10
    // makes it a border of both, equidistant -> joins the earlier group
    std::vector<SecondScore> pts{{0, 5}, {1, 5}, {2, 5}, {12, 1}, {22, 5}, {23, 5}, {24, 5}};
    const DbscanConfig cfg{10.0, 15, true};
    const auto c = cluster(pts, cfg);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[0], (Cluster{0, 1, 2, 12}));
    EXPECT_EQ(c[1], (Cluster{22, 23, 24}));
    EXPECT_EQ(oracle::as_set(c), oracle::dbscan_naive(pts, cfg));
}

TEST(Dbscan, MatchesNaiveOracle) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        std::set<std::int64_t> secs;
        const int n = static_cast<int>(rng() % 120);
        const std::int64_t span = 50 + static_cast<std::int64_t>(rng() % 800);
        for (int i = 0; i < n; ++i) secs.insert(static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(span)));
        std::vector<SecondScore> pts;
        for (auto s : secs) pts.push_back({s, 1 + static_cast<int>(rng() % 4)});
        DbscanConfig cfg;
        cfg.eps = 1.0 + static_cast<double>(rng() % 40);
        cfg.min_pts = 1 + static_cast<int>(rng() % 20);
        cfg.use_score_weight = rng() % 2;
        ASSERT_EQ(oracle::as_set(cluster(pts, cfg)), oracle::dbscan_naive(pts, cfg)) << "trial " << trial;
    }
}

TEST(Dbscan, InvariantsAndOrder) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        std::set<std::int64_t> secs;
        for (int i = 0; i < 150; ++i) secs.insert(static_cast<std::int64_t>(rng() % 1500));
        std::vector<SecondScore> pts;
        for (auto s : secs) pts.push_back({s, 1 + static_cast<int>(rng() % 3)});
        const DbscanConfig cfg{20.0, 6, true};
        const auto base = cluster(pts, cfg);
        // every clustered second was scored, and clusters are disjoint
        std::set<std::int64_t> seen;
        std::size_t total = 0;
        for (const auto& c : base) {
            for (auto s : c) {
                EXPECT_TRUE(secs.count(s));
                seen.insert(s);
                ++total;
            }
        }
        EXPECT_EQ(seen.size(), total);
        // order of the input does not matter
        auto shuffled = pts;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        EXPECT_EQ(oracle::as_set(cluster(shuffled, cfg)), oracle::as_set(base));
        // raising min_pts never adds clustered seconds
        std::size_t prev = total;
        for (int m = 7; m <= 30; m += 3) {
            std::size_t count = 0;
            for (const auto& c : cluster(pts, {20.0, m, true})) count += c.size();
            EXPECT_LE(count, prev);
            prev = count;
        }
    }
}

TEST(Dbscan, ConfigValidation) {
    EXPECT_THROW(cluster({}, {0.0, 3, true}), InvalidArgument);
    EXPECT_THROW(cluster({}, {5.0, 0, true}), InvalidArgument);
}

TEST(Episodes, MergeWithinDelta) {
    const std::vector<Cluster> cs{range(100, 160), range(400, 460)};
    EXPECT_EQ(episodes_from_clusters(cs, 900.0), (std::vector<TimeInterval>{{100, 461}}));
    EXPECT_EQ(episodes_from_clusters(cs, 100.0), (std::vector<TimeInterval>{{100, 161}, {400, 461}}));
    EXPECT_TRUE(episodes_from_clusters({}, 900.0).empty());
}

TEST(Episodes, BuildReportsCountsAndPeak) {
    std::vector<SecondScore> scores = run(100, 160);
    scores[10].score = 4;
    const auto eps = build_episodes({range(100, 160)}, scores, 900.0);
    ASSERT_EQ(eps.size(), 1u);
    EXPECT_DOUBLE_EQ(eps[0].start, 100.0);
    EXPECT_DOUBLE_EQ(eps[0].end, 161.0);
    EXPECT_EQ(eps[0].n_seconds, 61u);
    EXPECT_EQ(eps[0].peak_score, 4);
}

TEST(Episodes, CsvRoundTrips) {
    const auto eps = build_episodes({range(1'700'000'100, 1'700'000'160)}, run(1'700'000'100, 1'700'000'160), 900.0);
    const auto back = parse_episodes_csv(format_episodes_csv("p03", eps));
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].participant, "p03");
    EXPECT_DOUBLE_EQ(back[0].episode.start, eps[0].start);
    EXPECT_DOUBLE_EQ(back[0].episode.end, eps[0].end);
    EXPECT_EQ(back[0].episode.n_seconds, eps[0].n_seconds);
    const auto scores = run(5, 9, 2);
    EXPECT_EQ(parse_seconds_csv(format_seconds_csv(scores)), scores);
}
