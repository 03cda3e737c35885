#include <gtest/gtest.h>

#include "chewseg/derived_signals.hpp"
#include "chewseg/error.hpp"
#include "chewseg/pipeline.hpp"
#include "chewseg/synth.hpp"

using namespace chewseg;

namespace {

ScenarioSpec one_meal(double noise_prox = 0.0) {
    ScenarioSpec s;
    s.duration = 600.0;
    s.meals.push_back({60.0, 3, 1.5, 8.0});
    s.noise.prox = noise_prox;
    s.seed = 5;
    return s;
}

// Model trained once on clean days, reused to probe other scenarios.
const TrainedModel& clean_model() {
    static const TrainedModel model = [] {
        const PipelineConfig cfg;
        std::vector<ProcessedSession> ps;
        for (int i = 0; i < 2; ++i) ps.push_back(process_session(generate(preset("clean", 200 + i, "t" + std::to_string(i))).session, cfg));
        std::vector<const ProcessedSession*> ptrs;
        for (const auto& p : ps) ptrs.push_back(&p);
        return train_model(ptrs, cfg);
    }();
    return model;
}

}  // namespace

TEST(Synth, SameSeedSameBytes) {
    const auto a = generate(preset("medium", 9));
    const auto b = generate(preset("medium", 9));
    EXPECT_EQ(format_sensor_csv(a.session.frames), format_sensor_csv(b.session.frames));
    EXPECT_EQ(format_label_csv(a.labels), format_label_csv(b.labels));
    const auto c = generate(preset("medium", 10));
    EXPECT_NE(format_sensor_csv(a.session.frames), format_sensor_csv(c.session.frames));
}

TEST(Synth, ShapeAndMetadata) {
    const auto r = generate(preset("clean", 1, "p07"));
    EXPECT_EQ(r.session.frames.size(), 7200u * 20u);
    EXPECT_EQ(r.session.meta.participant, "p07");
    EXPECT_EQ(r.session.gaps.count, 0u);
    for (std::size_t i = 1; i < 200; ++i) EXPECT_NEAR(r.session.frames[i].t - r.session.frames[i - 1].t, 0.05, 1e-6);
    EXPECT_EQ(r.session.labels.size(), r.labels.size());
}

TEST(Synth, LabelsObeyIntervalInvariants) {
    for (const char* name : {"clean", "medium", "dark"}) {
        const auto r = generate(preset(name, 4));
        const auto chews = labels_of_kind(r.labels, IntervalKind::ChewingSequence);
        const auto eps = labels_of_kind(r.labels, IntervalKind::EatingEpisode);
        EXPECT_EQ(chews.size(), 18u);
        EXPECT_EQ(eps.size(), 3u) << name;
        for (std::size_t i = 0; i < chews.size(); ++i) {
            EXPECT_LT(chews[i].start, chews[i].end);
            EXPECT_GE(chews[i].start, r.session.start_time());
            EXPECT_LE(chews[i].end, r.session.end_time());
            if (i) EXPECT_LT(chews[i - 1].end, chews[i].start);
        }
        EXPECT_EQ(derive_episode_labels(chews), eps);
    }
}

TEST(Synth, ZeroMeals) {
    const auto r = generate(preset("empty", 2));
    EXPECT_TRUE(r.labels.empty());
    const PipelineConfig cfg;
    const auto p = predict_session(process_session(r.session, cfg), clean_model(), cfg);
    EXPECT_TRUE(p.episodes.empty());
}

TEST(Synth, WalkingOnlyPredictsNothing) {
    const auto r = generate(preset("walking", 2));
    EXPECT_TRUE(r.labels.empty());
    const auto tr = derive(r.session);
    // energy oscillates while walking, proximity stays near flat
    const std::size_t a = 600 * 20, b = 900 * 20;
    double lo = 1e9, hi = -1e9;
    for (std::size_t i = a; i < b; ++i) {
        lo = std::min(lo, tr.energy[i]);
        hi = std::max(hi, tr.energy[i]);
    }
    EXPECT_GT(hi - lo, 0.5);
    const PipelineConfig cfg;
    const auto p = predict_session(process_session(r.session, cfg), clean_model(), cfg);
    EXPECT_TRUE(p.episodes.empty());
    EXPECT_TRUE(p.seconds.empty());
}

TEST(Synth, NoiselessChewsAreRecoveredAtTheirRate) {
    const auto r = generate(one_meal());
    const auto tr = derive(r.session);
    const auto peaks = find_prominent_peaks(tr.prox, tr.t);
    for (const auto& l : labels_of_kind(r.labels, IntervalKind::ChewingSequence)) {
        std::vector<double> inside;
        for (const auto& p : peaks) {
            if (p.t >= l.start - 0.051 && p.t <= l.end + 0.051) inside.push_back(p.t);
        }
        ASSERT_GE(inside.size(), 10u);
        EXPECT_NEAR(inside.front(), l.start, 0.051);
        EXPECT_NEAR(inside.back(), l.end, 0.051);
        for (std::size_t i = 1; i < inside.size(); ++i) {
            const double gap = inside[i] - inside[i - 1];
            EXPECT_GE(gap, 12 * 0.05 - 1e-6);  // 1.5 Hz is 13.3 samples
            EXPECT_LE(gap, 14 * 0.05 + 1e-6);
        }
        // the band sweep finds the whole train as one candidate
        const auto cands = segment(peaks, {0.4, 1.5, 0.2}, 3);
        const bool whole = std::any_of(cands.begin(), cands.end(), [&](const auto& c) {
            return c.c1 == inside.front() && c.c2 == inside.back() && c.length == inside.size() - 1;
        });
        EXPECT_TRUE(whole);
    }
}

TEST(Synth, PlantedGapsAreEpsilonPeriodic) {
    const auto r = generate(preset("clean", 8));
    const auto tr = derive(r.session);
    const auto peaks = find_prominent_peaks(tr.prox, tr.t);
    for (const auto& l : labels_of_kind(r.labels, IntervalKind::ChewingSequence)) {
        double gmin = 1e9, gmax = 0;
        double prev = -1;
        for (const auto& p : peaks) {
            if (p.t < l.start - 1e-6 || p.t > l.end + 1e-6) continue;
            if (prev >= 0) {
                gmin = std::min(gmin, p.t - prev);
                gmax = std::max(gmax, p.t - prev);
            }
            prev = p.t;
        }
        ASSERT_LT(gmin, 1e9);
        EXPECT_LT(gmax / gmin, 1.2 + 1e-9);
        EXPECT_GE(gmin, 0.4);
        EXPECT_LE(gmax, 1.5);
    }
}

TEST(Synth, SpecValidation) {
    auto s = one_meal();
    s.meals.push_back({80.0, 2, 1.5, 8.0});
    EXPECT_THROW(generate(s), InvalidArgument);
    auto t = one_meal();
    t.meals[0].chew_rate = 3.0;
    EXPECT_THROW(generate(t), InvalidArgument);
    auto u = one_meal();
    u.meals[0].start = 550.0;
    EXPECT_THROW(generate(u), InvalidArgument);
    EXPECT_THROW(preset("banquet", 1), InvalidArgument);
}

TEST(Synth, ScenarioTextRoundTrips) {
    auto s = preset("medium", 3, "p09");
    const auto back = ScenarioSpec::parse(s.to_text());
    EXPECT_EQ(back.to_text(), s.to_text());
    EXPECT_EQ(format_sensor_csv(generate(back).session.frames), format_sensor_csv(generate(s).session.frames));
    EXPECT_THROW(ScenarioSpec::parse("duratoin = 100\n"), Error);
    const auto parsed = ScenarioSpec::parse(
        "duration = 900\nseed = 4\nmeal = 100 2 1.2 9\nconfounder = talking 500 100\n");
    ASSERT_EQ(parsed.meals.size(), 1u);
    EXPECT_EQ(parsed.confounders.at(0).kind, ConfounderKind::Talking);
}
