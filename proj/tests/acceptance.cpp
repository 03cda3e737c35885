// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "chewseg/data_model.hpp"
#include "chewseg/derived_signals.hpp"
#include "chewseg/evaluation.hpp"
#include "chewseg/features.hpp"
#include "chewseg/gbtree.hpp"
#include "chewseg/periodic.hpp"
#include "chewseg/synth.hpp"
#include "oracles.hpp"

using namespace chewseg;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Outcome dp_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> gap(0.05, 1.6), lo(0.2, 1.2), width(0.0, 0.6);
    int mismatches = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = rng() % 11;
        std::vector<double> t;
        double x = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x += gap(rng);
            t.push_back(std::round(x * 20.0) / 20.0 + static_cast<double>(i) * 1e-3);
        }
        const double p_min = std::round(lo(rng) * 20.0) / 20.0;
        const double p_max = p_min + std::round(width(rng) * 20.0) / 20.0;
        const auto got = longest_abs_periodic(t, p_min, p_max);
        const std::size_t len = got.empty() ? 0 : got.front().length();
        if (len != oracle::longest_periodic_brute_force(t, p_min, p_max).length) ++mismatches;
    }
    const double el = seconds_since(t0);
    return {mismatches == 0 && el < 10.0, fmt("%.0f mismatches in 2000 arrays, %.2f s", mismatches, el)};
}

Outcome worked_example() {
    const std::vector<double> t{0, 0.8, 0.9, 1.9};
    const auto r = longest_abs_periodic(t, 0.9, 1.1);
    const bool ok = r.size() == 1 && r[0].length() == 2 && r[0].timestamps == std::vector<double>{0, 0.9, 1.9};
    return {ok, ok ? "(0, 0.9, 1.9), length 2" : "unexpected optimum"};
}

Outcome dp_linearity() {
    auto make = [](std::size_t n, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> gap(0.25, 0.75);
        std::vector<double> t(n);
        double x = 0;
        for (auto& v : t) {
            x += gap(rng);
            v = std::round(x * 1000.0) / 1000.0;
        }
        return t;
    };
    // A fresh train per repetition: replaying one input lets the branch
    // predictor learn it, which flatters the small size far more than the large.
    auto best_of_5 = [&](std::size_t n) {
        double best = 1e300;
        for (int rep = 0; rep < 5; ++rep) {
            const auto t = make(n, n * 10 + static_cast<std::uint64_t>(rep));
            const auto t0 = Clock::now();
            const auto r = longest_abs_periodic(t, 0.5, 0.6);
            const double el = seconds_since(t0);
            if (r.empty()) return -1.0;
            best = std::min(best, el);
        }
        return best;
    };
    best_of_5(10'000);  // warm-up
    const double a = best_of_5(10'000), b = best_of_5(100'000);
    const double ratio = b / a;
    return {a > 0 && ratio >= 7.0 && ratio <= 13.0, fmt("runtime ratio %.2f (%.2f ms vs %.2f ms)", ratio, b * 1e3, a * 1e3)};
}

Quaternion axis_angle(double ax, double ay, double az, double deg) {
    const double h = deg * std::numbers::pi / 360.0;
    return {std::cos(h), std::sin(h) * ax, std::sin(h) * ay, std::sin(h) * az};
}

Outcome lfa_identities() {
    double worst = 0.0;
    worst = std::max(worst, std::abs(lean_forward_angle({1, 0, 0, 0}) - 0.0));
    worst = std::max(worst, std::abs(lean_forward_angle(axis_angle(1, 0, 0, 90)) - 90.0));
    worst = std::max(worst, std::abs(lean_forward_angle({0, 1, 0, 0}) - 180.0));
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> yaw(-180, 180);
    for (int i = 0; i < 1000; ++i) {
        const auto q = Quaternion{g(rng), g(rng), g(rng), g(rng)}.normalized();
        const double a = lean_forward_angle(q);
        worst = std::max(worst, std::abs(lean_forward_angle(-q) - a));
        const auto z = axis_angle(0, 0, 1, yaw(rng));
        worst = std::max(worst, std::abs(lean_forward_angle(q * z) - a));
        worst = std::max(worst, std::abs(lean_forward_angle(z * q) - a));
    }
    return {worst <= 1e-9, fmt("max deviation %.3g deg", worst)};
}

Outcome feature_contract() {
    const auto rec = generate(preset("medium", 21));
    const auto trace = derive(rec.session);
    auto offset = trace;
    for (auto& v : offset.prox) v += 250.0;
    auto moved = trace;
    const double shift = 3.0 * 86400.0;  // whole days keep the hour
    for (auto& t : moved.t) t += shift;
    const auto layout = FeatureLayout::full();
    const LocalClock clock{rec.session.meta.utc_offset_s};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> start(trace.t.front() + 5, trace.t.back() - 80), len(2, 60);
    const char* invariant[] = {"var", "iqr", "skew", "kurt", "count_below_mean", "count_above_mean", "n_peaks"};
    int bad_len = 0, bad_finite = 0, bad_offset = 0, bad_shift = 0;
    for (int i = 0; i < 100; ++i) {
        CandidateSubsequence c;
        c.c1 = std::round(start(rng) * 1000.0) / 1000.0;
        c.c2 = std::round((c.c1 + len(rng)) * 1000.0) / 1000.0;
        c.p_min = 0.5;
        c.p_max = 0.6;
        c.epsilon = 0.2;
        c.length = 10;
        const auto a = extract(trace, c, clock);
        if (a.values.size() != 257) ++bad_len;
        for (double v : a.values) bad_finite += std::isfinite(v) ? 0 : 1;
        const auto b = extract(offset, c, clock);
        for (const char* w : {"cw", "bw"}) {
            for (const char* st : invariant) {
                const auto k = layout.index_of(std::string("prox_") + w + "_" + st);
                if (std::abs(a.values[k] - b.values[k]) > 1e-6 * std::max(1.0, std::abs(a.values[k]))) ++bad_offset;
            }
            for (double f : kSpectrumFrequencies) {
                char buf[48];
                std::snprintf(buf, sizeof buf, "prox_%s_fft_%.2fhz", w, f);
                const auto k = layout.index_of(buf);
                if (std::abs(a.values[k] - b.values[k]) > 1e-6) ++bad_offset;
            }
        }
        auto cm = c;
        cm.c1 += shift;
        cm.c2 += shift;
        if (extract(moved, cm, clock).values != a.values) ++bad_shift;
    }
    const bool ok = bad_len == 0 && bad_finite == 0 && bad_offset == 0 && bad_shift == 0;
    return {ok, fmt("100 windows: %.0f wrong length, %.0f non-finite, %.0f offset, %.0f translation violations", bad_len,
                    bad_finite, bad_offset, bad_shift)};
}

Outcome boosting_sanity() {
    TrainingSet d;
    for (double x : {-4.0, -3.0, -2.0, -1.0, 1.0, 2.0, 3.0, 4.0}) {
        d.rows.push_back({x});
        d.labels.push_back(x >= 0 ? 1 : 0);
    }
    BoostConfig cfg;
    cfg.max_depth = 1;
    cfg.n_rounds = 10;
    cfg.subsample = 1.0;
    const auto m = train(d, std::vector<std::string>{"x"}, cfg);
    int correct = 0;
    for (std::size_t i = 0; i < d.rows.size(); ++i) correct += (predict_proba_row(m, d.rows[i]) >= 0.5) == (d.labels[i] == 1);
    bool monotone = true;
    for (std::size_t i = 1; i < m.training_loss.size(); ++i) monotone = monotone && m.training_loss[i] <= m.training_loss[i - 1];
    const auto text = serialize_model(m);
    const bool round_trip = serialize_model(parse_model(text)) == text;
    return {correct == 8 && monotone && round_trip,
            fmt("accuracy %.3f, loss monotone %.0f, round-trip %.0f", correct / 8.0, monotone, round_trip)};
}

Outcome dbscan_oracle() {
    std::mt19937_64 rng(7);
    int mismatches = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::set<std::int64_t> secs;
        const int n = static_cast<int>(rng() % 150);
        const auto span = 50 + rng() % 900;
        for (int i = 0; i < n; ++i) secs.insert(static_cast<std::int64_t>(rng() % span));
        std::vector<SecondScore> pts;
        for (auto s : secs) pts.push_back({s, 1 + static_cast<int>(rng() % 4)});
        DbscanConfig cfg;
        cfg.eps = 1.0 + static_cast<double>(rng() % 40);
        cfg.min_pts = 1 + static_cast<int>(rng() % 20);
        cfg.use_score_weight = rng() % 2;
        if (oracle::as_set(cluster(pts, cfg)) != oracle::dbscan_naive(pts, cfg)) ++mismatches;
    }
    return {mismatches == 0, fmt("%.0f mismatches in 500 point sets", mismatches)};
}

Outcome metric_examples() {
    std::vector<std::string> failures;
    auto expect = [&](bool ok, const char* what) {
        if (!ok) failures.push_back(what);
    };
    auto secs = [](std::int64_t a, std::int64_t b) {
        std::set<std::int64_t> s;
        for (auto i = a; i <= b; ++i) s.insert(i);
        return s;
    };
    const std::vector<TimeInterval> truth{{0, 100}};
    auto m = per_second_metrics(secs(0, 99), truth);
    expect(m.precision == 1 && m.recall == 1 && m.f1 == 1, "identical seconds");
    m = per_second_metrics(secs(0, 49), truth);
    expect(m.precision == 1 && m.recall == 0.5 && std::abs(m.f1 - 2.0 / 3.0) < 1e-15, "half recall");
    auto two = secs(0, 49);
    for (auto s : secs(200, 249)) two.insert(s);
    m = per_second_metrics(two, truth);
    expect(m.precision == 0.5 && m.recall == 0.5 && m.f1 == 0.5, "half precision and recall");
    m = per_episode_metrics(truth, truth);
    expect(m.f1 == 1, "identical episodes");
    m = per_episode_metrics({{0, 50}}, truth, 0.5);
    expect(m.tp == 1 && m.recall == 1, "50% overlap counts");
    m = per_episode_metrics({{0, 100}, {500, 600}}, truth, 0.5);
    expect(m.precision == 0.5 && m.recall == 1 && std::abs(m.f1 - 2.0 / 3.0) < 1e-15, "extra false positive");
    const std::vector<TimeInterval> tr{{0, 100}, {300, 400}, {1000, 1300}, {2000, 2030}};
    const std::vector<TimeInterval> pr{{10, 90}, {350, 380}, {900, 1100}, {1250, 1500}, {5000, 5100}};
    double pp = 2, prr = 2;
    bool monotone = true;
    for (int k = 0; k <= 10; ++k) {
        const auto x = per_episode_metrics(pr, tr, k / 10.0);
        monotone = monotone && x.precision <= pp && x.recall <= prr;
        pp = x.precision;
        prr = x.recall;
    }
    expect(monotone, "threshold monotonicity");
    std::string detail = failures.empty() ? "6 examples exact, monotone over 11 thresholds" : "failed:";
    for (const auto& f : failures) detail += " " + f + ";";
    return {failures.empty(), detail};
}

std::vector<Session> corpus(const std::string& name, int n) {
    std::vector<Session> out;
    for (int i = 0; i < n; ++i) out.push_back(generate(preset(name, 100 + i, "p0" + std::to_string(i))).session);
    return out;
}

Outcome end_to_end() {
    const auto t0 = Clock::now();
    const PipelineConfig cfg;
    const auto clean = losocv(corpus("clean", 4), cfg);
    const auto medium = losocv(corpus("medium", 5), cfg);
    const double el = seconds_since(t0);
    const bool ok = clean.mean_second.f1 >= 0.90 && clean.mean_episode.f1 == 1.0 && medium.mean_episode.f1 >= 0.8 && el < 60.0;
    return {ok, fmt("clean second F1 %.4f, episode F1 %.4f; medium episode F1 %.4f; %.1f s", clean.mean_second.f1,
                    clean.mean_episode.f1, medium.mean_episode.f1, el)};
}

Outcome ablation_direction() {
    const auto sessions = corpus("medium", 5);
    const PipelineConfig cfg;
    const auto all = losocv(sessions, cfg);
    const auto prox = ablate_sensors(sessions, cfg, SensorSubset::parse("prox"));
    return {all.mean_second.f1 >= prox.mean_second.f1,
            fmt("all sensors %.4f vs proximity only %.4f (second F1); episode %.4f vs %.4f", all.mean_second.f1,
                prox.mean_second.f1, all.mean_episode.f1, prox.mean_episode.f1)};
}

Outcome delta_plateau() {
    std::vector<LabeledInterval> chews;
    for (int i = 0; i < 6; ++i) {
        const auto rec = generate(preset("clean", 300 + i, "p0" + std::to_string(i)));
        for (const auto& l : labels_of_kind(rec.labels, IntervalKind::ChewingSequence)) chews.push_back(l);
    }
    const auto cdf = pooled_gap_cdf(chews);
    const double mass = cdf_at(cdf, 1100.0 - 1e-9) - cdf_at(cdf, 540.0);
    std::map<std::string, std::vector<LabeledInterval>> by;
    for (const auto& c : chews) by[c.participant].push_back(c);
    bool invariant = true;
    for (const auto& [p, list] : by) {
        const auto ref = derive_episode_labels(list, 540.0);
        for (double delta : {600.0, 700.0, 800.0, 900.0, 1000.0, 1099.0}) invariant = invariant && derive_episode_labels(list, delta) == ref;
    }
    return {mass == 0.0 && invariant,
            fmt("gap mass in [540, 1100) = %.3f over %.0f gaps, episodes invariant %.0f", mass,
                static_cast<double>(chews.size() - by.size()), invariant)};
}

Outcome non_target_schema() {
    // Headline study numbers need the unreleased dataset and are not targets.
    // The harness must read that dataset's schema unchanged.
    const auto dir = std::filesystem::temp_directory_path() / "chewseg_acceptance_schema";
    std::filesystem::create_directories(dir);
    {
        std::ofstream s(dir / "p01.sensor.csv");
        s << "t_ms,prox,ambient,qw,qx,qy,qz,ax,ay,az\n";
        for (int i = 0; i < 40; ++i) s << 1'700'000'000'000 + i * 50 << ",120,310,1,0,0,0,0.01,0.02,0.99\n";
        std::ofstream l(dir / "labels.csv");
        l << "participant,kind,start_s,end_s\np01,chew,1700000000.5,1700000001.5\np01,episode,1700000000.5,1700000001.5\n";
    }
    auto s = ingest_sensor_csv(dir / "p01.sensor.csv");
    s.meta.participant = "p01";
    attach_labels(s, ingest_label_csv(dir / "labels.csv"));
    std::filesystem::remove_all(dir);
    const bool ok = s.frames.size() == 40 && s.labels.size() == 2 && s.gaps.count == 0;
    return {ok, "declared non-target (needs the unreleased study data); sensor/label schema ingests unchanged"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"DP matches exhaustive search", dp_oracle},
        {"worked DP example", worked_example},
        {"DP runtime scales linearly", dp_linearity},
        {"LFA identities and invariances", lfa_identities},
        {"feature contract", feature_contract},
        {"boosting sanity", boosting_sanity},
        {"DBSCAN matches naive reference", dbscan_oracle},
        {"metric examples", metric_examples},
        {"end-to-end synthetic", end_to_end},
        {"ablation direction", ablation_direction},
        {"episode gap plateau", delta_plateau},
        {"headline results (non-target) / schema", non_target_schema},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %2zu  %-40s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
