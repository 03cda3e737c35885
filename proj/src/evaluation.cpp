#include "chewseg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <set>

#include "chewseg/csv.hpp"
#include "chewseg/error.hpp"

namespace chewseg {

double f1_score(double precision, double recall) {
    const double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

std::set<std::int64_t> covered_seconds(const std::vector<TimeInterval>& intervals) {
    std::set<std::int64_t> out;
    for (const auto& iv : intervals) {
        const auto first = static_cast<std::int64_t>(std::floor(iv.start));
        const auto last = static_cast<std::int64_t>(std::ceil(iv.end)) - 1;
        for (auto s = first; s <= last; ++s) out.insert(s);
    }
    return out;
}

namespace {

double ratio_or_convention(std::size_t num, std::size_t den, bool other_empty) {
    if (den == 0) return other_empty ? 1.0 : 0.0;
    return static_cast<double>(num) / static_cast<double>(den);
}

void check_disjoint(std::vector<TimeInterval> xs, const char* which) {
    std::sort(xs.begin(), xs.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i].end >= xs[i].start)) throw InvalidArgument(std::string(which) + " interval has end before start");
        if (i > 0 && xs[i].start < xs[i - 1].end) {
            throw InvalidArgument(std::string(which) + " intervals overlap at " + csv::format_fixed(xs[i].start, 3) + " s");
        }
    }
}

bool matches(const TimeInterval& pred, const TimeInterval& truth, double threshold, OverlapBase base) {
    const double ov = overlap(pred, truth);
    if (!(ov > 0.0)) return false;
    double b = truth.duration();
    if (base == OverlapBase::Pred) b = pred.duration();
    if (base == OverlapBase::Min) b = std::min(pred.duration(), truth.duration());
    return ov >= threshold * b;
}

}  // namespace

Metrics per_second_metrics(const std::set<std::int64_t>& pred, const std::vector<TimeInterval>& truth) {
    const auto t = covered_seconds(truth);
    Metrics m;
    for (auto s : pred) {
        if (t.count(s)) ++m.tp;
        else ++m.fp;
    }
    m.fn = t.size() - m.tp;
    m.precision = ratio_or_convention(m.tp, pred.size(), t.empty());
    m.recall = ratio_or_convention(m.tp, t.size(), pred.empty());
    m.f1 = f1_score(m.precision, m.recall);
    return m;
}

double overlap(const TimeInterval& a, const TimeInterval& b) {
    return std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
}

Metrics per_episode_metrics(const std::vector<TimeInterval>& pred, const std::vector<TimeInterval>& truth,
                            double threshold, OverlapBase base) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidArgument("overlap threshold must be in [0, 1]");
    check_disjoint(pred, "predicted");
    check_disjoint(truth, "truth");

    Metrics m;
    std::size_t detected = 0;
    for (const auto& t : truth) {
        if (std::any_of(pred.begin(), pred.end(), [&](const auto& p) { return matches(p, t, threshold, base); })) {
            ++detected;
        }
    }
    for (const auto& p : pred) {
        if (std::any_of(truth.begin(), truth.end(), [&](const auto& t) { return matches(p, t, threshold, base); })) {
            ++m.tp;
        } else {
            ++m.fp;
        }
    }
    m.fn = truth.size() - detected;
    m.precision = ratio_or_convention(m.tp, pred.size(), truth.empty());
    m.recall = ratio_or_convention(detected, truth.size(), pred.empty());
    m.f1 = f1_score(m.precision, m.recall);
    return m;
}

ParticipantResult score_participant(const ProcessedSession& s, const SessionPrediction& p, const PipelineConfig& cfg) {
    ParticipantResult r;
    r.participant = s.participant;
    r.n_candidates = s.candidates.size();
    r.flagged = s.candidates.empty();
    r.second = per_second_metrics(p.seconds, s.chew_truth);
    std::vector<TimeInterval> pred;
    for (const auto& e : p.episodes) pred.push_back({e.start, e.end});
    r.episode = per_episode_metrics(pred, s.episode_truth, cfg.overlap_threshold, cfg.overlap_base);
    return r;
}

void summarize(EvalReport& report) {
    Metrics sec, ep;
    const auto n = static_cast<double>(report.participants.size());
    for (const auto& r : report.participants) {
        sec.precision += r.second.precision / n;
        sec.recall += r.second.recall / n;
        sec.f1 += r.second.f1 / n;
        sec.tp += r.second.tp;
        sec.fp += r.second.fp;
        sec.fn += r.second.fn;
        ep.precision += r.episode.precision / n;
        ep.recall += r.episode.recall / n;
        ep.f1 += r.episode.f1 / n;
        ep.tp += r.episode.tp;
        ep.fp += r.episode.fp;
        ep.fn += r.episode.fn;
    }
    report.mean_second = sec;
    report.mean_episode = ep;
}

std::string EvalReport::format_table() const {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-14s %8s %8s %8s   %8s %8s %8s %7s\n", "participant", "sec_P", "sec_R", "sec_F1",
                  "ep_P", "ep_R", "ep_F1", "cands");
    out += buf;
    auto row = [&](const std::string& name, const Metrics& s, const Metrics& e, const std::string& extra) {
        std::snprintf(buf, sizeof buf, "%-14s %8.4f %8.4f %8.4f   %8.4f %8.4f %8.4f %7s\n", name.c_str(), s.precision,
                      s.recall, s.f1, e.precision, e.recall, e.f1, extra.c_str());
        out += buf;
    };
    for (const auto& r : participants) {
        row(r.participant, r.second, r.episode, std::to_string(r.n_candidates) + (r.flagged ? "!" : ""));
    }
    row("mean", mean_second, mean_episode, "");
    if (std::any_of(participants.begin(), participants.end(), [](const auto& r) { return r.flagged; })) {
        out += "! participant had no candidates; its metrics follow the empty-set convention\n";
    }
    if (!manifest_hash.empty()) out += "manifest " + manifest_hash + '\n';
    return out;
}

std::string EvalReport::format_csv() const {
    std::string out = "participant,level,precision,recall,f1\n";
    auto row = [&](const std::string& name, const char* level, const Metrics& m) {
        out += name + ',' + level + ',' + csv::format_fixed(m.precision, 6) + ',' + csv::format_fixed(m.recall, 6) + ',' +
               csv::format_fixed(m.f1, 6) + '\n';
    };
    for (const auto& r : participants) {
        row(r.participant, "second", r.second);
        row(r.participant, "episode", r.episode);
    }
    row("mean", "second", mean_second);
    row("mean", "episode", mean_episode);
    return out;
}

namespace {

struct ClassifierPoint {
    int max_depth;
    double eta;
};

struct Selection {
    ClassifierPoint cls;
    DbscanConfig dbscan;
};

std::vector<ClassifierPoint> classifier_grid(const PipelineConfig& cfg) {
    const auto depths = cfg.grid_max_depth.empty() ? std::vector<int>{cfg.boost.max_depth} : cfg.grid_max_depth;
    const auto etas = cfg.grid_eta.empty() ? std::vector<double>{cfg.boost.eta} : cfg.grid_eta;
    std::vector<ClassifierPoint> out;
    for (int d : depths) {
        for (double e : etas) out.push_back({d, e});
    }
    return out;
}

std::vector<DbscanConfig> dbscan_grid(const PipelineConfig& cfg) {
    const auto epss = cfg.grid_dbscan_eps.empty() ? std::vector<double>{cfg.dbscan.eps} : cfg.grid_dbscan_eps;
    const auto pts = cfg.grid_dbscan_min_pts.empty() ? std::vector<int>{cfg.dbscan.min_pts} : cfg.grid_dbscan_min_pts;
    std::vector<DbscanConfig> out;
    for (double e : epss) {
        for (int p : pts) out.push_back({e, p, cfg.dbscan.use_score_weight});
    }
    return out;
}

PipelineConfig with(const PipelineConfig& cfg, const Selection& sel) {
    auto c = cfg;
    c.boost.max_depth = sel.cls.max_depth;
    c.boost.eta = sel.cls.eta;
    c.dbscan = sel.dbscan;
    return c;
}

// Picks a grid point using only the given training participants.
Selection select_grid_point(const std::vector<const ProcessedSession*>& train, const PipelineConfig& cfg) {
    const auto cls_grid = classifier_grid(cfg);
    const auto db_grid = dbscan_grid(cfg);
    if (cls_grid.size() * db_grid.size() == 1) return {cls_grid.front(), db_grid.front()};

    std::vector<double> score(cls_grid.size() * db_grid.size(), 0.0);
    for (std::size_t ci = 0; ci < cls_grid.size(); ++ci) {
        const auto inner_cfg = with(cfg, {cls_grid[ci], cfg.dbscan});
        // with a single training participant there is nothing to hold out,
        // so the point is scored on its own training data
        const std::size_t n_inner = train.size() >= 2 ? train.size() : 1;
        for (std::size_t j = 0; j < n_inner; ++j) {
            std::vector<const ProcessedSession*> inner_train;
            for (std::size_t k = 0; k < train.size(); ++k) {
                if (k != j || train.size() < 2) inner_train.push_back(train[k]);
            }
            const auto model = train_model(inner_train, inner_cfg);
            const auto classified = classify_session(*train[j], model, cfg.threshold);
            for (std::size_t di = 0; di < db_grid.size(); ++di) {
                const auto pred = finish_prediction(classified, db_grid[di], cfg.delta);
                const auto r = score_participant(*train[j], pred, cfg);
                score[ci * db_grid.size() + di] += 0.5 * (r.second.f1 + r.episode.f1) / static_cast<double>(n_inner);
            }
        }
    }
    const auto best = static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
    return {cls_grid[best / db_grid.size()], db_grid[best % db_grid.size()]};
}

std::string describe(const Selection& s) {
    return "max_depth=" + std::to_string(s.cls.max_depth) + " eta=" + csv::format_double(s.cls.eta) +
           " dbscan_eps=" + csv::format_double(s.dbscan.eps) + " dbscan_min_pts=" + std::to_string(s.dbscan.min_pts);
}

}  // namespace

EvalReport losocv(const std::vector<Session>& sessions, const PipelineConfig& cfg) {
    cfg.validate();
    if (sessions.size() < 2) throw InvalidArgument("cross-validation needs at least two participants");
    std::set<std::string> names;
    for (const auto& s : sessions) {
        if (!names.insert(s.meta.participant).second) {
            throw InvalidArgument("participant '" + s.meta.participant + "' appears in more than one session");
        }
    }

    std::vector<std::future<ProcessedSession>> jobs;
    for (const auto& s : sessions) jobs.push_back(std::async(std::launch::async, [&s, &cfg] { return process_session(s, cfg); }));
    std::vector<ProcessedSession> processed;
    for (auto& j : jobs) processed.push_back(j.get());

    // each fold only ever sees pointers to its training participants
    auto run_fold = [&](std::size_t held_out) {
        std::vector<const ProcessedSession*> train;
        for (std::size_t k = 0; k < processed.size(); ++k) {
            if (k != held_out) train.push_back(&processed[k]);
        }
        const auto sel = select_grid_point(train, cfg);
        const auto fold_cfg = with(cfg, sel);
        const auto model = train_model(train, fold_cfg);
        const auto pred = predict_session(processed[held_out], model, fold_cfg);
        auto r = score_participant(processed[held_out], pred, fold_cfg);
        r.model_hash = hex64(fnv1a64(serialize_model(model)));
        r.selection = describe(sel);
        return r;
    };

    std::vector<std::future<ParticipantResult>> folds;
    for (std::size_t i = 0; i < processed.size(); ++i) folds.push_back(std::async(std::launch::async, run_fold, i));

    EvalReport report;
    for (auto& f : folds) report.participants.push_back(f.get());
    summarize(report);
    report.manifest_hash = RunManifest::capture("losocv", cfg).hash();
    return report;
}

EvalReport ablate_sensors(const std::vector<Session>& sessions, const PipelineConfig& cfg, const SensorSubset& subset) {
    if (!subset.prox) throw InvalidArgument("sensor subset must include proximity; segmentation runs on it");
    auto c = cfg;
    c.sensors = subset;
    return losocv(sessions, c);
}

}  // namespace chewseg
