#include "chewseg/pipeline.hpp"

#include "chewseg/csv.hpp"
#include "chewseg/error.hpp"

namespace chewseg {

ProcessedSession process_session(const Session& session, const PipelineConfig& cfg) {
    ProcessedSession out;
    out.participant = session.meta.participant;
    out.clock = LocalClock{session.meta.utc_offset_s};
    out.trace = derive(session);
    out.peaks = find_prominent_peaks(out.trace.prox, out.trace.t, cfg.min_prominence);
    out.candidates = segment(out.peaks, cfg.sweep, cfg.min_len, cfg.periodic);

    const FeatureLayout layout(cfg.sensors);
    out.features.reserve(out.candidates.size());
    for (const auto& c : out.candidates) out.features.push_back(extract(out.trace, c, out.clock, layout, cfg.features));

    for (const auto& l : labels_of_kind(session.labels, IntervalKind::ChewingSequence)) out.chew_truth.push_back(l.span());
    const auto episodes = labels_of_kind(session.labels, IntervalKind::EatingEpisode);
    if (!episodes.empty()) {
        for (const auto& l : episodes) out.episode_truth.push_back(l.span());
    } else {
        for (const auto& l : derive_episode_labels(labels_of_kind(session.labels, IntervalKind::ChewingSequence), cfg.delta)) {
            out.episode_truth.push_back(l.span());
        }
    }

    out.labels.reserve(out.candidates.size());
    for (const auto& c : out.candidates) out.labels.push_back(label_candidate(c, out.chew_truth, cfg.label_coverage));
    return out;
}

TrainingSet make_training_set(const std::vector<const ProcessedSession*>& sessions) {
    TrainingSet ts;
    for (const auto* s : sessions) {
        for (std::size_t i = 0; i < s->candidates.size(); ++i) {
            ts.rows.push_back(s->features[i].values);
            ts.labels.push_back(s->labels[i]);
        }
    }
    return ts;
}

TrainedModel train_model(const std::vector<const ProcessedSession*>& sessions, const PipelineConfig& cfg) {
    return train(make_training_set(sessions), FeatureLayout(cfg.sensors), cfg.boost);
}

std::vector<Classification> classify_session(const ProcessedSession& s, const TrainedModel& model, double threshold) {
    return classify_candidates(model, s.candidates, s.features, threshold);
}

std::vector<CandidateSubsequence> positives_of(const std::vector<Classification>& classified) {
    std::vector<CandidateSubsequence> out;
    for (const auto& c : classified) {
        if (c.positive) out.push_back(c.candidate);
    }
    return out;
}

SessionPrediction finish_prediction(std::vector<Classification> classified, const DbscanConfig& dbscan, double delta) {
    SessionPrediction p;
    p.classified = std::move(classified);
    p.scores = score_seconds(positives_of(p.classified));
    p.clusters = cluster(p.scores, dbscan);
    p.episodes = build_episodes(p.clusters, p.scores, delta);
    for (const auto& c : p.clusters) p.seconds.insert(c.begin(), c.end());
    return p;
}

SessionPrediction predict_session(const ProcessedSession& s, const TrainedModel& model, const PipelineConfig& cfg) {
    return finish_prediction(classify_session(s, model, cfg.threshold), cfg.dbscan, cfg.delta);
}

std::string format_predictions_csv(const std::vector<Classification>& classified) {
    std::string out = "c1_s,c2_s,p_min,p_max,epsilon,length,probability,positive\n";
    for (const auto& c : classified) {
        const auto& k = c.candidate;
        out += csv::format_fixed(k.c1, 3) + ',' + csv::format_fixed(k.c2, 3) + ',' + csv::format_double(k.p_min) + ',' +
               csv::format_double(k.p_max) + ',' + csv::format_double(k.epsilon) + ',' + std::to_string(k.length) +
               ',' + csv::format_double(c.probability) + ',' + (c.positive ? "1" : "0") + '\n';
    }
    return out;
}

std::vector<Classification> parse_predictions_csv(std::string_view text) {
    const auto rows = csv::lines(text);
    if (rows.empty() || rows.front() != "c1_s,c2_s,p_min,p_max,epsilon,length,probability,positive") {
        throw ParseError("line 1: prediction CSV header must be 'c1_s,c2_s,p_min,p_max,epsilon,length,probability,positive'");
    }
    std::vector<Classification> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].empty()) continue;
        const auto f = csv::split(rows[i]);
        if (f.size() != 8) throw ParseError("line " + std::to_string(i + 1) + ": expected 8 fields");
        Classification c;
        c.candidate.c1 = csv::parse_double(f[0], "c1_s", i + 1);
        c.candidate.c2 = csv::parse_double(f[1], "c2_s", i + 1);
        c.candidate.p_min = csv::parse_double(f[2], "p_min", i + 1);
        c.candidate.p_max = csv::parse_double(f[3], "p_max", i + 1);
        c.candidate.epsilon = csv::parse_double(f[4], "epsilon", i + 1);
        c.candidate.length = static_cast<std::size_t>(csv::parse_int(f[5], "length", i + 1));
        c.probability = csv::parse_double(f[6], "probability", i + 1);
        const auto pos = csv::parse_int(f[7], "positive", i + 1);
        if (pos != 0 && pos != 1) throw ParseError("line " + std::to_string(i + 1) + ": positive must be 0 or 1");
        c.positive = pos == 1;
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace chewseg
