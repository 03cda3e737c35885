#pragma once
// The per-session chain: derive -> peaks -> candidates -> features, then
// classification -> per-second scores -> clusters -> episodes.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "chewseg/config.hpp"
#include "chewseg/data_model.hpp"
#include "chewseg/derived_signals.hpp"
#include "chewseg/episodes.hpp"
#include "chewseg/features.hpp"
#include "chewseg/gbtree.hpp"
#include "chewseg/peaks.hpp"
#include "chewseg/periodic.hpp"

namespace chewseg {

/// Everything computed from one session before a model is involved.
struct ProcessedSession {
    std::string participant;
    LocalClock clock;
    DerivedTrace trace;
    std::vector<Peak> peaks;
    std::vector<CandidateSubsequence> candidates;
    std::vector<FeatureVector> features;
    std::vector<int> labels;  // per candidate, from chewing truth
    std::vector<TimeInterval> chew_truth;
    std::vector<TimeInterval> episode_truth;
};

/// Episode truth is taken from attached episode labels when present,
/// otherwise derived from the chewing labels with cfg.delta.
ProcessedSession process_session(const Session& session, const PipelineConfig& cfg);

/// Stacks labelled candidate rows of several sessions.
TrainingSet make_training_set(const std::vector<const ProcessedSession*>& sessions);

TrainedModel train_model(const std::vector<const ProcessedSession*>& sessions, const PipelineConfig& cfg);

struct SessionPrediction {
    std::vector<Classification> classified;
    std::vector<SecondScore> scores;
    std::vector<Cluster> clusters;
    std::vector<PredictedEpisode> episodes;
    std::set<std::int64_t> seconds;  // clustered seconds: the per-second prediction
};

std::vector<Classification> classify_session(const ProcessedSession& s, const TrainedModel& model,
                                             double threshold);

/// Everything after the classifier: scores, DBSCAN and the episode merge.
SessionPrediction finish_prediction(std::vector<Classification> classified, const DbscanConfig& dbscan,
                                    double delta);

SessionPrediction predict_session(const ProcessedSession& s, const TrainedModel& model, const PipelineConfig& cfg);

std::vector<CandidateSubsequence> positives_of(const std::vector<Classification>& classified);

/// Candidates plus their probability and decision:
/// `c1_s,c2_s,p_min,p_max,epsilon,length,probability,positive`
std::string format_predictions_csv(const std::vector<Classification>& classified);
std::vector<Classification> parse_predictions_csv(std::string_view text);

}  // namespace chewseg
