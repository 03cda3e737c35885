#pragma once
// Per-second and per-episode scoring, and leave-one-subject-out
// cross-validation with nested model selection.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "chewseg/config.hpp"
#include "chewseg/data_model.hpp"
#include "chewseg/pipeline.hpp"

namespace chewseg {

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // second level: tp/fp/fn seconds. episode level: tp and fp count
    // predicted episodes, fn counts undetected truth episodes.
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

/// Harmonic mean, 0 when both are 0.
double f1_score(double precision, double recall);

/// Whole seconds covered by [start, end): floor(start) .. ceil(end) - 1.
std::set<std::int64_t> covered_seconds(const std::vector<TimeInterval>& intervals);

/// With no predictions precision is 1 only if truth is empty too, else 0;
/// recall mirrors that with no truth.
Metrics per_second_metrics(const std::set<std::int64_t>& pred_seconds, const std::vector<TimeInterval>& truth);

/// Length of the intersection of two intervals (0 when disjoint).
double overlap(const TimeInterval& a, const TimeInterval& b);

/// A truth episode is detected, and a predicted episode is a true
/// positive, when the pair overlaps by more than zero and by at least
/// `threshold` times the base duration. Throws when either list contains
/// overlapping intervals.
Metrics per_episode_metrics(const std::vector<TimeInterval>& pred, const std::vector<TimeInterval>& truth,
                            double threshold = 0.5, OverlapBase base = OverlapBase::Truth);

struct ParticipantResult {
    std::string participant;
    Metrics second;
    Metrics episode;
    std::size_t n_candidates = 0;
    bool flagged = false;       // no candidates: metrics hold by convention only
    std::string model_hash;     // digest of the fold's serialized model
    std::string selection;      // chosen grid point
};

struct EvalReport {
    std::vector<ParticipantResult> participants;
    Metrics mean_second;   // macro averages; counts are summed
    Metrics mean_episode;
    std::string manifest_hash;

    std::string format_table() const;
    /// `participant,level,precision,recall,f1` with a final `mean` pair.
    std::string format_csv() const;
};

/// Scores one participant's prediction.
ParticipantResult score_participant(const ProcessedSession& s, const SessionPrediction& p, const PipelineConfig& cfg);

/// Fills in the macro averages from the participant rows.
void summarize(EvalReport& report);

/// Leave-one-subject-out: each participant is scored by a model trained
/// only on the others. When the config carries grids, the grid point is
/// chosen by an inner leave-one-out over the training participants
/// (score = mean of second- and episode-level F1). Needs >= 2 participants
/// with distinct names.
EvalReport losocv(const std::vector<Session>& sessions, const PipelineConfig& cfg);

/// Cross-validation with a features layout restricted to `subset`.
EvalReport ablate_sensors(const std::vector<Session>& sessions, const PipelineConfig& cfg, const SensorSubset& subset);

}  // namespace chewseg
