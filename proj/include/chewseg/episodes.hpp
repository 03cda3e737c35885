#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chewseg/data_model.hpp"
#include "chewseg/periodic.hpp"

namespace chewseg {

struct SecondScore {
    std::int64_t second = 0;  // epoch second
    int score = 0;            // number of positive candidates touching it, >= 1

    friend bool operator==(const SecondScore&, const SecondScore&) = default;
};

/// Every whole second s with [s, s+1) touching a positive candidate's
/// closed span [c1, c2], i.e. s = floor(c1) .. floor(c2), scored by the
/// number of such candidates. Sorted by second.
std::vector<SecondScore> score_seconds(const std::vector<CandidateSubsequence>& positives);

struct DbscanConfig {
    double eps = 30.0;   // seconds
    int min_pts = 15;
    bool use_score_weight = true;

    void validate() const;
};

using Cluster = std::vector<std::int64_t>;  // sorted seconds

/// Density clustering of the scored seconds on the time axis. A second is
/// a core point when the (optionally score-weighted) count of seconds within
/// eps of it, itself included, reaches min_pts. Core points closer than eps
/// chain into one cluster; a non-core second within eps of a core joins the
/// cluster of its nearest core (the earlier one on a tie); the rest is
/// noise and dropped. Runs in O(n log n) with a sliding window.
std::vector<Cluster> cluster(const std::vector<SecondScore>& scores, const DbscanConfig& cfg);

struct PredictedEpisode {
    double start = 0.0;
    double end = 0.0;
    std::size_t n_seconds = 0;
    int peak_score = 0;
};

/// Each cluster spans [first second, last second + 1]; neighbours whose
/// gap is <= delta merge. Sorted by start.
std::vector<TimeInterval> episodes_from_clusters(const std::vector<Cluster>& clusters,
                                                 double delta = kDefaultEpisodeGap);

/// Same, also reporting clustered-second counts and the top score.
std::vector<PredictedEpisode> build_episodes(const std::vector<Cluster>& clusters,
                                             const std::vector<SecondScore>& scores,
                                             double delta = kDefaultEpisodeGap);

/// `participant,start_s,end_s,n_seconds,peak_score`
std::string format_episodes_csv(const std::string& participant, const std::vector<PredictedEpisode>& episodes);

struct EpisodeRecord {
    std::string participant;
    PredictedEpisode episode;
};
std::vector<EpisodeRecord> parse_episodes_csv(std::string_view text);

/// `second,score`
std::string format_seconds_csv(const std::vector<SecondScore>& scores);
std::vector<SecondScore> parse_seconds_csv(std::string_view text);

}  // namespace chewseg
