#pragma once

// Longest periodic subsequences of peak timestamps.
//
// A timestamp sequence is epsilon-periodic when the ratio of its largest to
// its smallest consecutive gap is below 1 + epsilon. The absolute variant
// bounds every gap by [p_min, p_max] and is solved by a left-to-right DP
// where OPT[i] is the number of gaps in the longest valid subsequence
// ending at i. The relative variant is answered by sweeping geometric bands
// [b, b(1 + epsilon)] over the plausible inter-chew range.

#include <span>
#include <string>
#include <vector>

#include "chewseg/peaks.hpp"

namespace chewseg {

struct SweepConfig {
    double min = 0.4;  // smallest inter-chew distance, seconds
    double max = 1.5;  // largest inter-chew distance, seconds
    double epsilon = 0.2;

    void validate() const;
};

struct PeriodicOptions {
    /// Use p_min < gap < p_max instead of the default inclusive bounds.
    bool strict_bounds = false;
    /// Upper bound on how many tied optima are enumerated per call.
    std::size_t max_optima = 64;
};

struct PeriodicSubsequence {
    std::vector<std::size_t> indices;  // into the input timestamp array
    std::vector<double> timestamps;
    double p_min = 0.0;
    double p_max = 0.0;
    double epsilon = 0.0;

    /// Number of gaps (points - 1).
    std::size_t length() const { return timestamps.empty() ? 0 : timestamps.size() - 1; }
};

struct Band {
    double p_min = 0.0;
    double p_max = 0.0;
};

/// OPT values only: OPT[i] = gaps in the longest valid subsequence ending at i.
std::vector<std::size_t> periodic_dp_table(std::span<const double> t, double p_min, double p_max,
                                           bool strict_bounds = false);

/// All longest subsequences whose consecutive gaps lie in [p_min, p_max]
/// (up to opts.max_optima of them, in lexicographic timestamp order).
/// Empty when no pair of timestamps forms a valid gap.
std::vector<PeriodicSubsequence> longest_abs_periodic(std::span<const double> t, double p_min, double p_max,
                                                      const PeriodicOptions& opts = {});

/// Bands [b, b(1+eps)] for b = min, min(1+eps), ... while b <= max; the
/// last band is clipped to max.
std::vector<Band> sweep_bands(const SweepConfig& cfg);

/// Union of the per-band optima, deduplicated (first band wins) and sorted
/// by first timestamp then band.
std::vector<PeriodicSubsequence> longest_rel_periodic(std::span<const double> t, const SweepConfig& cfg,
                                                      const PeriodicOptions& opts = {});

/// A candidate chewing subsequence: the classification unit.
struct CandidateSubsequence {
    double c1 = 0.0;  // first peak time
    double c2 = 0.0;  // last peak time
    double p_min = 0.0;
    double p_max = 0.0;
    double epsilon = 0.0;
    std::size_t length = 0;
    std::vector<double> timestamps;

    friend bool operator==(const CandidateSubsequence&, const CandidateSubsequence&) = default;
};

inline constexpr std::size_t kDefaultMinLength = 3;

/// Splits the peak stream at gaps larger than cfg.max, runs the band sweep
/// on each fragment and keeps optima with at least `min_len` gaps.
std::vector<CandidateSubsequence> segment(const std::vector<Peak>& peaks, const SweepConfig& cfg,
                                          std::size_t min_len = kDefaultMinLength,
                                          const PeriodicOptions& opts = {});

/// `c1_s,c2_s,p_min,p_max,epsilon,length`
std::string format_candidates_csv(const std::vector<CandidateSubsequence>& cands);
std::vector<CandidateSubsequence> parse_candidates_csv(std::string_view text);

}  // namespace chewseg
