#pragma once

// Per-candidate feature vectors computed over two windows around a
// candidate [c1, c2]:
//   chewing window CW = [c1 - 2 s, c2 + 2 s]
//   bite window    BW = [c1 - 2 s, c1 + 2 s]
//
// Layout (full sensor set, 257 values):
//   for signal in {prox, ambient, lfa, energy}, window in {cw, bw}:
//     11 statistics, 10 spectrum amplitudes (0.25 .. 2.5 Hz), spectrum
//     skewness and kurtosis, 7 time-series counts          -> 8 x 30 = 240
//   pairwise Pearson correlations of the signals, per window -> 2 x 6  = 12
//   p_min, p_max, epsilon, length, hour_of_day              ->          5
//
// Dropping sensors removes their blocks and every correlation that uses
// them; the layout fingerprint changes accordingly.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "chewseg/data_model.hpp"
#include "chewseg/derived_signals.hpp"
#include "chewseg/periodic.hpp"

namespace chewseg {

enum class Signal { Prox, Ambient, Lfa, Energy };

inline constexpr std::array<Signal, 4> kAllSignals{Signal::Prox, Signal::Ambient, Signal::Lfa, Signal::Energy};

std::string_view to_string(Signal s);

/// Which derived signals feed the feature vector. Proximity is mandatory
/// because segmentation runs on it.
struct SensorSubset {
    bool prox = true;
    bool ambient = true;
    bool lfa = true;
    bool energy = true;

    bool has(Signal s) const;
    std::vector<Signal> signals() const;
    std::string to_string() const;

    /// Comma list of prox, ambient, lfa, energy; "imu" means lfa+energy,
    /// "all" means everything. Throws when proximity is missing.
    static SensorSubset parse(std::string_view text);
    static SensorSubset all() { return {}; }

    friend bool operator==(const SensorSubset&, const SensorSubset&) = default;
};

inline constexpr std::size_t kStatsPerSignalWindow = 30;
inline constexpr std::size_t kFullFeatureCount = 257;
inline constexpr std::array<double, 10> kSpectrumFrequencies{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5};

class FeatureLayout {
public:
    static FeatureLayout full() { return FeatureLayout(SensorSubset::all()); }
    explicit FeatureLayout(SensorSubset subset);

    /// Rebuilds a layout from a stored name list; throws when the names do
    /// not match any sensor subset.
    static FeatureLayout from_names(const std::vector<std::string>& names);

    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }
    std::uint64_t fingerprint() const { return fingerprint_; }
    const SensorSubset& subset() const { return subset_; }

    /// Throws when the name is not part of the layout.
    std::size_t index_of(std::string_view name) const;

private:
    SensorSubset subset_;
    std::vector<std::string> names_;
    std::uint64_t fingerprint_ = 0;
};

/// FNV-1a over the newline-joined names.
std::uint64_t layout_fingerprint(const std::vector<std::string>& names);

struct FeatureVector {
    std::vector<double> values;
    std::uint64_t layout_fingerprint = 0;
    bool clipped = false;  // a window ran past the session edge (diagnostic only)
};

/// Converts epoch seconds to local wall-clock hours.
struct LocalClock {
    std::int64_t utc_offset_s = 0;

    int hour_of_day(double epoch_s) const;
};

struct FeatureOptions {
    double window_pad_s = 2.0;
    double sample_rate_hz = kSampleRateHz;
    double min_prominence = 4.5;  // for the per-window peak count
};

/// Throws when a window holds no samples after clipping to the trace.
FeatureVector extract(const DerivedTrace& trace, const CandidateSubsequence& cand, const LocalClock& clock,
                      const FeatureLayout& layout = FeatureLayout::full(), const FeatureOptions& opts = {});

/// Fraction of [c1, c2] covered by the union of the given intervals.
double coverage_fraction(double c1, double c2, const std::vector<TimeInterval>& truth);

/// Training label: 1 when ground-truth chewing covers at least
/// `min_coverage` of the candidate span.
int label_candidate(const CandidateSubsequence& cand, const std::vector<TimeInterval>& chew_truth,
                    double min_coverage = 0.5);

/// Feature table with bookkeeping columns, as exported for training.
struct FeatureRow {
    std::vector<double> values;
    double c1 = 0.0;
    double c2 = 0.0;
    std::string participant;
    int label = -1;  // -1 when unknown
};

struct FeatureMatrix {
    std::vector<std::string> names;
    std::vector<FeatureRow> rows;
};

/// Header = layout names then `c1_s,c2_s,participant,label`.
std::string format_feature_csv(const FeatureMatrix& m);
FeatureMatrix parse_feature_csv(std::string_view text);

}  // namespace chewseg
