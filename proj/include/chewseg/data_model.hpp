#pragma once

// Core records: sensor frames, labeled intervals, sessions, and the label
// rules that turn chewing-sequence annotations into eating episodes.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace chewseg {

/// Nominal necklace sample rate.
inline constexpr double kSampleRateHz = 20.0;

/// Default inter-episode gap threshold, seconds.
inline constexpr double kDefaultEpisodeGap = 900.0;

struct Quaternion {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const;
    Quaternion normalized() const;
    Quaternion operator-() const { return {-w, -x, -y, -z}; }
};

Quaternion operator*(const Quaternion& a, const Quaternion& b);

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// One 20 Hz necklace sample. `t` is seconds since the epoch at
/// millisecond resolution.
struct SensorFrame {
    double t = 0.0;
    double prox = 0.0;
    double ambient = 0.0;
    Quaternion q;
    Vec3 accel;
};

enum class IntervalKind { ChewingSequence, EatingEpisode };

std::string_view to_string(IntervalKind kind);
IntervalKind parse_interval_kind(std::string_view text);

/// Plain [start, end) time span in seconds.
struct TimeInterval {
    double start = 0.0;
    double end = 0.0;

    double duration() const { return end - start; }
    friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

struct LabeledInterval {
    double start = 0.0;
    double end = 0.0;
    IntervalKind kind = IntervalKind::ChewingSequence;
    std::string participant;

    TimeInterval span() const { return {start, end}; }
    friend bool operator==(const LabeledInterval&, const LabeledInterval&) = default;
};

struct GapReport {
    std::size_t count = 0;       // inter-frame gaps longer than 1.5 nominal periods
    double max_gap = 0.0;        // largest inter-frame spacing seen, seconds (0 if no gaps)
    std::size_t rejected_rows = 0;  // rows dropped for a non-unit quaternion
};

struct SessionMetadata {
    std::string participant;
    std::string study_arm;
    int day_index = 0;
    std::int64_t utc_offset_s = 0;  // local time = UTC + offset
};

struct Session {
    SessionMetadata meta;
    std::vector<SensorFrame> frames;
    std::vector<LabeledInterval> labels;
    GapReport gaps;

    double start_time() const;
    double end_time() const;
};

struct IngestOptions {
    double sample_rate_hz = kSampleRateHz;
    double max_quaternion_deviation = 0.1;
};

/// Reads a sensor CSV with header `t_ms,prox,ambient,qw,qx,qy,qz,ax,ay,az`.
/// Timestamps must be strictly increasing. Quaternions are normalized;
/// rows whose |q| is off by more than `max_quaternion_deviation` are
/// dropped and counted in the gap report.
Session ingest_sensor_csv(const std::filesystem::path& path, const IngestOptions& opts = {});
Session parse_sensor_csv(std::string_view text, const IngestOptions& opts = {});

std::string format_sensor_csv(const std::vector<SensorFrame>& frames);

/// Reads a label CSV with header `participant,kind,start_s,end_s`.
std::vector<LabeledInterval> ingest_label_csv(const std::filesystem::path& path);
std::vector<LabeledInterval> parse_label_csv(std::string_view text);
std::string format_label_csv(const std::vector<LabeledInterval>& labels);

/// Keeps the labels of one participant that fall inside the session span
/// and attaches them. Throws if a kept label sticks out of the span.
void attach_labels(Session& session, const std::vector<LabeledInterval>& labels);

std::vector<LabeledInterval> labels_of_kind(const std::vector<LabeledInterval>& labels, IntervalKind kind);

/// Merges chewing sequences whose gap is <= `delta` into eating episodes.
/// Input must be a single participant's non-overlapping intervals.
std::vector<LabeledInterval> derive_episode_labels(std::vector<LabeledInterval> chews,
                                                   double delta = kDefaultEpisodeGap);

struct CdfPoint {
    double gap = 0.0;
    double fraction = 0.0;
};

/// Empirical CDF of the gaps between consecutive intervals (next.start -
/// prev.end), one row per distinct gap value.
std::vector<CdfPoint> inter_sequence_gap_cdf(std::vector<LabeledInterval> chews);

/// Gaps pooled over participants: each participant's intervals are
/// checked and sorted on their own.
std::vector<CdfPoint> pooled_gap_cdf(const std::vector<LabeledInterval>& chews);

/// One row per distinct value; fractions count values <= that value.
std::vector<CdfPoint> empirical_cdf(std::vector<double> values);

/// Fraction of gaps <= x.
double cdf_at(const std::vector<CdfPoint>& cdf, double x);

std::string format_cdf_csv(const std::vector<CdfPoint>& cdf);

}  // namespace chewseg
