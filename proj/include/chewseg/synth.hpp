#pragma once
// Synthetic 20 Hz necklace recordings with planted chewing sequences,
// eating episodes and confounders. The labels are exact by construction.
//
// Signal model (all on the 50 ms sample grid):
//   prox     100 + slow drift + chew pulses (A, 0.5A, 0.15A over 5 samples)
//            + bite pulses (2A) on chew slots + isolated spurious pulses
//   ambient  ~300 lux, dipping around every bite; ~0 in a dark room
//   lfa      ~90 deg with yaw wander; leans forward (lower) during meals
//   energy   ~1 g^2 at rest, ~2 Hz oscillation while walking, small bite spikes
// Chew peaks inside one sequence sit a constant whole number of samples
// apart, so every planted gap lies inside a single sweep band.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "chewseg/data_model.hpp"

namespace chewseg {

inline constexpr double kMinChewRateHz = 0.94;
inline constexpr double kMaxChewRateHz = 2.17;

struct MealSpec {
    double start = 0.0;       // seconds from recording start
    int n_sequences = 6;
    double chew_rate = 1.5;   // Hz
    double bite_period = 8.0; // seconds between bites
};

enum class ConfounderKind { Walking, Talking, Rest, DarkRoom };
std::string_view to_string(ConfounderKind k);
ConfounderKind parse_confounder_kind(std::string_view text);

struct Confounder {
    ConfounderKind kind = ConfounderKind::Rest;
    double start = 0.0;     // seconds from recording start
    double duration = 0.0;
};

struct NoiseSpec {
    double prox = 0.0;
    double ambient = 0.0;
    double lfa = 0.0;     // degrees
    double energy = 0.0;  // per acceleration axis, g
};

struct ScenarioSpec {
    std::string participant = "p01";
    double duration = 7200.0;
    std::int64_t start_epoch = 1'700'000'000;
    std::int64_t utc_offset_s = 0;
    std::vector<MealSpec> meals;
    std::vector<Confounder> confounders;
    NoiseSpec noise;
    double spurious_per_min = 0.0;
    double amplitude_floor = 3.0;  // chew amplitude is 2-4 x max(noise.prox, floor)
    double seq_min = 20.0;
    double seq_max = 60.0;
    double pause_min = 5.0;
    double pause_max = 30.0;
    std::uint64_t seed = 1;

    /// Longest a meal can last given the sequence and pause ranges.
    double max_meal_span(const MealSpec& m) const;

    /// Throws on overlapping meals, rates outside the chewing band, or
    /// events that run past the end of the recording.
    void validate() const;

    /// Flat `key = value` text; `meal = start n_sequences rate bite_period`
    /// and `confounder = kind start duration` may repeat.
    static ScenarioSpec parse(std::string_view text);
    std::string to_text() const;
};

/// Ready-made scenarios: clean (2 h, 3 meals, a walk and a talk), medium
/// (same with noise and spurious peaks), empty, walking, talking,
/// dark (a meal eaten in the dark).
ScenarioSpec preset(std::string_view name, std::uint64_t seed, std::string participant = "p01");

struct SyntheticRecording {
    Session session;                      // labels attached
    std::vector<LabeledInterval> labels;  // chewing sequences then derived episodes
};

/// Same scenario and seed give byte-identical output.
SyntheticRecording generate(const ScenarioSpec& spec);

}  // namespace chewseg
