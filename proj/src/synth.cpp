#include "chewseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "chewseg/csv.hpp"
#include "chewseg/error.hpp"

namespace chewseg {

std::string_view to_string(ConfounderKind k) {
    switch (k) {
        case ConfounderKind::Walking: return "walking";
        case ConfounderKind::Talking: return "talking";
        case ConfounderKind::Rest: return "rest";
        case ConfounderKind::DarkRoom: return "dark";
    }
    return "rest";
}

ConfounderKind parse_confounder_kind(std::string_view text) {
    if (text == "walking") return ConfounderKind::Walking;
    if (text == "talking") return ConfounderKind::Talking;
    if (text == "rest") return ConfounderKind::Rest;
    if (text == "dark") return ConfounderKind::DarkRoom;
    throw InvalidArgument("unknown confounder '" + std::string(text) + "' (walking, talking, rest, dark)");
}

double ScenarioSpec::max_meal_span(const MealSpec& m) const {
    return m.n_sequences * seq_max + (m.n_sequences - 1) * pause_max + 1.0;
}

void ScenarioSpec::validate() const {
    if (participant.empty() || participant.find(',') != std::string::npos) {
        throw InvalidArgument("scenario participant must be a non-empty name without commas");
    }
    if (!(duration > 0.0)) throw InvalidArgument("scenario duration must be positive");
    if (!(seq_min > 0.0 && seq_min <= seq_max)) throw InvalidArgument("need 0 < seq_min <= seq_max");
    if (!(pause_min >= 0.0 && pause_min <= pause_max)) throw InvalidArgument("need 0 <= pause_min <= pause_max");
    if (noise.prox < 0 || noise.ambient < 0 || noise.lfa < 0 || noise.energy < 0) {
        throw InvalidArgument("noise levels must be non-negative");
    }
    if (!(spurious_per_min >= 0.0)) throw InvalidArgument("spurious_per_min must be non-negative");
    if (!(amplitude_floor > 0.0)) throw InvalidArgument("amplitude_floor must be positive");

    auto meals_sorted = meals;
    std::sort(meals_sorted.begin(), meals_sorted.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < meals_sorted.size(); ++i) {
        const auto& m = meals_sorted[i];
        if (m.n_sequences < 1) throw InvalidArgument("a meal needs at least one chewing sequence");
        if (m.chew_rate < kMinChewRateHz || m.chew_rate > kMaxChewRateHz) {
            throw InvalidArgument("chew rate " + csv::format_double(m.chew_rate) + " Hz is outside [0.94, 2.17]");
        }
        if (!(m.bite_period > 0.0)) throw InvalidArgument("bite period must be positive");
        if (m.start < 0.0 || m.start + max_meal_span(m) > duration) {
            throw InvalidArgument("meal at " + csv::format_double(m.start) + " s may run past the end of the recording");
        }
        if (i + 1 < meals_sorted.size() && m.start + max_meal_span(m) > meals_sorted[i + 1].start) {
            throw InvalidArgument("overlapping meals at " + csv::format_double(m.start) + " s and " +
                                  csv::format_double(meals_sorted[i + 1].start) + " s");
        }
    }
    for (const auto& c : confounders) {
        if (!(c.duration > 0.0) || c.start < 0.0 || c.start + c.duration > duration) {
            throw InvalidArgument(std::string(to_string(c.kind)) + " bout must lie inside the recording");
        }
    }
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> words(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const auto j = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > j) out.push_back(s.substr(j, i - j));
    }
    return out;
}

}  // namespace

ScenarioSpec ScenarioSpec::parse(std::string_view text) {
    ScenarioSpec s;
    const auto rows = csv::lines(text);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto line_no = i + 1;
        const auto line = trim(rows[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("scenario line " + std::to_string(line_no) + ": expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        auto num = [&](std::string_view v) { return csv::parse_double(v, key, line_no); };
        auto integer = [&](std::string_view v) { return csv::parse_int(v, key, line_no); };

        if (key == "participant") s.participant = std::string(value);
        else if (key == "duration") s.duration = num(value);
        else if (key == "start_epoch") s.start_epoch = integer(value);
        else if (key == "utc_offset") s.utc_offset_s = integer(value);
        else if (key == "noise.prox") s.noise.prox = num(value);
        else if (key == "noise.ambient") s.noise.ambient = num(value);
        else if (key == "noise.lfa") s.noise.lfa = num(value);
        else if (key == "noise.energy") s.noise.energy = num(value);
        else if (key == "spurious_per_min") s.spurious_per_min = num(value);
        else if (key == "amplitude_floor") s.amplitude_floor = num(value);
        else if (key == "seq_min") s.seq_min = num(value);
        else if (key == "seq_max") s.seq_max = num(value);
        else if (key == "pause_min") s.pause_min = num(value);
        else if (key == "pause_max") s.pause_max = num(value);
        else if (key == "seed") s.seed = static_cast<std::uint64_t>(integer(value));
        else if (key == "meal") {
            const auto w = words(value);
            if (w.size() != 4) {
                throw ParseError("scenario line " + std::to_string(line_no) +
                                 ": meal = start n_sequences chew_rate bite_period");
            }
            s.meals.push_back({num(w[0]), static_cast<int>(integer(w[1])), num(w[2]), num(w[3])});
        } else if (key == "confounder") {
            const auto w = words(value);
            if (w.size() != 3) throw ParseError("scenario line " + std::to_string(line_no) + ": confounder = kind start duration");
            s.confounders.push_back({parse_confounder_kind(w[0]), num(w[1]), num(w[2])});
        } else {
            throw InvalidArgument("scenario line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
        }
    }
    s.validate();
    return s;
}

std::string ScenarioSpec::to_text() const {
    auto d = [](double v) { return csv::format_double(v); };
    std::string out;
    out += "participant = " + participant + '\n';
    out += "duration = " + d(duration) + '\n';
    out += "start_epoch = " + std::to_string(start_epoch) + '\n';
    out += "utc_offset = " + std::to_string(utc_offset_s) + '\n';
    out += "noise.prox = " + d(noise.prox) + '\n';
    out += "noise.ambient = " + d(noise.ambient) + '\n';
    out += "noise.lfa = " + d(noise.lfa) + '\n';
    out += "noise.energy = " + d(noise.energy) + '\n';
    out += "spurious_per_min = " + d(spurious_per_min) + '\n';
    out += "amplitude_floor = " + d(amplitude_floor) + '\n';
    out += "seq_min = " + d(seq_min) + '\n';
    out += "seq_max = " + d(seq_max) + '\n';
    out += "pause_min = " + d(pause_min) + '\n';
    out += "pause_max = " + d(pause_max) + '\n';
    out += "seed = " + std::to_string(seed) + '\n';
    for (const auto& m : meals) {
        out += "meal = " + d(m.start) + ' ' + std::to_string(m.n_sequences) + ' ' + d(m.chew_rate) + ' ' +
               d(m.bite_period) + '\n';
    }
    for (const auto& c : confounders) {
        out += "confounder = " + std::string(to_string(c.kind)) + ' ' + d(c.start) + ' ' + d(c.duration) + '\n';
    }
    return out;
}

ScenarioSpec preset(std::string_view name, std::uint64_t seed, std::string participant) {
    ScenarioSpec s;
    s.participant = std::move(participant);
    s.seed = seed;
    // local mornings: recordings start between 07:00 and 12:00 UTC
    s.start_epoch = 1'699'920'000 + static_cast<std::int64_t>(7 + seed % 6) * 3600;

    std::mt19937_64 rng(seed ^ 0x5eedf00dULL);
    std::uniform_real_distribution<double> rate(1.1, 1.9), bite(6.0, 12.0);
    auto three_meals = [&] {
        for (double start : {600.0, 3000.0, 5400.0}) s.meals.push_back({start, 6, rate(rng), bite(rng)});
    };

    if (name == "clean" || name == "medium" || name == "dark") {
        s.duration = 7200.0;
        three_meals();
        s.confounders.push_back({ConfounderKind::Walking, 1800.0, 300.0});
        s.confounders.push_back({ConfounderKind::Talking, 4200.0, 240.0});
        if (name == "medium") {
            s.noise = {1.0, 5.0, 1.5, 0.02};
            s.spurious_per_min = 3.0;
        }
        if (name == "dark") s.confounders.push_back({ConfounderKind::DarkRoom, 2950.0, 650.0});
    } else if (name == "empty") {
        s.duration = 1800.0;
        s.confounders.push_back({ConfounderKind::Rest, 0.0, 1800.0});
    } else if (name == "walking") {
        s.duration = 1800.0;
        s.confounders.push_back({ConfounderKind::Walking, 300.0, 1200.0});
    } else if (name == "talking") {
        s.duration = 1800.0;
        s.confounders.push_back({ConfounderKind::Talking, 300.0, 600.0});
    } else {
        throw InvalidArgument("unknown scenario preset '" + std::string(name) +
                              "' (clean, medium, dark, empty, walking, talking)");
    }
    s.validate();
    return s;
}

namespace {

constexpr double kFs = kSampleRateHz;

void add_pulse(std::vector<double>& x, std::int64_t c, double a) {
    static constexpr double shape[5] = {0.15, 0.5, 1.0, 0.5, 0.15};
    for (int d = -2; d <= 2; ++d) {
        const auto i = c + d;
        if (i >= 0 && i < static_cast<std::int64_t>(x.size())) x[static_cast<std::size_t>(i)] += a * shape[d + 2];
    }
}

double round_to(double v, double step) { return std::round(v / step) * step; }

}  // namespace

SyntheticRecording generate(const ScenarioSpec& spec) {
    spec.validate();
    const auto n = static_cast<std::int64_t>(std::llround(spec.duration * kFs));
    const auto un = static_cast<std::size_t>(n);
    std::mt19937_64 rng(spec.seed);
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> prox(un), ambient(un), lfa(un), yaw(un), ax(un, 0.0), ay(un, 0.0), az(un, 1.0);
    for (std::size_t k = 0; k < un; ++k) {
        const double t = static_cast<double>(k) / kFs;
        prox[k] = 100.0 + 2.0 * std::sin(two_pi * t / 900.0);
        ambient[k] = 300.0 + 20.0 * std::sin(two_pi * t / 1800.0);
        lfa[k] = 90.0 + 3.0 * std::sin(two_pi * t / 420.0);
        yaw[k] = 30.0 * std::sin(two_pi * t / 600.0);
    }
    auto ms_of = [&](std::int64_t k) { return spec.start_epoch * 1000 + k * 50; };
    auto time_of = [&](std::int64_t k) { return static_cast<double>(ms_of(k)) / 1000.0; };
    auto index_of = [&](double seconds) { return static_cast<std::int64_t>(std::llround(seconds * kFs)); };

    const double amp_base = std::max(spec.noise.prox, spec.amplitude_floor);
    std::vector<LabeledInterval> chews;
    std::vector<std::int64_t> bites;

    auto meals = spec.meals;
    std::sort(meals.begin(), meals.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    for (const auto& meal : meals) {
        auto k = index_of(meal.start);
        const auto meal_first = k;
        std::int64_t meal_last = k;
        for (int j = 0; j < meal.n_sequences; ++j) {
            const double rate = std::clamp(meal.chew_rate * uniform(0.95, 1.05), kMinChewRateHz, kMaxChewRateHz);
            const auto period = std::max<std::int64_t>(6, std::llround(kFs / rate));
            const double dur = uniform(spec.seq_min, spec.seq_max);
            const auto n_chews = static_cast<std::int64_t>(std::floor(dur * kFs / static_cast<double>(period))) + 1;
            const double amp = uniform(2.0, 4.0) * amp_base;
            const auto bite_every = std::max<std::int64_t>(
                1, std::llround(meal.bite_period * kFs / static_cast<double>(period)));
            const auto bite_phase = std::uniform_int_distribution<std::int64_t>(0, bite_every - 1)(rng);
            for (std::int64_t m = 0; m < n_chews; ++m) {
                const auto idx = k + m * period;
                double a = amp * uniform(0.9, 1.1);
                if (m % bite_every == bite_phase) {
                    a *= 2.0;
                    bites.push_back(idx);
                }
                add_pulse(prox, idx, a);
            }
            const auto last = k + (n_chews - 1) * period;
            chews.push_back({time_of(k), time_of(last), IntervalKind::ChewingSequence, spec.participant});
            meal_last = last;
            k = last + index_of(uniform(spec.pause_min, spec.pause_max));
        }
        // lean forward for the meal, ramping over 5 s at either end
        const std::int64_t ramp = 100;
        for (auto i = std::max<std::int64_t>(0, meal_first - 2 * ramp); i < std::min(n, meal_last + 2 * ramp); ++i) {
            const double into = static_cast<double>(std::min(i - (meal_first - 2 * ramp), (meal_last + 2 * ramp) - i));
            lfa[static_cast<std::size_t>(i)] -= 20.0 * std::min(1.0, into / static_cast<double>(ramp));
        }
    }

    for (auto b : bites) {
        for (std::int64_t d = -30; d <= 30; ++d) {
            const auto i = b + d;
            if (i < 0 || i >= n) continue;
            const double z = static_cast<double>(d) / 10.0;
            ambient[static_cast<std::size_t>(i)] *= 1.0 - 0.5 * std::exp(-0.5 * z * z);
        }
        add_pulse(ax, b, 0.15);
    }

    for (const auto& c : spec.confounders) {
        const auto first = index_of(c.start);
        const auto last = std::min(n, index_of(c.start + c.duration));
        switch (c.kind) {
            case ConfounderKind::Walking: {
                const double f = uniform(1.8, 2.2);
                for (auto i = first; i < last; ++i) {
                    const double t = static_cast<double>(i) / kFs;
                    const auto u = static_cast<std::size_t>(i);
                    az[u] += 0.35 * std::sin(two_pi * f * t);
                    ax[u] += 0.15 * std::sin(two_pi * f * t + 0.7);
                    ay[u] += 0.10 * std::sin(two_pi * 0.5 * f * t);
                    prox[u] += 0.8 * std::sin(two_pi * f * t);
                }
                break;
            }
            case ConfounderKind::Talking: {
                // phrases with a regular jaw rhythm and stressed syllables:
                // on proximity alone this resembles chewing
                auto k = first;
                while (k < last) {
                    const auto n_syll = std::uniform_int_distribution<int>(8, 25)(rng);
                    const auto period = std::max<std::int64_t>(6, std::llround(kFs / uniform(1.2, 2.0)));
                    const auto stress_every = std::uniform_int_distribution<int>(4, 10)(rng);
                    const double amp = uniform(2.0, 4.0) * amp_base;
                    for (int s = 0; s < n_syll && k < last; ++s) {
                        add_pulse(prox, k, amp * uniform(0.9, 1.1) * (s % stress_every == 0 ? 2.0 : 1.0));
                        k += period;
                        if (uniform(0.0, 1.0) < 0.1) k += uniform(0.0, 1.0) < 0.5 ? -1 : 1;
                    }
                    k += index_of(uniform(1.6, 3.0));
                }
                break;
            }
            case ConfounderKind::Rest:
                break;
            case ConfounderKind::DarkRoom:
                for (auto i = first; i < last; ++i) ambient[static_cast<std::size_t>(i)] = 0.0;
                break;
        }
    }

    if (spec.spurious_per_min > 0.0) {
        std::poisson_distribution<int> count(spec.spurious_per_min * spec.duration / 60.0);
        const int m = count(rng);
        std::uniform_int_distribution<std::int64_t> where(2, std::max<std::int64_t>(2, n - 3));
        for (int i = 0; i < m; ++i) {
            const auto k = where(rng);
            add_pulse(prox, k, uniform(2.0, 4.0) * amp_base);
        }
    }

    auto add_noise = [&](std::vector<double>& x, double sigma) {
        if (sigma <= 0.0) return;
        std::normal_distribution<double> g(0.0, sigma);
        for (auto& v : x) v += g(rng);
    };
    add_noise(prox, spec.noise.prox);
    add_noise(ambient, spec.noise.ambient);
    add_noise(lfa, spec.noise.lfa);
    add_noise(ax, spec.noise.energy);
    add_noise(ay, spec.noise.energy);
    add_noise(az, spec.noise.energy);

    SyntheticRecording out;
    auto& session = out.session;
    session.meta.participant = spec.participant;
    session.meta.study_arm = "synthetic";
    session.meta.utc_offset_s = spec.utc_offset_s;
    session.frames.resize(un);
    constexpr double deg = std::numbers::pi / 180.0;
    for (std::size_t k = 0; k < un; ++k) {
        auto& f = session.frames[k];
        f.t = time_of(static_cast<std::int64_t>(k));
        f.prox = round_to(prox[k], 1e-3);
        f.ambient = round_to(std::max(0.0, ambient[k]), 1e-2);
        const double theta = std::clamp(lfa[k], 0.0, 180.0) * deg;
        const double psi = yaw[k] * deg;
        const Quaternion qz{std::cos(psi / 2), 0.0, 0.0, std::sin(psi / 2)};
        const Quaternion qx{std::cos(theta / 2), std::sin(theta / 2), 0.0, 0.0};
        const auto q = qz * qx;
        f.q = {round_to(q.w, 1e-7), round_to(q.x, 1e-7), round_to(q.y, 1e-7), round_to(q.z, 1e-7)};
        f.accel = {round_to(ax[k], 1e-4), round_to(ay[k], 1e-4), round_to(az[k], 1e-4)};
    }

    out.labels = chews;
    if (!chews.empty()) {
        for (auto& e : derive_episode_labels(chews, kDefaultEpisodeGap)) out.labels.push_back(std::move(e));
    }
    attach_labels(session, out.labels);
    return out;
}

}  // namespace chewseg
