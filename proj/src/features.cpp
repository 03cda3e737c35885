#include "chewseg/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "chewseg/csv.hpp"
#include "chewseg/error.hpp"
#include "chewseg/kernels.hpp"
#include "chewseg/peaks.hpp"

namespace chewseg {

std::string_view to_string(Signal s) {
    switch (s) {
        case Signal::Prox: return "prox";
        case Signal::Ambient: return "ambient";
        case Signal::Lfa: return "lfa";
        case Signal::Energy: return "energy";
    }
    return "?";
}

bool SensorSubset::has(Signal s) const {
    switch (s) {
        case Signal::Prox: return prox;
        case Signal::Ambient: return ambient;
        case Signal::Lfa: return lfa;
        case Signal::Energy: return energy;
    }
    return false;
}

std::vector<Signal> SensorSubset::signals() const {
    std::vector<Signal> out;
    for (auto s : kAllSignals) {
        if (has(s)) out.push_back(s);
    }
    return out;
}

std::string SensorSubset::to_string() const {
    std::string out;
    for (auto s : signals()) {
        if (!out.empty()) out += ',';
        out += chewseg::to_string(s);
    }
    return out;
}

SensorSubset SensorSubset::parse(std::string_view text) {
    SensorSubset s{false, false, false, false};
    for (auto tok : csv::split(text)) {
        if (tok == "all") s = SensorSubset::all();
        else if (tok == "prox" || tok == "proximity") s.prox = true;
        else if (tok == "ambient") s.ambient = true;
        else if (tok == "lfa") s.lfa = true;
        else if (tok == "energy") s.energy = true;
        else if (tok == "imu") s.lfa = s.energy = true;
        else throw InvalidArgument("unknown sensor '" + std::string(tok) + "'");
    }
    if (!s.prox) throw InvalidArgument("sensor subset must include proximity (segmentation runs on it)");
    return s;
}

namespace {

std::vector<std::string> block_stat_names() {
    std::vector<std::string> n{"max", "min", "mean", "median", "var", "rms", "skew", "kurt", "q1", "q3", "iqr"};
    for (double f : kSpectrumFrequencies) n.push_back("fft_" + csv::format_fixed(f, 2) + "hz");
    for (const char* s : {"fft_skew", "fft_kurt", "count_below_mean", "count_above_mean", "first_loc_min",
                          "first_loc_max", "longest_strike_below_mean", "longest_strike_above_mean", "n_peaks"}) {
        n.emplace_back(s);
    }
    return n;
}

constexpr std::array<const char*, 2> kWindows{"cw", "bw"};
constexpr std::array<const char*, 5> kTailNames{"p_min", "p_max", "epsilon", "length", "hour_of_day"};

std::vector<std::pair<Signal, Signal>> signal_pairs(const SensorSubset& subset) {
    const auto sig = subset.signals();
    std::vector<std::pair<Signal, Signal>> out;
    for (std::size_t a = 0; a < sig.size(); ++a) {
        for (std::size_t b = a + 1; b < sig.size(); ++b) out.emplace_back(sig[a], sig[b]);
    }
    return out;
}

std::vector<std::string> build_names(const SensorSubset& subset) {
    static const auto stats = block_stat_names();
    std::vector<std::string> names;
    for (auto s : subset.signals()) {
        for (const char* w : kWindows) {
            for (const auto& st : stats) names.push_back(std::string(to_string(s)) + "_" + w + "_" + st);
        }
    }
    const auto pairs = signal_pairs(subset);
    for (const char* w : kWindows) {
        for (auto [a, b] : pairs) {
            names.push_back(std::string("corr_") + w + "_" + std::string(to_string(a)) + "_" + std::string(to_string(b)));
        }
    }
    for (const char* t : kTailNames) names.emplace_back(t);
    return names;
}

}  // namespace

std::uint64_t layout_fingerprint(const std::vector<std::string>& names) {
    std::uint64_t h = 14695981039346656037ull;
    for (const auto& n : names) {
        for (unsigned char c : n) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= static_cast<unsigned char>('\n');
        h *= 1099511628211ull;
    }
    return h;
}

FeatureLayout::FeatureLayout(SensorSubset subset) : subset_(subset), names_(build_names(subset)) {
    if (!subset_.prox) throw InvalidArgument("feature layout must include proximity");
    fingerprint_ = layout_fingerprint(names_);
}

FeatureLayout FeatureLayout::from_names(const std::vector<std::string>& names) {
    for (bool ambient : {true, false}) {
        for (bool lfa : {true, false}) {
            for (bool en : {true, false}) {
                FeatureLayout l(SensorSubset{true, ambient, lfa, en});
                if (l.names() == names) return l;
            }
        }
    }
    throw InvalidArgument("feature names do not match any known layout");
}

std::size_t FeatureLayout::index_of(std::string_view name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw InvalidArgument("feature '" + std::string(name) + "' is not in the layout");
    return static_cast<std::size_t>(it - names_.begin());
}

int LocalClock::hour_of_day(double epoch_s) const {
    const auto local = static_cast<std::int64_t>(std::floor(epoch_s)) + utc_offset_s;
    const auto sod = ((local % 86400) + 86400) % 86400;
    return static_cast<int>(sod / 3600);
}

namespace {

double quantile_sorted(const std::vector<double>& s, double q) {
    // linear interpolation between closest ranks
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

struct Shape {
    double var = 0.0;
    double skew = 0.0;
    double kurt = 0.0;
};

// Population moments; zero-variance data yields zero skewness and excess
// kurtosis instead of NaN.
Shape shape_of(std::span<const double> x, double mean, double scale) {
    const auto& k = kernels::active();
    const auto cs = k.central_sums(x, mean);
    const double n = static_cast<double>(x.size());
    Shape s;
    s.var = cs.d2 / n;
    const double tiny = 1e-10 * std::max(scale, 1e-300);
    if (s.var <= tiny * tiny) {
        s.var = 0.0;
        return s;
    }
    s.skew = (cs.d3 / n) / std::pow(s.var, 1.5);
    s.kurt = (cs.d4 / n) / (s.var * s.var) - 3.0;
    return s;
}

void append_block(std::span<const double> x, const FeatureOptions& opts, std::vector<double>& out) {
    const auto& k = kernels::active();
    const std::size_t n = x.size();
    const double nd = static_cast<double>(n);

    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double mx = sorted.back();
    const double mn = sorted.front();
    const double mean = k.sum(x) / nd;
    const double scale = std::max(std::abs(mx), std::abs(mn));
    const Shape sh = shape_of(x, mean, scale);
    const double q1 = quantile_sorted(sorted, 0.25);
    const double q3 = quantile_sorted(sorted, 0.75);

    out.push_back(mx);
    out.push_back(mn);
    out.push_back(mean);
    out.push_back(quantile_sorted(sorted, 0.5));
    out.push_back(sh.var);
    out.push_back(std::sqrt(k.sum_squares(x) / nd));
    out.push_back(sh.skew);
    out.push_back(sh.kurt);
    out.push_back(q1);
    out.push_back(q3);
    out.push_back(q3 - q1);

    // Spectrum of the mean-removed window, nearest bin to each target
    // frequency, scaled to one-sided amplitude.
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = x[i] - mean;
    std::array<std::size_t, kSpectrumFrequencies.size()> bins{};
    for (std::size_t j = 0; j < bins.size(); ++j) {
        bins[j] = static_cast<std::size_t>(std::llround(kSpectrumFrequencies[j] * nd / opts.sample_rate_hz));
    }
    std::array<double, kSpectrumFrequencies.size()> amp{};
    k.dft_magnitudes(centered, bins, amp);
    for (std::size_t j = 0; j < amp.size(); ++j) {
        const bool usable = bins[j] > 0 && 2 * bins[j] <= n;
        amp[j] = usable && sh.var > 0.0 ? 2.0 * amp[j] / nd : 0.0;
    }
    out.insert(out.end(), amp.begin(), amp.end());

    const double amp_mean = std::accumulate(amp.begin(), amp.end(), 0.0) / static_cast<double>(amp.size());
    double amp_scale = 0.0;
    for (double a : amp) amp_scale = std::max(amp_scale, std::abs(a));
    const Shape spectral = shape_of(amp, amp_mean, amp_scale);
    out.push_back(spectral.skew);
    out.push_back(spectral.kurt);

    std::size_t below = 0, above = 0, run_below = 0, run_above = 0, best_below = 0, best_above = 0;
    for (double v : x) {
        if (v < mean) {
            ++below;
            best_below = std::max(best_below, ++run_below);
        } else {
            run_below = 0;
        }
        if (v > mean) {
            ++above;
            best_above = std::max(best_above, ++run_above);
        } else {
            run_above = 0;
        }
    }
    const auto first_min = static_cast<std::size_t>(std::min_element(x.begin(), x.end()) - x.begin());
    const auto first_max = static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
    out.push_back(static_cast<double>(below));
    out.push_back(static_cast<double>(above));
    out.push_back(static_cast<double>(first_min) / nd);
    out.push_back(static_cast<double>(first_max) / nd);
    out.push_back(static_cast<double>(best_below));
    out.push_back(static_cast<double>(best_above));
    out.push_back(static_cast<double>(count_prominent_peaks(x, opts.min_prominence)));
}

std::span<const double> signal_of(const DerivedTrace& tr, Signal s) {
    switch (s) {
        case Signal::Prox: return tr.prox;
        case Signal::Ambient: return tr.ambient;
        case Signal::Lfa: return tr.lfa;
        case Signal::Energy: return tr.energy;
    }
    return {};
}

double correlation(std::span<const double> a, std::span<const double> b) {
    const auto& k = kernels::active();
    const double n = static_cast<double>(a.size());
    const double ma = k.sum(a) / n;
    const double mb = k.sum(b) / n;
    const double va = k.central_sums(a, ma).d2;
    const double vb = k.central_sums(b, mb).d2;
    if (!(va > 0.0) || !(vb > 0.0)) return 0.0;
    const double r = k.centered_dot(a, b, ma, mb) / std::sqrt(va * vb);
    if (!std::isfinite(r)) return 0.0;
    return std::clamp(r, -1.0, 1.0);
}

struct WindowRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    bool clipped = false;
};

// Window membership is decided on millisecond integers so that shifting
// the whole trace by a whole number of milliseconds never moves a sample
// across a window edge.
WindowRange window_range(const DerivedTrace& tr, double lo, double hi) {
    const auto lo_ms = std::llround(lo * 1000.0);
    const auto hi_ms = std::llround(hi * 1000.0);
    auto ms = [](double t) { return std::llround(t * 1000.0); };
    const auto first = std::lower_bound(tr.t.begin(), tr.t.end(), lo_ms, [&](double t, long long v) { return ms(t) < v; });
    const auto last = std::upper_bound(first, tr.t.end(), hi_ms, [&](long long v, double t) { return v < ms(t); });
    WindowRange r;
    r.begin = static_cast<std::size_t>(first - tr.t.begin());
    r.end = static_cast<std::size_t>(last - tr.t.begin());
    r.clipped = tr.size() == 0 || lo_ms < ms(tr.t.front()) || hi_ms > ms(tr.t.back());
    return r;
}

}  // namespace

FeatureVector extract(const DerivedTrace& trace, const CandidateSubsequence& cand, const LocalClock& clock,
                      const FeatureLayout& layout, const FeatureOptions& opts) {
    const double pad = opts.window_pad_s;
    const std::array<WindowRange, 2> windows{window_range(trace, cand.c1 - pad, cand.c2 + pad),
                                             window_range(trace, cand.c1 - pad, cand.c1 + pad)};
    for (std::size_t w = 0; w < windows.size(); ++w) {
        if (windows[w].end <= windows[w].begin) {
            std::ostringstream os;
            os << "candidate [" << cand.c1 << ", " << cand.c2 << "] has an empty " << kWindows[w]
               << " window after clipping to the trace";
            throw InvalidArgument(os.str());
        }
    }

    FeatureVector fv;
    fv.layout_fingerprint = layout.fingerprint();
    fv.clipped = windows[0].clipped || windows[1].clipped;
    fv.values.reserve(layout.size());

    const auto& subset = layout.subset();
    for (auto s : subset.signals()) {
        const auto sig = signal_of(trace, s);
        for (const auto& w : windows) append_block(sig.subspan(w.begin, w.end - w.begin), opts, fv.values);
    }
    const auto pairs = signal_pairs(subset);
    for (const auto& w : windows) {
        for (auto [a, b] : pairs) {
            fv.values.push_back(correlation(signal_of(trace, a).subspan(w.begin, w.end - w.begin),
                                            signal_of(trace, b).subspan(w.begin, w.end - w.begin)));
        }
    }
    fv.values.push_back(cand.p_min);
    fv.values.push_back(cand.p_max);
    fv.values.push_back(cand.epsilon);
    fv.values.push_back(static_cast<double>(cand.length));
    fv.values.push_back(static_cast<double>(clock.hour_of_day(cand.c1)));

    for (std::size_t i = 0; i < fv.values.size(); ++i) {
        if (!std::isfinite(fv.values[i])) {
            std::ostringstream os;
            os << "non-finite feature '" << layout.names()[i] << "' for candidate [" << cand.c1 << ", " << cand.c2
               << "]";
            throw InvalidArgument(os.str());
        }
    }
    return fv;
}

double coverage_fraction(double c1, double c2, const std::vector<TimeInterval>& truth) {
    if (!(c2 > c1)) {
        for (const auto& iv : truth) {
            if (iv.start <= c1 && c1 <= iv.end) return 1.0;
        }
        return 0.0;
    }
    std::vector<TimeInterval> parts;
    for (const auto& iv : truth) {
        const double a = std::max(c1, iv.start);
        const double b = std::min(c2, iv.end);
        if (b > a) parts.push_back({a, b});
    }
    std::sort(parts.begin(), parts.end(), [](const auto& x, const auto& y) { return x.start < y.start; });
    double covered = 0.0;
    double reach = c1;
    for (const auto& p : parts) {
        const double a = std::max(p.start, reach);
        if (p.end > a) covered += p.end - a;
        reach = std::max(reach, p.end);
    }
    return covered / (c2 - c1);
}

int label_candidate(const CandidateSubsequence& cand, const std::vector<TimeInterval>& chew_truth,
                    double min_coverage) {
    return coverage_fraction(cand.c1, cand.c2, chew_truth) >= min_coverage ? 1 : 0;
}

std::string format_feature_csv(const FeatureMatrix& m) {
    std::string out;
    for (const auto& n : m.names) {
        out += n;
        out += ',';
    }
    out += "c1_s,c2_s,participant,label\n";
    for (const auto& r : m.rows) {
        if (r.values.size() != m.names.size()) throw InvalidArgument("feature row width does not match header");
        for (double v : r.values) {
            out += csv::format_double(v);
            out += ',';
        }
        out += csv::format_fixed(r.c1, 3) + ',' + csv::format_fixed(r.c2, 3) + ',' + r.participant + ',' +
               std::to_string(r.label) + '\n';
    }
    return out;
}

FeatureMatrix parse_feature_csv(std::string_view text) {
    const auto rows = csv::lines(text);
    if (rows.empty()) throw ParseError("feature CSV is empty");
    const auto head = csv::split(rows.front());
    constexpr std::array<std::string_view, 4> tail{"c1_s", "c2_s", "participant", "label"};
    if (head.size() < tail.size() || !std::equal(tail.begin(), tail.end(), head.end() - 4)) {
        throw ParseError("line 1: feature CSV header must end with c1_s,c2_s,participant,label");
    }
    FeatureMatrix m;
    for (std::size_t i = 0; i + 4 < head.size(); ++i) m.names.emplace_back(head[i]);
    const std::size_t width = m.names.size();
    for (std::size_t li = 1; li < rows.size(); ++li) {
        if (rows[li].empty()) continue;
        const auto f = csv::split(rows[li]);
        if (f.size() != width + 4) {
            std::ostringstream os;
            os << "line " << li + 1 << ": expected " << width + 4 << " fields, got " << f.size();
            throw ParseError(os.str());
        }
        FeatureRow r;
        r.values.reserve(width);
        for (std::size_t j = 0; j < width; ++j) r.values.push_back(csv::parse_double(f[j], m.names[j], li + 1));
        r.c1 = csv::parse_double(f[width], "c1_s", li + 1);
        r.c2 = csv::parse_double(f[width + 1], "c2_s", li + 1);
        r.participant = std::string(f[width + 2]);
        r.label = static_cast<int>(csv::parse_int(f[width + 3], "label", li + 1));
        m.rows.push_back(std::move(r));
    }
    return m;
}

}  // namespace chewseg
