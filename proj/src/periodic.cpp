#include "chewseg/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chewseg/csv.hpp"
#include "chewseg/error.hpp"

namespace chewseg {

void SweepConfig::validate() const {
    if (!(min > 0.0 && min < max)) throw InvalidArgument("sweep bounds must satisfy 0 < min < max");
    if (!(epsilon > 0.0)) throw InvalidArgument("sweep epsilon must be positive");
}

namespace {

void check_increasing(std::span<const double> t) {
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (!(t[i] > t[i - 1])) {
            std::ostringstream os;
            os << "timestamps must be strictly increasing (index " << i - 1 << ": " << t[i - 1] << ", index " << i
               << ": " << t[i] << ")";
            throw InvalidArgument(os.str());
        }
    }
}

struct DpResult {
    std::span<const double> t;
    std::vector<std::size_t> opt;
    bool strict = false;
    double p_min = 0.0;
    double p_max = 0.0;

    bool too_far(double gap) const { return strict ? gap >= p_max : gap > p_max; }
    bool far_enough(double gap) const { return strict ? gap > p_min : gap >= p_min; }

    // Valid predecessors of i are [lo, hi). They are only needed when tracing
    // optima back, so they are found by binary search instead of stored; the
    // gap t[i] - t[j] shrinks as j grows, so both predicates partition [0, i).
    std::pair<std::size_t, std::size_t> window(std::size_t i) const {
        const auto first = t.begin(), last = t.begin() + static_cast<std::ptrdiff_t>(i);
        const auto lo = std::partition_point(first, last, [&](double tj) { return too_far(t[i] - tj); }) - first;
        const auto hi = std::partition_point(first, last, [&](double tj) { return far_enough(t[i] - tj); }) - first;
        return {static_cast<std::size_t>(lo), static_cast<std::size_t>(std::max(lo, hi))};
    }
};

// Both window edges only move forward as i grows, and the window maximum
// is kept in a monotone queue, so the table costs O(N) overall.
DpResult run_dp(std::span<const double> t, double p_min, double p_max, bool strict) {
    const std::size_t n = t.size();
    DpResult r{t, std::vector<std::size_t>(n, 0), strict, p_min, p_max};

    // Indices with decreasing opt, all inside the current predecessor
    // window, so a ring buffer sized to the densest window is enough.
    std::vector<std::size_t> ring(16);
    std::size_t mask = ring.size() - 1;
    std::size_t head = 0, tail = 0;  // live entries are ring[head & mask .. tail & mask)
    std::size_t lo = 0;
    std::size_t hi = 0;  // exclusive
    for (std::size_t i = 0; i < n; ++i) {
        while (hi < i && r.far_enough(t[i] - t[hi])) {
            while (tail > head && r.opt[ring[(tail - 1) & mask]] <= r.opt[hi]) --tail;
            if (tail - head == ring.size()) {
                std::vector<std::size_t> grown(ring.size() * 2);
                for (std::size_t k = head; k < tail; ++k) grown[k - head] = ring[k & mask];
                ring.swap(grown);
                mask = ring.size() - 1;
                tail -= head;
                head = 0;
            }
            ring[tail++ & mask] = hi;
            ++hi;
        }
        while (lo < hi && r.too_far(t[i] - t[lo])) ++lo;
        while (tail > head && ring[head & mask] < lo) ++head;
        if (tail > head) r.opt[i] = r.opt[ring[head & mask]] + 1;
    }
    return r;
}

void collect_paths(const DpResult& dp, std::size_t end, std::size_t limit,
                   std::vector<std::vector<std::size_t>>& out) {
    std::vector<std::size_t> path{end};
    // iterative DFS over predecessors with opt == current - 1
    struct Frame {
        std::size_t node;
        std::size_t next;
        std::size_t stop;
    };
    auto frame = [&](std::size_t node) {
        const auto [lo, hi] = dp.opt[node] == 0 ? std::pair<std::size_t, std::size_t>{0, 0} : dp.window(node);
        return Frame{node, lo, hi};
    };
    std::vector<Frame> stack{frame(end)};
    while (!stack.empty() && out.size() < limit) {
        auto& fr = stack.back();
        const std::size_t node = fr.node;
        if (dp.opt[node] == 0) {
            std::vector<std::size_t> p(path.rbegin(), path.rend());
            out.push_back(std::move(p));
            stack.pop_back();
            path.pop_back();
            continue;
        }
        bool descended = false;
        while (fr.next < fr.stop) {
            const std::size_t j = fr.next++;
            if (dp.opt[j] + 1 == dp.opt[node]) {
                path.push_back(j);
                stack.push_back(frame(j));
                descended = true;
                break;
            }
        }
        if (!descended) {
            stack.pop_back();
            path.pop_back();
        }
    }
}

}  // namespace

std::vector<std::size_t> periodic_dp_table(std::span<const double> t, double p_min, double p_max,
                                           bool strict_bounds) {
    check_increasing(t);
    if (!(p_min > 0.0 && p_min <= p_max)) throw InvalidArgument("gap bounds must satisfy 0 < p_min <= p_max");
    return run_dp(t, p_min, p_max, strict_bounds).opt;
}

std::vector<PeriodicSubsequence> longest_abs_periodic(std::span<const double> t, double p_min, double p_max,
                                                      const PeriodicOptions& opts) {
    check_increasing(t);
    if (!(p_min > 0.0 && p_min <= p_max)) throw InvalidArgument("gap bounds must satisfy 0 < p_min <= p_max");

    const auto dp = run_dp(t, p_min, p_max, opts.strict_bounds);
    std::size_t best = 0;
    for (auto v : dp.opt) best = std::max(best, v);
    if (best == 0) return {};

    std::vector<std::vector<std::size_t>> paths;
    for (std::size_t i = 0; i < t.size() && paths.size() < opts.max_optima; ++i) {
        if (dp.opt[i] == best) collect_paths(dp, i, opts.max_optima, paths);
    }
    std::sort(paths.begin(), paths.end());

    std::vector<PeriodicSubsequence> out;
    out.reserve(paths.size());
    for (auto& p : paths) {
        PeriodicSubsequence s;
        s.timestamps.reserve(p.size());
        for (auto idx : p) s.timestamps.push_back(t[idx]);
        s.indices = std::move(p);
        s.p_min = p_min;
        s.p_max = p_max;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Band> sweep_bands(const SweepConfig& cfg) {
    cfg.validate();
    std::vector<Band> bands;
    for (double b = cfg.min; b <= cfg.max; b *= 1.0 + cfg.epsilon) {
        bands.push_back({b, std::min(b * (1.0 + cfg.epsilon), cfg.max)});
    }
    return bands;
}

std::vector<PeriodicSubsequence> longest_rel_periodic(std::span<const double> t, const SweepConfig& cfg,
                                                      const PeriodicOptions& opts) {
    std::vector<PeriodicSubsequence> out;
    for (const auto& band : sweep_bands(cfg)) {
        for (auto& s : longest_abs_periodic(t, band.p_min, band.p_max, opts)) {
            const bool seen = std::any_of(out.begin(), out.end(), [&](const auto& o) { return o.indices == s.indices; });
            if (seen) continue;
            s.epsilon = cfg.epsilon;
            out.push_back(std::move(s));
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.timestamps.front() != b.timestamps.front()) return a.timestamps.front() < b.timestamps.front();
        return a.p_min < b.p_min;
    });
    return out;
}

std::vector<CandidateSubsequence> segment(const std::vector<Peak>& peaks, const SweepConfig& cfg,
                                          std::size_t min_len, const PeriodicOptions& opts) {
    cfg.validate();
    for (std::size_t i = 1; i < peaks.size(); ++i) {
        if (!(peaks[i].t > peaks[i - 1].t)) throw InvalidArgument("peaks must be sorted by strictly increasing time");
    }

    std::vector<CandidateSubsequence> out;
    std::size_t begin = 0;
    while (begin < peaks.size()) {
        std::size_t end = begin + 1;
        while (end < peaks.size() && std::round((peaks[end].t - peaks[end - 1].t) * 1e6) / 1e6 <= cfg.max) ++end;

        if (end - begin >= 2) {
            // Rebase to the fragment start and snap to microseconds: inputs
            // are millisecond-stamped, and small offsets keep the gap
            // comparisons exact regardless of the absolute epoch.
            const double t0 = peaks[begin].t;
            std::vector<double> rel(end - begin);
            for (std::size_t i = begin; i < end; ++i) rel[i - begin] = std::round((peaks[i].t - t0) * 1e6) / 1e6;

            std::vector<CandidateSubsequence> frag;
            for (const auto& s : longest_rel_periodic(rel, cfg, opts)) {
                if (s.length() < min_len) continue;
                CandidateSubsequence c;
                c.timestamps.reserve(s.indices.size());
                for (auto idx : s.indices) c.timestamps.push_back(peaks[begin + idx].t);
                c.c1 = c.timestamps.front();
                c.c2 = c.timestamps.back();
                c.p_min = s.p_min;
                c.p_max = s.p_max;
                c.epsilon = s.epsilon;
                c.length = s.length();
                frag.push_back(std::move(c));
            }
            std::stable_sort(frag.begin(), frag.end(), [](const auto& a, const auto& b) {
                if (a.c1 != b.c1) return a.c1 < b.c1;
                if (a.p_min != b.p_min) return a.p_min < b.p_min;
                return a.c2 < b.c2;
            });
            out.insert(out.end(), std::make_move_iterator(frag.begin()), std::make_move_iterator(frag.end()));
        }
        begin = end;
    }
    return out;
}

std::string format_candidates_csv(const std::vector<CandidateSubsequence>& cands) {
    std::string out = "c1_s,c2_s,p_min,p_max,epsilon,length\n";
    for (const auto& c : cands) {
        out += csv::format_fixed(c.c1, 3) + ',' + csv::format_fixed(c.c2, 3) + ',' + csv::format_double(c.p_min) + ',' +
               csv::format_double(c.p_max) + ',' + csv::format_double(c.epsilon) + ',' + std::to_string(c.length) + '\n';
    }
    return out;
}

std::vector<CandidateSubsequence> parse_candidates_csv(std::string_view text) {
    const auto rows = csv::lines(text);
    if (rows.empty() || rows.front() != "c1_s,c2_s,p_min,p_max,epsilon,length") {
        throw ParseError("line 1: candidate CSV header must be 'c1_s,c2_s,p_min,p_max,epsilon,length'");
    }
    std::vector<CandidateSubsequence> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].empty()) continue;
        const auto f = csv::split(rows[i]);
        if (f.size() != 6) throw ParseError("line " + std::to_string(i + 1) + ": expected 6 fields");
        CandidateSubsequence c;
        c.c1 = csv::parse_double(f[0], "c1_s", i + 1);
        c.c2 = csv::parse_double(f[1], "c2_s", i + 1);
        c.p_min = csv::parse_double(f[2], "p_min", i + 1);
        c.p_max = csv::parse_double(f[3], "p_max", i + 1);
        c.epsilon = csv::parse_double(f[4], "epsilon", i + 1);
        c.length = static_cast<std::size_t>(csv::parse_int(f[5], "length", i + 1));
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace chewseg
