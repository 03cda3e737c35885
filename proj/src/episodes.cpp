#include "chewseg/episodes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "chewseg/csv.hpp"
#include "chewseg/error.hpp"

namespace chewseg {

std::vector<SecondScore> score_seconds(const std::vector<CandidateSubsequence>& positives) {
    std::map<std::int64_t, int> counts;
    for (const auto& c : positives) {
        const auto first = static_cast<std::int64_t>(std::floor(c.c1));
        const auto last = static_cast<std::int64_t>(std::floor(c.c2));
        for (auto s = first; s <= last; ++s) ++counts[s];
    }
    std::vector<SecondScore> out;
    out.reserve(counts.size());
    for (auto [s, n] : counts) out.push_back({s, n});
    return out;
}

void DbscanConfig::validate() const {
    if (!(eps > 0.0)) throw InvalidArgument("DBSCAN eps must be positive");
    if (min_pts < 1) throw InvalidArgument("DBSCAN min_pts must be at least 1");
}

std::vector<Cluster> cluster(const std::vector<SecondScore>& scores, const DbscanConfig& cfg) {
    cfg.validate();
    auto pts = scores;
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    const std::size_t n = pts.size();
    if (n == 0) return {};

    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        prefix[i + 1] = prefix[i] + (cfg.use_score_weight ? static_cast<double>(pts[i].score) : 1.0);
    }
    auto pos = [&](std::size_t i) { return static_cast<double>(pts[i].second); };

    std::vector<char> core(n, 0);
    std::size_t lo = 0, hi = 0;  // neighbourhood [lo, hi)
    for (std::size_t i = 0; i < n; ++i) {
        while (pos(i) - pos(lo) > cfg.eps) ++lo;
        if (hi < i + 1) hi = i + 1;
        while (hi < n && pos(hi) - pos(i) <= cfg.eps) ++hi;
        core[i] = prefix[hi] - prefix[lo] >= static_cast<double>(cfg.min_pts) ? 1 : 0;
    }

    // cluster id per core point: consecutive cores within eps share an id
    std::vector<int> label(n, -1);
    int next_id = -1;
    std::size_t prev_core = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i]) continue;
        if (prev_core == n || pos(i) - pos(prev_core) > cfg.eps) ++next_id;
        label[i] = next_id;
        prev_core = i;
    }
    if (next_id < 0) return {};

    // border points take the nearest core within eps, earlier core on ties
    std::vector<std::size_t> left_core(n, n), right_core(n, n);
    for (std::size_t i = 0, last = n; i < n; ++i) {
        if (core[i]) last = i;
        left_core[i] = last;
    }
    for (std::size_t i = n, last = n; i-- > 0;) {
        if (core[i]) last = i;
        right_core[i] = last;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        const double dl = left_core[i] < n ? pos(i) - pos(left_core[i]) : HUGE_VAL;
        const double dr = right_core[i] < n ? pos(right_core[i]) - pos(i) : HUGE_VAL;
        if (dl <= cfg.eps && dl <= dr) label[i] = label[left_core[i]];
        else if (dr <= cfg.eps) label[i] = label[right_core[i]];
    }

    std::vector<Cluster> out(static_cast<std::size_t>(next_id + 1));
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] >= 0) out[static_cast<std::size_t>(label[i])].push_back(pts[i].second);
    }
    return out;
}

std::vector<PredictedEpisode> build_episodes(const std::vector<Cluster>& clusters,
                                             const std::vector<SecondScore>& scores, double delta) {
    std::map<std::int64_t, int> score_of;
    for (const auto& s : scores) score_of[s.second] = s.score;

    std::vector<const Cluster*> sorted;
    for (const auto& c : clusters) {
        if (!c.empty()) sorted.push_back(&c);
    }
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->front() < b->front(); });

    std::vector<PredictedEpisode> out;
    for (const auto* c : sorted) {
        PredictedEpisode e;
        e.start = static_cast<double>(c->front());
        e.end = static_cast<double>(c->back() + 1);
        e.n_seconds = c->size();
        for (auto s : *c) {
            const auto it = score_of.find(s);
            if (it != score_of.end()) e.peak_score = std::max(e.peak_score, it->second);
        }
        if (!out.empty() && e.start - out.back().end <= delta) {
            auto& b = out.back();
            b.end = std::max(b.end, e.end);
            b.n_seconds += e.n_seconds;
            b.peak_score = std::max(b.peak_score, e.peak_score);
        } else {
            out.push_back(e);
        }
    }
    return out;
}

std::vector<TimeInterval> episodes_from_clusters(const std::vector<Cluster>& clusters, double delta) {
    std::vector<TimeInterval> out;
    for (const auto& e : build_episodes(clusters, {}, delta)) out.push_back({e.start, e.end});
    return out;
}

std::string format_episodes_csv(const std::string& participant, const std::vector<PredictedEpisode>& episodes) {
    std::string out = "participant,start_s,end_s,n_seconds,peak_score\n";
    for (const auto& e : episodes) {
        out += participant + ',' + csv::format_fixed(e.start, 3) + ',' + csv::format_fixed(e.end, 3) + ',' +
               std::to_string(e.n_seconds) + ',' + std::to_string(e.peak_score) + '\n';
    }
    return out;
}

std::vector<EpisodeRecord> parse_episodes_csv(std::string_view text) {
    const auto rows = csv::lines(text);
    if (rows.empty() || rows.front() != "participant,start_s,end_s,n_seconds,peak_score") {
        throw ParseError("line 1: episode CSV header must be 'participant,start_s,end_s,n_seconds,peak_score'");
    }
    std::vector<EpisodeRecord> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].empty()) continue;
        const auto f = csv::split(rows[i]);
        if (f.size() != 5) throw ParseError("line " + std::to_string(i + 1) + ": expected 5 fields");
        EpisodeRecord r;
        r.participant = std::string(f[0]);
        r.episode.start = csv::parse_double(f[1], "start_s", i + 1);
        r.episode.end = csv::parse_double(f[2], "end_s", i + 1);
        r.episode.n_seconds = static_cast<std::size_t>(csv::parse_int(f[3], "n_seconds", i + 1));
        r.episode.peak_score = static_cast<int>(csv::parse_int(f[4], "peak_score", i + 1));
        out.push_back(std::move(r));
    }
    return out;
}

std::string format_seconds_csv(const std::vector<SecondScore>& scores) {
    std::string out = "second,score\n";
    for (const auto& s : scores) out += std::to_string(s.second) + ',' + std::to_string(s.score) + '\n';
    return out;
}

std::vector<SecondScore> parse_seconds_csv(std::string_view text) {
    const auto rows = csv::lines(text);
    if (rows.empty() || rows.front() != "second,score") throw ParseError("line 1: seconds CSV header must be 'second,score'");
    std::vector<SecondScore> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].empty()) continue;
        const auto f = csv::split(rows[i]);
        if (f.size() != 2) throw ParseError("line " + std::to_string(i + 1) + ": expected 2 fields");
        out.push_back({csv::parse_int(f[0], "second", i + 1), static_cast<int>(csv::parse_int(f[1], "score", i + 1))});
    }
    return out;
}

}  // namespace chewseg
