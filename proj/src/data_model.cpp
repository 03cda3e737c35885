#include "chewseg/data_model.hpp"

#include <algorithm>
#include <map>
#include <cmath>
#include <sstream>

#include "chewseg/csv.hpp"
#include "chewseg/error.hpp"

namespace chewseg {

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quaternion Quaternion::normalized() const {
    const double n = norm();
    if (!(n > 0.0)) throw InvalidArgument("cannot normalize a zero quaternion");
    return {w / n, x / n, y / n, z / n};
}

Quaternion operator*(const Quaternion& a, const Quaternion& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

std::string_view to_string(IntervalKind kind) {
    return kind == IntervalKind::ChewingSequence ? "chew" : "episode";
}

IntervalKind parse_interval_kind(std::string_view text) {
    if (text == "chew") return IntervalKind::ChewingSequence;
    if (text == "episode") return IntervalKind::EatingEpisode;
    throw ParseError("unknown interval kind '" + std::string(text) + "' (expected chew or episode)");
}

double Session::start_time() const { return frames.empty() ? 0.0 : frames.front().t; }
double Session::end_time() const { return frames.empty() ? 0.0 : frames.back().t; }

namespace {

constexpr std::string_view kSensorHeader = "t_ms,prox,ambient,qw,qx,qy,qz,ax,ay,az";
constexpr std::string_view kLabelHeader = "participant,kind,start_s,end_s";

}  // namespace

Session parse_sensor_csv(std::string_view text, const IngestOptions& opts) {
    const auto rows = csv::lines(text);
    if (rows.empty() || rows.front() != kSensorHeader) {
        throw ParseError("line 1: sensor CSV header must be '" + std::string(kSensorHeader) + "'");
    }

    Session session;
    session.frames.reserve(rows.size() - 1);
    bool have_prev = false;
    std::int64_t prev_ms = 0;
    std::size_t prev_line = 0;

    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (rows[i].empty()) continue;
        const auto f = csv::split(rows[i]);
        if (f.size() != 10) {
            std::ostringstream os;
            os << "line " << line_no << ": expected 10 fields, got " << f.size();
            throw ParseError(os.str());
        }
        const auto t_ms = csv::parse_int(f[0], "t_ms", line_no);
        if (have_prev && t_ms <= prev_ms) {
            std::ostringstream os;
            os << "line " << line_no << ": timestamp " << t_ms << " ms is not after line " << prev_line
               << " (" << prev_ms << " ms)";
            throw ParseError(os.str());
        }
        have_prev = true;
        prev_ms = t_ms;
        prev_line = line_no;

        SensorFrame fr;
        fr.t = static_cast<double>(t_ms) / 1000.0;
        fr.prox = csv::parse_double(f[1], "prox", line_no);
        fr.ambient = csv::parse_double(f[2], "ambient", line_no);
        fr.q = {csv::parse_double(f[3], "qw", line_no), csv::parse_double(f[4], "qx", line_no),
                csv::parse_double(f[5], "qy", line_no), csv::parse_double(f[6], "qz", line_no)};
        fr.accel = {csv::parse_double(f[7], "ax", line_no), csv::parse_double(f[8], "ay", line_no),
                    csv::parse_double(f[9], "az", line_no)};

        const double n = fr.q.norm();
        if (!std::isfinite(n) || std::abs(n - 1.0) > opts.max_quaternion_deviation) {
            ++session.gaps.rejected_rows;
            continue;
        }
        fr.q = fr.q.normalized();
        session.frames.push_back(fr);
    }

    const double gap_limit = 1.5 / opts.sample_rate_hz;
    for (std::size_t i = 1; i < session.frames.size(); ++i) {
        const double dt = session.frames[i].t - session.frames[i - 1].t;
        if (dt > gap_limit) {
            ++session.gaps.count;
            session.gaps.max_gap = std::max(session.gaps.max_gap, dt);
        }
    }
    return session;
}

Session ingest_sensor_csv(const std::filesystem::path& path, const IngestOptions& opts) {
    try {
        return parse_sensor_csv(csv::read_file(path), opts);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string format_sensor_csv(const std::vector<SensorFrame>& frames) {
    std::string out(kSensorHeader);
    out += '\n';
    for (const auto& f : frames) {
        out += std::to_string(std::llround(f.t * 1000.0));
        for (double v : {f.prox, f.ambient, f.q.w, f.q.x, f.q.y, f.q.z, f.accel.x, f.accel.y, f.accel.z}) {
            out += ',';
            out += csv::format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<LabeledInterval> parse_label_csv(std::string_view text) {
    const auto rows = csv::lines(text);
    if (rows.empty() || rows.front() != kLabelHeader) {
        throw ParseError("line 1: label CSV header must be '" + std::string(kLabelHeader) + "'");
    }
    std::vector<LabeledInterval> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (rows[i].empty()) continue;
        const auto f = csv::split(rows[i]);
        if (f.size() != 4) {
            std::ostringstream os;
            os << "line " << line_no << ": expected 4 fields, got " << f.size();
            throw ParseError(os.str());
        }
        LabeledInterval li;
        li.participant = std::string(f[0]);
        li.kind = parse_interval_kind(f[1]);
        li.start = csv::parse_double(f[2], "start_s", line_no);
        li.end = csv::parse_double(f[3], "end_s", line_no);
        if (!(li.start < li.end)) {
            std::ostringstream os;
            os << "line " << line_no << ": interval start must precede end";
            throw ParseError(os.str());
        }
        out.push_back(std::move(li));
    }
    return out;
}

std::vector<LabeledInterval> ingest_label_csv(const std::filesystem::path& path) {
    try {
        return parse_label_csv(csv::read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string format_label_csv(const std::vector<LabeledInterval>& labels) {
    std::string out(kLabelHeader);
    out += '\n';
    for (const auto& l : labels) {
        out += l.participant;
        out += ',';
        out += to_string(l.kind);
        out += ',';
        out += csv::format_fixed(l.start, 3);
        out += ',';
        out += csv::format_fixed(l.end, 3);
        out += '\n';
    }
    return out;
}

void attach_labels(Session& session, const std::vector<LabeledInterval>& labels) {
    session.labels.clear();
    for (const auto& l : labels) {
        if (l.participant != session.meta.participant) continue;
        if (l.end < session.start_time() || l.start > session.end_time()) continue;
        if (l.start < session.start_time() || l.end > session.end_time()) {
            std::ostringstream os;
            os << "label (" << l.start << ", " << l.end << ") for participant '" << l.participant
               << "' extends outside the session span";
            throw InvalidArgument(os.str());
        }
        session.labels.push_back(l);
    }
}

std::vector<LabeledInterval> labels_of_kind(const std::vector<LabeledInterval>& labels, IntervalKind kind) {
    std::vector<LabeledInterval> out;
    for (const auto& l : labels) {
        if (l.kind == kind) out.push_back(l);
    }
    return out;
}

namespace {

void sort_and_check(std::vector<LabeledInterval>& v) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        return a.start < b.start || (a.start == b.start && a.end < b.end);
    });
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i].start < v[i].end)) throw InvalidArgument("interval with start >= end");
        if (v[i].participant != v.front().participant) {
            throw InvalidArgument("intervals from more than one participant");
        }
        if (i > 0 && v[i].start < v[i - 1].end) {
            std::ostringstream os;
            os << "overlapping intervals (" << v[i - 1].start << ", " << v[i - 1].end << ") and ("
               << v[i].start << ", " << v[i].end << ")";
            throw InvalidArgument(os.str());
        }
    }
}

}  // namespace

std::vector<LabeledInterval> derive_episode_labels(std::vector<LabeledInterval> chews, double delta) {
    if (!(delta > 0.0)) throw InvalidArgument("episode gap delta must be positive");
    sort_and_check(chews);

    std::vector<LabeledInterval> episodes;
    for (const auto& c : chews) {
        if (!episodes.empty() && c.start - episodes.back().end <= delta) {
            episodes.back().end = std::max(episodes.back().end, c.end);
            continue;
        }
        episodes.push_back({c.start, c.end, IntervalKind::EatingEpisode, c.participant});
    }
    return episodes;
}

std::vector<CdfPoint> empirical_cdf(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("empirical CDF of no values");
    std::sort(values.begin(), values.end());
    std::vector<CdfPoint> cdf;
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
        cdf.push_back({values[i], static_cast<double>(i + 1) / n});
    }
    cdf.back().fraction = 1.0;
    return cdf;
}

std::vector<CdfPoint> inter_sequence_gap_cdf(std::vector<LabeledInterval> chews) {
    if (chews.size() < 2) throw InvalidArgument("gap CDF needs at least two intervals");
    sort_and_check(chews);

    std::vector<double> gaps;
    gaps.reserve(chews.size() - 1);
    for (std::size_t i = 1; i < chews.size(); ++i) gaps.push_back(chews[i].start - chews[i - 1].end);
    return empirical_cdf(std::move(gaps));
}

std::vector<CdfPoint> pooled_gap_cdf(const std::vector<LabeledInterval>& chews) {
    std::map<std::string, std::vector<LabeledInterval>> by_participant;
    for (const auto& c : chews) by_participant[c.participant].push_back(c);
    std::vector<double> gaps;
    for (auto& [p, v] : by_participant) {
        if (v.size() < 2) continue;
        sort_and_check(v);
        for (std::size_t i = 1; i < v.size(); ++i) gaps.push_back(v[i].start - v[i - 1].end);
    }
    if (gaps.empty()) throw InvalidArgument("gap CDF needs a participant with at least two intervals");
    return empirical_cdf(std::move(gaps));
}

double cdf_at(const std::vector<CdfPoint>& cdf, double x) {
    double f = 0.0;
    for (const auto& p : cdf) {
        if (p.gap > x) break;
        f = p.fraction;
    }
    return f;
}

std::string format_cdf_csv(const std::vector<CdfPoint>& cdf) {
    std::string out = "gap_s,cumulative_fraction\n";
    for (const auto& p : cdf) {
        out += csv::format_fixed(p.gap, 3);
        out += ',';
        out += csv::format_double(p.fraction);
        out += '\n';
    }
    return out;
}

}  // namespace chewseg
