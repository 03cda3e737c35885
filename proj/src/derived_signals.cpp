#include "chewseg/derived_signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "chewseg/csv.hpp"
#include "chewseg/error.hpp"
#include "chewseg/kernels.hpp"

namespace chewseg {

namespace {

double degrees_from_cosine(double c) { return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi; }

}  // namespace

double lean_forward_angle(const Quaternion& q) {
    const Quaternion u = q.normalized();
    // z component of u * (0,0,0,1) * u^-1
    const double dot = u.w * u.w - u.x * u.x - u.y * u.y + u.z * u.z;
    return degrees_from_cosine(dot);
}

double energy(const Vec3& a) { return a.x * a.x + a.y * a.y + a.z * a.z; }

DerivedTrace derive(const Session& session) {
    const std::size_t n = session.frames.size();
    if (n == 0) throw InvalidArgument("cannot derive signals from an empty session");

    DerivedTrace out;
    out.t.resize(n);
    out.prox.resize(n);
    out.ambient.resize(n);
    out.lfa.resize(n);
    out.energy.resize(n);

    std::vector<double> qw(n), qx(n), qy(n), qz(n), ax(n), ay(n), az(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& f = session.frames[i];
        if (!(f.q.norm() > 0.0)) {
            std::ostringstream os;
            os << "frame " << i << " at t=" << f.t << " has a zero quaternion";
            throw InvalidArgument(os.str());
        }
        out.t[i] = f.t;
        out.prox[i] = f.prox;
        out.ambient[i] = f.ambient;
        qw[i] = f.q.w;
        qx[i] = f.q.x;
        qy[i] = f.q.y;
        qz[i] = f.q.z;
        ax[i] = f.accel.x;
        ay[i] = f.accel.y;
        az[i] = f.accel.z;
    }

    const auto& k = kernels::active();
    k.energy(ax, ay, az, out.energy);
    k.tilt_cosine({qw, qx, qy, qz}, out.lfa);
    for (auto& v : out.lfa) v = degrees_from_cosine(v);
    return out;
}

std::string format_derived_csv(const DerivedTrace& trace) {
    std::string out = "t_ms,prox,ambient,lfa_deg,energy_g2\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out += std::to_string(std::llround(trace.t[i] * 1000.0));
        for (double v : {trace.prox[i], trace.ambient[i], trace.lfa[i], trace.energy[i]}) {
            out += ',';
            out += csv::format_double(v);
        }
        out += '\n';
    }
    return out;
}

DerivedTrace parse_derived_csv(std::string_view text) {
    const auto rows = csv::lines(text);
    if (rows.empty() || rows.front() != "t_ms,prox,ambient,lfa_deg,energy_g2") {
        throw ParseError("line 1: derived CSV header must be 't_ms,prox,ambient,lfa_deg,energy_g2'");
    }
    DerivedTrace tr;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].empty()) continue;
        const auto f = csv::split(rows[i]);
        if (f.size() != 5) throw ParseError("line " + std::to_string(i + 1) + ": expected 5 fields");
        tr.t.push_back(static_cast<double>(csv::parse_int(f[0], "t_ms", i + 1)) / 1000.0);
        tr.prox.push_back(csv::parse_double(f[1], "prox", i + 1));
        tr.ambient.push_back(csv::parse_double(f[2], "ambient", i + 1));
        tr.lfa.push_back(csv::parse_double(f[3], "lfa_deg", i + 1));
        tr.energy.push_back(csv::parse_double(f[4], "energy_g2", i + 1));
    }
    return tr;
}

}  // namespace chewseg
