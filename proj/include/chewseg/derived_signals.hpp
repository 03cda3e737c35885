#pragma once

#include <string>
#include <vector>

#include "chewseg/data_model.hpp"

namespace chewseg {

/// The four analysis signals on the session's own time base.
struct DerivedTrace {
    std::vector<double> t;
    std::vector<double> prox;
    std::vector<double> ambient;
    std::vector<double> lfa;     // degrees, [0, 180]
    std::vector<double> energy;  // g^2

    std::size_t size() const { return t.size(); }
};

/// Angle in degrees between Earth's z-axis and the z-axis rotated by `q`.
/// Non-unit quaternions are normalized first; a zero quaternion throws.
double lean_forward_angle(const Quaternion& q);

/// Sum of squares of the acceleration components.
double energy(const Vec3& a);

/// Per-frame LFA and energy plus pass-through proximity and ambient light.
DerivedTrace derive(const Session& session);

/// `t_ms,prox,ambient,lfa_deg,energy_g2`
std::string format_derived_csv(const DerivedTrace& trace);
DerivedTrace parse_derived_csv(std::string_view text);

}  // namespace chewseg
