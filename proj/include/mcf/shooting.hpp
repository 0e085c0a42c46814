#pragma once

#include <array>
#include <vector>

#include "mcf/profiles.hpp"

namespace mcf {

struct SlopeMapOptions {
    double tol = 1e-10;          // integrator tolerance
    double target_error = 1e-6;  // escalate r_max until error_bound below this
    double r_max0 = 0.0;         // 0 = default 50 * max(1, a)
    int max_escalations = 8;
    SlopeOptions slope;
};

// m(a) = lim u_r, with automatic r_max escalation until the tail settles and
// the tail error bound drops below target_error.
SlopeEstimate slope_map(double a, ProfileFamily family, int n,
                        const SlopeMapOptions& opts = {});

struct SlopeCurve {
    ProfileFamily family = ProfileFamily::TripleJunction;
    int n = 2;
    std::vector<std::pair<double, SlopeEstimate>> samples;  // a strictly increasing
    bool refined = false;

    std::size_t min_index() const;  // index of the smallest slope sample
};

struct TraceOptions {
    SlopeMapOptions map;
    // refine intervals with |dm| / max(1, |m|) above this
    double jump_threshold = 0.05;
    double min_spacing = 1e-6;
};

SlopeCurve trace_slope_curve(ProfileFamily family, int n, double a_min,
                             double a_max, int samples, bool refine,
                             const TraceOptions& opts = {});

struct Root {
    double a = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double residual = 0.0;  // achieved |m(a) - M|
};

struct RootSet {
    ProfileFamily family = ProfileFamily::TripleJunction;
    int n = 2;
    double target = 0.0;
    std::vector<Root> roots;  // sorted by a
};

struct FindOptions {
    double tol = 1e-6;  // target |m(a) - M|
    int max_bisections = 80;
};

// Brackets sign changes of m(a) - M along the curve and bisects each.
// Throws DomainError("no-bracket-found") when M lies below the traced curve.
RootSet find_profiles_for_slope(double M, const SlopeCurve& curve,
                                const FindOptions& opts = {});

// Pairwise angles (radians) among the wing tangent (1, u_r(0)), its mirror
// (-1, u_r(0)) and the in-plane direction (0, -1):
// {wing-wing, wing(+)-plane, wing(-)-plane}.
std::array<double, 3> junction_geometry_check(const Profile& p);

std::string slope_curve_csv(const SlopeCurve& c);
std::string root_set_json(const RootSet& r);

}  // namespace mcf
