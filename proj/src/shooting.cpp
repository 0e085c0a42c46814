#include "mcf/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mcf/io.hpp"

namespace mcf {

SlopeEstimate slope_map(double a, ProfileFamily family, int n,
                        const SlopeMapOptions& opts) {
    // tail-only query: integrator steps cost ~ (1+m^2) r^2, so sample three
    // geometric radii without dense storage and extrapolate twice; the tail
    // expansion m(r) = M - a3 r^-4 - a5 r^-6 + ... makes the ladder exact to
    // O(r^-8) and the removed second-level term bounds the error
    double r_max = opts.r_max0 > 0 ? opts.r_max0 : 50.0;
    IntegrateOptions iopts;
    iopts.max_steps = 40'000'000;
    const double q = 0.8;
    DomainError last("tail-not-settled", "slope did not converge");
    for (int k = 0; k <= opts.max_escalations; ++k) {
        const std::vector<double> radii = {q * q * r_max, q * r_max, r_max};
        const auto st = integrate_states(family, a, n, radii, opts.tol, iopts);
        double m[3];
        for (int i = 0; i < 3; ++i) m[i] = 0.5 * (st[i][0] / radii[i] + st[i][1]);
        const double drift = m[2] - m[1];
        if (std::abs(drift) > opts.slope.settle_tol) {
            last = DomainError("tail-not-settled",
                               "slope estimator still drifting at r_max = " +
                                   io::fmt(r_max));
            r_max *= 2.0;
            continue;
        }
        const double f4 = std::pow(1.0 / q, 4.0) - 1.0;
        const double f6 = std::pow(1.0 / q, 6.0) - 1.0;
        const double M01 = m[1] + (m[1] - m[0]) / f4;
        const double M12 = m[2] + drift / f4;
        SlopeEstimate s;
        s.value = M12 + (M12 - M01) / f6;
        s.r_used = r_max;
        s.error_bound = std::abs(M12 - M01) + 100.0 * opts.tol;
        // slope-relative floor: large-m tails cannot (and need not) resolve
        // absolute targets tuned for the root-finding region
        const double target =
            std::max(opts.target_error, 2e-7 * std::abs(s.value));
        if (s.error_bound <= target) return s;
        last = DomainError("tail-not-settled",
                           "tail error bound above target at r_max = " +
                               io::fmt(r_max));
        r_max *= 2.0;
    }
    throw last;
}

std::size_t SlopeCurve::min_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].second.value < samples[best].second.value) best = i;
    return best;
}

SlopeCurve trace_slope_curve(ProfileFamily family, int n, double a_min,
                             double a_max, int samples, bool refine,
                             const TraceOptions& opts) {
    if (a_min <= 0 || a_max <= a_min)
        throw DomainError("bad-range", "need 0 < a_min < a_max");
    if (samples < 2) throw DomainError("bad-range", "need at least 2 samples");

    SlopeCurve c;
    c.family = family;
    c.n = n;
    const double la = std::log(a_min), lb = std::log(a_max);
    for (int i = 0; i < samples; ++i) {
        const double a = std::exp(la + (lb - la) * i / (samples - 1));
        c.samples.emplace_back(a, slope_map(a, family, n, opts.map));
    }

    if (refine) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i + 1 < c.samples.size(); ++i) {
                const double a0 = c.samples[i].first, a1 = c.samples[i + 1].first;
                if (a1 - a0 <= opts.min_spacing) continue;
                const double m0 = c.samples[i].second.value;
                const double m1 = c.samples[i + 1].second.value;
                // relative past m = 1: the curve sweeps decades of slope and an
                // absolute threshold would cascade on the steep wings
                const double dm =
                    std::abs(m1 - m0) / std::max({1.0, std::abs(m0), std::abs(m1)});
                if (dm <= opts.jump_threshold) continue;
                const double am = std::sqrt(a0 * a1);
                c.samples.insert(c.samples.begin() + i + 1,
                                 {am, slope_map(am, family, n, opts.map)});
                changed = true;
                ++i;
            }
        }
        c.refined = true;
    }
    return c;
}

RootSet find_profiles_for_slope(double M, const SlopeCurve& curve,
                                const FindOptions& opts) {
    if (curve.samples.size() < 2)
        throw DomainError("bad-curve", "slope curve has too few samples");

    SlopeMapOptions mopts;
    mopts.target_error = std::min(1e-6, 0.1 * opts.tol);
    // skip most of the escalation ladder: the estimator drift decays like
    // r^-4, so the needed radius scales like target^-1/4
    mopts.r_max0 = std::max(50.0, 4.0 * std::pow(mopts.target_error, -0.25));

    RootSet rs;
    rs.family = curve.family;
    rs.n = curve.n;
    rs.target = M;
    for (std::size_t i = 0; i + 1 < curve.samples.size(); ++i) {
        double a_lo = curve.samples[i].first;
        double a_hi = curve.samples[i + 1].first;
        double g_lo = curve.samples[i].second.value - M;
        double g_hi = curve.samples[i + 1].second.value - M;
        if (g_lo == 0.0) g_lo = -1e-300;  // count exact hits once, on the left
        if (g_lo * g_hi > 0) continue;

        Root root;
        root.bracket_lo = a_lo;
        root.bracket_hi = a_hi;
        double a_mid = 0.5 * (a_lo + a_hi), g_mid = g_lo;
        for (int k = 0; k < opts.max_bisections; ++k) {
            a_mid = 0.5 * (a_lo + a_hi);
            g_mid = slope_map(a_mid, curve.family, curve.n, mopts).value - M;
            if (std::abs(g_mid) <= opts.tol) break;
            if (g_lo * g_mid <= 0) {
                a_hi = a_mid;
            } else {
                a_lo = a_mid;
                g_lo = g_mid;
            }
        }
        root.a = a_mid;
        root.residual = std::abs(g_mid);
        rs.roots.push_back(root);
    }
    if (rs.roots.empty())
        throw DomainError("no-bracket-found",
                          "target slope is not attained on the traced curve");
    std::sort(rs.roots.begin(), rs.roots.end(),
              [](const Root& x, const Root& y) { return x.a < y.a; });
    return rs;
}

namespace {

double vec_angle(double x0, double y0, double x1, double y1) {
    return std::atan2(std::abs(x0 * y1 - y0 * x1), x0 * x1 + y0 * y1);
}

}  // namespace

std::array<double, 3> junction_geometry_check(const Profile& p) {
    if (p.size() == 0) throw DomainError("short-profile", "empty profile");
    const double q0 = p.du[0];
    // wing tangents and the in-plane direction at the junction circle
    return {vec_angle(1, q0, -1, q0), vec_angle(1, q0, 0, -1),
            vec_angle(-1, q0, 0, -1)};
}

std::string slope_curve_csv(const SlopeCurve& c) {
    std::ostringstream ss;
    ss << "a,slope,slope_error\n";
    for (const auto& [a, s] : c.samples)
        ss << io::fmt(a) << ',' << io::fmt(s.value) << ',' << io::fmt(s.error_bound)
           << '\n';
    return ss.str();
}

std::string root_set_json(const RootSet& r) {
    std::ostringstream ss;
    ss << "{\"family\":\"" << to_string(r.family) << "\",\"n\":" << r.n
       << ",\"target\":" << io::fmt(r.target) << ",\"roots\":[";
    for (std::size_t i = 0; i < r.roots.size(); ++i) {
        const auto& rt = r.roots[i];
        if (i) ss << ',';
        ss << "{\"a\":" << io::fmt(rt.a) << ",\"bracket\":[" << io::fmt(rt.bracket_lo)
           << ',' << io::fmt(rt.bracket_hi)
           << "],\"residual\":" << io::fmt(rt.residual) << '}';
    }
    ss << "]}\n";
    return ss.str();
}

}  // namespace mcf
