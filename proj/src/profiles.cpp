#include "mcf/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mcf/io.hpp"
#include "mcf/ode.hpp"

namespace mcf {

void ConeSpec::validate() const {
    if (n < 2) throw DomainError("bad-cone", "cone dimension must be >= 2");
    if (m_plus <= 0 || m_minus <= 0)
        throw DomainError("bad-cone", "cone slopes must be positive");
}

std::string to_string(ProfileFamily f) {
    switch (f) {
        case ProfileFamily::TripleJunction: return "triple";
        case ProfileFamily::ConnectedSymmetric: return "connected";
        case ProfileFamily::GraphOverPlane: return "graph";
    }
    return "?";
}

ProfileFamily family_from_string(const std::string& s) {
    if (s == "triple") return ProfileFamily::TripleJunction;
    if (s == "connected") return ProfileFamily::ConnectedSymmetric;
    if (s == "graph") return ProfileFamily::GraphOverPlane;
    throw DomainError("bad-family", "unknown profile family: " + s);
}

double Profile::axial(std::size_t i) const {
    return family == ProfileFamily::GraphOverPlane ? u[i] : grid[i];
}

double Profile::radial(std::size_t i) const {
    return family == ProfileFamily::GraphOverPlane ? grid[i] : u[i];
}

double Profile::slope_at(std::size_t i) const { return du[i]; }

double expander_ode_rhs(double u, double p, double r, int n) {
    if (u <= 0)
        throw DomainError("nonpositive-u",
                          "profile left the admissible region (u <= 0)");
    return (1.0 + p * p) * ((n - 1) / u + 0.5 * u - 0.5 * r * p);
}

double graph_expander_rhs(double f, double q, double rho, int n) {
    if (rho < 0) throw DomainError("negative-rho", "rho must be nonnegative");
    if (rho == 0.0) {
        if (q != 0.0)
            throw DomainError("axis-slope",
                              "rho = 0 requires f_rho = 0 for a smooth axis crossing");
        return f / (2.0 * n);
    }
    return (1.0 + q * q) * (0.5 * (f - rho * q) - (n - 1) * q / rho);
}

namespace {

ode::Rhs2 family_rhs(ProfileFamily family, int n) {
    if (family == ProfileFamily::GraphOverPlane) {
        return [n](double rho, const ode::State2& y) -> ode::State2 {
            return {y[1], graph_expander_rhs(y[0], y[1], rho, n)};
        };
    }
    return [n](double r, const ode::State2& y) -> ode::State2 {
        return {y[1], expander_ode_rhs(y[0], y[1], r, n)};
    };
}

}  // namespace

Profile integrate_profile(ProfileFamily family, double a, int n, double r_max,
                          double tol, const IntegrateOptions& iopts) {
    if (a <= 0) throw DomainError("bad-a", "shooting parameter must be positive");
    if (tol <= 0) throw DomainError("bad-tol", "tolerance must be positive");
    if (r_max <= 0) throw DomainError("bad-rmax", "r_max must be positive");
    if (n < 2) throw DomainError("bad-n", "dimension must be >= 2");

    const auto rhs = family_rhs(family, n);

    double r0 = 0.0;
    ode::State2 y0;
    switch (family) {
        case ProfileFamily::TripleJunction:
            y0 = {a, std::sqrt(3.0) / 3.0};
            break;
        case ProfileFamily::ConnectedSymmetric:
            y0 = {a, 0.0};
            break;
        case ProfileFamily::GraphOverPlane: {
            // rho = 0 is a regular-singular point: one Taylor step
            const double h0 = 1e-4 * std::max(1.0, a);
            r0 = h0;
            y0 = {a + a * h0 * h0 / (4.0 * n), a * h0 / (2.0 * n)};
            break;
        }
    }

    ode::Options opts;
    opts.rel_tol = tol;
    opts.abs_tol = tol * 1e-2;
    opts.h_init = 1e-6 * std::max(1.0, a);
    opts.h_max = iopts.max_step > 0 ? iopts.max_step : std::max(1.0, 0.02 * r_max);
    if (iopts.max_steps > 0) opts.max_steps = iopts.max_steps;

    const double floor = iopts.guard_floor_frac * a;
    std::vector<ode::Guard> guards;
    guards.push_back({[floor](double, const ode::State2& y) { return y[0] < floor; },
                      "guard-floor"});
    guards.push_back({[ceil = iopts.blowup_ceiling](double, const ode::State2& y) {
                          return std::abs(y[1]) > ceil;
                      },
                      "blow-up"});

    const auto sol = ode::integrate(rhs, r0, y0, r_max, opts, guards);
    switch (sol.reason) {
        case ode::StopReason::ReachedEnd:
            break;
        case ode::StopReason::GuardEvent:
            throw DomainError(sol.guard_name,
                              "integration halted by " + sol.guard_name + " event");
        case ode::StopReason::StepUnderflow:
            throw DomainError("step-underflow", "step size underflow");
        case ode::StopReason::MaxStepsExceeded:
            throw DomainError("max-steps", "step budget exhausted");
    }

    Profile p;
    p.family = family;
    p.n = n;
    p.a = a;
    p.r_max = r_max;
    p.tol = tol;
    if (family == ProfileFamily::GraphOverPlane) {
        // prepend the axis node dropped by the Taylor start
        p.grid.push_back(0.0);
        p.u.push_back(a);
        p.du.push_back(0.0);
    }
    p.grid.insert(p.grid.end(), sol.t.begin(), sol.t.end());
    for (const auto& y : sol.y) {
        p.u.push_back(y[0]);
        p.du.push_back(y[1]);
    }
    p.ddu.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        p.ddu[i] = family == ProfileFamily::GraphOverPlane
                       ? graph_expander_rhs(p.u[i], p.du[i], p.grid[i], n)
                       : expander_ode_rhs(p.u[i], p.du[i], p.grid[i], n);
    p.residual.assign(p.size(), 0.0);

    // residual check: re-propagate each checked step at a tighter tolerance
    // and compare against the stored node
    std::size_t stride = iopts.residual_stride;
    if (stride == 0) stride = std::max<std::size_t>(1, p.size() / 200);
    ode::Options ropts = opts;
    ropts.rel_tol = tol * 1e-2;
    ropts.abs_tol = tol * 1e-4;
    ropts.dense = false;
    for (std::size_t i = 0; i + 1 < p.size(); i += stride) {
        if (p.grid[i + 1] <= p.grid[i]) continue;
        ropts.h_init = 0.5 * (p.grid[i + 1] - p.grid[i]);
        const auto s1 = ode::integrate(rhs, p.grid[i], {p.u[i], p.du[i]},
                                       p.grid[i + 1], ropts);
        const double res = std::max(std::abs(s1.y.back()[0] - p.u[i + 1]),
                                    std::abs(s1.y.back()[1] - p.du[i + 1])) /
                           std::max(1.0, std::abs(p.u[i + 1]));
        p.residual[i + 1] = res;
        p.residual_sup = std::max(p.residual_sup, res);
    }
    return p;
}

std::vector<std::array<double, 2>> integrate_states(ProfileFamily family, double a,
                                                    int n,
                                                    const std::vector<double>& radii,
                                                    double tol,
                                                    const IntegrateOptions& iopts) {
    if (a <= 0) throw DomainError("bad-a", "shooting parameter must be positive");
    if (tol <= 0) throw DomainError("bad-tol", "tolerance must be positive");
    if (n < 2) throw DomainError("bad-n", "dimension must be >= 2");
    for (std::size_t i = 0; i < radii.size(); ++i)
        if (radii[i] <= (i ? radii[i - 1] : 0.0))
            throw DomainError("bad-rmax", "radii must be positive and increasing");

    const auto rhs = family_rhs(family, n);
    double r = 0.0;
    ode::State2 y;
    switch (family) {
        case ProfileFamily::TripleJunction:
            y = {a, std::sqrt(3.0) / 3.0};
            break;
        case ProfileFamily::ConnectedSymmetric:
            y = {a, 0.0};
            break;
        case ProfileFamily::GraphOverPlane: {
            const double h0 = 1e-4 * std::max(1.0, a);
            r = h0;
            y = {a + a * h0 * h0 / (4.0 * n), a * h0 / (2.0 * n)};
            break;
        }
    }

    ode::Options opts;
    opts.rel_tol = tol;
    opts.abs_tol = tol * 1e-2;
    opts.h_init = 1e-6 * std::max(1.0, a);
    opts.h_max = iopts.max_step > 0 ? iopts.max_step
                                    : std::max(1.0, 0.02 * radii.back());
    if (iopts.max_steps > 0) opts.max_steps = iopts.max_steps;
    opts.dense = false;

    const double floor = iopts.guard_floor_frac * a;
    std::vector<ode::Guard> guards;
    guards.push_back({[floor](double, const ode::State2& s) { return s[0] < floor; },
                      "guard-floor"});
    guards.push_back({[ceil = iopts.blowup_ceiling](double, const ode::State2& s) {
                          return std::abs(s[1]) > ceil;
                      },
                      "blow-up"});

    std::vector<std::array<double, 2>> out;
    for (double r_next : radii) {
        const auto sol = ode::integrate(rhs, r, y, r_next, opts, guards);
        switch (sol.reason) {
            case ode::StopReason::ReachedEnd:
                break;
            case ode::StopReason::GuardEvent:
                throw DomainError(sol.guard_name,
                                  "integration halted by " + sol.guard_name + " event");
            case ode::StopReason::StepUnderflow:
                throw DomainError("step-underflow", "step size underflow");
            case ode::StopReason::MaxStepsExceeded:
                throw DomainError("max-steps", "step budget exhausted");
        }
        r = sol.t.back();
        y = sol.y.back();
        out.push_back({y[0], y[1]});
    }
    return out;
}

SlopeEstimate asymptotic_slope(const Profile& p, const SlopeOptions& opts) {
    if (p.size() < 8)
        throw DomainError("short-profile", "profile has too few nodes");
    if (opts.window_frac <= 0 || opts.window_frac >= 1)
        throw DomainError("bad-window", "window_frac must lie in (0, 1)");

    // the node closest to window_frac * r_max
    const double r_mid = opts.window_frac * p.r_max;
    std::size_t i2 = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
        if (std::abs(p.grid[i] - r_mid) < std::abs(p.grid[i2] - r_mid)) i2 = i;
    const std::size_t i1 = p.size() - 1;
    const double r1 = p.grid[i1], r2 = p.grid[i2];
    if (i2 == i1 || r2 <= 0)
        throw DomainError("short-profile", "no interior tail node to compare");

    const auto est = [&p](std::size_t i) {
        return 0.5 * (p.u[i] / p.grid[i] + p.du[i]);
    };
    const double m1 = est(i1), m2 = est(i2);
    const double drift = m1 - m2;
    if (std::abs(drift) > opts.settle_tol)
        throw DomainError("tail-not-settled",
                          "slope estimator still drifting at r_max; increase r_max");

    // m(r) = M - a3/r^4 + O(r^-6): one Richardson step removes the a3 term and
    // the drift itself (about 3x the removed term) bounds the error
    const double factor = std::pow(r1 / r2, 4.0) - 1.0;
    SlopeEstimate s;
    s.value = m1 + drift / factor;
    s.r_used = r1;
    s.error_bound = std::abs(drift) + 100.0 * p.tol;
    return s;
}

std::vector<CurvatureSample> curvature_profile(const Profile& p) {
    std::vector<CurvatureSample> out(p.size());
    const bool has_ddu = p.ddu.size() == p.size();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double r = p.grid[i], u = p.u[i], q = p.du[i];
        const double w = std::sqrt(1 + q * q);
        CurvatureSample c;
        if (p.family == ProfileFamily::GraphOverPlane) {
            const double fpp =
                has_ddu ? p.ddu[i] : graph_expander_rhs(u, q, r, p.n);
            c.k1 = fpp / (w * w * w);
            // rotational curvature f_rho/(rho w); the axis is umbilic so the
            // limit is f_rho_rho(0)
            c.k2 = r > 0 ? q / (r * w) : fpp;
        } else {
            const double upp = has_ddu ? p.ddu[i] : expander_ode_rhs(u, q, r, p.n);
            c.k1 = upp / (w * w * w);
            c.k2 = 1.0 / (u * w);
        }
        c.a_sq = c.k1 * c.k1 + (p.n - 1) * c.k2 * c.k2;
        out[i] = c;
    }
    return out;
}

std::string profile_csv(const Profile& p) {
    std::ostringstream ss;
    ss << "r,u,du,residual\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        ss << io::fmt(p.grid[i]) << ',' << io::fmt(p.u[i]) << ',' << io::fmt(p.du[i])
           << ',' << io::fmt(p.residual[i]) << '\n';
    }
    return ss.str();
}

std::string profile_meta_json(const Profile& p, const SlopeEstimate& s) {
    std::ostringstream ss;
    ss << "{\"family\":\"" << to_string(p.family) << "\",\"n\":" << p.n
       << ",\"a\":" << io::fmt(p.a) << ",\"r_max\":" << io::fmt(p.r_max)
       << ",\"tol\":" << io::fmt(p.tol) << ",\"slope\":" << io::fmt(s.value)
       << ",\"slope_error\":" << io::fmt(s.error_bound) << "}\n";
    return ss.str();
}

}  // namespace mcf
