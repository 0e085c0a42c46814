#include "mcf/flowsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mcf/io.hpp"

namespace mcf {

std::string to_string(FlowGauge g) {
    return g == FlowGauge::Rescaled ? "rescaled" : "physical";
}

namespace {

struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    const std::size_t n = x.size();
    if (n < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (det == 0) return f;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    const double ss_tot = syy - sy * sy / n;
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.slope * x[i] + f.intercept);
        ss_res += e * e;
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

// Hermite resampling of a u-family profile onto arbitrary axial positions
void resample_profile(const Profile& p, const std::vector<double>& rho,
                      std::vector<double>& v, std::vector<double>& dv) {
    if (p.family == ProfileFamily::GraphOverPlane)
        throw DomainError("unsupported-family",
                          "flow initial data come from the u-families");
    if (p.ddu.size() != p.size())
        throw DomainError("missing-ddu", "profile lacks second derivatives");
    v.resize(rho.size());
    dv.resize(rho.size());
    std::size_t i = 0;
    for (std::size_t k = 0; k < rho.size(); ++k) {
        const double r = rho[k];
        if (r > p.grid.back() + 1e-12)
            throw DomainError("short-profile", "profile does not reach the flow domain");
        while (i + 2 < p.size() && p.grid[i + 1] < r) ++i;
        const double hh = p.grid[i + 1] - p.grid[i];
        const double t = std::clamp((r - p.grid[i]) / hh, 0.0, 1.0);
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t),
                     h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        v[k] = h00 * p.u[i] + hh * h10 * p.du[i] + h01 * p.u[i + 1] +
               hh * h11 * p.du[i + 1];
        dv[k] = h00 * p.du[i] + hh * h10 * p.ddu[i] + h01 * p.du[i + 1] +
                hh * h11 * p.ddu[i + 1];
    }
}

// tube estimate against the cone line v = slope * rho
TubeReport tube_eval(const std::vector<double>& rho, const std::vector<double>& v,
                     double slope, double t, const TubeOptions& opts) {
    TubeReport rep;
    const double st = std::sqrt(t);
    const double wc = std::sqrt(1 + slope * slope);
    for (double R : opts.ladder) {
        const double far = opts.n_prime_cap * R * st;
        double dmax = -1.0;
        for (std::size_t i = 0; i < rho.size(); ++i) {
            const double dist = std::abs(v[i] - slope * rho[i]) / wc;
            const double xabs = std::hypot(rho[i], v[i]);
            // fitted constant: how far out this level's violations reach
            if (dist > st / R)
                rep.n_prime = std::max(rep.n_prime, xabs / (R * st));
            if (xabs >= far) dmax = std::max(dmax, dist);
        }
        if (dmax < 0) continue;  // ladder level unconstrained on this domain
        const double margin = 1.0 - dmax * R / st;
        rep.margin = std::min(rep.margin, margin);
        if (margin < 0) rep.pass = false;
    }
    return rep;
}

struct StepScratch {
    std::vector<double> vr, vrr, lower, diag, upper, rhs;
};

double curvature_proxy(double vrr, double vr, double v, int n) {
    const double w2 = 1 + vr * vr;
    return std::abs(vrr) / (w2 * std::sqrt(w2)) + (n - 1) / v;
}

void derivatives(const FlowState& st, StepScratch& sc) {
    const std::size_t N = st.size();
    const double h = st.spacing();
    sc.vr.resize(N);
    sc.vrr.resize(N);
    for (std::size_t i = 1; i + 1 < N; ++i) {
        sc.vr[i] = (st.v[i + 1] - st.v[i - 1]) / (2 * h);
        sc.vrr[i] = (st.v[i + 1] - 2 * st.v[i] + st.v[i - 1]) / (h * h);
    }
    sc.vr[0] = 0.0;  // symmetry axis
    sc.vrr[0] = 2 * (st.v[1] - st.v[0]) / (h * h);
    sc.vr[N - 1] = (st.v[N - 1] - st.v[N - 2]) / h;
    sc.vrr[N - 1] = sc.vrr[N - 2];
}

void record_monitors(const FlowState& st, StepScratch& sc, FlowMonitors& m,
                     const TubeOptions& tube) {
    derivatives(st, sc);
    const std::size_t N = st.size();
    const double t_eff = st.gauge == FlowGauge::Physical ? st.time : 1.0;
    double vmin = std::numeric_limits<double>::infinity();
    std::size_t imin = 0;
    double emin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < N; ++i) {
        if (st.v[i] < vmin) {
            vmin = st.v[i];
            imin = i;
        }
        const double w = std::sqrt(1 + sc.vr[i] * sc.vr[i]);
        const double H = sc.vrr[i] / (w * w * w) - (st.n - 1) / (st.v[i] * w);
        const double xdn = (st.v[i] - st.rho[i] * sc.vr[i]) / w;
        emin = std::min(emin, t_eff * H - 0.5 * xdn);
    }
    m.time.push_back(st.time);
    m.min_v.push_back(vmin);
    m.argmin.push_back(st.rho[imin]);
    m.min_E.push_back(emin);
    m.tube_margin.push_back(tube_eval(st.rho, st.v, st.slope, t_eff, tube).margin);
    m.proxy.push_back(curvature_proxy(sc.vrr[imin], sc.vr[imin], st.v[imin], st.n));
}

void thomas_solve(std::vector<double>& lower, std::vector<double>& diag,
                  std::vector<double>& upper, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

}  // namespace

FlowState flow_state_from_profile(const Profile& p, double R, std::size_t nodes,
                                  FlowGauge gauge) {
    if (nodes < 5) throw DomainError("bad-grid", "too few flow nodes");
    if (R <= 0) throw DomainError("bad-grid", "flow domain must be positive");
    FlowState st;
    st.gauge = gauge;
    st.n = p.n;
    st.time = gauge == FlowGauge::Physical ? 1.0 : 0.0;
    st.rho.resize(nodes);
    const double h = R / (nodes - 1);
    for (std::size_t i = 0; i < nodes; ++i) st.rho[i] = i * h;
    std::vector<double> dv;
    resample_profile(p, st.rho, st.v, dv);
    // far-field slope from the symmetric tail estimator at the profile end
    const std::size_t last = p.size() - 1;
    st.slope = 0.5 * (p.u[last] / p.grid[last] + p.du[last]);
    return st;
}

FlowTrace evolve(const FlowState& init, double horizon, const EvolveOptions& opts) {
    const std::size_t N = init.size();
    if (N < 5) throw DomainError("bad-state", "too few flow nodes");
    const double h = init.spacing();
    for (std::size_t i = 0; i + 1 < N; ++i)
        if (std::abs(init.rho[i + 1] - init.rho[i] - h) > 1e-9 * h)
            throw DomainError("bad-state", "flow grid must be uniform");
    for (double x : init.v)
        if (!(x > 0)) throw DomainError("bad-state", "radius samples must be positive");
    if (!(horizon > 0)) throw DomainError("bad-horizon", "horizon must be positive");

    const bool physical = init.gauge == FlowGauge::Physical;
    const double t0 = init.time, t_end = init.time + horizon;
    const double vb0 = init.v.back();
    double vmin0 = *std::min_element(init.v.begin(), init.v.end());

    FlowTrace trace;
    FlowState st = init;
    StepScratch sc;
    record_monitors(st, sc, trace.monitors, opts.tube);
    trace.snapshots.push_back(st);
    double next_snap = st.time + opts.snapshot_cadence;

    const double dt_base = opts.dt_safety * h * h;
    std::size_t steps = 0;
    bool stopped = false;
    while (st.time < t_end && !stopped) {
        if (++steps > opts.max_steps)
            throw DomainError("max-steps", "flow step budget exhausted");
        const double vmin = *std::min_element(st.v.begin(), st.v.end());
        double dt = std::min(dt_base, opts.pinch_dt_frac * vmin * vmin / (st.n - 1));
        dt = std::min(dt, t_end - st.time);
        if (!(dt > 1e-14 * std::max(1.0, std::abs(st.time))))
            throw DomainError("step-collapse",
                              "step size collapsed without a pinch signature");

        derivatives(st, sc);
        sc.lower.assign(N - 1, 0.0);
        sc.diag.assign(N - 1, 0.0);
        sc.upper.assign(N - 1, 0.0);
        sc.rhs.assign(N - 1, 0.0);
        for (std::size_t i = 0; i + 1 < N; ++i) {
            const double D = 1.0 / (1 + sc.vr[i] * sc.vr[i]);
            const double lam = dt * D / (h * h);
            double expl = -(st.n - 1) / st.v[i];
            if (!physical) expl += 0.5 * (st.rho[i] * sc.vr[i] - st.v[i]);
            if (i == 0) {
                // Neumann ghost: v_{-1} = v_1
                sc.diag[0] = 1 + 2 * lam;
                sc.upper[0] = -2 * lam;
            } else {
                sc.lower[i] = -lam;
                sc.diag[i] = 1 + 2 * lam;
                sc.upper[i] = -lam;
            }
            sc.rhs[i] = st.v[i] + dt * expl;
        }
        const double t_new = st.time + dt;
        double vb = vb0;
        if (physical) {
            const double vb2 = vb0 * vb0 - 2.0 * (st.n - 1) * (t_new - t0);
            if (vb2 <= 0)
                throw DomainError("boundary-extinct",
                                  "far-field asymptote shrank to zero; enlarge R");
            vb = std::sqrt(vb2);
        }
        sc.rhs[N - 2] += dt / (h * h) / (1 + sc.vr[N - 2] * sc.vr[N - 2]) * vb;
        thomas_solve(sc.lower, sc.diag, sc.upper, sc.rhs);

        bool positive = true;
        for (std::size_t i = 0; i + 1 < N; ++i) {
            st.v[i] = sc.rhs[i];
            if (!(st.v[i] > 0)) positive = false;
        }
        st.v[N - 1] = vb;
        st.time = t_new;
        record_monitors(st, sc, trace.monitors, opts.tube);

        const double vmin_new = trace.monitors.min_v.back();
        if (!positive || vmin_new < opts.pinch.v_frac * vmin0) stopped = true;
        if (st.time >= next_snap - 1e-12 && !stopped) {
            trace.snapshots.push_back(st);
            next_snap += opts.snapshot_cadence;
        }
    }
    trace.snapshots.push_back(st);
    trace.event = detect_singularity(trace, opts.pinch);
    return trace;
}

SingularityEvent detect_singularity(const FlowTrace& trace,
                                    const SingularityOptions& opts) {
    SingularityEvent ev;
    const auto& m = trace.monitors;
    if (m.min_v.empty()) return ev;
    const double v0 = m.min_v.front();
    std::size_t k = m.min_v.size();
    for (std::size_t i = 0; i < m.min_v.size(); ++i)
        if (m.min_v[i] < opts.v_frac * v0) {
            k = i;
            break;
        }
    if (k == m.min_v.size()) return ev;

    ev.time = m.time[k];
    ev.location = m.argmin[k];
    if (m.proxy[k] >= opts.proxy_min) {
        ev.type = "neck_pinch";
    } else {
        ev.inconclusive = true;
        return ev;
    }

    const std::size_t lo = k > opts.fit_samples ? k - opts.fit_samples : 1;
    std::vector<double> ts, v2;
    for (std::size_t i = lo; i < k; ++i) {
        ts.push_back(m.time[i]);
        v2.push_back(m.min_v[i] * m.min_v[i]);
    }
    if (ts.size() < 5) return ev;
    const auto lin = fit_line(ts, v2);  // v^2 = a + b t, singular at T = -a/b
    if (!(lin.slope < 0)) return ev;
    const double T = -lin.intercept / lin.slope;
    if (!(T > ts.back())) return ev;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        lx.push_back(std::log(T - ts[i]));
        ly.push_back(std::log(std::sqrt(v2[i])));
    }
    const auto ll = fit_line(lx, ly);
    ev.fit.T = T;
    ev.fit.exponent = ll.slope;
    // prefactor from the v^2 slope: insensitive to the error in T
    ev.fit.prefactor = std::sqrt(-lin.slope);
    ev.fit.r2 = ll.r2;
    ev.fit.valid = true;
    return ev;
}

TubeReport cone_tube_check(const FlowState& state, const ConeSpec& cone,
                           const TubeOptions& opts) {
    cone.validate();
    const double t = state.gauge == FlowGauge::Physical ? state.time : 1.0;
    if (!(t > 0)) throw DomainError("bad-state", "physical time must be positive");
    return tube_eval(state.rho, state.v, cone.raw_slope_plus(), t, opts);
}

FlowLineResult flow_line_experiment(const Profile& p, const EigenResult& eigen,
                                    double epsilon, double horizon,
                                    const FlowLineOptions& opts) {
    if (!(eigen.mu1 < 0))
        throw DomainError("not-applicable",
                          "flow-line experiment needs an unstable expander");
    if (!(epsilon > 0)) throw DomainError("bad-epsilon", "epsilon must be positive");

    const double R = 0.8 * p.grid.back();
    const std::size_t nodes = 601;
    FlowState base = flow_state_from_profile(p, R, nodes, FlowGauge::Rescaled);
    std::vector<double> v0, dv0;
    resample_profile(p, base.rho, v0, dv0);

    // vertical offset equivalent to the normal graph: delta v = eps * f * w
    std::vector<double> offset(nodes, 0.0);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double r = base.rho[i];
        // f as a function of the axial coordinate along the eigen arc grid
        const auto it = std::upper_bound(eigen.r.begin(), eigen.r.end(), r);
        std::size_t j = it - eigen.r.begin();
        double f = 0.0;
        if (j > 0 && j < eigen.r.size()) {
            const double tt = (r - eigen.r[j - 1]) / (eigen.r[j] - eigen.r[j - 1]);
            f = (1 - tt) * eigen.f[j - 1] + tt * eigen.f[j];
        } else if (j == 0) {
            f = eigen.f[0];
        }
        offset[i] = f * std::sqrt(1 + dv0[i] * dv0[i]);
    }

    FlowLineResult result;
    const double vmin_station = *std::min_element(v0.begin(), v0.end());
    // reference run: the discrete stationarity drift excites the unstable mode
    // on its own, so distances are taken against the evolved epsilon = 0 state
    // rather than the resampled profile
    base.v = v0;
    const auto ref = evolve(base, horizon, opts.evolve);
    for (int sign : {+1, -1}) {
        FlowState st = base;
        for (std::size_t i = 0; i < nodes; ++i) st.v[i] = v0[i] + sign * epsilon * offset[i];
        auto trace = evolve(st, horizon, opts.evolve);
        std::vector<double> ss, ld;
        double d0 = 0.0;
        const std::size_t ns = std::min(trace.snapshots.size(), ref.snapshots.size());
        for (std::size_t k = 0; k < ns; ++k) {
            const auto& snap = trace.snapshots[k];
            const auto& rsnap = ref.snapshots[k];
            if (std::abs(snap.time - rsnap.time) > 0.5 * opts.evolve.snapshot_cadence)
                break;
            double d = 0.0;
            for (std::size_t i = 0; i < nodes; ++i) {
                if (snap.rho[i] > opts.interior_frac * R) break;
                d = std::max(d, std::abs(snap.v[i] - rsnap.v[i]));
            }
            if (d0 == 0.0) d0 = d;
            if (d >= opts.fit_grow_lo * d0 && d <= opts.fit_grow_hi * d0 &&
                d < opts.nonlinear_frac * vmin_station) {
                ss.push_back(snap.time);
                ld.push_back(std::log(d));
            }
        }
        const auto fit = fit_line(ss, ld);
        if (sign > 0) {
            result.outward = std::move(trace);
            result.rate_outward = fit.slope;
            result.r2_outward = fit.r2;
        } else {
            result.inward = std::move(trace);
            result.rate_inward = fit.slope;
            result.r2_inward = fit.r2;
        }
    }
    return result;
}

std::string flow_state_csv(const FlowState& s) {
    std::ostringstream ss;
    ss << "rho,v\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        ss << io::fmt(s.rho[i]) << ',' << io::fmt(s.v[i]) << '\n';
    return ss.str();
}

std::string flow_monitors_csv(const FlowMonitors& m) {
    std::ostringstream ss;
    ss << "time,min_v,argmin,min_E,tube_margin\n";
    for (std::size_t i = 0; i < m.time.size(); ++i)
        ss << io::fmt(m.time[i]) << ',' << io::fmt(m.min_v[i]) << ','
           << io::fmt(m.argmin[i]) << ',' << io::fmt(m.min_E[i]) << ','
           << io::fmt(m.tube_margin[i]) << '\n';
    return ss.str();
}

std::string singularity_event_json(const SingularityEvent& e) {
    std::ostringstream ss;
    ss << "{\"type\":\"" << e.type << "\",\"time\":" << io::fmt(e.time)
       << ",\"location\":" << io::fmt(e.location)
       << ",\"inconclusive\":" << (e.inconclusive ? "true" : "false");
    if (e.fit.valid)
        ss << ",\"fit\":{\"exponent\":" << io::fmt(e.fit.exponent)
           << ",\"prefactor\":" << io::fmt(e.fit.prefactor)
           << ",\"r2\":" << io::fmt(e.fit.r2) << ",\"T\":" << io::fmt(e.fit.T) << "}";
    ss << "}\n";
    return ss.str();
}

}  // namespace mcf
