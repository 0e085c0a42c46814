#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mcf/profiles.hpp"
#include "mcf/stability.hpp"

namespace mcf {

enum class FlowGauge { Rescaled, Physical };

std::string to_string(FlowGauge g);

// Rotationally symmetric graph v(rho) > 0 on a uniform axial grid [0, R],
// evolving by the rescaled flow v_s = v_rr/(1+v_r^2) - (n-1)/v + (rho v_r - v)/2
// or the physical flow v_t = v_rr/(1+v_r^2) - (n-1)/v.
struct FlowState {
    FlowGauge gauge = FlowGauge::Rescaled;
    int n = 2;
    double time = 0.0;   // s (rescaled) or t (physical)
    double slope = 1.0;  // far-field cone slope dv/drho
    std::vector<double> rho;  // uniform, rho[0] == 0
    std::vector<double> v;    // positive while accepted

    std::size_t size() const { return rho.size(); }
    double spacing() const { return rho.size() > 1 ? rho[1] - rho[0] : 0.0; }
};

// per-step time series; min_E is the minimum over the grid of the expander
// mean-convexity quantity t*H - <x,nu>/2 (positive for outward-moving runs)
struct FlowMonitors {
    std::vector<double> time, min_v, argmin, min_E, tube_margin, proxy;
};

struct SingularityFit {
    double exponent = 0.0;   // min v ~ prefactor * (T - t)^exponent
    double prefactor = 0.0;
    double r2 = 0.0;
    double T = 0.0;          // extrapolated singular time
    bool valid = false;
};

struct SingularityEvent {
    std::string type = "none";  // "none" or "neck_pinch"
    double time = 0.0;
    double location = 0.0;
    SingularityFit fit;
    bool inconclusive = false;  // threshold met without blow-up signature
};

struct FlowTrace {
    std::vector<FlowState> snapshots;  // includes initial and final states
    FlowMonitors monitors;
    SingularityEvent event;
};

struct SingularityOptions {
    double v_frac = 1e-3;     // pinch threshold: min v < v_frac * initial min v
    double proxy_min = 1e3;   // curvature proxy ceiling for a real pinch
    std::size_t fit_samples = 30;
};

struct TubeOptions {
    double n_prime_cap = 10.0;
    std::vector<double> ladder = {1.5, 2.0, 3.0, 4.0, 6.0, 8.0};
};

struct TubeReport {
    bool pass = true;
    double n_prime = 1.0;  // smallest workable constant over the ladder
    double margin = 1.0;   // min over the ladder of 1 - dist * R / sqrt(t)
};

struct EvolveOptions {
    double dt_safety = 0.4;          // dt <= safety * drho^2
    double pinch_dt_frac = 0.05;     // and dt <= frac * min(v)^2 / (n-1)
    double snapshot_cadence = 0.1;   // flow-time units between stored states
    std::size_t max_steps = 2'000'000;
    SingularityOptions pinch;
    TubeOptions tube;
};

// resample an exact profile onto a uniform flow grid (u-families only)
FlowState flow_state_from_profile(const Profile& p, double R, std::size_t nodes,
                                  FlowGauge gauge);

// semi-implicit evolution: implicit linearized diffusion, explicit remainder;
// Neumann at rho = 0, Dirichlet at rho = R pinned to the far-field asymptote
// (constant in rescaled gauge, v_b(t)^2 = v_b(0)^2 - 2(n-1)(t-t0) in physical
// gauge); stops at the horizon or at the pinch threshold
FlowTrace evolve(const FlowState& init, double horizon,
                 const EvolveOptions& opts = {});

SingularityEvent detect_singularity(const FlowTrace& trace,
                                    const SingularityOptions& opts = {});

// tube estimate: distance to the cone <= sqrt(t)/R outside radius N'*R*sqrt(t)
// for each ladder R with one constant N'; rescaled states are checked at t = 1
TubeReport cone_tube_check(const FlowState& state, const ConeSpec& cone,
                           const TubeOptions& opts = {});

struct FlowLineOptions {
    EvolveOptions evolve;
    double interior_frac = 0.8;   // distance measured on rho <= frac * R
    double fit_grow_lo = 2.0;     // regression window: d in [lo, hi] * d(0)
    double fit_grow_hi = 100.0;
    double nonlinear_frac = 0.05;  // and d < frac * min of the stationary profile
};

struct FlowLineResult {
    FlowTrace outward, inward;
    double rate_outward = 0.0, rate_inward = 0.0;  // log-distance slopes
    double r2_outward = 0.0, r2_inward = 0.0;
};

// evolves the +epsilon and -epsilon normal graphs of an unstable expander in
// rescaled gauge and fits the exponential escape rate (expected ~ -mu1)
FlowLineResult flow_line_experiment(const Profile& p, const EigenResult& eigen,
                                    double epsilon, double horizon,
                                    const FlowLineOptions& opts = {});

std::string flow_state_csv(const FlowState& s);
std::string flow_monitors_csv(const FlowMonitors& m);
std::string singularity_event_json(const SingularityEvent& e);

}  // namespace mcf
