#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace mcf {

// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) for small fixed-size
// systems, with PI step control and guard events that stop integration.
namespace ode {

using State2 = std::array<double, 2>;
using Rhs2 = std::function<State2(double, const State2&)>;

enum class StopReason {
    ReachedEnd,
    GuardEvent,        // a guard predicate fired
    StepUnderflow,
    MaxStepsExceeded,
};

struct Guard {
    // returns true when integration must halt at this state
    std::function<bool(double, const State2&)> trip;
    std::string name;
};

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double h_init = 1e-4;
    double h_min = 1e-14;
    double h_max = 1.0;
    std::size_t max_steps = 2'000'000;
    bool dense = true;  // store every accepted step
};

struct Solution {
    std::vector<double> t;
    std::vector<State2> y;
    StopReason reason = StopReason::ReachedEnd;
    std::string guard_name;      // set when reason == GuardEvent
    double max_err_est = 0.0;    // largest accepted local error estimate
};

Solution integrate(const Rhs2& f, double t0, const State2& y0, double t_end,
                   const Options& opts, const std::vector<Guard>& guards = {});

}  // namespace ode
}  // namespace mcf
