#include "mcf/ode.hpp"

#include <algorithm>
#include <cmath>

namespace mcf::ode {

namespace {

// Dormand-Prince 5(4) coefficients
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// error weights (5th order minus embedded 4th order)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

State2 axpy(const State2& y, double h, const State2& k) {
    return {y[0] + h * k[0], y[1] + h * k[1]};
}

}  // namespace

Solution integrate(const Rhs2& f, double t0, const State2& y0, double t_end,
                   const Options& opts, const std::vector<Guard>& guards) {
    Solution sol;
    double t = t0;
    State2 y = y0;
    double h = std::min(opts.h_init, t_end - t0);

    if (opts.dense) {
        sol.t.push_back(t);
        sol.y.push_back(y);
    }

    State2 k1 = f(t, y);
    double err_prev = 1.0;  // PI controller memory

    for (std::size_t step = 0; step < opts.max_steps; ++step) {
        if (t >= t_end) {
            sol.reason = StopReason::ReachedEnd;
            if (!opts.dense) {
                sol.t.push_back(t);
                sol.y.push_back(y);
            }
            return sol;
        }
        h = std::min(h, t_end - t);
        if (h < opts.h_min) {
            sol.reason = StopReason::StepUnderflow;
            if (!opts.dense) {
                sol.t.push_back(t);
                sol.y.push_back(y);
            }
            return sol;
        }

        const State2 k2 = f(t + c2 * h, axpy(y, h, {a21 * k1[0], a21 * k1[1]}));
        const State2 k3 = f(t + c3 * h, {y[0] + h * (a31 * k1[0] + a32 * k2[0]),
                                         y[1] + h * (a31 * k1[1] + a32 * k2[1])});
        const State2 k4 =
            f(t + c4 * h, {y[0] + h * (a41 * k1[0] + a42 * k2[0] + a43 * k3[0]),
                           y[1] + h * (a41 * k1[1] + a42 * k2[1] + a43 * k3[1])});
        const State2 k5 = f(
            t + c5 * h,
            {y[0] + h * (a51 * k1[0] + a52 * k2[0] + a53 * k3[0] + a54 * k4[0]),
             y[1] + h * (a51 * k1[1] + a52 * k2[1] + a53 * k3[1] + a54 * k4[1])});
        const State2 k6 =
            f(t + h, {y[0] + h * (a61 * k1[0] + a62 * k2[0] + a63 * k3[0] +
                                  a64 * k4[0] + a65 * k5[0]),
                      y[1] + h * (a61 * k1[1] + a62 * k2[1] + a63 * k3[1] +
                                  a64 * k4[1] + a65 * k5[1])});
        const State2 y_new = {
            y[0] + h * (b1 * k1[0] + b3 * k3[0] + b4 * k4[0] + b5 * k5[0] + b6 * k6[0]),
            y[1] + h * (b1 * k1[1] + b3 * k3[1] + b4 * k4[1] + b5 * k5[1] + b6 * k6[1])};
        const State2 k7 = f(t + h, y_new);

        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                   e6 * k6[i] + e7 * k7[i]);
            const double sc = opts.abs_tol +
                              opts.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            err = std::max(err, std::abs(ei) / sc);
        }

        if (err <= 1.0) {
            t += h;
            y = y_new;
            k1 = k7;  // FSAL
            sol.max_err_est = std::max(sol.max_err_est, err);
            if (opts.dense) {
                sol.t.push_back(t);
                sol.y.push_back(y);
            }
            for (const auto& g : guards) {
                if (g.trip(t, y)) {
                    sol.reason = StopReason::GuardEvent;
                    sol.guard_name = g.name;
                    if (!opts.dense) {
                        sol.t.push_back(t);
                        sol.y.push_back(y);
                    }
                    return sol;
                }
            }
            // PI step control (0.7/0.4 exponents for order 5)
            const double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) *
                               std::pow(err_prev, 0.4 / 5.0);
            h *= std::clamp(fac, 0.2, 5.0);
            h = std::min(h, opts.h_max);
            err_prev = std::max(err, 1e-10);
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0));
        }
    }
    sol.reason = StopReason::MaxStepsExceeded;
    if (!opts.dense) {
        sol.t.push_back(t);
        sol.y.push_back(y);
    }
    return sol;
}

}  // namespace mcf::ode
