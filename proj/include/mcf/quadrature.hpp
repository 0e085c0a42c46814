#pragma once

#include <functional>

namespace mcf::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;   // accumulated error estimate
    bool converged = true;
};

// Single Gauss-Kronrod 7-15 panel; err is the panel error estimate.
double gk15(const std::function<double(double)>& f, double a, double b, double& err);

// Adaptive bisection of GK15 panels on [a, b].
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, double abs_tol = 1e-15,
                 int max_panels = 4000);

// Fixed-order Gauss-Legendre on [a, b]; npts in {16, 32, 64, 128, 256}.
double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      int npts);

}  // namespace mcf::quad
