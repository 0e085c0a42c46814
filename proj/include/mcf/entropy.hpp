#pragma once

#include <string>

#include "mcf/profiles.hpp"

namespace mcf {

// axial/radial offset of the Gaussian center; rotational symmetry reduces
// off-axis centers to d >= 0
struct GaussianCenter {
    double t = 0.0;
    double d = 0.0;
};

struct GaussianArea {
    double value = 0.0;
    double quad_error = 0.0;
};

struct EntropyReport {
    ConeSpec cone;
    double lambda = 0.0;
    GaussianCenter argmax;
    double f_at_origin = 0.0;
    double quad_error = 0.0;
    double opt_error = 0.0;
};

struct SimonsDensity {
    int n = 2;
    int p = 1;
    double theta = 0.0;
    double sigma_p = 0.0;
    double sigma_np = 0.0;
    double sigma_n = 0.0;
};

// volume of the unit p-sphere, 2 pi^{(p+1)/2} / Gamma((p+1)/2)
double sphere_volume(int p);

// angular kernel K_n(c) = int_{S^{n-1}} e^{c w.e} dw; K_n(0) = sigma_{n-1}
double angular_kernel(int n, double c);
// e^{-c} K_n(c), bounded and overflow-free for large c
double angular_kernel_scaled(int n, double c);

struct EntropyQuadOptions {
    double rel_tol = 1e-10;
    // Gaussian weight of the center+scale pair (t0 = scale^2); cones are
    // dilation invariant so scale != 1 must reproduce scale == 1 (tested)
    double scale = 1.0;
};

// Gaussian surface area of the double cone seen from the given center.
GaussianArea gaussian_area_cone(const ConeSpec& cone, const GaussianCenter& center,
                                const EntropyQuadOptions& opts = {});

struct EntropySearchOptions {
    EntropyQuadOptions quad;
    double opt_tol = 1e-7;
    int max_iter = 400;
};

// entropy = sup over centers of the Gaussian area (scale supremum collapsed
// by dilation invariance); multi-start simplex search on (t, d >= 0)
EntropyReport entropy_cone(const ConeSpec& cone, const EntropySearchOptions& opts = {});

// closed-form Gaussian density at the vertex of the minimal cone over
// S^p(sqrt(p/n)) x S^{n-p}(sqrt((n-p)/n))
SimonsDensity simons_density(int n, int p);

// same density via the radial quadrature (4pi)^{-(n+1)/2} vol(link) *
// int rho^n e^{-rho^2/4} drho; must agree with the closed form
double simons_density_numeric(int n, int p, double rel_tol = 1e-13);

enum class ReferenceShrinker { Hyperplane, Sphere, Cylinder };

// hyperplane -> 1; sphere(k) -> sigma_k (k/(2 pi e))^{k/2}; cylinder(k) ->
// entropy of its S^k cross-section
double reference_entropy(ReferenceShrinker kind, int k = 1);

std::string entropy_report_json(const EntropyReport& r);
std::string simons_density_json(const SimonsDensity& s);

}  // namespace mcf
