#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcf {

// Domain error carrying a short machine-readable code.
struct DomainError : std::runtime_error {
    std::string code;
    DomainError(std::string c, const std::string& msg)
        : std::runtime_error(msg), code(std::move(c)) {}
};

// Rotationally symmetric double cone x1 = m_plus*|y| (x1>=0),
// x1 = -m_minus*|y| (x1<0), hypersurface dimension n in R^{n+1}.
struct ConeSpec {
    int n = 2;
    double m_plus = 1.0;
    double m_minus = 1.0;

    void validate() const;
    // raw asymptotic slope lim u/r of the nappe in the (axial, radial) plane
    double raw_slope_plus() const { return 1.0 / m_plus; }
    double raw_slope_minus() const { return 1.0 / m_minus; }
};

enum class ProfileFamily {
    TripleJunction,      // u(0) = a, u'(0) = sqrt(3)/3
    ConnectedSymmetric,  // u(0) = a, u'(0) = 0
    GraphOverPlane,      // f(0) = b, f'(0) = 0, graph over the hyperplane
};

std::string to_string(ProfileFamily f);
ProfileFamily family_from_string(const std::string& s);

// Radial expander profile: u(r) with r the axial coordinate for the
// TripleJunction/ConnectedSymmetric families, or f(rho) with rho the radial
// coordinate for GraphOverPlane. Grid is the integrator's accepted steps.
struct Profile {
    ProfileFamily family = ProfileFamily::ConnectedSymmetric;
    int n = 2;
    double a = 1.0;      // shooting parameter (initial radius or height)
    double r_max = 50.0;
    double tol = 1e-10;
    std::vector<double> grid;  // strictly increasing, grid[0] == 0
    std::vector<double> u;
    std::vector<double> du;
    std::vector<double> ddu;  // second derivative (from the ODE for exact
                              // profiles, finite differences for perturbed ones)
    std::vector<double> residual;  // per-node local-error residual (0 where unchecked)
    double residual_sup = 0.0;

    std::size_t size() const { return grid.size(); }
    // (axial, radial) coordinates of node i
    double axial(std::size_t i) const;
    double radial(std::size_t i) const;
    double slope_at(std::size_t i) const;  // du/dr of the profile function
};

struct SlopeEstimate {
    double value = 0.0;
    double error_bound = 0.0;  // = c / r_used, c the computed tail constant
    double r_used = 0.0;
};

struct CurvatureSample {
    double k1 = 0.0;      // meridian curvature u_rr / (1+u_r^2)^{3/2}
    double k2 = 0.0;      // rotational curvature 1 / (u sqrt(1+u_r^2))
    double a_sq = 0.0;    // |A|^2 = k1^2 + (n-1) k2^2
};

// u_rr of the spherical-coordinate expander ODE.
double expander_ode_rhs(double u, double p, double r, int n);

// f_rho_rho of the rotational graph expander; regularized at rho = 0.
double graph_expander_rhs(double f, double q, double rho, int n);

struct IntegrateOptions {
    double guard_floor_frac = 1e-8;   // u >= frac * a
    double blowup_ceiling = 1e8;      // |u_r| <= ceiling
    double max_step = 0.0;            // grid spacing cap, 0 = auto
    std::size_t max_steps = 0;        // integrator step budget, 0 = default
    // residual re-check stride: 1 = every node, 0 = auto (~200 checks)
    std::size_t residual_stride = 0;
};

Profile integrate_profile(ProfileFamily family, double a, int n, double r_max,
                          double tol, const IntegrateOptions& opts = {});

// (u, u_r) at each requested radius (strictly increasing) without storing the
// dense grid; steep profiles cost ~ (1+m^2) r^2 integrator steps, so this is
// the cheap path for tail-only queries
std::vector<std::array<double, 2>> integrate_states(ProfileFamily family, double a,
                                                    int n,
                                                    const std::vector<double>& radii,
                                                    double tol,
                                                    const IntegrateOptions& opts = {});

struct SlopeOptions {
    double settle_tol = 1e-3;  // max drift of the raw estimator between radii
    double window_frac = 0.7;  // second sample radius, as a fraction of r_max
};

// Asymptotic slope from the symmetric estimator m(r) = (u/r + u_r)/2, whose
// error is c/r^4 (the 1/r^2 tails of u/r and u_r cancel); Richardson
// extrapolation in r^-4 between r_max and window_frac*r_max removes the
// leading term and their drift bounds the error. Throws DomainError
// "tail-not-settled" when the drift exceeds settle_tol.
SlopeEstimate asymptotic_slope(const Profile& p, const SlopeOptions& opts = {});

std::vector<CurvatureSample> curvature_profile(const Profile& p);

// --- serialization (External Interfaces) ---
// CSV "r,u,du,residual" and metadata JSON sidecar.
std::string profile_csv(const Profile& p);
std::string profile_meta_json(const Profile& p, const SlopeEstimate& s);

}  // namespace mcf
