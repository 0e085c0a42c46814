#pragma once

#include <string>
#include <vector>

#include "mcf/profiles.hpp"

namespace mcf {

// Discrete stability operator -L = -(1/w)(w f')' - (|A|^2 - 1/2) f on a
// uniform arc-length grid along the profile, w = e^{|x|^2/4} R^{n-1} with R
// the rotational radius. Stored in overflow-free form: log-weights plus the
// mass-scaled symmetric tridiagonal T = M^{-1/2} A M^{-1/2}, Dirichlet node
// at the truncation end already eliminated.
struct OperatorPencil {
    int n = 2;
    double h = 0.0;           // arc-length spacing
    double truncation = 0.0;  // arc length of the Dirichlet end
    // node data, size N+1; node N is the Dirichlet node
    std::vector<double> s, r, u, xsq, a_sq, log_w;
    // reduced tridiagonal of size N (nodes 0..N-1; node 0 is Neumann)
    std::vector<double> diag, off;
    std::vector<double> log_mass;  // log M_ii of the retained nodes
};

struct AssembleOptions {
    double truncation = 0.0;  // 0 = full profile arc length
    double h = 0.0;           // 0 = truncation / 2000
};

OperatorPencil assemble_operator(const Profile& p, const AssembleOptions& opts = {});

struct EigenResult {
    double mu1 = 0.0;
    std::vector<double> grid;   // arc-length nodes (Dirichlet node included)
    std::vector<double> r, u;   // profile coordinates at the nodes
    std::vector<double> xsq;
    std::vector<double> f;      // eigenfunction samples, positive interior
    std::vector<double> log_f;  // log f, finite even where f underflows
    double norm = 0.0;          // discrete weighted L^2 norm (= 1)
    double truncation = 0.0;
};

struct EigenOptions {
    double bisect_tol = 1e-13;
    int inverse_iterations = 4;
};

// smallest eigenvalue of -L via Sturm-sequence bisection on T plus inverse
// iteration for the eigenvector; eigenvector positive and unit-norm
EigenResult lowest_eigenpair(const OperatorPencil& pencil,
                             const EigenOptions& opts = {});

// count of eigenvalues of the pencil's tridiagonal strictly below lambda
int sturm_count(const OperatorPencil& pencil, double lambda);

struct EnvelopeOptions {
    double cap = 50.0;
    double window_lo = 1.0;    // arc-length start of the fit window
    double window_frac = 0.8;  // window end = frac * truncation
};

struct EnvelopeCheck {
    bool pass = false;
    double C = 0.0;     // smallest constant closing both inequalities
    double beta = 0.0;  // (n + 1 - 2 mu1)/2
};

// Gaussian decay envelope C^{-1} (1+|x|^2)^{-beta} e^{-|x|^2/4} <= f <= C (...)
// fitted over the window; requires mu1 < 0 (throws "not-applicable" otherwise)
EnvelopeCheck decay_envelope_check(const EigenResult& res, int n,
                                   const EnvelopeOptions& opts = {});

// eigenfunction interpolated onto the profile's own grid (zero beyond the
// truncation)
std::vector<double> sample_eigenfunction(const EigenResult& res, const Profile& p);

// normal graph over the profile: each node moves by epsilon*f along the unit
// normal; throws "epsilon-too-large" when the axial coordinate folds over
Profile perturb_profile(const Profile& p, const std::vector<double>& f,
                        double epsilon);

// expander mean curvature E = <x,nu>/2 - t*H per node; an exact expander
// gives E = 0 at t = 1, and its flow sqrt(t)*Sigma gives E = 0 at every t
std::vector<double> expander_mean_curvature(const Profile& p, double t);

// E of the normal graph x + epsilon*f*nu evaluated on the eigen arc grid,
// computed parametrically from the exact profile geometry (finite differences
// touch only f), so E/epsilon resolves the linearization mu1*f down to small
// epsilon; u-families only
std::vector<double> normal_graph_expander_E(const Profile& p, const EigenResult& res,
                                            double epsilon, double t = 1.0);

std::string eigen_csv(const EigenResult& r);
std::string eigen_json(const EigenResult& r, const EnvelopeCheck* env = nullptr);

}  // namespace mcf
