#include "mcf/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mcf/io.hpp"

namespace mcf {

namespace {

// Hermite slope of the profile inside cell i at local coordinate t
double cell_du(const Profile& p, std::size_t i, double t) {
    const double hh = p.grid[i + 1] - p.grid[i];
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t),
                 h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * p.du[i] + hh * h10 * p.ddu[i] + h01 * p.du[i + 1] +
           hh * h11 * p.ddu[i + 1];
}

double speed_at(const Profile& p, std::size_t i, double t) {
    const double q = cell_du(p, i, t);
    return std::sqrt(1 + q * q);
}

// arc length from the cell's left node to local coordinate t (Simpson)
double cell_arc(const Profile& p, std::size_t i, double t) {
    const double hh = (p.grid[i + 1] - p.grid[i]) * t;
    return hh / 6.0 *
           (speed_at(p, i, 0.0) + 4.0 * speed_at(p, i, 0.5 * t) + speed_at(p, i, t));
}

// cumulative arc length of the profile curve at each node
std::vector<double> arc_table(const Profile& p) {
    std::vector<double> s(p.size(), 0.0);
    const bool hermite = p.ddu.size() == p.size();
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (hermite) {
            s[i] = s[i - 1] + cell_arc(p, i - 1, 1.0);
        } else {
            const double w0 = std::sqrt(1 + p.du[i - 1] * p.du[i - 1]);
            const double w1 = std::sqrt(1 + p.du[i] * p.du[i]);
            s[i] = s[i - 1] + 0.5 * (w0 + w1) * (p.grid[i] - p.grid[i - 1]);
        }
    }
    return s;
}

std::size_t locate(const std::vector<double>& x, double v) {
    auto it = std::upper_bound(x.begin(), x.end(), v);
    std::size_t i = it - x.begin();
    if (i == 0) return 0;
    if (i >= x.size()) return x.size() - 2;
    return i - 1;
}

// profile data resampled at one arc-length position
struct ArcSample {
    double g = 0.0;  // profile's independent coordinate
    double u = 0.0, du = 0.0, ddu = 0.0;
    double R = 0.0, xsq = 0.0, a_sq = 0.0, log_w = 0.0;
};

class ArcSampler {
  public:
    ArcSampler(const Profile& p) : p_(p), s_(arc_table(p)) {
        if (p.ddu.size() != p.size())
            throw DomainError("missing-ddu", "profile lacks second derivatives");
    }

    double total() const { return s_.back(); }

    ArcSample at(double s, int n) const {
        const std::size_t i = locate(s_, s);
        const double g0 = p_.grid[i], g1 = p_.grid[i + 1];
        // arc -> coordinate by Newton on the in-cell Simpson arc length, then
        // cubic Hermite
        const double sigma = std::clamp(s - s_[i], 0.0, s_[i + 1] - s_[i]);
        const double hh = g1 - g0;
        double t = sigma / (s_[i + 1] - s_[i]);
        for (int it = 0; it < 3; ++it) {
            const double res = cell_arc(p_, i, t) - sigma;
            t -= res / (speed_at(p_, i, t) * hh);
            t = std::clamp(t, 0.0, 1.0);
        }
        const double g = g0 + t * hh;
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t),
                     h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        ArcSample out;
        out.g = g;
        out.u = h00 * p_.u[i] + hh * h10 * p_.du[i] + h01 * p_.u[i + 1] +
                hh * h11 * p_.du[i + 1];
        out.du = h00 * p_.du[i] + hh * h10 * p_.ddu[i] + h01 * p_.du[i + 1] +
                 hh * h11 * p_.ddu[i + 1];
        out.ddu = (1 - t) * p_.ddu[i] + t * p_.ddu[i + 1];
        const bool graph = p_.family == ProfileFamily::GraphOverPlane;
        out.R = graph ? out.g : out.u;
        out.xsq = out.g * out.g + out.u * out.u;
        const double w2 = 1 + out.du * out.du;
        const double k1 = out.ddu / (w2 * std::sqrt(w2));
        double k2;
        if (graph)
            k2 = out.g > 0 ? out.du / (out.g * std::sqrt(w2)) : out.ddu;
        else
            k2 = 1.0 / (out.u * std::sqrt(w2));
        out.a_sq = k1 * k1 + (n - 1) * k2 * k2;
        out.log_w = 0.25 * out.xsq +
                    (n - 1) * (out.R > 0 ? std::log(out.R) : -1e30);
        return out;
    }

  private:
    const Profile& p_;
    std::vector<double> s_;
};

}  // namespace

OperatorPencil assemble_operator(const Profile& p, const AssembleOptions& opts) {
    const ArcSampler sampler(p);
    const double total = sampler.total();
    double S = opts.truncation > 0 ? opts.truncation : total;
    if (S > total * (1 + 1e-12))
        throw DomainError("short-profile",
                          "requested truncation exceeds the profile arc length");
    S = std::min(S, total);
    const double h = opts.h > 0 ? opts.h : S / 2000.0;
    const std::size_t N = std::max<std::size_t>(8, std::llround(S / h));

    OperatorPencil pc;
    pc.n = p.n;
    pc.h = S / N;
    pc.truncation = S;

    std::vector<ArcSample> node(N + 1), half(N);
    for (std::size_t i = 0; i <= N; ++i) node[i] = sampler.at(i * pc.h, p.n);
    for (std::size_t i = 0; i < N; ++i) half[i] = sampler.at((i + 0.5) * pc.h, p.n);

    pc.s.resize(N + 1);
    pc.r.resize(N + 1);
    pc.u.resize(N + 1);
    pc.xsq.resize(N + 1);
    pc.a_sq.resize(N + 1);
    pc.log_w.resize(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        pc.s[i] = i * pc.h;
        pc.r[i] = node[i].g;
        pc.u[i] = node[i].u;
        pc.xsq[i] = node[i].xsq;
        pc.a_sq[i] = node[i].a_sq;
        pc.log_w[i] = node[i].log_w;
    }

    // log cell masses; the axis cell of a graph profile has R(0) = 0, where
    // w ~ c s^{n-1} makes the half cell integrate to w(h/2) (h/2)/n
    std::vector<double> lm(N);
    const double lh = std::log(pc.h);
    if (node[0].R <= 0)
        lm[0] = half[0].log_w + std::log(0.5 * pc.h / p.n);
    else
        lm[0] = node[0].log_w + lh - std::numbers::ln2;
    for (std::size_t i = 1; i < N; ++i) lm[i] = node[i].log_w + lh;

    pc.diag.assign(N, 0.0);
    pc.off.assign(N - 1, 0.0);
    pc.log_mass = lm;
    for (std::size_t i = 0; i < N; ++i) {
        double flux = 0.0;
        if (i > 0) flux += std::exp(half[i - 1].log_w - lm[i]);
        flux += std::exp(half[i].log_w - lm[i]);
        pc.diag[i] = flux / pc.h + (0.5 - node[i].a_sq);
        if (i + 1 < N)
            pc.off[i] =
                -std::exp(half[i].log_w - 0.5 * (lm[i] + lm[i + 1])) / pc.h;
    }
    return pc;
}

int sturm_count(const OperatorPencil& pc, double lambda) {
    int count = 0;
    double d = pc.diag[0] - lambda;
    if (d < 0) ++count;
    for (std::size_t i = 1; i < pc.diag.size(); ++i) {
        if (d == 0.0) d = -1e-300;
        d = pc.diag[i] - lambda - pc.off[i - 1] * pc.off[i - 1] / d;
        if (d < 0) ++count;
    }
    return count;
}

namespace {

// tridiagonal solve with partial pivoting (stable near-singular shifts)
void solve_shifted(const std::vector<double>& diag, const std::vector<double>& off,
                   double sigma, std::vector<double>& x) {
    const std::size_t n = diag.size();
    std::vector<double> a(n), b(n), c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = diag[i] - sigma;
        b[i] = i + 1 < n ? off[i] : 0.0;
    }
    std::vector<double> low(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) low[i + 1] = off[i];
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(low[i + 1]) > std::abs(a[i])) {
            std::swap(a[i], low[i + 1]);
            std::swap(b[i], a[i + 1]);
            std::swap(c[i], b[i + 1]);
            std::swap(x[i], x[i + 1]);
        }
        if (a[i] == 0.0) a[i] = 1e-300;
        const double m = low[i + 1] / a[i];
        a[i + 1] -= m * b[i];
        b[i + 1] -= m * c[i];
        x[i + 1] -= m * x[i];
    }
    for (std::size_t k = n; k-- > 0;) {
        if (a[k] == 0.0) a[k] = 1e-300;
        double v = x[k];
        if (k + 1 < n) v -= b[k] * x[k + 1];
        if (k + 2 < n) v -= c[k] * x[k + 2];
        x[k] = v / a[k];
    }
}

}  // namespace

EigenResult lowest_eigenpair(const OperatorPencil& pc, const EigenOptions& opts) {
    const std::size_t N = pc.diag.size();
    double lo = pc.diag[0], hi = pc.diag[0];
    for (std::size_t i = 0; i < N; ++i) {
        double radius = 0.0;
        if (i > 0) radius += std::abs(pc.off[i - 1]);
        if (i + 1 < N) radius += std::abs(pc.off[i]);
        lo = std::min(lo, pc.diag[i] - radius);
        hi = std::max(hi, pc.diag[i] + radius);
    }
    while (hi - lo > opts.bisect_tol * (1.0 + std::abs(lo))) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(pc, mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    double mu = 0.5 * (lo + hi);

    std::vector<double> v(N, 1.0);
    const double sigma = mu - 1e3 * opts.bisect_tol * (1.0 + std::abs(mu));
    for (int it = 0; it < opts.inverse_iterations; ++it) {
        solve_shifted(pc.diag, pc.off, sigma, v);
        double nrm = 0.0;
        for (double x : v) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (!(nrm > 0) || !std::isfinite(nrm))
            throw DomainError("eigen-no-convergence",
                              "inverse iteration collapsed");
        for (double& x : v) x /= nrm;
    }
    double pos = 0.0;
    for (double x : v) pos += x;
    if (pos < 0)
        for (double& x : v) x = -x;

    // Rayleigh refinement of the bisection value
    double num = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        num += pc.diag[i] * v[i] * v[i];
        if (i + 1 < N) num += 2.0 * pc.off[i] * v[i] * v[i + 1];
    }
    mu = num;

    EigenResult res;
    res.mu1 = mu;
    res.truncation = pc.truncation;
    res.grid = pc.s;
    res.r = pc.r;
    res.u = pc.u;
    res.xsq = pc.xsq;
    res.f.assign(N + 1, 0.0);
    res.log_f.assign(N + 1, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < N; ++i) {
        res.f[i] = v[i] * std::exp(-0.5 * pc.log_mass[i]);
        if (v[i] > 0)
            res.log_f[i] = std::log(v[i]) - 0.5 * pc.log_mass[i];
        else if (v[i] < 0)
            res.log_f[i] = std::numeric_limits<double>::quiet_NaN();
    }
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    res.norm = std::sqrt(nrm);
    return res;
}

EnvelopeCheck decay_envelope_check(const EigenResult& res, int n,
                                   const EnvelopeOptions& opts) {
    if (!(res.mu1 < 0))
        throw DomainError("not-applicable",
                          "decay envelope is stated for mu1 < 0");
    EnvelopeCheck out;
    out.beta = 0.5 * (n + 1 - 2.0 * res.mu1);
    // the eigenfunction normalization is arbitrary, so fit the log offset by
    // mid-range and let C absorb only the residual spread
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t used = 0;
    for (std::size_t i = 0; i < res.grid.size(); ++i) {
        const double s = res.grid[i];
        if (s < opts.window_lo || s > opts.window_frac * res.truncation) continue;
        const double lenv = -out.beta * std::log1p(res.xsq[i]) - 0.25 * res.xsq[i];
        if (!std::isfinite(res.log_f[i])) {
            hi = std::numeric_limits<double>::infinity();
            lo = -hi;
            break;
        }
        lo = std::min(lo, res.log_f[i] - lenv);
        hi = std::max(hi, res.log_f[i] - lenv);
        ++used;
    }
    if (used == 0)
        throw DomainError("short-profile", "no nodes inside the envelope window");
    const double spread = 0.5 * (hi - lo);
    out.C = std::isfinite(spread) ? std::max(1.0, std::exp(spread))
                                  : std::numeric_limits<double>::infinity();
    out.pass = out.C < opts.cap;
    return out;
}

std::vector<double> sample_eigenfunction(const EigenResult& res, const Profile& p) {
    const auto s = arc_table(p);
    std::vector<double> out(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (s[i] > res.truncation) continue;
        const std::size_t j = locate(res.grid, s[i]);
        const double t = (s[i] - res.grid[j]) / (res.grid[j + 1] - res.grid[j]);
        out[i] = (1 - t) * res.f[j] + t * res.f[j + 1];
    }
    return out;
}

Profile perturb_profile(const Profile& p, const std::vector<double>& f,
                        double epsilon) {
    if (f.size() != p.size())
        throw DomainError("bad-samples", "eigenfunction samples do not match grid");
    if (epsilon == 0.0) return p;

    const std::size_t N = p.size();
    std::vector<double> X(N), Y(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double w = std::sqrt(1 + p.du[i] * p.du[i]);
        X[i] = p.grid[i] - epsilon * f[i] * p.du[i] / w;
        Y[i] = p.u[i] + epsilon * f[i] / w;
    }
    for (std::size_t i = 0; i + 1 < N; ++i)
        if (X[i + 1] <= X[i])
            throw DomainError("epsilon-too-large",
                              "normal graph folds over; reduce epsilon");

    Profile out;
    out.family = p.family;
    out.n = p.n;
    out.a = p.a;
    out.tol = p.tol;
    out.r_max = X.back();
    out.grid = std::move(X);
    out.u = std::move(Y);
    out.du.assign(N, 0.0);
    out.ddu.assign(N, 0.0);
    for (std::size_t i = 1; i + 1 < N; ++i) {
        const double hl = out.grid[i] - out.grid[i - 1];
        const double hr = out.grid[i + 1] - out.grid[i];
        out.du[i] = (-hr / (hl * (hl + hr))) * out.u[i - 1] +
                    ((hr - hl) / (hl * hr)) * out.u[i] +
                    (hl / (hr * (hl + hr))) * out.u[i + 1];
        out.ddu[i] = 2.0 / (hl * (hl + hr)) * out.u[i - 1] -
                     2.0 / (hl * hr) * out.u[i] +
                     2.0 / (hr * (hl + hr)) * out.u[i + 1];
    }
    out.du[0] = (out.u[1] - out.u[0]) / (out.grid[1] - out.grid[0]);
    out.du[N - 1] =
        (out.u[N - 1] - out.u[N - 2]) / (out.grid[N - 1] - out.grid[N - 2]);
    out.ddu[0] = out.ddu[1];
    out.ddu[N - 1] = out.ddu[N - 2];
    out.residual.assign(N, 0.0);
    out.residual_sup = 0.0;
    return out;
}

std::vector<double> expander_mean_curvature(const Profile& p, double t) {
    if (p.ddu.size() != p.size())
        throw DomainError("missing-ddu", "profile lacks second derivatives");
    std::vector<double> E(p.size());
    const bool graph = p.family == ProfileFamily::GraphOverPlane;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double g = p.grid[i], u = p.u[i], q = p.du[i], upp = p.ddu[i];
        const double w = std::sqrt(1 + q * q);
        double H, xdotnu;
        if (graph) {
            H = g > 0 ? upp / (w * w * w) + (p.n - 1) * q / (g * w)
                      : p.n * upp;
            xdotnu = (u - g * q) / w;
        } else {
            H = upp / (w * w * w) - (p.n - 1) / (u * w);
            xdotnu = (u - g * q) / w;
        }
        E[i] = 0.5 * xdotnu - t * H;
    }
    return E;
}

std::vector<double> normal_graph_expander_E(const Profile& p, const EigenResult& res,
                                            double epsilon, double t) {
    if (p.family == ProfileFamily::GraphOverPlane)
        throw DomainError("unsupported-family",
                          "normal-graph E is implemented for the u-families");
    const std::size_t N = res.grid.size();
    if (N < 5) throw DomainError("short-profile", "eigen grid too small");
    const double h = res.grid[1] - res.grid[0];

    // exact profile data resampled at the eigen arc nodes; the second
    // derivative comes from the ODE, so only f is differenced
    const ArcSampler sampler(p);
    std::vector<double> g(N), u(N), du(N), k1(N);
    for (std::size_t i = 0; i < N; ++i) {
        const auto smp = sampler.at(res.grid[i], p.n);
        g[i] = smp.g;
        u[i] = smp.u;
        du[i] = smp.du;
        const double w2 = 1 + smp.du * smp.du;
        k1[i] = expander_ode_rhs(smp.u, smp.du, smp.g, p.n) / (w2 * std::sqrt(w2));
    }

    std::vector<double> fp(N), fpp(N), k1p(N);
    for (std::size_t i = 1; i + 1 < N; ++i) {
        fp[i] = (res.f[i + 1] - res.f[i - 1]) / (2 * h);
        fpp[i] = (res.f[i + 1] - 2 * res.f[i] + res.f[i - 1]) / (h * h);
        k1p[i] = (k1[i + 1] - k1[i - 1]) / (2 * h);
    }
    // node 0 is a Neumann symmetry node for the connected family
    fp[0] = 0.0;
    fpp[0] = 2 * (res.f[1] - res.f[0]) / (h * h);
    k1p[0] = (k1[1] - k1[0]) / h;
    fp[N - 1] = (res.f[N - 1] - res.f[N - 2]) / h;
    fpp[N - 1] = fpp[N - 2];
    k1p[N - 1] = k1p[N - 2];

    std::vector<double> E(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double w = std::sqrt(1 + du[i] * du[i]);
        // Frenet data of the base curve: T = (1, du)/w, nu = (-du, 1)/w
        const double Ta = 1 / w, Tr = du[i] / w;
        const double na = -du[i] / w, nr = 1 / w;
        const double f = res.f[i];
        const double Xa = g[i] + epsilon * f * na;
        const double Xr = u[i] + epsilon * f * nr;
        // X' = (1 - eps f k1) T + eps f' nu, X'' from one more Frenet step
        const double ct = 1 - epsilon * f * k1[i];
        const double dXa = ct * Ta + epsilon * fp[i] * na;
        const double dXr = ct * Tr + epsilon * fp[i] * nr;
        const double cT = -epsilon * (2 * fp[i] * k1[i] + f * k1p[i]);
        const double cN = k1[i] * ct + epsilon * fpp[i];
        const double d2Xa = cT * Ta + cN * na;
        const double d2Xr = cT * Tr + cN * nr;
        const double speed = std::sqrt(dXa * dXa + dXr * dXr);
        const double kappa = (dXa * d2Xr - dXr * d2Xa) / (speed * speed * speed);
        const double nhat_a = -dXr / speed, nhat_r = dXa / speed;
        const double H = kappa - (p.n - 1) * nhat_r / Xr;
        const double xdotnu = Xa * nhat_a + Xr * nhat_r;
        E[i] = 0.5 * xdotnu - t * H;
    }
    return E;
}

std::string eigen_csv(const EigenResult& r) {
    std::ostringstream ss;
    ss << "s,r,u,f\n";
    for (std::size_t i = 0; i < r.grid.size(); ++i)
        ss << io::fmt(r.grid[i]) << ',' << io::fmt(r.r[i]) << ',' << io::fmt(r.u[i])
           << ',' << io::fmt(r.f[i]) << '\n';
    return ss.str();
}

std::string eigen_json(const EigenResult& r, const EnvelopeCheck* env) {
    std::ostringstream ss;
    ss << "{\"mu1\":" << io::fmt(r.mu1) << ",\"norm\":" << io::fmt(r.norm)
       << ",\"truncation\":" << io::fmt(r.truncation);
    if (env)
        ss << ",\"envelope_C\":" << io::fmt(env->C)
           << ",\"beta\":" << io::fmt(env->beta)
           << ",\"envelope_pass\":" << (env->pass ? "true" : "false");
    ss << "}\n";
    return ss.str();
}

}  // namespace mcf
