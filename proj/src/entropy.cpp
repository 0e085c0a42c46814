#include "mcf/entropy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "mcf/io.hpp"
#include "mcf/quadrature.hpp"

namespace mcf {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

double sphere_volume(int p) {
    if (p < 0) throw DomainError("bad-dimension", "sphere dimension must be >= 0");
    return 2.0 * std::pow(kPi, 0.5 * (p + 1)) / std::tgamma(0.5 * (p + 1));
}

double angular_kernel_scaled(int n, double c) {
    if (n < 2) throw DomainError("bad-dimension", "kernel needs n >= 2");
    if (c < 0) throw DomainError("bad-kernel-arg", "kernel argument must be >= 0");
    if (c == 0.0) return sphere_volume(n - 1);
    const auto f = [n, c](double th) {
        return std::exp(c * (std::cos(th) - 1.0)) *
               std::pow(std::sin(th), n - 2);
    };
    const double s = sphere_volume(n - 2);
    double prev = s * quad::gauss_legendre(f, 0.0, kPi, 64);
    for (int npts : {128, 256}) {  // double the rule until two agree
        const double cur = s * quad::gauss_legendre(f, 0.0, kPi, npts);
        if (std::abs(cur - prev) <= 1e-13 * std::abs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

double angular_kernel(int n, double c) {
    return std::exp(c) * angular_kernel_scaled(n, c);
}

namespace {

// log of the integrand envelope for one nappe (kernel bounded by sigma_{n-1})
double nappe_log_envelope(int n, double m, double t_signed, double d, double t0,
                          double rho) {
    const double am = m * rho - t_signed;
    const double ar = rho - d;
    return (n - 1) * std::log(rho) - (am * am + ar * ar) / (4.0 * t0);
}

// truncation radius: last point where the envelope is within 1e-18 of its peak
double nappe_cutoff(int n, double m, double t_signed, double d, double t0) {
    const double peak_guess = (m * std::abs(t_signed) + d) / (1.0 + m * m);
    const double spread = 40.0 * std::sqrt(t0) * (1.0 + 1.0 / std::sqrt(1.0 + m * m));
    const double hi = peak_guess + spread + 5.0;
    const int N = 4000;
    double peak = -1e300;
    std::vector<double> env(N);
    for (int i = 0; i < N; ++i) {
        const double rho = hi * (i + 1.0) / N;
        env[i] = nappe_log_envelope(n, m, t_signed, d, t0, rho);
        peak = std::max(peak, env[i]);
    }
    const double floor = peak - 18.0 * std::numbers::ln10;
    int last = 0;
    for (int i = 0; i < N; ++i)
        if (env[i] >= floor) last = i;
    return hi * std::min(N, last + 2) / static_cast<double>(N);
}

}  // namespace

GaussianArea gaussian_area_cone(const ConeSpec& cone, const GaussianCenter& center,
                                const EntropyQuadOptions& opts) {
    cone.validate();
    if (center.d < 0)
        throw DomainError("bad-center", "radial offset must be >= 0");
    if (opts.scale <= 0)
        throw DomainError("bad-scale", "scale must be positive");

    const int n = cone.n;
    const double t0 = opts.scale * opts.scale;
    const double d = center.d;

    GaussianArea out;
    for (int nappe = 0; nappe < 2; ++nappe) {
        const double m = nappe == 0 ? cone.m_plus : cone.m_minus;
        // minus nappe lives at axial -m*rho, so its axial residue is m*rho + t
        const double ts = nappe == 0 ? center.t : -center.t;
        const double cut = nappe_cutoff(n, m, ts, d, t0);
        const auto f = [n, m, ts, d, t0](double rho) {
            const double am = m * rho - ts;
            const double ar = rho - d;
            return std::pow(rho, n - 1) *
                   std::exp(-(am * am + ar * ar) / (4.0 * t0)) *
                   angular_kernel_scaled(n, rho * d / (2.0 * t0));
        };
        const auto q = quad::integrate(f, 0.0, cut, opts.rel_tol, 1e-300);
        if (!q.converged)
            throw DomainError("quad-failed", "Gaussian area quadrature did not converge");
        const double pref =
            std::pow(4.0 * kPi * t0, -0.5 * n) * std::sqrt(1.0 + m * m);
        out.value += pref * q.value;
        out.quad_error += pref * q.error;
    }
    return out;
}

namespace {

struct SimplexResult {
    double t = 0.0, d = 0.0, f = 0.0, spread = 0.0;
};

// Nelder-Mead on (t, d), d folded to |d|; maximizes F
SimplexResult simplex_max(const std::function<double(double, double)>& F, double t0,
                          double d0, double step, double tol, int max_iter) {
    struct Pt {
        double t, d, f;
    };
    auto eval = [&](double t, double d) { return F(t, std::abs(d)); };
    std::array<Pt, 3> s = {Pt{t0, d0, eval(t0, d0)},
                           Pt{t0 + step, d0, eval(t0 + step, d0)},
                           Pt{t0, d0 + step, eval(t0, d0 + step)}};
    for (int it = 0; it < max_iter; ++it) {
        std::sort(s.begin(), s.end(), [](const Pt& a, const Pt& b) { return a.f > b.f; });
        const double size = std::max(
            std::abs(s[0].t - s[2].t) + std::abs(s[0].d - s[2].d),
            std::abs(s[0].t - s[1].t) + std::abs(s[0].d - s[1].d));
        if (size < tol) break;
        const double ct = 0.5 * (s[0].t + s[1].t), cd = 0.5 * (s[0].d + s[1].d);
        const double rt = ct + (ct - s[2].t), rd = cd + (cd - s[2].d);
        const double fr = eval(rt, rd);
        if (fr > s[0].f) {
            const double et = ct + 2.0 * (ct - s[2].t), ed = cd + 2.0 * (cd - s[2].d);
            const double fe = eval(et, ed);
            s[2] = fe > fr ? Pt{et, ed, fe} : Pt{rt, rd, fr};
        } else if (fr > s[1].f) {
            s[2] = {rt, rd, fr};
        } else {
            const double kt = ct + 0.5 * (s[2].t - ct), kd = cd + 0.5 * (s[2].d - cd);
            const double fk = eval(kt, kd);
            if (fk > s[2].f) {
                s[2] = {kt, kd, fk};
            } else {  // shrink toward the best vertex
                for (int i = 1; i < 3; ++i) {
                    s[i].t = s[0].t + 0.5 * (s[i].t - s[0].t);
                    s[i].d = s[0].d + 0.5 * (s[i].d - s[0].d);
                    s[i].f = eval(s[i].t, s[i].d);
                }
            }
        }
    }
    std::sort(s.begin(), s.end(), [](const Pt& a, const Pt& b) { return a.f > b.f; });
    return {s[0].t, std::abs(s[0].d), s[0].f, s[0].f - s[2].f};
}

}  // namespace

EntropyReport entropy_cone(const ConeSpec& cone, const EntropySearchOptions& opts) {
    cone.validate();
    const auto F = [&](double t, double d) {
        return gaussian_area_cone(cone, {t, d}, opts.quad).value;
    };

    EntropyReport rep;
    rep.cone = cone;
    const auto origin = gaussian_area_cone(cone, {0.0, 0.0}, opts.quad);
    rep.f_at_origin = origin.value;

    const double m_top = std::max(cone.m_plus, cone.m_minus);
    const double s = std::sqrt(2.0 * cone.n) * std::max(1.0, m_top);
    const std::array<GaussianCenter, 4> seeds = {
        GaussianCenter{0.0, 0.0}, GaussianCenter{s, 0.0}, GaussianCenter{-s, 0.0},
        GaussianCenter{0.5 * s, 0.5 * s}};

    SimplexResult best;
    best.f = -1.0;
    for (const auto& seed : seeds) {
        const double step = 0.25 * std::max(1.0, s);
        const auto r =
            simplex_max(F, seed.t, seed.d, step, opts.opt_tol, opts.max_iter);
        if (r.f > best.f) best = r;
    }
    rep.lambda = best.f;
    rep.argmax = {best.t, best.d};
    rep.opt_error = best.spread + opts.opt_tol;
    rep.quad_error =
        gaussian_area_cone(cone, rep.argmax, opts.quad).quad_error + origin.quad_error;
    return rep;
}

SimonsDensity simons_density(int n, int p) {
    if (n < 2) throw DomainError("bad-dimension", "need n >= 2");
    if (p < 1 || p > n - 1)
        throw DomainError("bad-dimension", "need 1 <= p <= n-1");
    SimonsDensity s;
    s.n = n;
    s.p = p;
    s.sigma_p = sphere_volume(p);
    s.sigma_np = sphere_volume(n - p);
    s.sigma_n = sphere_volume(n);
    s.theta = s.sigma_p * s.sigma_np / s.sigma_n *
              std::pow(static_cast<double>(p) / n, 0.5 * p) *
              std::pow(static_cast<double>(n - p) / n, 0.5 * (n - p));
    return s;
}

double simons_density_numeric(int n, int p, double rel_tol) {
    if (n < 2) throw DomainError("bad-dimension", "need n >= 2");
    if (p < 1 || p > n - 1)
        throw DomainError("bad-dimension", "need 1 <= p <= n-1");
    const double vol_link = sphere_volume(p) *
                            std::pow(static_cast<double>(p) / n, 0.5 * p) *
                            sphere_volume(n - p) *
                            std::pow(static_cast<double>(n - p) / n, 0.5 * (n - p));
    const double cut = 30.0 + n;
    const auto q = quad::integrate(
        [n](double rho) { return std::pow(rho, n) * std::exp(-rho * rho / 4.0); },
        0.0, cut, rel_tol, 1e-300);
    if (!q.converged)
        throw DomainError("quad-failed", "density quadrature did not converge");
    return std::pow(4.0 * kPi, -0.5 * (n + 1)) * vol_link * q.value;
}

double reference_entropy(ReferenceShrinker kind, int k) {
    switch (kind) {
        case ReferenceShrinker::Hyperplane:
            return 1.0;
        case ReferenceShrinker::Sphere:
        case ReferenceShrinker::Cylinder:
            if (k < 1) throw DomainError("bad-dimension", "need k >= 1");
            return sphere_volume(k) *
                   std::pow(k / (2.0 * kPi * std::numbers::e), 0.5 * k);
    }
    throw DomainError("bad-kind", "unknown reference shrinker");
}

std::string entropy_report_json(const EntropyReport& r) {
    std::ostringstream ss;
    ss << "{\"n\":" << r.cone.n << ",\"m_plus\":" << io::fmt(r.cone.m_plus)
       << ",\"m_minus\":" << io::fmt(r.cone.m_minus)
       << ",\"lambda\":" << io::fmt(r.lambda) << ",\"argmax\":{\"t\":"
       << io::fmt(r.argmax.t) << ",\"d\":" << io::fmt(r.argmax.d)
       << "},\"f_at_origin\":" << io::fmt(r.f_at_origin)
       << ",\"quad_error\":" << io::fmt(r.quad_error)
       << ",\"opt_error\":" << io::fmt(r.opt_error) << "}\n";
    return ss.str();
}

std::string simons_density_json(const SimonsDensity& s) {
    std::ostringstream ss;
    ss << "{\"n\":" << s.n << ",\"p\":" << s.p << ",\"theta\":" << io::fmt(s.theta)
       << ",\"sigma_p\":" << io::fmt(s.sigma_p)
       << ",\"sigma_np\":" << io::fmt(s.sigma_np)
       << ",\"sigma_n\":" << io::fmt(s.sigma_n)
       << ",\"paper_discrepancy\":\"closed form pi/2 for (2,1); prose value 3/2\"}\n";
    return ss.str();
}

}  // namespace mcf
