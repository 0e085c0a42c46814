#include "mcf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace mcf::quad {

namespace {

// Kronrod 15 abscissae (positive half) and weights; Gauss-7 weights on the
// shared nodes.
constexpr double xk[8] = {
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
};
constexpr double wk[8] = {
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
};
constexpr double wg[4] = {
    0.417959183673469387755102040816327,  // node 0
    0.381830050505118944950369775488975,  // node 2
    0.279705391489276667901467771423780,  // node 4
    0.129484966168869693270611432679082,  // node 6
};

}  // namespace

double gk15(const std::function<double(double)>& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b);
    const double hl = 0.5 * (b - a);

    const double f0 = f(mid);
    double k = wk[0] * f0;
    double g = wg[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = hl * xk[i];
        const double fi = f(mid - dx) + f(mid + dx);
        k += wk[i] * fi;
        if (i % 2 == 0) g += wg[i / 2] * fi;
    }
    k *= hl;
    g *= hl;
    err = std::pow(200.0 * std::abs(k - g), 1.5);
    return k;
}

Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_tol, int max_panels) {
    struct Panel {
        double a, b, val, err;
    };
    std::vector<Panel> panels;
    double e0;
    const double v0 = gk15(f, a, b, e0);
    panels.push_back({a, b, v0, e0});

    auto total = [&panels] {
        double v = 0, e = 0;
        for (const auto& p : panels) {
            v += p.val;
            e += p.err;
        }
        return std::pair{v, e};
    };

    for (int it = 0; it < max_panels; ++it) {
        auto [v, e] = total();
        if (e <= std::max(abs_tol, rel_tol * std::abs(v))) return {v, e, true};
        // split the worst panel
        auto worst = std::max_element(
            panels.begin(), panels.end(),
            [](const Panel& p, const Panel& q) { return p.err < q.err; });
        const Panel p = *worst;
        panels.erase(worst);
        const double mid = 0.5 * (p.a + p.b);
        double el, er;
        const double vl = gk15(f, p.a, mid, el);
        const double vr = gk15(f, mid, p.b, er);
        panels.push_back({p.a, mid, vl, el});
        panels.push_back({mid, p.b, vr, er});
    }
    auto [v, e] = total();
    return {v, e, false};
}

namespace {

// Legendre nodes/weights by Newton iteration, cached per order.
struct GLRule {
    std::vector<double> x, w;
};

const GLRule& gl_rule(int n) {
    static std::map<int, GLRule> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GLRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1, p1 = 0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
            }
            pp = n * (x * p0 - p1) / (x * x - 1);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1 - x * x) * pp * pp);
    }
    return cache.emplace(n, std::move(r)).first->second;
}

}  // namespace

double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      int npts) {
    const GLRule& r = gl_rule(npts);
    const double mid = 0.5 * (a + b), hl = 0.5 * (b - a);
    double s = 0;
    for (int i = 0; i < npts; ++i) s += r.w[i] * f(mid + hl * r.x[i]);
    return s * hl;
}

}  // namespace mcf::quad
