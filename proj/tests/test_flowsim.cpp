#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mcf/flowsim.hpp"
#include "mcf/profiles.hpp"
#include "mcf/stability.hpp"

using namespace mcf;

namespace {

Profile connected(double a, double r_max = 15.0) {
    IntegrateOptions io;
    io.max_step = 0.05;
    return integrate_profile(ProfileFamily::ConnectedSymmetric, a, 2, r_max, 1e-11, io);
}

EigenResult unit_eigenpair(const Profile& p) {
    AssembleOptions ao;
    ao.truncation = 12.0;
    ao.h = 0.01;
    auto res = lowest_eigenpair(assemble_operator(p, ao));
    double fmax = 0.0;
    for (double v : res.f) fmax = std::max(fmax, v);
    for (double& v : res.f) v /= fmax;
    return res;
}

FlowState cylinder(double v0, int n, double R, std::size_t nodes) {
    FlowState st;
    st.gauge = FlowGauge::Physical;
    st.n = n;
    st.slope = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        st.rho.push_back(R * double(i) / double(nodes - 1));
        st.v.push_back(v0);
    }
    return st;
}

double sup_diff(const FlowState& a, const FlowState& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a.v[i] - b.v[i]));
    return d;
}

}  // namespace

TEST_CASE("exact expanders are discretely stationary with second-order drift") {
    auto p = connected(1.0);
    std::vector<double> drift;
    for (std::size_t nodes : {301u, 601u, 1201u}) {
        auto st = flow_state_from_profile(p, 12.0, nodes, FlowGauge::Rescaled);
        auto tr = evolve(st, 1.0);
        drift.push_back(sup_diff(tr.snapshots.back(), st));
    }
    CHECK(drift[1] < 1e-3);
    const double ratio = drift[0] / drift[2];  // 16 for clean second order
    CHECK(ratio > 10.0);
    CHECK(ratio < 22.0);
}

TEST_CASE("shrinking cylinder recovers the exact extinction law") {
    const int n = 2;
    auto st = cylinder(1.0, n, 12.0, 601);
    auto tr = evolve(st, 1.0);
    const auto& ev = tr.event;
    CHECK(ev.type == "neck_pinch");
    REQUIRE(ev.fit.valid);
    // v(t)^2 = v0^2 - 2(n-1) t, so T = 1/2 and prefactor sqrt(2)
    CHECK(std::abs(ev.fit.exponent - 0.5) < 2e-3);
    CHECK(std::abs(ev.fit.prefactor - std::sqrt(2.0 * (n - 1))) < 2e-3);
    CHECK(std::abs(ev.fit.T - 0.5) < 1e-3);
    CHECK(ev.fit.r2 > 0.999999);
}

TEST_CASE("inward-perturbed wide cone pinches at the axis with the parabolic law") {
    auto p = connected(0.5);
    auto res = unit_eigenpair(p);
    auto f = sample_eigenfunction(res, p);
    auto st = flow_state_from_profile(perturb_profile(p, f, -0.1), 12.0, 601,
                                      FlowGauge::Physical);
    auto tr = evolve(st, 10.0);
    const auto& ev = tr.event;
    CHECK(ev.type == "neck_pinch");
    CHECK(!ev.inconclusive);
    CHECK(std::abs(ev.location) <= 2.0 * st.spacing());
    REQUIRE(ev.fit.valid);
    CHECK(std::abs(ev.fit.exponent - 0.5) < 0.05);
    const double pref = std::sqrt(2.0 * (st.n - 1));
    CHECK(std::abs(ev.fit.prefactor - pref) < 0.1 * pref);
    CHECK(ev.fit.r2 > 0.999);
    CHECK(ev.time < tr.monitors.time.back() + 1e-12);
}

TEST_CASE("outward-perturbed wide cone expands and stays mean-convex") {
    auto p = connected(0.5);
    auto res = unit_eigenpair(p);
    auto f = sample_eigenfunction(res, p);
    auto st = flow_state_from_profile(perturb_profile(p, f, +0.02), 12.0, 601,
                                      FlowGauge::Rescaled);
    auto tr = evolve(st, 4.0);
    CHECK(tr.event.type == "none");
    CHECK(!tr.event.inconclusive);
    const auto& m = tr.monitors;
    double floor = 0.0;
    for (double e : m.min_E) floor = std::min(floor, e);
    CHECK(floor > -1e-8);
    CHECK(m.min_v.back() > m.min_v.front());
}

TEST_CASE("perturbed flow lines escape at the rate of the unstable eigenvalue") {
    auto p = connected(0.5);
    auto res = unit_eigenpair(p);
    auto fl = flow_line_experiment(p, res, 1e-4, 8.0);
    const double target = -res.mu1;
    CHECK(std::abs(fl.rate_outward - target) < 0.05 * target);
    CHECK(std::abs(fl.rate_inward - target) < 0.05 * target);
    CHECK(fl.r2_outward > 0.999);
    CHECK(fl.r2_inward > 0.999);
}

TEST_CASE("evolved states stay inside the cone tube with one uniform constant") {
    auto p = connected(0.5);
    ConeSpec cone;
    cone.n = 2;
    cone.m_plus = 1.0 / asymptotic_slope(p).value;
    cone.m_minus = cone.m_plus;
    auto st = flow_state_from_profile(p, 12.0, 601, FlowGauge::Physical);
    st.time = 1.0;
    auto tr = evolve(st, 1.0);
    double margin = 1.0, n_prime = 0.0;
    for (const auto& s : tr.snapshots) {
        auto rep = cone_tube_check(s, cone);
        CHECK(rep.pass);
        margin = std::min(margin, rep.margin);
        n_prime = std::max(n_prime, rep.n_prime);
    }
    CHECK(margin > 0.9);
    CHECK(n_prime <= 1.5);

    // a graph displaced well off the cone violates the shrinking tube
    auto bad = tr.snapshots.back();
    for (double& v : bad.v) v += 3.0;
    CHECK(!cone_tube_check(bad, cone).pass);
}

TEST_CASE("ordered initial graphs stay ordered under the flow") {
    auto p = connected(1.0);
    auto res = unit_eigenpair(p);
    auto f = sample_eigenfunction(res, p);
    auto hi = flow_state_from_profile(perturb_profile(p, f, +0.02), 12.0, 601,
                                      FlowGauge::Rescaled);
    auto lo = flow_state_from_profile(perturb_profile(p, f, -0.02), 12.0, 601,
                                      FlowGauge::Rescaled);
    auto th = evolve(hi, 2.0), tl = evolve(lo, 2.0);
    REQUIRE(th.snapshots.size() == tl.snapshots.size());
    double sep = 1e300;
    std::vector<double> sup_sep;
    for (std::size_t k = 0; k < th.snapshots.size(); ++k) {
        const auto& a = th.snapshots[k];
        const auto& b = tl.snapshots[k];
        REQUIRE(std::abs(a.time - b.time) < 1e-9);
        double sup = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            sep = std::min(sep, a.v[i] - b.v[i]);
            sup = std::max(sup, a.v[i] - b.v[i]);
        }
        sup_sep.push_back(sup);
    }
    CHECK(sep > -1e-9);  // never inverts beyond rounding
    // a stable expander contracts the pair at its lowest eigenvalue rate
    const double span = th.snapshots.back().time - th.snapshots.front().time;
    const double rate = std::log(sup_sep.front() / sup_sep.back()) / span;
    CHECK(std::abs(rate - res.mu1) < 0.05);
}

TEST_CASE("threshold crossing without a blow-up signature is inconclusive") {
    auto p = connected(0.5);
    auto res = unit_eigenpair(p);
    auto f = sample_eigenfunction(res, p);
    auto st = flow_state_from_profile(perturb_profile(p, f, -0.1), 12.0, 601,
                                      FlowGauge::Physical);
    EvolveOptions eo;
    eo.pinch.v_frac = 0.5;      // trip the threshold while the neck is still fat
    eo.pinch.proxy_min = 1e12;  // and demand an impossible curvature level
    auto tr = evolve(st, 10.0, eo);
    CHECK(tr.event.type == "none");
    CHECK(tr.event.inconclusive);
    CHECK(!tr.event.fit.valid);
}

TEST_CASE("flow input validation") {
    auto p = connected(1.0);
    auto st = flow_state_from_profile(p, 12.0, 301, FlowGauge::Rescaled);
    CHECK_THROWS_AS(evolve(st, -1.0), DomainError);
    auto bad = st;
    bad.v[10] = -1.0;
    CHECK_THROWS_AS(evolve(bad, 1.0), DomainError);
    bad = st;
    bad.rho[10] += 1e-3;
    CHECK_THROWS_AS(evolve(bad, 1.0), DomainError);
    bad = st;
    bad.rho.resize(3);
    bad.v.resize(3);
    CHECK_THROWS_AS(evolve(bad, 1.0), DomainError);

    IntegrateOptions io;
    auto g = integrate_profile(ProfileFamily::GraphOverPlane, 1.0, 2, 10.0, 1e-10, io);
    CHECK_THROWS_AS(flow_state_from_profile(g, 8.0, 101, FlowGauge::Rescaled),
                    DomainError);
}

TEST_CASE("flow serialization") {
    auto st = cylinder(1.0, 2, 2.0, 11);
    auto tr = evolve(st, 0.05);
    auto scsv = flow_state_csv(tr.snapshots.back());
    CHECK(scsv.rfind("rho,v\n", 0) == 0);
    CHECK(std::count(scsv.begin(), scsv.end(), '\n') == 12);
    auto mcsv = flow_monitors_csv(tr.monitors);
    CHECK(mcsv.rfind("time,min_v,argmin,min_E,tube_margin\n", 0) == 0);
    auto js = singularity_event_json(tr.event);
    CHECK(js.find("\"type\":") != std::string::npos);
    CHECK(js.find("\"inconclusive\":") != std::string::npos);
}
