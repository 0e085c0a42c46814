#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcf/io.hpp"
#include "mcf/ode.hpp"
#include "mcf/quadrature.hpp"

using namespace mcf;

TEST_CASE("ode: exponential growth") {
    // y' = y, z' = -z; closed forms e^t, e^{-t}
    auto rhs = [](double, const ode::State2& y) -> ode::State2 {
        return {y[0], -y[1]};
    };
    ode::Options opts;
    opts.rel_tol = 1e-11;
    opts.abs_tol = 1e-13;
    const auto sol = ode::integrate(rhs, 0.0, {1.0, 1.0}, 3.0, opts);
    REQUIRE(sol.reason == ode::StopReason::ReachedEnd);
    CHECK(sol.y.back()[0] == doctest::Approx(std::exp(3.0)).epsilon(1e-9));
    CHECK(sol.y.back()[1] == doctest::Approx(std::exp(-3.0)).epsilon(1e-9));
}

TEST_CASE("ode: harmonic oscillator preserves energy") {
    auto rhs = [](double, const ode::State2& y) -> ode::State2 {
        return {y[1], -y[0]};
    };
    ode::Options opts;
    opts.rel_tol = 1e-12;
    opts.abs_tol = 1e-14;
    const auto sol = ode::integrate(rhs, 0.0, {1.0, 0.0}, 20.0, opts);
    REQUIRE(sol.reason == ode::StopReason::ReachedEnd);
    const double E = sol.y.back()[0] * sol.y.back()[0] + sol.y.back()[1] * sol.y.back()[1];
    CHECK(E == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.y.back()[0] == doctest::Approx(std::cos(20.0)).epsilon(1e-8));
}

TEST_CASE("ode: guard event halts integration") {
    auto rhs = [](double, const ode::State2& y) -> ode::State2 { return {y[0], 0.0}; };
    std::vector<ode::Guard> guards;
    guards.push_back({[](double, const ode::State2& y) { return y[0] > 10.0; }, "cap"});
    const auto sol = ode::integrate(rhs, 0.0, {1.0, 0.0}, 100.0, {}, guards);
    REQUIRE(sol.reason == ode::StopReason::GuardEvent);
    CHECK(sol.guard_name == "cap");
    CHECK(sol.y.back()[0] > 10.0);
    CHECK(sol.y.back()[0] < 11.0);  // tripped promptly, not long after
}

TEST_CASE("ode: grid is strictly increasing and dense") {
    auto rhs = [](double t, const ode::State2&) -> ode::State2 { return {t, 1.0}; };
    const auto sol = ode::integrate(rhs, 0.0, {0.0, 0.0}, 1.0, {});
    REQUIRE(sol.t.size() >= 3);
    CHECK(sol.t.front() == 0.0);
    CHECK(sol.t.back() == doctest::Approx(1.0));
    for (std::size_t i = 0; i + 1 < sol.t.size(); ++i) CHECK(sol.t[i] < sol.t[i + 1]);
    CHECK(sol.y.back()[0] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("quadrature: gk15 panel on smooth integrand") {
    double err = 0.0;
    const double v = quad::gk15([](double x) { return std::sin(x); }, 0.0,
                                std::numbers::pi, err);
    CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(err < 1e-8);
}

TEST_CASE("quadrature: adaptive integrate") {
    const auto g = quad::integrate(
        [](double x) { return std::exp(-x * x / 4.0); }, 0.0, 40.0, 1e-13);
    REQUIRE(g.converged);
    CHECK(g.value == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));

    // integrable endpoint singularity
    const auto s = quad::integrate([](double x) { return 1.0 / std::sqrt(x); },
                                   1e-12, 1.0, 1e-10);
    CHECK(s.value == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("quadrature: gauss-legendre exactness on polynomials") {
    // 64-point rule is exact through degree 127
    const double v = quad::gauss_legendre([](double x) { return std::pow(x, 9); },
                                          0.0, 1.0, 64);
    CHECK(v == doctest::Approx(0.1).epsilon(1e-14));
    const double w = quad::gauss_legendre([](double x) { return std::cosh(x); },
                                          -1.0, 1.0, 64);
    CHECK(w == doctest::Approx(2.0 * std::sinh(1.0)).epsilon(1e-14));
}

TEST_CASE("io: fmt round-trips doubles exactly") {
    for (double x : {0.1, 1.0 / 3.0, 2.5e-17, -3.75, 1e300, 0.0}) {
        CHECK(std::stod(io::fmt(x)) == x);
    }
}

TEST_CASE("io: fnv1a is deterministic and spreads") {
    CHECK(io::fnv1a_hex("") == io::fnv1a_hex(""));
    CHECK(io::fnv1a_hex("a") != io::fnv1a_hex("b"));
    CHECK(io::fnv1a_hex("abc").size() == 16);
}

TEST_CASE("io: csv round-trip") {
    const auto t = io::read_csv("a,b\n1,2\n3.5,-4\n");
    REQUIRE(t.header.size() == 2);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][0] == 3.5);
    CHECK(t.rows[1][1] == -4.0);
}
