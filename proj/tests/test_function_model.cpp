#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "sgn/function_model.hpp"

using namespace sgn;
using Catch::Approx;

namespace {

TestFunctionSpec spec1(Family f, double a, double b) {
    TestFunctionSpec s;
    s.family = f;
    s.window = {a, b};
    return s;
}

}  // namespace

TEST_CASE("grid maps nodes to a + i h") {
    const Grid1D g(-1.0, 3.0, 16);
    CHECK(g.h() == 0.25);
    CHECK(g.nodes() == 17);
    CHECK(g.x(0) == -1.0);
    CHECK(g.x(16) == 3.0);
    CHECK(g.x(5) == -1.0 + 5 * 0.25);
    double total = 0.0;
    for (double w : g.weights()) total += w;
    CHECK(total == Approx(4.0).epsilon(1e-15));
    CHECK_THROWS_AS(Grid1D(1.0, 1.0, 16), InvalidArgument);
    CHECK_THROWS_AS(Grid1D(0.0, 1.0, 7), InvalidArgument);
}

TEST_CASE("gaussian samples match the closed form") {
    const auto u = make_test_function(spec1(Family::gaussian, -6, 6), Grid1D(-6, 6, 1024));
    for (std::size_t i = 0; i < u.size(); i += 37) {
        const double x = u.grid.x(i);
        CHECK(u.u[i] == Approx(std::exp(-x * x)).margin(1e-15));
        CHECK(u.d1[i] == Approx(-2 * x * std::exp(-x * x)).margin(1e-14));
        CHECK(u.d2[i] == Approx((4 * x * x - 2) * std::exp(-x * x)).margin(1e-13));
    }
}

TEST_CASE("bump with zero amplitude is identically zero") {
    auto s = spec1(Family::smooth_bump, -2, 2);
    s.amplitude = 0.0;
    const auto u = make_test_function(s, Grid1D(-2, 2, 256));
    for (std::size_t i = 0; i < u.size(); ++i) {
        CHECK(u.u[i] == 0.0);
        CHECK(u.d1[i] == 0.0);
        CHECK(u.d2[i] == 0.0);
    }
}

TEST_CASE("bump vanishes with its derivatives at the window edge") {
    const auto u = make_test_function(spec1(Family::smooth_bump, -2, 2), Grid1D(-2, 2, 512));
    CHECK(u.compact);
    for (std::size_t i : {std::size_t{0}, u.size() - 1}) {
        CHECK(u.u[i] == 0.0);
        CHECK(u.d1[i] == 0.0);
        CHECK(u.d2[i] == 0.0);
    }
}

TEST_CASE("sine window second derivative and finite-difference consistency") {
    const auto s = spec1(Family::sine_window, -std::numbers::pi, std::numbers::pi);
    const auto u1 = make_test_function(s, Grid1D(s.window.a, s.window.b, 1024));
    for (std::size_t i = 0; i < u1.size(); i += 41) CHECK(u1.d2[i] == Approx(-std::sin(u1.grid.x(i))).margin(1e-14));
    const auto u2 = make_test_function(s, u1.grid.refined());
    const double q = fd_consistency_error(u1) / fd_consistency_error(u2);
    CHECK(q >= 3.5);
    CHECK(q <= 4.5);
}

TEST_CASE("finite-difference error is second order for every family") {
    for (auto fam : {Family::gaussian, Family::smooth_bump, Family::modulated_bump, Family::sine_window}) {
        auto s = spec1(fam, -2, 2);
        s.frequency = fam == Family::modulated_bump ? 4.0 : 1.0;
        const auto a = make_test_function(s, Grid1D(-2, 2, 512));
        const auto b = make_test_function(s, Grid1D(-2, 2, 1024));
        for (int order : {1, 2, 3}) {
            const double q = fd_consistency_error(a, order) / fd_consistency_error(b, order);
            INFO(to_string(fam) << " order " << order);
            CHECK(q >= 3.5);
            CHECK(q <= 4.5);
        }
    }
}

TEST_CASE("unresolvable specs are rejected") {
    auto s = spec1(Family::gaussian, -1, 1);
    s.width = 0.01;
    CHECK_THROWS_AS(make_test_function(s, Grid1D(-1, 1, 128)), Unresolvable);
    s.width = 1.0;
    s.center = 5.0;
    CHECK_THROWS_AS(make_test_function(s, Grid1D(-1, 1, 128)), InvalidArgument);
    s.center = 0.0;
    CHECK_THROWS_AS(make_test_function(s, Grid1D(-1, 2, 128)), InvalidArgument);
}

TEST_CASE("two-dimensional partials agree with the jets") {
    TestFunctionSpec s;
    s.family = Family::gaussian;
    s.dim = 2;
    s.window = s.window_y = {-4, 4};
    const Grid2D g(Grid1D(-4, 4, 64), Grid1D(-4, 4, 64));
    const auto u = make_test_function_2d(s, g, 2);
    const auto dyy = u.partial(0, 2);
    const auto dxy = u.partial(1, 1);
    for (std::size_t k = 0; k < g.size(); k += 97) {
        const std::size_t i = k % g.nx(), j = k / g.nx();
        const double x = g.x().x(i), y = g.y().x(j), e = std::exp(-x * x - y * y);
        CHECK(u.u[k] == Approx(e).margin(1e-15));
        CHECK(u.d1[k] == Approx(-2 * y * e).margin(1e-14));
        CHECK(dyy[k] == Approx((4 * y * y - 2) * e).margin(1e-13));
        CHECK(dxy[k] == Approx(4 * x * y * e).margin(1e-13));
    }
}

TEST_CASE("quadrature closed forms") {
    const Grid1D g(-1.0, 2.0, 3072);
    std::vector<double> chi(g.nodes(), 0.0);
    std::vector<std::size_t> region;
    for (std::size_t i = 0; i < g.nodes(); ++i)
        if (g.x(i) >= 0.0 && g.x(i) <= 1.0) {
            chi[i] = 1.0;
            region.push_back(i);
        }
    CHECK(quadrature_integral(chi, g, region) == Approx(1.0).margin(1e-9));

    const Grid1D gs(0.0, std::numbers::pi, 4096);
    std::vector<double> sv(gs.nodes());
    for (std::size_t i = 0; i < gs.nodes(); ++i) sv[i] = std::sin(gs.x(i));
    CHECK(quadrature_integral(sv, gs) == Approx(2.0).margin(1e-6));

    std::vector<double> zero(gs.nodes(), 0.0);
    CHECK(quadrature_integral(zero, gs) == 0.0);
    CHECK_THROWS_AS(quadrature_integral(zero, gs, std::vector<std::size_t>{}), DegenerateRegion);
}

TEST_CASE("interval integral with analytic endpoints") {
    const Grid1D g(-std::numbers::pi, std::numbers::pi, 2048);
    std::vector<double> c(g.nodes());
    for (std::size_t i = 0; i < g.nodes(); ++i) c[i] = std::cos(g.x(i));
    const double z = -std::numbers::pi / 3, y = std::numbers::pi / 3;
    const double v = interval_integral(c, g, z, y, [](double t) { return std::cos(t); });
    CHECK(v == Approx(std::sqrt(3.0)).epsilon(1e-6));
    CHECK_THROWS_AS(interval_integral(c, g, 1.0, 1.0, [](double) { return 0.0; }), DegenerateRegion);
}

TEST_CASE("quadrature is linear") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    const Grid1D g(-2.0, 5.0, 700);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> f(g.nodes()), h(g.nodes()), c(g.nodes());
        double fs = 0.0, hs = 0.0;
        const double a = d(rng), b = d(rng);
        for (std::size_t i = 0; i < g.nodes(); ++i) {
            f[i] = d(rng);
            h[i] = d(rng);
            c[i] = a * f[i] + b * h[i];
            fs = std::max(fs, std::abs(f[i]));
            hs = std::max(hs, std::abs(h[i]));
        }
        const double lhs =
            std::abs(quadrature_integral(c, g) - a * quadrature_integral(f, g) - b * quadrature_integral(h, g));
        CHECK(lhs <= 1e-12 * (std::abs(a) * fs + std::abs(b) * hs) * g.length());
    }
}

TEST_CASE("mollifier kernel mass and support") {
    for (double cells : {2.0, 3.5, 8.0, 20.0}) {
        const double h = 0.01;
        const MollifierKernel k(cells * h, h);
        double total = 0.0;
        for (double m : k.masses()) {
            CHECK(m >= 0.0);
            total += m;
        }
        CHECK(std::abs(total - 1.0) <= 1e-8);
        CHECK(static_cast<double>(k.radius()) * h <= cells * h + h);
        CHECK(k.masses().front() == 0.0);
    }
    CHECK_THROWS_AS(MollifierKernel(0.01, 0.01), InvalidArgument);
}

TEST_CASE("mollify preserves constants away from the edge and the mass of a bump") {
    const Grid1D g(0.0, 10.0, 1000);
    const double l = 0.1;
    auto one = sample_function([](double, double) { return Jet::constant(1.0); }, g);
    const auto m = mollify(one, l);
    CHECK(m.boundary_contaminated);
    for (std::size_t i = 0; i < g.nodes(); ++i)
        if (g.x(i) >= l + 1e-12 && g.x(i) <= 10.0 - l - 1e-12) CHECK(m.u[i] == Approx(1.0).margin(1e-12));

    const auto u = make_test_function(spec1(Family::smooth_bump, -2, 2), Grid1D(-2, 2, 1024));
    const auto mu = mollify(u, 8 * u.grid.h());
    CHECK_FALSE(mu.boundary_contaminated);
    CHECK(quadrature_integral(mu.u, u.grid) == Approx(quadrature_integral(u.u, u.grid)).epsilon(1e-6));
    double l2u = 0.0, l2m = 0.0;
    const auto w = u.grid.weights();
    for (std::size_t i = 0; i < u.size(); ++i) {
        l2u += w[i] * u.u[i] * u.u[i];
        l2m += w[i] * mu.u[i] * mu.u[i];
    }
    CHECK(std::sqrt(l2m) <= std::sqrt(l2u) * (1 + 1e-6));
}

TEST_CASE("mollify is linear and positivity preserving") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    const Grid1D g(0.0, 1.0, 256);
    GridFunction1D a{g, {}, {}, {}, {}, {}, false}, b = a;
    for (std::size_t i = 0; i < g.nodes(); ++i) {
        a.u.push_back(d(rng));
        b.u.push_back(d(rng) - 0.5);
    }
    a.d1 = a.d2 = a.d3 = a.u;
    b.d1 = b.d2 = b.d3 = b.u;
    GridFunction1D c = a;
    for (std::size_t i = 0; i < g.nodes(); ++i) c.u[i] = 2.0 * a.u[i] - 3.0 * b.u[i];
    c.d1 = c.d2 = c.d3 = c.u;
    const double l = 5 * g.h();
    const auto ma = mollify(a, l), mb = mollify(b, l), mc = mollify(c, l);
    for (std::size_t i = 0; i < g.nodes(); ++i) {
        CHECK(ma.u[i] >= 0.0);
        CHECK(mc.u[i] == Approx(2.0 * ma.u[i] - 3.0 * mb.u[i]).margin(1e-12));
    }
}
