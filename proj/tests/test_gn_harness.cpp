#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sgn/gn_harness.hpp"

using namespace sgn;
using Catch::Approx;

namespace {

SpaceDescriptor D(const char* s) { return SpaceDescriptor::parse(s); }

TestFunctionSpec spec1(Family f, double a, double b, double width = 1.0, double freq = 1.0) {
    TestFunctionSpec s;
    s.family = f;
    s.width = width;
    s.frequency = freq;
    s.window = {a, b};
    return s;
}

GNCase make_case(const std::string& id, const TestFunctionSpec& u, const char* X, const char* Y, int j = 1, int k = 2,
                 std::size_t n = 1024) {
    GNCase c;
    c.id = id;
    c.u = u;
    c.X = D(X);
    c.Y = D(Y);
    c.j = j;
    c.k = k;
    c.n = n;
    return c;
}

TestFunctionSpec bump2d(int family_kind = 0) {
    TestFunctionSpec s;
    s.family = family_kind == 2 ? Family::modulated_bump : Family::smooth_bump;
    s.frequency = 3.0;
    s.dim = 2;
    s.radial = family_kind != 1;
    s.window = s.window_y = {-1.25, 1.25};
    return s;
}

}  // namespace

TEST_CASE("zero function gives ratio 0") {
    auto s = spec1(Family::smooth_bump, -1, 1);
    s.amplitude = 0.0;
    const auto r = gn_ratio(make_case("zero", s, "L:2", "L:2"));
    CHECK(r.ratio == 0.0);
    CHECK(r.stable);
}

TEST_CASE("gaussian L2: ratio at most 1 + 1e-3") {
    const auto r = gn_ratio(make_case("g", spec1(Family::gaussian, -6, 6), "L:2", "L:2"));
    CHECK(r.Z == D("L:2"));
    CHECK(r.ratio > 0.0);
    CHECK(r.ratio <= 1.001);
    CHECK(r.stable);
    // int u'^2 = sqrt(pi / 2), int u''^2 = 3 sqrt(pi / 2), int u^2 = sqrt(pi / 2)
    CHECK(r.lhs == Approx(std::pow(M_PI / 2, 0.25)).epsilon(1e-6));
    CHECK(r.ratio == Approx(1 / std::pow(3.0, 0.25)).epsilon(1e-6));
}

TEST_CASE("bump L1: finite ratio, stable within 1% under refinement") {
    const auto r = gn_ratio(make_case("b", spec1(Family::smooth_bump, -1, 1), "L:1", "L:1"));
    CHECK(std::isfinite(r.ratio));
    CHECK(r.ratio > 0.0);
    REQUIRE(r.ratio_refined);
    CHECK(r.refinement_change < 0.01);
    CHECK(r.stable);
}

TEST_CASE("Lorentz parameter solve examples") {
    auto E = [](const char* s) { return Exponent::parse(s); };
    auto [R1, r1] = lorentz_parameter_solve(E("1"), E("1"), E("1"), E("1"), 1, 2);
    CHECK(R1 == E("1"));
    CHECK(r1 == E("1"));
    auto [R2, r2] = lorentz_parameter_solve(E("2"), E("2"), E("4"), E("4"), 1, 2);
    CHECK(R2 == E("8/3"));
    CHECK(r2 == E("8/3"));
    auto [R3, r3] = lorentz_parameter_solve(E("inf"), E("inf"), E("2"), E("2"), 1, 2);
    CHECK(R3 == E("4"));
    CHECK(r3 == E("4"));
    CHECK_THROWS_AS(lorentz_parameter_solve(E("1"), E("2"), E("2"), E("2"), 1, 2), AdmissibilityError);
    CHECK_THROWS_AS(lorentz_parameter_solve(E("2"), E("2"), E("2"), E("2"), 2, 2), InvalidArgument);
    // (1,1) with (inf,inf) gives an admissible (2,2)
    auto [R4, r4] = lorentz_parameter_solve(E("1"), E("1"), E("inf"), E("inf"), 1, 2);
    CHECK(R4 == E("2"));
    CHECK(r4 == E("2"));
}

TEST_CASE("Lorentz parameter solve agrees with cl_combine") {
    std::mt19937 rng(41);
    std::uniform_int_distribution<int> d(1, 6), jk(0, 2);
    const std::pair<int, int> orders[] = {{1, 2}, {1, 3}, {2, 3}};
    for (int trial = 0; trial < 60; ++trial) {
        const auto P = Exponent::finite(Rational(d(rng) + 1, d(rng)) + Rational(1));
        const auto Q = Exponent::finite(Rational(d(rng) + 1, d(rng)) + Rational(1));
        const auto p = Exponent::finite(Rational(d(rng), 2) + Rational(1));
        const auto q = trial % 5 == 0 ? Exponent::infinity() : Exponent::finite(Rational(d(rng), 3) + Rational(1));
        const auto [j, k] = orders[jk(rng)];
        const auto [R, r] = lorentz_parameter_solve(P, p, Q, q, j, k);
        const auto Z = cl_combine(SpaceDescriptor::lorentz(P, p), SpaceDescriptor::lorentz(Q, q), Rational(j, k));
        CHECK(Z == SpaceDescriptor::lorentz(R, r));
    }
}

TEST_CASE("induction identities") {
    for (const char* x : {"L:2", "Lor:3,2", "Orl:exp", "Orl:powlog:1,1"})
        for (int k : {3, 4, 5}) {
            const auto res = induction_identity_check(D(x), D(x), k);
            INFO(x << " k " << k << " " << res.detail);
            CHECK(res.pass);
        }
    CHECK(induction_identity_check(D("L:1"), D("L:3"), 3).pass);
    CHECK(cl_combine(D("L:1"), D("L:3"), Rational(2, 3)).p().reciprocal() == Rational(7, 9));
    const auto W = cl_combine(D("L:1"), D("L:3"), Rational(1, 3));
    CHECK(W.p().reciprocal() == Rational(5, 9));
    CHECK(cl_combine(D("L:1"), W, Rational(1, 2)).p().reciprocal() == Rational(7, 9));

    CHECK(induction_identity_check(D("Orl:pow:1"), D("Orl:pow:3"), 3).pass);
    CHECK(induction_identity_check(D("Orl:exp"), D("Orl:pow:2"), 3).pass);
    CHECK(induction_identity_check(D("Orl:exp"), D("Orl:powlog:1,1"), 4).pass);
    CHECK(induction_identity_check(D("Lor:2,2"), D("Lor:4,inf"), 4).pass);
    CHECK_THROWS_AS(induction_identity_check(D("L:1"), D("L:2"), 2), InvalidArgument);
    CHECK_THROWS_AS(induction_identity_check(D("L:1"), D("Orl:exp"), 3), InvalidArgument);
}

TEST_CASE("descriptor agreement distinguishes different Orlicz functions") {
    CHECK(descriptors_agree(D("Orl:pow:2"), D("Orl:pow:2")));
    CHECK_FALSE(descriptors_agree(D("Orl:pow:2"), D("Orl:pow:3")));
    CHECK_FALSE(descriptors_agree(D("Orl:exp"), D("Orl:powlog:1,1")));
    CHECK_FALSE(descriptors_agree(D("L:2"), D("Lor:2,2")));
}

TEST_CASE("scale invariance of the ratio") {
    const std::vector<std::pair<const char*, const char*>> pairs = {
        {"L:1", "L:1"}, {"L:2", "L:inf"}, {"Lor:2,2", "Lor:4,4"}, {"Orl:exp", "Orl:pow:2"}};
    for (auto [x, y] : pairs)
        for (double c : {0.01, 7.5, 300.0}) {
            auto s = spec1(Family::modulated_bump, -1, 1, 1.0, 5.0);
            auto a = make_case("a", s, x, y, 1, 2, 512);
            a.refine = false;
            auto b = a;
            b.u.amplitude = c;
            INFO(x << " " << y << " c " << c);
            CHECK(gn_ratio(b).ratio == Approx(gn_ratio(a).ratio).epsilon(1e-9));
        }
}

TEST_CASE("dilation coherence for Lebesgue X = Y") {
    for (const char* p : {"L:1", "L:2", "L:3"})
        for (double lambda : {0.5, 3.0}) {
            const auto a = gn_ratio(make_case("a", spec1(Family::gaussian, -6, 6), p, p));
            const auto b = gn_ratio(make_case("b", spec1(Family::gaussian, -6 * lambda, 6 * lambda, lambda), p, p));
            INFO(p << " lambda " << lambda);
            CHECK(std::abs(a.ratio - b.ratio) <= 0.01 * a.ratio);
        }
}

TEST_CASE("pure derivative is dominated by the gradient sum") {
    for (const char* z : {"L:1", "L:2", "Lor:3,2", "Orl:exp"}) {
        for (int axis : {1, 2}) {
            auto pure = make_case("p", bump2d(2), z, z, 1, 2, 128);
            pure.axis = axis;
            auto grad = pure;
            grad.mode = GNMode::gradient;
            const auto fp = gn_fields(pure, 128), fg = gn_fields(grad, 128);
            const auto Z = D(z);
            INFO(z << " axis " << axis);
            CHECK(space_norm(fp.lhs, fp.weights, Z) <= space_norm(fg.lhs, fg.weights, Z) * (1 + 1e-6));
            CHECK(space_norm(fp.top, fp.weights, Z) <= space_norm(fg.top, fg.weights, Z) * (1 + 1e-6));
        }
    }
}

TEST_CASE("pure-sum mode adds the two pure derivatives") {
    auto c = make_case("s", bump2d(1), "L:1", "L:1", 1, 2, 64);
    c.mode = GNMode::pure_sum;
    const auto f = gn_fields(c, 64);
    TestFunctionSpec s = c.u;
    const Grid2D g(Grid1D(s.window.a, s.window.b, 64), Grid1D(s.window_y.a, s.window_y.b, 64));
    const auto u = make_test_function_2d(s, g);
    const auto a = u.partial(2, 0), b = u.partial(0, 2);
    for (std::size_t i = 0; i < g.size(); i += 7) CHECK(f.top[i] == Approx(std::abs(a[i]) + std::abs(b[i])).margin(1e-14));
}

TEST_CASE("chain verifies link by link on corpus members") {
    const std::vector<TestFunctionSpec> corpus = {spec1(Family::gaussian, -6, 6), spec1(Family::smooth_bump, -1, 1),
                                                  spec1(Family::modulated_bump, -1, 1, 1.0, 6.0)};
    const std::vector<std::pair<const char*, const char*>> pairs = {
        {"L:1", "L:1"}, {"L:2", "L:2"}, {"L:3", "L:inf"}, {"Lor:2,2", "Lor:4,4"}, {"Orl:pow:2", "Orl:pow:1"}};
    for (const auto& s : corpus) {
        const auto u = make_test_function(s, Grid1D(s.window.a, s.window.b, 1024));
        const auto fam = build_family_1d(u);
        for (auto [x, y] : pairs) {
            const auto ch = chain_check(u, fam, D(x), D(y));
            INFO(to_string(s.family) << " " << x << " " << y);
            REQUIRE(ch.links.size() == 5);
            for (const auto& l : ch.links) {
                INFO(l.name << " " << l.lhs << " <= " << l.rhs);
                CHECK(l.pass);
            }
            CHECK(ch.K <= 3);
            CHECK(ch.links.front().lhs <= ch.links.back().rhs);
        }
    }
}

TEST_CASE("run_corpus: empty, order, errors recorded, determinism") {
    CheckFlags flags;
    CHECK(run_corpus({}, flags).empty());

    std::vector<GNCase> cases = {make_case("first", spec1(Family::gaussian, -6, 6), "L:2", "L:2", 1, 2, 512),
                                 make_case("bad", spec1(Family::gaussian, -6, 6), "L:2", "L:2", 2, 2, 512),
                                 make_case("third", spec1(Family::smooth_bump, -1, 1), "L:1", "L:1", 1, 3, 512),
                                 make_case("mixed", spec1(Family::smooth_bump, -1, 1), "L:1", "Orl:exp", 1, 2, 512)};
    const auto a = run_corpus(cases, flags);
    REQUIRE(a.size() == cases.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].gncase.id == cases[i].id);
    CHECK(a[0].pass());
    CHECK_FALSE(a[1].error.empty());
    CHECK_FALSE(a[1].pass());
    CHECK(a[2].error.empty());
    CHECK(a[2].pass());
    CHECK_FALSE(a[3].error.empty());

    std::vector<std::string> names;
    for (const auto& v : a[0].verdicts) names.push_back(v.name);
    CHECK(names == std::vector<std::string>{"gn", "overlap", "pointwise", "operator-norm", "chain"});

    const auto b = run_corpus(cases, flags);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].error == b[i].error);
        if (a[i].report) CHECK(a[i].report->ratio == b[i].report->ratio);
        REQUIRE(a[i].verdicts.size() == b[i].verdicts.size());
        for (std::size_t v = 0; v < a[i].verdicts.size(); ++v) CHECK(a[i].verdicts[v].detail == b[i].verdicts[v].detail);
    }
}

TEST_CASE("asserted ratio bounds turn into verdicts") {
    auto c = make_case("g", spec1(Family::gaussian, -6, 6), "L:2", "L:2", 1, 2, 512);
    c.max_ratio = 0.5;
    const CheckFlags only_gn{false, false, false, false, false, false, true, false, false, false};
    const auto r = run_corpus({c}, only_gn);
    REQUIRE(r[0].verdicts.size() == 1);
    CHECK_FALSE(r[0].pass());
    c.max_ratio = 1.001;
    CHECK(run_corpus({c}, only_gn)[0].pass());
}

TEST_CASE("two-dimensional corpus cases") {
    CheckFlags flags;
    std::vector<GNCase> cases;
    for (int kind : {0, 1, 2}) {
        auto c = make_case("2d-" + std::to_string(kind), bump2d(kind), "L:2", "L:2", 1, 2, 128);
        c.mode = kind == 0 ? GNMode::pure : kind == 1 ? GNMode::gradient : GNMode::pure_sum;
        c.stability_tol = 0.05;
        cases.push_back(c);
    }
    for (const auto& r : run_corpus(cases, flags)) {
        INFO(r.gncase.id << " " << r.error);
        CHECK(r.error.empty());
        REQUIRE(r.overlap_max);
        CHECK(*r.overlap_max <= 5);
        for (const auto& v : r.verdicts) {
            INFO(v.name << " " << v.detail);
            CHECK(v.pass);
        }
    }
}
