#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sgn/errors.hpp"
#include "sgn/function_model.hpp"
#include "sgn/gn_harness.hpp"
#include "sgn/ri_norms.hpp"
#include "sgn/sparse1d.hpp"
#include "sgn/sparse2d.hpp"
#include "sgn/sparse_operator.hpp"

namespace sgn {

/// One verdict of the checks report.
struct CheckRow {
    std::string check;
    std::string subject;
    std::size_t n = 0;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
    std::string detail;
};

/// A corpus member as declared in a run configuration.
struct FunctionEntry {
    std::string id;
    TestFunctionSpec spec;
    int axis = 1;
    std::optional<int> max_overlap;     // defaults: 3 in 1D, 5 per sign in 2D
    double max_excluded = 0.01;         // window-exit tolerance of the family build
    std::optional<double> spot_x;       // node for a pointwise spot value
    std::optional<double> spot_ratio;   // expected ratio there (2% tolerance)
};

struct CheckSettings {
    std::size_t n1 = 1024;
    std::size_t n2 = 128;
    double pointwise_eps = 0.02;
    double observation_eps = 0.02;
    double stability_1d = 0.01;
    double stability_2d = 0.05;
    double operator_tol = 1e-9;
    double modular_tol = 1e-6;
    double young_tol = 1e-6;
    double mollifier_cells = 8.0;  // mollifier scale in grid steps
};

struct FunctionOutcome {
    std::vector<CheckRow> rows;
    std::optional<SparseFamily1D> family1d;
    std::optional<SparseFamily2D> family2d;
};

namespace detail {

inline std::vector<double> nonneg(const std::vector<double>& v) { return absolute(v); }

inline CheckRow row(std::string check, const std::string& subject, std::size_t n, double value, double bound,
                    bool pass, std::string detail = {}) {
    return CheckRow{std::move(check), subject, n, value, bound, pass, std::move(detail)};
}

inline std::vector<YoungFunction> modular_phis() {
    return {YoungFunction::power(Rational(1)), YoungFunction::power(Rational(3, 2)), YoungFunction::power(Rational(2)),
            YoungFunction::power(Rational(3)), YoungFunction::exp_minus_one()};
}

// L^1, L^inf bounds over the given inputs, plus L^1 equality on the
// indicator of the nodes where the overlap count equals K.
inline void operator_rows(std::vector<CheckRow>& rows, const std::string& id, std::size_t n,
                          const NodeSetFamily& sets, const std::vector<std::vector<double>>& inputs,
                          const CheckSettings& cs) {
    const int K = sets.max_overlap();
    const auto L1 = SpaceDescriptor::lebesgue(Exponent::of(1));
    const auto Linf = SpaceDescriptor::lebesgue(Exponent::infinity());
    double worst1 = 0.0, worstinf = 0.0;
    std::string where1, whereinf;
    auto track = [](double lhs, double rhs, double& worst, std::string& where, const std::string& label) {
        const double q = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0);
        if (q > worst || where.empty()) {
            worst = std::max(worst, q);
            where = label;
        }
    };
    std::vector<std::vector<double>> all = inputs;
    for (const auto& s : sets.sets) {
        std::vector<double> chi(sets.weights.size(), 0.0);
        for (auto i : s) chi[i] = 1.0;
        all.push_back(std::move(chi));
    }
    for (std::size_t t = 0; t < all.size(); ++t) {
        const auto Tf = apply_sparse_operator(sets, all[t]).values;
        const std::string label = t < inputs.size() ? "input " + std::to_string(t)
                                                    : "set " + std::to_string(t - inputs.size());
        track(space_norm(Tf, sets.weights, L1), K * space_norm(all[t], sets.weights, L1), worst1, where1, label);
        track(space_norm(Tf, sets.weights, Linf), K * space_norm(all[t], sets.weights, Linf), worstinf, whereinf,
              label);
    }
    const double b = 1.0 + cs.operator_tol;
    rows.push_back(row("operator-L1", id, n, worst1, b, worst1 <= b, "K=" + std::to_string(K) + " worst " + where1));
    rows.push_back(
        row("operator-Linf", id, n, worstinf, b, worstinf <= b, "K=" + std::to_string(K) + " worst " + whereinf));
    if (K > 0) {
        const auto counts = sets.counts();
        std::vector<double> chi(counts.size(), 0.0);
        for (std::size_t i = 0; i < counts.size(); ++i) chi[i] = counts[i] == K ? 1.0 : 0.0;
        const auto Tf = apply_sparse_operator(sets, chi).values;
        const double q = space_norm(Tf, sets.weights, L1) / (K * space_norm(chi, sets.weights, L1));
        rows.push_back(row("operator-L1-equality", id, n, q, 1.0, std::abs(q - 1.0) <= cs.operator_tol,
                           "indicator of {overlap = K}"));
    }
}

inline void modular_rows(std::vector<CheckRow>& rows, const std::string& id, std::size_t n,
                         const NodeSetFamily& sets, const std::vector<std::vector<double>>& inputs,
                         const CheckSettings& cs) {
    double worst = 0.0;
    std::string where = "none";
    for (const auto& phi : modular_phis())
        for (std::size_t t = 0; t < inputs.size(); ++t) {
            const auto r = modular_contraction_check(sets, inputs[t], phi);
            const double q = r.rhs > 0.0 ? r.lhs / r.rhs : (r.lhs > 0.0 ? INFINITY : 0.0);
            if (q > worst) {
                worst = q;
                where = "phi=" + phi.to_string() + " input " + std::to_string(t);
            }
        }
    rows.push_back(row("modular", id, n, worst, 1.0 + cs.modular_tol, worst <= 1.0 + cs.modular_tol, where));
}

inline void norm_rows(std::vector<CheckRow>& rows, const std::string& id, std::size_t n, const std::vector<double>& f,
                      const std::vector<double>& w) {
    const RearrangementProfile prof(f, w);
    double worst = 0.0;
    for (int p : {1, 2, 4}) {
        const double a = lebesgue_norm(f, w, Exponent::of(p));
        const double b = lebesgue_norm(prof, Exponent::of(p));
        worst = std::max(worst, std::abs(a - b) / a);
    }
    rows.push_back(row("equimeasurability", id, n, worst, 1e-6, worst <= 1e-6, "p = 1, 2, 4"));
    worst = 0.0;
    for (const Rational p : {Rational(1), Rational(3, 2), Rational(2), Rational(3)}) {
        const double a = lebesgue_norm(f, w, Exponent::finite(p));
        const double b = luxemburg_norm(f, w, YoungFunction::power(p));
        worst = std::max(worst, std::abs(a - b) / a);
    }
    rows.push_back(row("luxemburg-power", id, n, worst, 1e-6, worst <= 1e-6, "p = 1, 3/2, 2, 3"));
}

}  // namespace detail

/// Structural checks of a one-dimensional corpus member at n and 2n.
inline FunctionOutcome check_function_1d(const FunctionEntry& fe, const CheckFlags& flags, const CheckSettings& cs) {
    FunctionOutcome out;
    auto& rows = out.rows;
    const std::size_t n = cs.n1;
    const auto& id = fe.id;
    const auto u = make_test_function(fe.spec, Grid1D(fe.spec.window.a, fe.spec.window.b, n));
    const auto fam = build_family_1d(u, std::nullopt, fe.max_excluded);
    out.family1d = fam;
    const auto w = u.grid.weights();

    if (flags.overlap) {
        const auto ov = overlap_profile(fam);
        const int bound = fe.max_overlap.value_or(overlap_bound_1d);
        rows.push_back(detail::row("overlap", id, n, ov.max, bound, ov.max <= bound,
                                   "max at node " + std::to_string(ov.argmax) + " (x=" +
                                       detail::fmt(u.grid.x(ov.argmax)) + ")"));
    }
    if (flags.pointwise) {
        const auto pw = verify_pointwise_1d(u, fam);
        const double bound = 128.0 * (1.0 + cs.pointwise_eps);
        rows.push_back(detail::row("pointwise", id, n, pw.max_ratio, bound, pw.max_ratio <= bound,
                                   "max at node " + std::to_string(pw.argmax) + " (x=" +
                                       detail::fmt(u.grid.x(pw.argmax)) + ")"));
        const auto u2 = make_test_function(fe.spec, u.grid.refined());
        const auto pw2 = verify_pointwise_1d(u2, build_family_1d(u2, std::nullopt, fe.max_excluded));
        const double change = std::abs(pw2.max_ratio - pw.max_ratio) / pw.max_ratio;
        rows.push_back(detail::row("pointwise-refinement", id, n, change, cs.stability_1d, change < cs.stability_1d,
                                   "max " + detail::fmt(pw.max_ratio) + " -> " + detail::fmt(pw2.max_ratio)));
        if (fe.spot_x && fe.spot_ratio) {
            const double s = (*fe.spot_x - u.grid.a()) / u.grid.h();
            const auto i = static_cast<std::size_t>(std::llround(std::clamp(s, 0.0, double(u.grid.cells()))));
            const double own = own_interval_ratio(u, fam, i);
            const double rel = std::abs(own - *fe.spot_ratio) / *fe.spot_ratio;
            rows.push_back(detail::row("pointwise-spot", id, n, own, *fe.spot_ratio, rel <= 0.02,
                                       "own escape interval at x=" + detail::fmt(u.grid.x(i)) +
                                           ", relative error " + detail::fmt(rel) + ", summed ratio " +
                                           detail::fmt(pw.ratio[i])));
        }
    }
    if (flags.observation) {
        const auto avg = interval_averages(u, fam);
        std::vector<char> excluded(u.size(), 0);
        for (auto i : fam.window_exit_nodes) excluded[i] = 1;
        double worst = 0.0;
        std::size_t checked = 0, failures = 0;
        std::string where = "none";
        const double floor = std::ldexp(1.0, fam.k_min - 1);
        for (std::size_t x = 0; x < u.size(); ++x) {
            if (excluded[x] || !(std::abs(u.d1[x]) >= floor)) continue;
            const auto p = own_interval(u, fam, x);
            if (!p) throw ConstructionViolation("observation: node " + std::to_string(x) + " has no escape interval");
            const auto r = check_observation_on_escape(u, x, fam.intervals[*p], avg, *p, cs.observation_eps);
            ++checked;
            const double q = std::max(r.derivative / r.rhs_a, r.derivative / r.rhs_b);
            if (!(r.bound_a_ok && r.bound_b_ok)) ++failures;
            if (q > worst) {
                worst = q;
                where = "node " + std::to_string(x);
            }
        }
        const double bound = 1.0 + cs.observation_eps;
        rows.push_back(detail::row("observation", id, n, worst, bound, failures == 0,
                                   std::to_string(checked) + " nodes, " + std::to_string(failures) +
                                       " failures, worst " + where));
    }
    const auto sets = node_sets(fam);
    const std::vector<std::vector<double>> inputs{u.u, detail::nonneg(u.u), detail::nonneg(u.d1),
                                                  detail::nonneg(u.d2)};
    if (flags.operator_norm) {
        detail::operator_rows(rows, id, n, sets, inputs, cs);
        for (const auto& X : {SpaceDescriptor::lorentz(Exponent::of(2), Exponent::of(2)),
                              SpaceDescriptor::orlicz(YoungFunction::power(Rational(2)))}) {
            const auto r = operator_norm_check(sets, detail::nonneg(u.u), X);
            rows.push_back(detail::row("operator-" + X.to_string(), id, n, r.lhs, r.rhs, r.pass, "f = |u|"));
        }
    }
    if (flags.modular) detail::modular_rows(rows, id, n, sets, {detail::nonneg(u.u), detail::nonneg(u.d2)}, cs);
    if (flags.young) {
        const auto m = mollify(u, cs.mollifier_cells * u.grid.h());
        double worst = 0.0;
        std::string where;
        for (const auto& X :
             {SpaceDescriptor::lebesgue(Exponent::of(1)), SpaceDescriptor::lebesgue(Exponent::of(2)),
              SpaceDescriptor::lorentz(Exponent::of(2), Exponent::of(2)),
              SpaceDescriptor::orlicz(YoungFunction::power(Rational(2)))}) {
            const double q = space_norm(m.u, w, X) / space_norm(u.u, w, X);
            if (q > worst) {
                worst = q;
                where = X.to_string();
            }
        }
        rows.push_back(detail::row("young", id, n, worst, 1.0 + cs.young_tol, worst <= 1.0 + cs.young_tol,
                                   "worst " + where + (m.boundary_contaminated ? ", boundary contaminated" : "")));
    }
    if (flags.chain) {
        const auto L1 = SpaceDescriptor::lebesgue(Exponent::of(1));
        const auto ch = chain_check(u, fam, L1, L1);
        std::string failed;
        for (const auto& l : ch.links)
            if (!l.pass && failed.empty()) failed = l.name;
        const auto& last = ch.links.back();
        rows.push_back(detail::row("chain-L1", id, n, last.lhs, last.rhs, ch.pass(),
                                   failed.empty() ? "all links hold" : "link " + failed + " fails"));
    }
    if (flags.norms) detail::norm_rows(rows, id, n, u.u, w);
    return out;
}

/// Structural checks of a compactly supported two-dimensional member at n
/// and 2n.
inline FunctionOutcome check_function_2d(const FunctionEntry& fe, const CheckFlags& flags, const CheckSettings& cs) {
    FunctionOutcome out;
    auto& rows = out.rows;
    const std::size_t n = cs.n2;
    const auto& id = fe.id;
    const auto& s = fe.spec;
    const Grid2D grid(Grid1D(s.window.a, s.window.b, n), Grid1D(s.window_y.a, s.window_y.b, n));
    const auto u = make_test_function_2d(s, grid, fe.axis);
    const auto fam = build_family_2d(u, std::nullopt, fe.max_excluded);
    out.family2d = fam;

    const bool structural = flags.overlap || flags.pointwise;
    if (structural) {
        std::optional<Family2DReport> rep;
        try {
            rep = verify_family_2d(u, fam);
        } catch (const ConstructionViolation& e) {
            rows.push_back(detail::row("construction-2d", id, n, 0.0, 0.0, false, e.what()));
        }
        if (rep) {
            const int bound = fe.max_overlap.value_or(overlap_bound_2d);
            const int m = std::max(rep->max_overlap_plus, rep->max_overlap_minus);
            rows.push_back(detail::row("overlap-2d", id, n, m, bound, m <= bound,
                                       "plus " + std::to_string(rep->max_overlap_plus) + ", minus " +
                                           std::to_string(rep->max_overlap_minus) + ", " +
                                           std::to_string(rep->unresolved_slabs) + " of " +
                                           std::to_string(fam.slabs.size()) + " slabs below one grid step"));
            if (flags.pointwise) {
                rows.push_back(detail::row("pointwise-2d", id, n, rep->max_ratio, INFINITY,
                                           std::isfinite(rep->max_ratio),
                                           "covered " + std::to_string(rep->covered) + " nodes"));
                const Grid2D fine = grid.refined();
                const auto u2 = make_test_function_2d(s, fine, fe.axis);
                const auto rep2 = verify_family_2d(u2, build_family_2d(u2, std::nullopt, fe.max_excluded));
                const double change = std::abs(rep2.max_ratio - rep->max_ratio) / rep->max_ratio;
                rows.push_back(detail::row("pointwise-2d-refinement", id, n, change, cs.stability_2d,
                                           change < cs.stability_2d,
                                           "max " + detail::fmt(rep->max_ratio) + " -> " +
                                               detail::fmt(rep2.max_ratio)));
            }
        }
    }
    const auto sets = node_sets(fam);
    std::vector<double> a2(u.d2.size());
    for (std::size_t i = 0; i < a2.size(); ++i) a2[i] = std::abs(u.d2[i]);
    if (flags.operator_norm) detail::operator_rows(rows, id, n, sets, {u.u, detail::nonneg(u.u), a2}, cs);
    if (flags.modular) detail::modular_rows(rows, id, n, sets, {detail::nonneg(u.u)}, cs);
    if (flags.norms) detail::norm_rows(rows, id, n, u.u, grid.weights());
    return out;
}

/// Closed-form values of the norm engine on indicators.
inline std::vector<CheckRow> check_norm_closed_forms() {
    std::vector<CheckRow> rows;
    // window [-1, 3] with 1024 cells: h = 1/256 and the nodes 0 <= x < 1
    // carry measure exactly 1
    const Grid1D g(-1.0, 3.0, 1024);
    const auto w = g.weights();
    std::vector<double> chi1(g.nodes(), 0.0), chi4(g.nodes(), 0.0);
    for (std::size_t i = 0; i < g.nodes(); ++i) {
        if (g.x(i) >= 0.0 && g.x(i) < 1.0) chi1[i] = 1.0;
    }
    const Grid1D g4(-1.0, 5.0, 1536);
    const auto w4 = g4.weights();
    chi4.assign(g4.nodes(), 0.0);
    for (std::size_t i = 0; i < g4.nodes(); ++i)
        if (g4.x(i) >= 0.0 && g4.x(i) < 4.0) chi4[i] = 1.0;

    auto add = [&](const std::string& what, double v, double expected) {
        const double err = std::abs(v - expected);
        rows.push_back(CheckRow{"norm-closed-form", what, 0, v, expected, err <= 1e-6, "abs error " + detail::fmt(err)});
    };
    add("Lor:2,2 of indicator [0,1)", space_norm(chi1, w, SpaceDescriptor::parse("Lor:2,2")), std::sqrt(2.0));
    add("Orl:exp of indicator [0,1)", space_norm(chi1, w, SpaceDescriptor::parse("Orl:exp")), 1.0 / std::log(2.0));
    add("L:2 of indicator [0,4)", space_norm(chi4, w4, SpaceDescriptor::parse("L:2")), 2.0);
    add("Orl:pow:2 of indicator [0,4)", space_norm(chi4, w4, SpaceDescriptor::parse("Orl:pow:2")), 2.0);
    add("Orl:pow:1 of indicator [0,4)", space_norm(chi4, w4, SpaceDescriptor::parse("Orl:pow:1")), 4.0);
    return rows;
}

namespace detail {

inline Exponent random_exponent(std::mt19937& rng) {
    std::uniform_int_distribution<int> pick(0, 5);
    switch (pick(rng)) {
        case 0: return Exponent::of(1);
        case 1: return Exponent::infinity();
        default: {
            std::uniform_int_distribution<int> den(1, 6);
            const int d = den(rng);
            std::uniform_int_distribution<int> num(d, 10 * d);
            return Exponent::finite(Rational(num(rng), d));
        }
    }
}

// Admissible (P, p): P = 1 forces p = 1 and P = inf forces p = inf.
inline std::pair<Exponent, Exponent> random_lorentz(std::mt19937& rng) {
    const auto P = random_exponent(rng);
    if (P.reciprocal() == Rational(1)) return {P, P};
    if (P.is_infinite()) return {P, P};
    return {P, random_exponent(rng)};
}

}  // namespace detail

/// Lorentz parameter formula against cl_combine on random tuples, and the
/// induction identities for k = 3, 4.
inline std::vector<CheckRow> check_exponent_algebra(std::uint32_t seed, std::size_t tuples) {
    std::vector<CheckRow> rows;
    std::mt19937 rng(seed);
    std::size_t agree = 0;
    std::string first_bad;
    for (std::size_t t = 0; t < tuples; ++t) {
        const auto [P, p] = detail::random_lorentz(rng);
        const auto [Q, q] = detail::random_lorentz(rng);
        std::uniform_int_distribution<int> kd(2, 6);
        const int k = kd(rng);
        std::uniform_int_distribution<int> jd(1, k - 1);
        const int j = jd(rng);
        const auto [R, r] = lorentz_parameter_solve(P, p, Q, q, j, k);
        const auto Z = cl_combine(SpaceDescriptor::lorentz(P, p), SpaceDescriptor::lorentz(Q, q), Rational(j, k));
        if (Z == SpaceDescriptor::lorentz(R, r))
            ++agree;
        else if (first_bad.empty())
            first_bad = Z.to_string() + " vs Lor:" + R.to_string() + "," + r.to_string();
    }
    rows.push_back(CheckRow{"lorentz-parameters", "random tuples seed " + std::to_string(seed), 0, double(agree),
                            double(tuples), agree == tuples,
                            first_bad.empty() ? "exact agreement" : "first mismatch " + first_bad});

    const std::vector<std::pair<std::string, std::string>> pairs{
        {"L:1", "L:3"},           {"L:2", "L:inf"},           {"Lor:2,2", "Lor:4,4"},
        {"Lor:3/2,3", "Lor:inf,inf"}, {"Lor:1,1", "Lor:5/2,2"}, {"Orl:pow:1", "Orl:pow:3"},
        {"Orl:exp", "Orl:pow:2"}, {"Orl:powlog:1,1", "Orl:pow:2"}};
    for (const auto& [xs, ys] : pairs)
        for (int k : {3, 4}) {
            const auto r = induction_identity_check(SpaceDescriptor::parse(xs), SpaceDescriptor::parse(ys), k);
            rows.push_back(CheckRow{"induction", xs + " | " + ys + " k=" + std::to_string(k), 0, r.pass ? 1.0 : 0.0,
                                    1.0, r.pass, r.pass ? "identities hold" : r.detail});
        }
    return rows;
}

}  // namespace sgn
