#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgn/errors.hpp"
#include "sgn/function_model.hpp"
#include "sgn/ri_norms.hpp"
#include "sgn/sparse1d.hpp"
#include "sgn/sparse2d.hpp"
#include "sgn/sparse_operator.hpp"

namespace sgn {

enum class GNMode { pure, gradient, pure_sum };

inline std::string to_string(GNMode m) {
    switch (m) {
        case GNMode::pure: return "pure";
        case GNMode::gradient: return "gradient";
        case GNMode::pure_sum: return "pure-sum";
    }
    return "?";
}

inline GNMode parse_mode(const std::string& s) {
    if (s == "pure") return GNMode::pure;
    if (s == "gradient") return GNMode::gradient;
    if (s == "pure-sum") return GNMode::pure_sum;
    throw InvalidArgument("unknown GN mode '" + s + "'");
}

struct GNCase {
    std::string id;
    TestFunctionSpec u;
    int axis = 1;
    int j = 1;
    int k = 2;
    SpaceDescriptor X;
    SpaceDescriptor Y;
    GNMode mode = GNMode::pure;
    std::size_t n = 1024;
    bool refine = true;                   // rerun at 2n
    double stability_tol = 0.01;          // allowed relative change under n -> 2n
    std::optional<double> max_ratio;      // optional asserted upper bound

    void validate() const {
        if (!(j >= 1 && j < k && k <= 3)) throw InvalidArgument("GN case " + id + ": need 1 <= j < k <= 3");
        if (u.dim != 1 && u.dim != 2) throw InvalidArgument("GN case " + id + ": dim must be 1 or 2");
        if (axis != 1 && axis != 2) throw InvalidArgument("GN case " + id + ": axis must be 1 or 2");
        if (X.tag() != Y.tag()) throw InvalidArgument("GN case " + id + ": X and Y must share a tag");
    }
};

/// Samples of the three GN expressions and the quadrature weights.
struct GNFields {
    std::vector<double> lhs;  // order-j expression
    std::vector<double> top;  // order-k expression
    std::vector<double> u;
    std::vector<double> weights;
};

inline GNFields gn_fields(const GNCase& c, std::size_t n) {
    GNFields f;
    if (c.u.dim == 1) {
        const auto g = make_test_function(c.u, Grid1D(c.u.window.a, c.u.window.b, n));
        f.lhs = g.derivative(c.j);
        f.top = g.derivative(c.k);
        f.u = g.u;
        f.weights = g.grid.weights();
        return f;
    }
    const Grid2D grid(Grid1D(c.u.window.a, c.u.window.b, n), Grid1D(c.u.window_y.a, c.u.window_y.b, n));
    const auto g = make_test_function_2d(c.u, grid, c.axis);
    f.u = g.u;
    f.weights = grid.weights();
    auto expression = [&](int order) {
        std::vector<double> out(grid.size(), 0.0);
        auto add_abs = [&](int a, int b) {
            const auto p = g.partial(a, b);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += std::abs(p[i]);
        };
        switch (c.mode) {
            case GNMode::pure:
                return c.axis == 1 ? g.partial(order, 0) : g.partial(0, order);
            case GNMode::gradient:
                for (int a = 0; a <= order; ++a) add_abs(a, order - a);
                return out;
            case GNMode::pure_sum:
                add_abs(order, 0);
                add_abs(0, order);
                return out;
        }
        return out;
    };
    f.lhs = expression(c.j);
    f.top = expression(c.k);
    return f;
}

struct GNReport {
    GNCase gncase;
    SpaceDescriptor Z;
    double lhs = 0.0;    // ||order-j expression||_Z
    double rhs_x = 0.0;  // ||order-k expression||_X
    double rhs_y = 0.0;  // ||u||_Y
    double ratio = 0.0;
    std::optional<double> ratio_refined;
    double refinement_change = 0.0;
    bool stable = true;
};

struct GNValues {
    double lhs = 0.0;
    double rhs_x = 0.0;
    double rhs_y = 0.0;
    double ratio = 0.0;
};

inline GNValues gn_values(const GNCase& c, const SpaceDescriptor& Z, std::size_t n) {
    const auto f = gn_fields(c, n);
    GNValues v;
    v.rhs_y = space_norm(f.u, f.weights, c.Y);
    if (v.rhs_y == 0.0) return v;  // u = 0: vacuous
    v.lhs = space_norm(f.lhs, f.weights, Z);
    v.rhs_x = space_norm(f.top, f.weights, c.X);
    const double th = static_cast<double>(c.j) / c.k;
    const double denom = std::pow(v.rhs_x, th) * std::pow(v.rhs_y, 1.0 - th);
    v.ratio = denom > 0.0 ? v.lhs / denom : 0.0;
    return v;
}

/// lhs / (||D^k u||_X^{j/k} ||u||_Y^{1-j/k}) with Z = X^{j/k} Y^{1-j/k}.
inline GNReport gn_ratio(const GNCase& c) {
    c.validate();
    GNReport r;
    r.gncase = c;
    r.Z = cl_combine(c.X, c.Y, Rational(c.j, c.k));
    const auto v = gn_values(c, r.Z, c.n);
    r.lhs = v.lhs;
    r.rhs_x = v.rhs_x;
    r.rhs_y = v.rhs_y;
    r.ratio = v.ratio;
    if (c.refine) {
        r.ratio_refined = gn_values(c, r.Z, 2 * c.n).ratio;
        r.refinement_change = r.ratio > 0.0 ? std::abs(*r.ratio_refined - r.ratio) / r.ratio : 0.0;
        r.stable = r.refinement_change < c.stability_tol;
    }
    return r;
}

/// (R, r) with j/P + (k-j)/Q = k/R and j/p + (k-j)/q = k/r.
inline std::pair<Exponent, Exponent> lorentz_parameter_solve(const Exponent& P, const Exponent& p, const Exponent& Q,
                                                              const Exponent& q, int j, int k) {
    if (!(j >= 1 && j < k)) throw InvalidArgument("lorentz_parameter_solve: need 1 <= j < k");
    SpaceDescriptor::lorentz(P, p);
    SpaceDescriptor::lorentz(Q, q);
    const Rational J(j), K(k);
    const auto R = Exponent::from_reciprocal((J * P.reciprocal() + (K - J) * Q.reciprocal()) / K);
    const auto r = Exponent::from_reciprocal((J * p.reciprocal() + (K - J) * q.reciprocal()) / K);
    SpaceDescriptor::lorentz(R, r);
    return {R, r};
}

/// Equality of descriptors: exact for rational parameters, Orlicz inverses
/// compared on a log grid to `rel` relative.
inline bool descriptors_agree(const SpaceDescriptor& a, const SpaceDescriptor& b, double rel = 1e-9) {
    if (a.tag() != b.tag()) return false;
    if (a.tag() != SpaceDescriptor::Tag::orlicz) return a == b;
    for (int e = -40; e <= 40; ++e) {
        const double s = std::pow(10.0, e / 4.0);
        const double x = a.phi().inverse(s);
        const double y = b.phi().inverse(s);
        if (std::abs(x - y) > rel * std::max(std::abs(x), std::abs(y))) return false;
    }
    return true;
}

struct InductionResult {
    bool pass = true;
    std::string detail;  // first failing identity
};

/// X^{(k-1)/k} Y^{1/k} = X^{(k-2)/(k-1)} W^{1/(k-1)} and
/// X^{(j-1)/(k-1)} W^{(k-j)/(k-1)} = X^{j/k} Y^{(k-j)/k} for 1 < j < k,
/// with W = X^{1/k} Y^{(k-1)/k}.
inline InductionResult induction_identity_check(const SpaceDescriptor& X, const SpaceDescriptor& Y, int k) {
    if (k < 3) throw InvalidArgument("induction_identity_check: k must be at least 3");
    InductionResult res;
    const Rational K(k);
    const auto W = cl_combine(X, Y, Rational(1) / K);
    const auto lhs_a = cl_combine(X, Y, (K - 1) / K);
    const auto rhs_a = cl_combine(X, W, (K - 2) / (K - 1));
    if (!descriptors_agree(lhs_a, rhs_a)) {
        res.pass = false;
        res.detail = "k=" + std::to_string(k) + ": " + lhs_a.to_string() + " != " + rhs_a.to_string();
        return res;
    }
    for (int j = 2; j < k; ++j) {
        const Rational J(j);
        const auto lhs_b = cl_combine(X, W, (J - 1) / (K - 1));
        const auto rhs_b = cl_combine(X, Y, J / K);
        if (!descriptors_agree(lhs_b, rhs_b)) {
            res.pass = false;
            res.detail = "k=" + std::to_string(k) + ", j=" + std::to_string(j) + ": " + lhs_b.to_string() +
                         " != " + rhs_b.to_string();
            return res;
        }
    }
    return res;
}

struct ChainLink {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

struct ChainReport {
    int K = 0;
    double C = 0.0;
    std::vector<ChainLink> links;
    bool pass() const {
        for (const auto& l : links)
            if (!l.pass) return false;
        return !links.empty();
    }
};

/// Link-by-link check of
///   ||u'||_Z <= C ||(T|u''|)^{1/2} (T|u|)^{1/2}||_Z
///            <= C ||T|u''|||_X^{1/2} ||T|u|||_Y^{1/2}
///            <= C K ||u''||_X^{1/2} ||u||_Y^{1/2}
/// with C^2 = 128 (1 + eps), Z = X^{1/2} Y^{1/2} and P the 1D sparse family.
inline ChainReport chain_check(const GridFunction1D& u, const SparseFamily1D& family, const SpaceDescriptor& X,
                               const SpaceDescriptor& Y, double eps = 0.02) {
    ChainReport rep;
    const auto sets = node_sets(family);
    const auto& w = sets.weights;
    rep.K = sets.max_overlap();
    rep.C = std::sqrt(128.0 * (1.0 + eps));
    const auto Z = cl_combine(X, Y, Rational(1, 2));
    std::vector<double> a2(u.size()), a0(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        a2[i] = std::abs(u.d2[i]);
        a0[i] = std::abs(u.u[i]);
    }
    const auto T2 = apply_sparse_operator(sets, a2).values;
    const auto T0 = apply_sparse_operator(sets, a0).values;
    std::vector<double> h(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) h[i] = std::sqrt(T2[i] * T0[i]);

    const double tz = norm_tolerance(Z);
    const double lhs = space_norm(u.d1, w, Z);
    const double hz = space_norm(h, w, Z);
    rep.links.push_back({"pointwise", lhs, rep.C * hz, lhs <= rep.C * hz * (1.0 + tz)});

    const auto fac = cl_factorization_check(h, T2, T0, w, X, Y, Rational(1, 2));
    rep.links.push_back({"factorization", rep.C * fac.lhs, rep.C * fac.rhs, fac.pass});

    const auto opx = operator_norm_check(sets, a2, X);
    const auto opy = operator_norm_check(sets, a0, Y);
    rep.links.push_back({"operator-x", opx.lhs, opx.rhs, opx.pass});
    rep.links.push_back({"operator-y", opy.lhs, opy.rhs, opy.pass});

    const double end = rep.C * rep.K * std::sqrt(space_norm(u.d2, w, X) * space_norm(u.u, w, Y));
    rep.links.push_back({"overall", lhs, end, lhs <= end * (1.0 + std::max(tz, 1e-6))});
    return rep;
}

/// Structural checks a corpus run may attach to each case.
struct CheckFlags {
    bool overlap = true;
    bool pointwise = true;
    bool observation = true;
    bool operator_norm = true;
    bool modular = true;
    bool young = true;
    bool gn = true;
    bool chain = true;
    bool induction = true;
    bool norms = true;

    bool any() const {
        return overlap || pointwise || observation || operator_norm || modular || young || gn || chain ||
               induction || norms;
    }
};

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CaseResult {
    GNCase gncase;
    std::optional<GNReport> report;
    std::optional<int> overlap_max;
    std::optional<double> pointwise_max;
    std::vector<Verdict> verdicts;
    std::string error;

    bool pass() const {
        if (!error.empty()) return false;
        for (const auto& v : verdicts)
            if (!v.pass) return false;
        return true;
    }
};

/// Pointwise slack on 128 and overlap bounds used by the corpus runner.
inline constexpr double pointwise_bound_1d = 128.0 * 1.02;
inline constexpr int overlap_bound_1d = 3;
inline constexpr int overlap_bound_2d = 5;

namespace detail {

inline std::vector<double> absolute(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]);
    return out;
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline void run_case(CaseResult& res, const CheckFlags& flags) {
    const GNCase& c = res.gncase;
    c.validate();
    if (flags.gn) {
        res.report = gn_ratio(c);
        const auto& r = *res.report;
        bool ok = std::isfinite(r.ratio) && r.ratio >= 0.0 && r.stable;
        std::string detail = "ratio=" + fmt(r.ratio);
        if (r.ratio_refined) detail += " ratio_2n=" + fmt(*r.ratio_refined) + " change=" + fmt(r.refinement_change);
        if (c.max_ratio) {
            ok = ok && r.ratio <= *c.max_ratio;
            detail += " bound=" + fmt(*c.max_ratio);
        }
        res.verdicts.push_back({"gn", ok, detail});
    }
    const bool structural = flags.overlap || flags.pointwise || flags.operator_norm || flags.chain;
    if (!structural) return;

    if (c.u.dim == 1) {
        const auto u = make_test_function(c.u, Grid1D(c.u.window.a, c.u.window.b, c.n));
        const auto fam = build_family_1d(u);
        const auto ov = overlap_profile(fam);
        res.overlap_max = ov.max;
        if (flags.overlap)
            res.verdicts.push_back({"overlap", ov.max <= overlap_bound_1d,
                                    "max=" + std::to_string(ov.max) + " at node " + std::to_string(ov.argmax)});
        if (flags.pointwise) {
            const auto pw = verify_pointwise_1d(u, fam);
            res.pointwise_max = pw.max_ratio;
            res.verdicts.push_back({"pointwise", pw.max_ratio <= pointwise_bound_1d,
                                    "max=" + fmt(pw.max_ratio) + " at node " + std::to_string(pw.argmax)});
        }
        if (flags.operator_norm) {
            const auto sets = node_sets(fam);
            const auto ox = operator_norm_check(sets, detail::absolute(u.derivative(c.k)), c.X);
            const auto oy = operator_norm_check(sets, detail::absolute(u.u), c.Y);
            res.verdicts.push_back({"operator-norm", ox.pass && oy.pass,
                                    "x:" + fmt(ox.lhs) + "<=" + fmt(ox.rhs) + " y:" + fmt(oy.lhs) + "<=" + fmt(oy.rhs)});
        }
        if (flags.chain && c.j == 1 && c.k == 2) {
            const auto ch = chain_check(u, fam, c.X, c.Y);
            std::string d;
            std::string failed;
            for (const auto& l : ch.links) {
                d += (d.empty() ? "" : " ") + l.name + ":" + fmt(l.lhs) + "<=" + fmt(l.rhs);
                if (!l.pass && failed.empty()) failed = l.name;
            }
            res.verdicts.push_back({"chain", ch.pass(), failed.empty() ? d : "link " + failed + " fails; " + d});
        }
        return;
    }

    if (!c.u.compactly_supported()) return;  // the 2D construction needs compact support
    const Grid2D grid(Grid1D(c.u.window.a, c.u.window.b, c.n), Grid1D(c.u.window_y.a, c.u.window_y.b, c.n));
    const auto u = make_test_function_2d(c.u, grid, c.axis);
    const auto fam = build_family_2d(u);
    const auto rep = verify_family_2d(u, fam);
    res.overlap_max = std::max(rep.max_overlap_plus, rep.max_overlap_minus);
    res.pointwise_max = rep.max_ratio;
    if (flags.overlap)
        res.verdicts.push_back({"overlap", *res.overlap_max <= overlap_bound_2d,
                                "max per sign=" + std::to_string(*res.overlap_max)});
    if (flags.pointwise)
        res.verdicts.push_back({"pointwise", std::isfinite(rep.max_ratio), "max=" + fmt(rep.max_ratio)});
    if (flags.operator_norm) {
        const auto sets = node_sets(fam);
        const auto oy = operator_norm_check(sets, detail::absolute(u.u), c.Y);
        res.verdicts.push_back({"operator-norm", oy.pass, "y:" + fmt(oy.lhs) + "<=" + fmt(oy.rhs)});
    }
}

}  // namespace detail

/// Runs every case in order; per-case errors are recorded and the run
/// continues.
inline std::vector<CaseResult> run_corpus(const std::vector<GNCase>& cases, const CheckFlags& flags) {
    std::vector<CaseResult> out;
    out.reserve(cases.size());
    for (const auto& c : cases) {
        CaseResult res;
        res.gncase = c;
        try {
            detail::run_case(res, flags);
        } catch (const std::exception& e) {
            res.error = e.what();
        }
        out.push_back(std::move(res));
    }
    return out;
}

}  // namespace sgn
