#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "sgn/errors.hpp"
#include "sgn/function_model.hpp"

namespace sgn {

/// The unique k with 2^{k-1} <= v < 2^k.
inline int level_index(double v) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidArgument("level_index: value must be positive and finite");
    int e = 0;
    std::frexp(v, &e);  // v = m 2^e, m in [1/2, 1)
    return e;
}

/// Membership in the widened band [2^{k-2}, 2^{k+1}) around level k.
inline bool in_band(double v, int k) {
    return v >= std::ldexp(1.0, k - 2) && v < std::ldexp(1.0, k + 1);
}

/// Membership in the levels k-d .. k+d, i.e. [2^{k-d-1}, 2^{k+d}).
inline bool in_levels(double v, int k, int d) {
    return v >= std::ldexp(1.0, k - d - 1) && v < std::ldexp(1.0, k + d);
}

/// Smallest k with 2^{k-1} >= rel * peak.
inline int default_k_min(double peak, double rel = 1e-6) {
    if (!(peak > 0.0)) return 0;
    return static_cast<int>(std::ceil(std::log2(rel * peak))) + 1;
}

/// Maximal open interval (z, y) around a seed node on which sign*u' stays in
/// the band of the seed's level. `first`..`last` are the grid nodes strictly
/// inside.
struct EscapeInterval {
    double z = 0.0;
    double y = 0.0;
    int level = 0;
    int sign = 1;
    std::size_t seed = 0;
    std::size_t first = 0;
    std::size_t last = 0;

    double length() const { return y - z; }
    bool contains_node(std::size_t i) const { return i >= first && i <= last; }
};

namespace detail {

struct LineScan {
    std::size_t first = 0;
    std::size_t last = 0;
    bool left_exit = false;
    bool right_exit = false;
    double z = 0.0;
    double y = 0.0;
};

// Scan a line of samples from `seed` in both directions until sign*d leaves
// the band, then refine each crossing by bisection on `eval` (the derivative
// at an arbitrary coordinate). The returned endpoints are the in-band ends of
// the final brackets, so every node strictly inside is in the band.
template <class Samples, class Eval>
LineScan scan_line(const Grid1D& g, const Samples& d, Eval&& eval, std::size_t seed, int sign, int k) {
    const std::size_t n = g.nodes();
    auto inside = [&](double v) { return in_band(sign * v, k); };
    LineScan s;
    std::size_t r = seed;
    while (r + 1 < n && inside(d[r + 1])) ++r;
    std::size_t l = seed;
    while (l > 0 && inside(d[l - 1])) --l;
    s.first = l;
    s.last = r;
    s.right_exit = r + 1 == n;
    s.left_exit = l == 0;
    if (s.right_exit || s.left_exit) return s;

    const double tol = g.h() * 1e-3;
    auto refine = [&](double in, double out) {
        while (std::abs(out - in) > tol) {
            const double mid = 0.5 * (in + out);
            (inside(eval(mid)) ? in : out) = mid;
        }
        return in;
    };
    s.y = refine(g.x(r), g.x(r + 1));
    s.z = refine(g.x(l), g.x(l - 1));
    return s;
}

}  // namespace detail

/// Escape interval of node x for the sign family `sign`.
inline EscapeInterval escape_interval(const GridFunction1D& u, std::size_t x, int sign) {
    if (x >= u.size()) throw InvalidArgument("escape_interval: node out of range");
    const double v = sign * u.d1[x];
    if (!(v > 0.0)) throw PreconditionError("escape_interval: sign*u'(x) must be positive");
    const int k = level_index(v);
    const auto s = detail::scan_line(u.grid, u.d1, [&](double t) { return u.at(t, 1); }, x, sign, k);
    if (s.right_exit) throw WindowExit("escape interval leaves the window on the right", u.grid.b());
    if (s.left_exit) throw WindowExit("escape interval leaves the window on the left", u.grid.a());
    return EscapeInterval{s.z, s.y, k, sign, x, s.first, s.last};
}

struct SparseFamily1D {
    Grid1D grid;
    int k_min = 0;
    std::vector<EscapeInterval> intervals{};
    std::vector<int> counts{};                     // covering intervals per node
    std::vector<std::size_t> window_exit_nodes{};  // eligible but excluded
    std::size_t eligible_nodes = 0;
    double unanalyzed_measure = 0.0;             // measure of {|u'| < 2^{k_min-1}}
};

struct OverlapProfile {
    std::vector<int> counts{};
    int max = 0;
    std::size_t argmax = 0;
};

inline OverlapProfile overlap_profile(const SparseFamily1D& family) {
    OverlapProfile p;
    p.counts.assign(family.grid.nodes(), 0);
    for (const auto& iv : family.intervals)
        for (std::size_t i = iv.first; i <= iv.last; ++i) ++p.counts[i];
    for (std::size_t i = 0; i < p.counts.size(); ++i)
        if (p.counts[i] > p.max) {
            p.max = p.counts[i];
            p.argmax = i;
        }
    return p;
}

/// Family made of explicit intervals (level 0, sign +1); nodes strictly
/// inside each interval are its members.
inline SparseFamily1D make_interval_family(const Grid1D& grid, const std::vector<std::pair<double, double>>& ivs) {
    SparseFamily1D f{.grid = grid};
    for (const auto& [z, y] : ivs) {
        if (!(z < y)) throw InvalidArgument("make_interval_family: need z < y");
        EscapeInterval e{z, y, 0, 1, 0, 0, 0};
        std::optional<std::size_t> lo;
        std::size_t hi = 0;
        for (std::size_t i = 0; i < grid.nodes(); ++i)
            if (grid.x(i) > z && grid.x(i) < y) {
                if (!lo) lo = i;
                hi = i;
            }
        if (!lo) throw DegenerateRegion("make_interval_family: interval contains no grid node");
        e.first = *lo;
        e.last = hi;
        e.seed = *lo;
        f.intervals.push_back(e);
    }
    f.counts = overlap_profile(f).counts;
    return f;
}

namespace detail {

struct LineFamily {
    std::vector<EscapeInterval> intervals{};
    std::vector<std::size_t> window_exit_nodes{};
    std::size_t eligible = 0;
    std::vector<std::size_t> unanalyzed;
};

// Escape intervals of every seed of one line with |d| >= floor.
//
// Seeds are the nodes themselves plus, for each cell, the levels that the
// continuous derivative must pass through between the two node values
// (intermediate values): such a level has points of E_k inside the cell, and
// their escape interval is the band component through the adjacent in-band
// node. Seeds are visited left to right. Within one (level, sign) the escape
// intervals are identical or disjoint, so a seed lying inside the most recent
// run of its class reuses that run's interval (or its window exit).
template <class Samples, class Eval>
LineFamily line_family(const Grid1D& g, const Samples& d, Eval&& eval, double floor) {
    LineFamily out;
    struct Last {
        std::size_t first, last;
        std::optional<std::size_t> interval;
    };
    std::map<std::pair<int, int>, Last> last;
    const double dedup_tol = g.h() * 1e-2;
    const int k_min = level_index(floor);

    // Returns false when the seed's interval leaves the window.
    auto visit = [&](std::size_t x, int k, int sign) {
        const auto key = std::make_pair(k, sign);
        if (auto it = last.find(key); it != last.end() && x >= it->second.first && x <= it->second.last)
            return it->second.interval.has_value();
        const auto s = scan_line(g, d, eval, x, sign, k);
        if (s.left_exit || s.right_exit) {
            last[key] = Last{s.first, s.last, std::nullopt};
            return false;
        }
        if (auto it = last.find(key); it != last.end() && it->second.interval) {
            const auto& prev = out.intervals[*it->second.interval];
            if (std::abs(prev.z - s.z) <= dedup_tol && std::abs(prev.y - s.y) <= dedup_tol) {
                it->second.first = std::min(it->second.first, s.first);
                it->second.last = std::max(it->second.last, s.last);
                return true;
            }
        }
        last[key] = Last{s.first, s.last, out.intervals.size()};
        out.intervals.push_back(EscapeInterval{s.z, s.y, k, sign, x, s.first, s.last});
        return true;
    };

    for (std::size_t x = 0; x < g.nodes(); ++x) {
        const double v = d[x];
        if (!(std::abs(v) >= floor)) {
            out.unanalyzed.push_back(x);
        } else {
            ++out.eligible;
            if (!visit(x, level_index(std::abs(v)), v > 0.0 ? 1 : -1)) out.window_exit_nodes.push_back(x);
        }
        if (x + 1 == g.nodes()) break;
        for (int sign : {1, -1}) {
            const double a = sign * d[x];
            const double b = sign * d[x + 1];
            const double hi = std::max(a, b);
            if (!(hi >= floor)) continue;
            const double lo = std::min(a, b);
            const int top = level_index(hi);
            const int bottom = lo >= floor ? level_index(lo) : k_min - 1;
            for (int k = bottom + 1; k < top; ++k) {
                if (in_band(a, k))
                    visit(x, k, sign);
                else if (in_band(b, k))
                    visit(x + 1, k, sign);
            }
        }
    }
    return out;
}

}  // namespace detail

/// Sparse covering P+ u P- of {|u'| >= 2^{k_min - 1}}. Seeds whose interval
/// would leave the window are excluded and listed; more than
/// `max_excluded_fraction` of the eligible nodes excluded is a configuration
/// error.
inline SparseFamily1D build_family_1d(const GridFunction1D& u, std::optional<int> k_min = std::nullopt,
                                      double max_excluded_fraction = 0.01) {
    double peak = 0.0;
    for (double v : u.d1) peak = std::max(peak, std::abs(v));
    SparseFamily1D fam{.grid = u.grid, .k_min = k_min.value_or(default_k_min(peak))};
    const double floor = std::ldexp(1.0, fam.k_min - 1);
    auto lf = detail::line_family(u.grid, u.d1, [&](double t) { return u.at(t, 1); }, floor);
    const auto weights = u.grid.weights();
    for (auto i : lf.unanalyzed) fam.unanalyzed_measure += weights[i];
    fam.intervals = std::move(lf.intervals);
    fam.window_exit_nodes = std::move(lf.window_exit_nodes);
    fam.eligible_nodes = lf.eligible;
    fam.counts = overlap_profile(fam).counts;

    if (fam.eligible_nodes > 0 &&
        static_cast<double>(fam.window_exit_nodes.size()) >
            max_excluded_fraction * static_cast<double>(fam.eligible_nodes))
        throw ConfigError("build_family_1d: " + std::to_string(fam.window_exit_nodes.size()) + " of " +
                          std::to_string(fam.eligible_nodes) +
                          " eligible nodes have escape intervals leaving the window");
    return fam;
}

/// Averages of |u''| and |u| over each family interval, using the analytic
/// endpoint values.
struct IntervalAverages {
    std::vector<double> abs_d2;
    std::vector<double> abs_u;
    std::vector<double> int_abs_d2;
    std::vector<double> int_abs_u;
};

inline IntervalAverages interval_averages(const GridFunction1D& u, const SparseFamily1D& family) {
    std::vector<double> a2(u.size());
    std::vector<double> a0(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        a2[i] = std::abs(u.d2[i]);
        a0[i] = std::abs(u.u[i]);
    }
    IntervalAverages out;
    for (const auto& iv : family.intervals) {
        const double i2 = interval_integral(a2, u.grid, iv.z, iv.y, [&](double t) { return std::abs(u.at(t, 2)); });
        const double i0 = interval_integral(a0, u.grid, iv.z, iv.y, [&](double t) { return std::abs(u.at(t, 0)); });
        out.int_abs_d2.push_back(i2);
        out.int_abs_u.push_back(i0);
        out.abs_d2.push_back(i2 / iv.length());
        out.abs_u.push_back(i0 / iv.length());
    }
    return out;
}

struct PointwiseReport {
    std::vector<double> ratio;  // 0 at uncovered nodes
    double max_ratio = 0.0;
    std::size_t argmax = 0;
    std::size_t covered = 0;
};

/// ratio(x) = u'(x)^2 / sum_{P containing x} avg_P|u''| * avg_P|u|.
inline PointwiseReport verify_pointwise_1d(const GridFunction1D& u, const SparseFamily1D& family) {
    const auto avg = interval_averages(u, family);
    std::vector<double> denom(u.size(), 0.0);
    std::vector<char> covered(u.size(), 0);
    for (std::size_t p = 0; p < family.intervals.size(); ++p) {
        const auto& iv = family.intervals[p];
        for (std::size_t i = iv.first; i <= iv.last; ++i) {
            denom[i] += avg.abs_d2[p] * avg.abs_u[p];
            covered[i] = 1;
        }
    }
    PointwiseReport r;
    r.ratio.assign(u.size(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!covered[i]) continue;
        ++r.covered;
        if (!(denom[i] > 0.0))
            throw ConstructionViolation("verify_pointwise_1d: zero denominator at covered node " +
                                        std::to_string(i));
        r.ratio[i] = u.d1[i] * u.d1[i] / denom[i];
        if (r.ratio[i] > r.max_ratio) {
            r.max_ratio = r.ratio[i];
            r.argmax = i;
        }
    }
    return r;
}

/// Index of the family interval of node x's own level and sign containing x.
inline std::optional<std::size_t> own_interval(const GridFunction1D& u, const SparseFamily1D& family, std::size_t x) {
    const double v = u.d1.at(x);
    if (v == 0.0) return std::nullopt;
    const int k = level_index(std::abs(v));
    const int sign = v > 0.0 ? 1 : -1;
    for (std::size_t p = 0; p < family.intervals.size(); ++p) {
        const auto& iv = family.intervals[p];
        if (iv.level == k && iv.sign == sign && iv.contains_node(x)) return p;
    }
    return std::nullopt;
}

/// u'(x)^2 / (avg_I|u''| avg_I|u|) with I the escape interval of x alone.
inline double own_interval_ratio(const GridFunction1D& u, const SparseFamily1D& family, std::size_t x) {
    const auto p = own_interval(u, family, x);
    if (!p) throw PreconditionError("own_interval_ratio: node " + std::to_string(x) + " is not covered");
    const auto& iv = family.intervals[*p];
    std::vector<double> a2(u.size()), a0(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        a2[i] = std::abs(u.d2[i]);
        a0[i] = std::abs(u.u[i]);
    }
    const double i2 = interval_integral(a2, u.grid, iv.z, iv.y, [&](double t) { return std::abs(u.at(t, 2)); });
    const double i0 = interval_integral(a0, u.grid, iv.z, iv.y, [&](double t) { return std::abs(u.at(t, 0)); });
    const double len = iv.length();
    return u.d1[x] * u.d1[x] / ((i2 / len) * (i0 / len));
}

struct ObservationResult {
    bool bound_a_ok = true;
    bool bound_b_ok = true;
    double derivative = 0.0;  // |u'(x)|
    double rhs_a = 0.0;       // 4 * int_I |u''|
    double rhs_b = 0.0;       // c_d / |I|^2 * int_I |u|
};

/// Constant in |u'(x)| <= c_d / |I|^2 * int_I |u|: 32 when I stays within
/// one level of x's level, 2^d * 32 beyond that.
inline double observation_constant(int d) { return d <= 1 ? 32.0 : std::ldexp(32.0, d); }

/// Checks |u'(x)| <= 4 int_I |u''| and |u'(x)| <= c_d/|I|^2 int_I |u| for an
/// interval I = (lo, hi) containing the escape interval of x on which
/// sign*u' stays within levels k-d..k+d. Both sides are compared with a
/// relative quadrature slack `eps`.
inline ObservationResult check_observation_bounds(const GridFunction1D& u, std::size_t x, double lo, double hi,
                                                  int d = 1, double eps = 0.02) {
    ObservationResult res;
    if (x >= u.size() || !(lo < hi)) throw InvalidArgument("check_observation_bounds: bad node or interval");
    res.derivative = std::abs(u.d1[x]);
    if (res.derivative == 0.0) return res;  // vacuous
    const int sign = u.d1[x] > 0.0 ? 1 : -1;
    const auto esc = escape_interval(u, x, sign);
    const double tol = u.grid.h() * 1e-3;
    if (lo > esc.z + tol || hi < esc.y - tol)
        throw PreconditionError("check_observation_bounds: I does not contain the escape interval of x");
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double t = u.grid.x(i);
        if (t > lo && t < hi && !in_levels(sign * u.d1[i], esc.level, d))
            throw PreconditionError("check_observation_bounds: u' leaves levels k-d..k+d inside I");
    }
    std::vector<double> a2(u.size());
    std::vector<double> a0(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        a2[i] = std::abs(u.d2[i]);
        a0[i] = std::abs(u.u[i]);
    }
    const double i2 = interval_integral(a2, u.grid, lo, hi, [&](double t) { return std::abs(u.at(t, 2)); });
    const double i0 = interval_integral(a0, u.grid, lo, hi, [&](double t) { return std::abs(u.at(t, 0)); });
    res.rhs_a = 4.0 * i2;
    res.rhs_b = observation_constant(d) / ((hi - lo) * (hi - lo)) * i0;
    res.bound_a_ok = res.derivative <= res.rhs_a * (1.0 + eps);
    res.bound_b_ok = res.derivative <= res.rhs_b * (1.0 + eps);
    return res;
}

/// Same check with I taken to be a family interval already known to be the
/// escape interval of x (skips recomputing it).
inline ObservationResult check_observation_on_escape(const GridFunction1D& u, std::size_t x,
                                                     const EscapeInterval& iv, const IntervalAverages& avg,
                                                     std::size_t p, double eps = 0.02) {
    ObservationResult res;
    res.derivative = std::abs(u.d1[x]);
    res.rhs_a = 4.0 * avg.int_abs_d2[p];
    res.rhs_b = observation_constant(1) / (iv.length() * iv.length()) * avg.int_abs_u[p];
    res.bound_a_ok = res.derivative <= res.rhs_a * (1.0 + eps);
    res.bound_b_ok = res.derivative <= res.rhs_b * (1.0 + eps);
    return res;
}

}  // namespace sgn
