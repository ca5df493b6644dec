#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "sgn/errors.hpp"
#include "sgn/function_model.hpp"
#include "sgn/sparse1d.hpp"

namespace sgn {

/// Certified discrete modulus of continuity of u, d_axis u and d_axis^2 u.
///
/// Offsets between grid nodes are visited in order of physical length; the
/// table stores, for each distinct length, the largest difference of any of
/// the three sampled fields over all node pairs at most that far apart.
class ModulusTable {
public:
    explicit ModulusTable(const GridFunction2D& u) : u_(&u) {
        for (const auto* f : {&u.u, &u.d1, &u.d2})
            for (double v : *f) sup_ = std::max(sup_, std::abs(v));
        const auto& g = u.grid;
        diameter_ = std::hypot(g.x().length(), g.y().length());
    }

    /// M = max(|u|_inf, |du|_inf, |d^2u|_inf).
    double sup() const { return sup_; }
    double diameter() const { return diameter_; }

    /// min{2^{k-4}, 2^{2k-4} / M}.
    double bound(int k) const {
        if (sup_ == 0.0) return std::ldexp(1.0, k - 4);
        return std::min(std::ldexp(1.0, k - 4), std::ldexp(1.0, 2 * k - 4) / sup_);
    }

    /// Largest offset length d such that every node pair at distance <= d
    /// differs by at most `limit` in each field; 0 if even the shortest
    /// offset violates it, the window diameter if no offset does.
    double delta_for(double limit) {
        double best = 0.0;
        for (std::size_t g = 0;; ++g) {
            if (g == lengths_.size() && !extend()) return diameter_;
            if (cummax_[g] > limit) return best;
            best = lengths_[g];
        }
    }

    /// delta_k: the certified length rounded down to a multiple of the
    /// transverse grid step, or the window diameter when nothing binds.
    double delta(int k) {
        const double len = delta_for(bound(k));
        if (len >= diameter_) return diameter_;
        const double h = u_->grid.across(u_->axis).h();
        return h * std::floor(len / h * (1.0 + 1e-12));
    }

    /// Modulus over all pairs at distance <= d (extends the scan as needed).
    double modulus(double d) {
        double m = 0.0;
        for (std::size_t g = 0;; ++g) {
            if (g == lengths_.size() && !extend()) return m;
            if (lengths_[g] > d * (1.0 + 1e-12)) return m;
            m = cummax_[g];
        }
    }

private:
    struct Offset {
        long a;
        long b;
        double length;
    };

    // Add the next group of equal-length offsets; false when exhausted.
    bool extend() {
        if (offsets_.empty() && !exhausted_) enumerate();
        if (next_ >= offsets_.size()) return false;
        const double len = offsets_[next_].length;
        double m = cummax_.empty() ? 0.0 : cummax_.back();
        while (next_ < offsets_.size() && offsets_[next_].length <= len * (1.0 + 1e-12)) {
            m = std::max(m, scan(offsets_[next_]));
            ++next_;
        }
        lengths_.push_back(len);
        cummax_.push_back(m);
        return true;
    }

    void enumerate() {
        exhausted_ = true;
        const auto& g = u_->grid;
        const long nx = static_cast<long>(g.nx());
        const long ny = static_cast<long>(g.ny());
        const double hx = g.x().h();
        const double hy = g.y().h();
        for (long a = 0; a < nx; ++a)
            for (long b = -(ny - 1); b < ny; ++b) {
                if (a == 0 && b <= 0) continue;  // half plane, no zero offset
                offsets_.push_back({a, b, std::hypot(a * hx, b * hy)});
            }
        std::sort(offsets_.begin(), offsets_.end(), [](const Offset& l, const Offset& r) {
            return l.length != r.length ? l.length < r.length : (l.a != r.a ? l.a < r.a : l.b < r.b);
        });
    }

    double scan(const Offset& o) const {
        const auto& g = u_->grid;
        const long nx = static_cast<long>(g.nx());
        const long ny = static_cast<long>(g.ny());
        double m = 0.0;
        for (long j = std::max(0L, -o.b); j < std::min(ny, ny - o.b); ++j)
            for (long i = 0; i + o.a < nx; ++i) {
                const auto p = g.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
                const auto q = g.index(static_cast<std::size_t>(i + o.a), static_cast<std::size_t>(j + o.b));
                m = std::max({m, std::abs(u_->u[p] - u_->u[q]), std::abs(u_->d1[p] - u_->d1[q]),
                              std::abs(u_->d2[p] - u_->d2[q])});
            }
        return m;
    }

    const GridFunction2D* u_;
    double sup_ = 0.0;
    double diameter_ = 0.0;
    std::vector<Offset> offsets_;
    bool exhausted_ = false;
    std::size_t next_ = 0;
    std::vector<double> lengths_;
    std::vector<double> cummax_;
};

/// delta_k for a single level.
inline double compute_delta(const GridFunction2D& u, int k) {
    ModulusTable t(u);
    return t.delta(k);
}

/// Escape interval (z, y) of a seed on grid line `line`.
struct SlabPiece {
    std::size_t line = 0;
    double z = 0.0;
    double y = 0.0;
    std::size_t first = 0;
    std::size_t last = 0;
};

/// R_k for one (level, sign): union of per-line escape intervals of seeds in
/// E_k, thickened across lines by delta_k and rasterized to grid nodes.
struct SlabSet {
    int level = 0;
    int sign = 1;
    double delta = 0.0;
    std::size_t half_width = 0;  // lines on each side included by the thickening
    bool unresolved = false;     // delta_k below one transverse grid step
    std::vector<std::uint8_t> mask;
    std::size_t cells = 0;
    std::vector<SlabPiece> pieces;  // distinct seed intervals before thickening
};

struct SparseFamily2D {
    Grid2D grid;
    int axis = 1;
    int k_min = 0;
    std::vector<SlabSet> slabs{};
    std::vector<std::size_t> window_exit_nodes{};
    std::size_t eligible_nodes = 0;
    std::vector<int> seed_level{};  // level of each eligible node
    std::vector<int> seed_sign{};   // sign of each eligible node, 0 if not eligible
};

inline OverlapProfile overlap_profile(const SparseFamily2D& family, int sign = 0) {
    OverlapProfile p;
    p.counts.assign(family.grid.size(), 0);
    for (const auto& s : family.slabs) {
        if (sign != 0 && s.sign != sign) continue;
        for (std::size_t k = 0; k < s.mask.size(); ++k) p.counts[k] += s.mask[k];
    }
    for (std::size_t k = 0; k < p.counts.size(); ++k)
        if (p.counts[k] > p.max) {
            p.max = p.counts[k];
            p.argmax = k;
        }
    return p;
}

inline SparseFamily2D build_family_2d(const GridFunction2D& u, std::optional<int> k_min = std::nullopt,
                                      double max_excluded_fraction = 0.01) {
    if (!u.compact) throw PreconditionError("build_family_2d: only compactly supported functions are admitted");
    if (!u.analytic) throw PreconditionError("build_family_2d: closed-form derivative required");
    const int axis = u.axis;
    const auto& g = u.grid;
    double peak = 0.0;
    for (double v : u.d1) peak = std::max(peak, std::abs(v));

    SparseFamily2D fam{.grid = g, .axis = axis, .k_min = k_min.value_or(default_k_min(peak))};
    fam.seed_level.assign(g.size(), 0);
    fam.seed_sign.assign(g.size(), 0);
    const double floor = std::ldexp(1.0, fam.k_min - 1);
    const Grid1D& along = g.along(axis);
    const Grid1D& across = g.across(axis);

    std::map<std::pair<int, int>, std::vector<SlabPiece>> pieces;
    std::vector<double> line(along.nodes());
    for (std::size_t l = 0; l < across.nodes(); ++l) {
        for (std::size_t t = 0; t < along.nodes(); ++t) line[t] = u.d1[g.line_index(axis, l, t)];
        auto lf = detail::line_family(along, line, [&](double t) { return u.along_line(l, t, 1); }, floor);
        fam.eligible_nodes += lf.eligible;
        for (auto t : lf.window_exit_nodes) fam.window_exit_nodes.push_back(g.line_index(axis, l, t));
        for (const auto& iv : lf.intervals) pieces[{iv.level, iv.sign}].push_back({l, iv.z, iv.y, iv.first, iv.last});
        for (std::size_t t = 0; t < along.nodes(); ++t) {
            const double v = line[t];
            if (std::abs(v) >= floor) {
                const auto k = g.line_index(axis, l, t);
                fam.seed_level[k] = level_index(std::abs(v));
                fam.seed_sign[k] = v > 0.0 ? 1 : -1;
            }
        }
    }
    if (fam.eligible_nodes > 0 &&
        static_cast<double>(fam.window_exit_nodes.size()) >
            max_excluded_fraction * static_cast<double>(fam.eligible_nodes))
        throw ConfigError("build_family_2d: too many escape intervals leave the window");

    ModulusTable table(u);
    for (const auto& [key, list] : pieces) {
        SlabSet s;
        s.level = key.first;
        s.sign = key.second;
        s.delta = table.delta(s.level);
        s.unresolved = s.delta < across.h();
        const double lines = std::floor(s.delta / across.h() * (1.0 + 1e-12));
        s.half_width = static_cast<std::size_t>(std::min(lines, static_cast<double>(across.nodes())));
        s.mask.assign(g.size(), 0);
        for (const auto& p : list) {
            const std::size_t lo = p.line >= s.half_width ? p.line - s.half_width : 0;
            const std::size_t hi = std::min(across.nodes() - 1, p.line + s.half_width);
            for (std::size_t l = lo; l <= hi; ++l)
                for (std::size_t t = p.first; t <= p.last; ++t) s.mask[g.line_index(axis, l, t)] = 1;
        }
        s.cells = static_cast<std::size_t>(std::count(s.mask.begin(), s.mask.end(), std::uint8_t{1}));
        s.pieces = list;
        fam.slabs.push_back(std::move(s));
    }
    return fam;
}

struct SlabIntegrals {
    double measure = 0.0;
    double abs_d2 = 0.0;  // integral of |d^2 u| along the axis
    double abs_u = 0.0;
};

/// Integrals over a slab: along each line the union of the (thickened)
/// escape intervals is integrated with exact endpoints, across lines the
/// trapezoid weights of the transverse grid are used.
inline SlabIntegrals slab_integrals(const GridFunction2D& u, const SparseFamily2D& family, const SlabSet& slab) {
    const auto& g = family.grid;
    const int axis = family.axis;
    const Grid1D& along = g.along(axis);
    const Grid1D& across = g.across(axis);
    const auto wl = across.weights();
    std::map<std::size_t, std::vector<std::pair<double, double>>> per_line;
    for (const auto& p : slab.pieces) {
        const std::size_t lo = p.line >= slab.half_width ? p.line - slab.half_width : 0;
        const std::size_t hi = std::min(across.nodes() - 1, p.line + slab.half_width);
        for (std::size_t l = lo; l <= hi; ++l) per_line[l].emplace_back(p.z, p.y);
    }
    SlabIntegrals out;
    std::vector<double> a2(along.nodes()), a0(along.nodes());
    for (auto& [l, ivs] : per_line) {
        std::sort(ivs.begin(), ivs.end());
        std::vector<std::pair<double, double>> merged;
        for (const auto& iv : ivs) {
            if (!merged.empty() && iv.first <= merged.back().second)
                merged.back().second = std::max(merged.back().second, iv.second);
            else
                merged.push_back(iv);
        }
        for (std::size_t t = 0; t < along.nodes(); ++t) {
            const auto k = g.line_index(axis, l, t);
            a2[t] = std::abs(u.d2[k]);
            a0[t] = std::abs(u.u[k]);
        }
        for (const auto& [z, y] : merged) {
            out.measure += wl[l] * (y - z);
            out.abs_d2 += wl[l] * interval_integral(a2, along, z, y,
                                                    [&](double t) { return std::abs(u.along_line(l, t, 2)); });
            out.abs_u += wl[l] * interval_integral(a0, along, z, y,
                                                   [&](double t) { return std::abs(u.along_line(l, t, 0)); });
        }
    }
    return out;
}

struct Family2DReport {
    int max_overlap = 0;
    int max_overlap_plus = 0;
    int max_overlap_minus = 0;
    double max_ratio = 0.0;
    std::size_t argmax = 0;
    std::size_t covered = 0;
    std::size_t unresolved_slabs = 0;
    std::vector<double> ratio;
};

/// Checks band inclusion, overlap <= 5 per sign and coverage of every E_k
/// node by its own slab (construction violations throw), then reports the
/// pointwise ratio (d u)^2 / sum_{R containing x} avg_R|d^2u| avg_R|u|.
inline Family2DReport verify_family_2d(const GridFunction2D& u, const SparseFamily2D& family) {
    Family2DReport rep;
    const auto& g = family.grid;
    rep.ratio.assign(g.size(), 0.0);
    if (family.slabs.empty()) return rep;

    for (const auto& s : family.slabs) {
        if (s.unresolved) ++rep.unresolved_slabs;
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!s.mask[k]) continue;
            const double v = s.sign * u.d1[k];
            if (!(v >= std::ldexp(1.0, s.level - 3) && v < std::ldexp(1.0, s.level + 2)))
                throw ConstructionViolation("verify_family_2d: slab (k=" + std::to_string(s.level) +
                                            ") leaves levels k-2..k+2 at node " + std::to_string(k));
        }
    }
    const auto plus = overlap_profile(family, 1);
    const auto minus = overlap_profile(family, -1);
    rep.max_overlap_plus = plus.max;
    rep.max_overlap_minus = minus.max;
    rep.max_overlap = overlap_profile(family).max;
    if (rep.max_overlap_plus > 5 || rep.max_overlap_minus > 5)
        throw ConstructionViolation("verify_family_2d: overlap exceeds 5");

    std::map<std::pair<int, int>, std::size_t> slab_of;
    std::vector<double> product(family.slabs.size());
    for (std::size_t p = 0; p < family.slabs.size(); ++p) {
        const auto& s = family.slabs[p];
        slab_of[{s.level, s.sign}] = p;
        const auto in = slab_integrals(u, family, s);
        if (!(in.measure > 0.0)) throw DegenerateRegion("verify_family_2d: slab of zero measure");
        product[p] = (in.abs_d2 / in.measure) * (in.abs_u / in.measure);
    }

    std::vector<char> excluded(g.size(), 0);
    for (auto k : family.window_exit_nodes) excluded[k] = 1;
    std::vector<double> denom(g.size(), 0.0);
    for (std::size_t p = 0; p < family.slabs.size(); ++p)
        for (std::size_t k = 0; k < g.size(); ++k)
            if (family.slabs[p].mask[k]) denom[k] += product[p];

    for (std::size_t k = 0; k < g.size(); ++k) {
        if (family.seed_sign[k] == 0 || excluded[k]) continue;
        auto it = slab_of.find({family.seed_level[k], family.seed_sign[k]});
        if (it == slab_of.end() || !family.slabs[it->second].mask[k])
            throw ConstructionViolation("verify_family_2d: node " + std::to_string(k) +
                                        " of E_k is not covered by R_k");
        ++rep.covered;
        if (!(denom[k] > 0.0)) throw ConstructionViolation("verify_family_2d: zero denominator");
        rep.ratio[k] = u.d1[k] * u.d1[k] / denom[k];
        if (rep.ratio[k] > rep.max_ratio) {
            rep.max_ratio = rep.ratio[k];
            rep.argmax = k;
        }
    }
    return rep;
}

}  // namespace sgn
