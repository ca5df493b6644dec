#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgn/errors.hpp"
#include "sgn/grid.hpp"
#include "sgn/jet.hpp"

namespace sgn {

enum class Family { gaussian, smooth_bump, modulated_bump, sine_window };

inline std::string to_string(Family f) {
    switch (f) {
        case Family::gaussian: return "gaussian";
        case Family::smooth_bump: return "smooth-bump";
        case Family::modulated_bump: return "modulated-bump";
        case Family::sine_window: return "sine-window";
    }
    return "?";
}

inline Family parse_family(const std::string& s) {
    if (s == "gaussian") return Family::gaussian;
    if (s == "smooth-bump") return Family::smooth_bump;
    if (s == "modulated-bump") return Family::modulated_bump;
    if (s == "sine-window") return Family::sine_window;
    throw InvalidArgument("unknown function family '" + s + "'");
}

struct Window {
    double a = -1.0;
    double b = 1.0;
};

/// Closed-form test function description.
///
/// In 2D the gaussian and smooth-bump families are radial in the scaled
/// coordinates ((x - cx)/width, (y - cy)/width_y) unless `radial` is false,
/// in which case the bump is a tensor product of two 1D bumps. The modulated
/// bump oscillates along x, the sine window is a product of sines.
struct TestFunctionSpec {
    Family family = Family::gaussian;
    int dim = 1;
    double center = 0.0;
    double center_y = 0.0;
    double width = 1.0;
    double width_y = 0.0;  // 0 means "same as width"
    double amplitude = 1.0;
    double frequency = 1.0;
    bool radial = true;
    Window window{};
    Window window_y{};

    double effective_width_y() const { return width_y > 0.0 ? width_y : width; }

    bool compactly_supported() const {
        return family == Family::smooth_bump || family == Family::modulated_bump;
    }

    /// Smallest feature length the grid must resolve.
    double feature_length() const {
        switch (family) {
            case Family::gaussian:
            case Family::smooth_bump: return std::min(width, effective_width_y());
            case Family::modulated_bump:
                return std::min({width, effective_width_y(), 1.0 / std::abs(frequency)});
            case Family::sine_window: return 1.0 / std::abs(frequency);
        }
        return width;
    }

    AnalyticFunction analytic() const {
        const TestFunctionSpec s = *this;
        return [s](double x, double y) { return s.evaluate(x, y); };
    }

    Jet evaluate(double xv, double yv) const {
        const Jet x = Jet::variable(1, xv);
        const Jet sx = (x + (-center)) * (1.0 / width);
        if (dim == 1) {
            switch (family) {
                case Family::gaussian: return amplitude * exp(-1.0 * (sx * sx));
                case Family::smooth_bump: return amplitude * bump_profile(sx * sx);
                case Family::modulated_bump:
                    return amplitude * (bump_profile(sx * sx) * cos((x + (-center)) * frequency));
                case Family::sine_window: return amplitude * sin((x + (-center)) * frequency);
            }
        }
        const Jet y = Jet::variable(2, yv);
        const Jet sy = (y + (-center_y)) * (1.0 / effective_width_y());
        const Jet r2 = sx * sx + sy * sy;
        switch (family) {
            case Family::gaussian: return amplitude * exp(-1.0 * r2);
            case Family::smooth_bump:
                return radial ? amplitude * bump_profile(r2)
                              : amplitude * (bump_profile(sx * sx) * bump_profile(sy * sy));
            case Family::modulated_bump:
                return amplitude * (bump_profile(r2) * cos((x + (-center)) * frequency));
            case Family::sine_window:
                return amplitude * (sin((x + (-center)) * frequency) *
                                    sin((y + (-center_y)) * frequency));
        }
        return Jet();
    }
};

/// A function sampled on a 1D grid with derivatives up to third order.
struct GridFunction1D {
    Grid1D grid;
    std::vector<double> u;
    std::vector<double> d1;
    std::vector<double> d2;
    std::vector<double> d3;
    AnalyticFunction analytic;  // empty when the samples have no closed form
    bool compact = false;
    bool boundary_contaminated = false;

    std::size_t size() const { return u.size(); }

    /// Derivative of the given order (0..3) as sampled data.
    const std::vector<double>& derivative(int order) const {
        switch (order) {
            case 0: return u;
            case 1: return d1;
            case 2: return d2;
            case 3: return d3;
        }
        throw InvalidArgument("derivative order must be 0..3");
    }

    /// Derivative of the given order at an arbitrary point: analytic when
    /// available, otherwise linear interpolation of the samples.
    double at(double x, int order) const {
        if (analytic) return analytic(x, 0.0).d(order, 0);
        const auto& v = derivative(order);
        const double s = std::clamp((x - grid.a()) / grid.h(), 0.0, static_cast<double>(grid.cells()));
        const auto i = std::min(static_cast<std::size_t>(s), grid.cells() - 1);
        const double f = s - static_cast<double>(i);
        return (1.0 - f) * v[i] + f * v[i + 1];
    }
};

/// A function sampled on a 2D grid. `d1`, `d2` hold the first and second pure
/// derivatives along `axis` (1 or 2).
struct GridFunction2D {
    Grid2D grid;
    int axis = 1;
    std::vector<double> u;
    std::vector<double> d1;
    std::vector<double> d2;
    AnalyticFunction analytic;
    bool compact = false;

    /// Sampled mixed partial d^{a+b}u / dx^a dy^b (requires the closed form).
    std::vector<double> partial(int a, int b) const {
        if (!analytic) throw PreconditionError("partial(): function has no closed form");
        std::vector<double> out(grid.size());
        for (std::size_t j = 0; j < grid.ny(); ++j)
            for (std::size_t i = 0; i < grid.nx(); ++i)
                out[grid.index(i, j)] = analytic(grid.x().x(i), grid.y().x(j)).d(a, b);
        return out;
    }

    /// Derivative along `axis` of the given order at an arbitrary point on line `line`.
    double along_line(std::size_t line, double t, int order) const {
        const double c = grid.across(axis).x(line);
        const Jet j = axis == 1 ? analytic(t, c) : analytic(c, t);
        return j.pure(axis, order);
    }
};

namespace detail {

inline void check_spec(const TestFunctionSpec& spec, const Grid1D& gx, const Window& w, double center,
                       double h) {
    if (!(spec.width > 0.0) || !(spec.amplitude == spec.amplitude))
        throw InvalidArgument("test function: width must be positive");
    if (center < w.a || center > w.b)
        throw InvalidArgument("test function: center outside the window");
    if (gx.a() != w.a || gx.b() != w.b)
        throw InvalidArgument("test function: grid does not match the declared window");
    if (!(spec.feature_length() > 4.0 * h))
        throw Unresolvable("test function: feature length " + std::to_string(spec.feature_length()) +
                           " is not resolved by h = " + std::to_string(h) + " (need > 4h)");
}

inline void check_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) throw InvalidArgument("test function: non-finite sample");
}

}  // namespace detail

inline GridFunction1D make_test_function(const TestFunctionSpec& spec, const Grid1D& grid) {
    if (spec.dim != 1) throw InvalidArgument("make_test_function: spec is not one-dimensional");
    detail::check_spec(spec, grid, spec.window, spec.center, grid.h());
    GridFunction1D f{grid, {}, {}, {}, {}, spec.analytic(), spec.compactly_supported()};
    const std::size_t n = grid.nodes();
    f.u.resize(n);
    f.d1.resize(n);
    f.d2.resize(n);
    f.d3.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Jet j = spec.evaluate(grid.x(i), 0.0);
        f.u[i] = j.d(0, 0);
        f.d1[i] = j.d(1, 0);
        f.d2[i] = j.d(2, 0);
        f.d3[i] = j.d(3, 0);
    }
    detail::check_finite(f.u);
    return f;
}

inline GridFunction2D make_test_function_2d(const TestFunctionSpec& spec, const Grid2D& grid, int axis = 1) {
    if (spec.dim != 2) throw InvalidArgument("make_test_function_2d: spec is not two-dimensional");
    if (axis != 1 && axis != 2) throw InvalidArgument("axis must be 1 or 2");
    detail::check_spec(spec, grid.x(), spec.window, spec.center, grid.x().h());
    detail::check_spec(spec, grid.y(), spec.window_y, spec.center_y, grid.y().h());
    GridFunction2D f{grid, axis, {}, {}, {}, spec.analytic(), spec.compactly_supported()};
    f.u.resize(grid.size());
    f.d1.resize(grid.size());
    f.d2.resize(grid.size());
    for (std::size_t j = 0; j < grid.ny(); ++j)
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            const Jet jt = spec.evaluate(grid.x().x(i), grid.y().x(j));
            const auto k = grid.index(i, j);
            f.u[k] = jt.value();
            f.d1[k] = jt.pure(axis, 1);
            f.d2[k] = jt.pure(axis, 2);
        }
    detail::check_finite(f.u);
    return f;
}

/// Build a 1D grid function from an arbitrary closed form (tests and oracles).
inline GridFunction1D sample_function(const AnalyticFunction& fn, const Grid1D& grid, bool compact = false) {
    GridFunction1D f{grid, {}, {}, {}, {}, fn, compact};
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        const Jet j = fn(grid.x(i), 0.0);
        f.u.push_back(j.d(0, 0));
        f.d1.push_back(j.d(1, 0));
        f.d2.push_back(j.d(2, 0));
        f.d3.push_back(j.d(3, 0));
    }
    return f;
}

inline GridFunction2D sample_function_2d(const AnalyticFunction& fn, const Grid2D& grid, int axis = 1,
                                         bool compact = false) {
    GridFunction2D f{grid, axis, {}, {}, {}, fn, compact};
    f.u.resize(grid.size());
    f.d1.resize(grid.size());
    f.d2.resize(grid.size());
    for (std::size_t j = 0; j < grid.ny(); ++j)
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            const Jet jt = fn(grid.x().x(i), grid.y().x(j));
            const auto k = grid.index(i, j);
            f.u[k] = jt.value();
            f.d1[k] = jt.pure(axis, 1);
            f.d2[k] = jt.pure(axis, 2);
        }
    return f;
}

/// max_i |d1_i - (u_{i+1} - u_{i-1}) / 2h| over interior nodes.
inline double fd_consistency_error(const GridFunction1D& f, int order = 1) {
    const auto& lo = f.derivative(order - 1);
    const auto& hi = f.derivative(order);
    double err = 0.0;
    for (std::size_t i = 1; i + 1 < lo.size(); ++i)
        err = std::max(err, std::abs(hi[i] - (lo[i + 1] - lo[i - 1]) / (2.0 * f.grid.h())));
    return err;
}

// ---------------------------------------------------------------- quadrature

/// Inclusive range of node indices.
struct NodeRange {
    std::size_t first = 0;
    std::size_t last = 0;
};

/// Composite trapezoid over nodes first..last.
inline double quadrature_integral(std::span<const double> f, const Grid1D& grid, NodeRange r) {
    if (r.first > r.last || r.last >= f.size())
        throw DegenerateRegion("quadrature_integral: empty or out-of-range region");
    double s = 0.0;
    for (std::size_t i = r.first; i <= r.last; ++i) s += f[i];
    s -= 0.5 * (f[r.first] + f[r.last]);
    return s * grid.h();
}

inline double quadrature_integral(std::span<const double> f, const Grid1D& grid) {
    return quadrature_integral(f, grid, NodeRange{0, grid.cells()});
}

/// Trapezoid over an arbitrary node set: each maximal run of consecutive
/// nodes is integrated on its own.
inline double quadrature_integral(std::span<const double> f, const Grid1D& grid,
                                  std::span<const std::size_t> region) {
    if (region.empty()) throw DegenerateRegion("quadrature_integral: empty region");
    std::vector<std::size_t> idx(region.begin(), region.end());
    std::sort(idx.begin(), idx.end());
    double s = 0.0;
    std::size_t start = idx[0];
    for (std::size_t k = 1; k <= idx.size(); ++k) {
        if (k == idx.size() || idx[k] != idx[k - 1] + 1) {
            s += quadrature_integral(f, grid, NodeRange{start, idx[k - 1]});
            if (k < idx.size()) start = idx[k];
        }
    }
    return s;
}

/// Product trapezoid over the whole 2D window.
inline double quadrature_integral(std::span<const double> f, const Grid2D& grid) {
    const auto w = grid.weights();
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * f[k];
    return s;
}

/// Product-trapezoid weights restricted to a node mask.
inline double quadrature_integral(std::span<const double> f, const Grid2D& grid,
                                  std::span<const std::uint8_t> mask) {
    const auto w = grid.weights();
    double s = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < w.size(); ++k)
        if (mask[k]) {
            s += w[k] * f[k];
            any = true;
        }
    if (!any) throw DegenerateRegion("quadrature_integral: empty mask");
    return s;
}

/// Integral of g over (z, y) where g is known at nodes and at the endpoints:
/// the trapezoid rule on the nonuniform partition z, interior nodes, y.
template <class EndpointFn>
double interval_integral(std::span<const double> g, const Grid1D& grid, double z, double y,
                         EndpointFn&& at) {
    if (!(z < y)) throw DegenerateRegion("interval_integral: empty interval");
    const double gz = at(z);
    const double gy = at(y);
    const double h = grid.h();
    auto first = static_cast<std::ptrdiff_t>(std::floor((z - grid.a()) / h)) + 1;
    auto last = static_cast<std::ptrdiff_t>(std::ceil((y - grid.a()) / h)) - 1;
    first = std::max<std::ptrdiff_t>(first, 0);
    last = std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(grid.cells()));
    while (first <= last && !(grid.x(static_cast<std::size_t>(first)) > z)) ++first;
    while (last >= first && !(grid.x(static_cast<std::size_t>(last)) < y)) --last;
    if (first > last) return 0.5 * (gz + gy) * (y - z);
    const auto f0 = static_cast<std::size_t>(first);
    const auto f1 = static_cast<std::size_t>(last);
    double s = 0.5 * (gz + g[f0]) * (grid.x(f0) - z) + 0.5 * (g[f1] + gy) * (y - grid.x(f1));
    if (f1 > f0) s += quadrature_integral(g, grid, NodeRange{f0, f1});
    return s;
}

// ---------------------------------------------------------------- mollifier

/// Discrete standard mollifier c * exp(-1/(1 - (x/l)^2)) on |x| < l, with c
/// chosen so the node masses sum to one.
class MollifierKernel {
public:
    MollifierKernel(double l, double h) : l_(l), h_(h) {
        if (!(l >= 2.0 * h) || !(h > 0.0)) throw InvalidArgument("mollifier: need l >= 2h");
        radius_ = static_cast<std::size_t>(std::ceil(l / h));
        mass_.assign(2 * radius_ + 1, 0.0);
        double total = 0.0;
        for (std::size_t k = 0; k < mass_.size(); ++k) {
            const double x = (static_cast<double>(k) - static_cast<double>(radius_)) * h / l;
            const double v = std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
            mass_[k] = v;
            total += v;
        }
        for (auto& m : mass_) m /= total;
    }

    double scale() const { return l_; }
    std::size_t radius() const { return radius_; }
    /// Node masses for offsets -radius..radius (sum to one).
    std::span<const double> masses() const { return mass_; }
    /// Kernel density at offset k (mass / h).
    double density(std::ptrdiff_t k) const { return mass_[static_cast<std::size_t>(k + static_cast<std::ptrdiff_t>(radius_))] / h_; }

private:
    double l_;
    double h_;
    std::size_t radius_ = 0;
    std::vector<double> mass_;
};

/// u * phi_l on the same grid; values outside the window are taken as zero.
/// The result is flagged `boundary_contaminated` when u does not vanish
/// within distance l of the window edge.
inline GridFunction1D mollify(const GridFunction1D& u, double l) {
    const MollifierKernel kernel(l, u.grid.h());
    const auto m = kernel.masses();
    const auto r = static_cast<std::ptrdiff_t>(kernel.radius());
    const auto n = static_cast<std::ptrdiff_t>(u.size());

    auto convolve = [&](const std::vector<double>& v) {
        std::vector<double> out(v.size(), 0.0);
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::ptrdiff_t k = -r; k <= r; ++k) {
                const std::ptrdiff_t src = i - k;
                if (src >= 0 && src < n) s += m[static_cast<std::size_t>(k + r)] * v[static_cast<std::size_t>(src)];
            }
            out[static_cast<std::size_t>(i)] = s;
        }
        return out;
    };

    GridFunction1D out{u.grid, convolve(u.u), convolve(u.d1), convolve(u.d2), convolve(u.d3), {}, u.compact};
    double peak = 0.0;
    for (double v : u.u) peak = std::max(peak, std::abs(v));
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const bool near_edge = i <= r || i >= n - 1 - r;
        if (near_edge && std::abs(u.u[static_cast<std::size_t>(i)]) > 1e-12 * peak) {
            out.boundary_contaminated = true;
            break;
        }
    }
    return out;
}

}  // namespace sgn
