#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "sgn/errors.hpp"

namespace sgn {

/// Uniform partition of [a, b] into n cells; nodes are a + i*h, i = 0..n.
class Grid1D {
public:
    Grid1D(double a, double b, std::size_t n) : a_(a), b_(b), n_(n) {
        if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
            throw InvalidArgument("Grid1D: need finite a < b");
        if (n < 8)
            throw InvalidArgument("Grid1D: need at least 8 cells");
        h_ = (b - a) / static_cast<double>(n);
    }

    double a() const { return a_; }
    double b() const { return b_; }
    std::size_t cells() const { return n_; }
    std::size_t nodes() const { return n_ + 1; }
    double h() const { return h_; }
    double length() const { return b_ - a_; }

    double x(std::size_t i) const {
        return i == n_ ? b_ : a_ + static_cast<double>(i) * h_;
    }

    /// Trapezoid weights of the whole window.
    std::vector<double> weights() const {
        std::vector<double> w(nodes(), h_);
        w.front() = w.back() = 0.5 * h_;
        return w;
    }

    /// Same grid with twice as many cells.
    Grid1D refined() const { return Grid1D(a_, b_, 2 * n_); }

    friend bool operator==(const Grid1D& l, const Grid1D& r) {
        return l.a_ == r.a_ && l.b_ == r.b_ && l.n_ == r.n_;
    }

private:
    double a_;
    double b_;
    std::size_t n_;
    double h_;
};

/// Tensor grid; node (i, j) lives at flat index j * x.nodes() + i.
class Grid2D {
public:
    Grid2D(Grid1D gx, Grid1D gy) : gx_(gx), gy_(gy) {}

    const Grid1D& x() const { return gx_; }
    const Grid1D& y() const { return gy_; }

    std::size_t nx() const { return gx_.nodes(); }
    std::size_t ny() const { return gy_.nodes(); }
    std::size_t size() const { return nx() * ny(); }
    std::size_t index(std::size_t i, std::size_t j) const { return j * nx() + i; }

    const Grid1D& along(int axis) const { return axis == 1 ? gx_ : gy_; }
    const Grid1D& across(int axis) const { return axis == 1 ? gy_ : gx_; }

    /// Flat index of node `t` on line `line`, where lines run parallel to `axis`.
    std::size_t line_index(int axis, std::size_t line, std::size_t t) const {
        return axis == 1 ? index(t, line) : index(line, t);
    }

    std::vector<double> weights() const {
        const auto wx = gx_.weights();
        const auto wy = gy_.weights();
        std::vector<double> w(size());
        for (std::size_t j = 0; j < ny(); ++j)
            for (std::size_t i = 0; i < nx(); ++i) w[index(i, j)] = wx[i] * wy[j];
        return w;
    }

    Grid2D refined() const { return Grid2D(gx_.refined(), gy_.refined()); }

private:
    Grid1D gx_;
    Grid1D gy_;
};

}  // namespace sgn
