#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>

namespace sgn {

// Truncated Taylor data of a function of (x, y): all partial derivatives
// d^{a+b} f / dx^a dy^b with a + b <= 3. One-dimensional functions simply
// never touch y. Arithmetic follows the Leibniz and Faa di Bruno rules, so a
// closed-form expression built from Jet operations carries exact derivatives.
class Jet {
public:
    static constexpr int max_order = 3;
    static constexpr std::size_t size = 10;

    Jet() { c_.fill(0.0); }

    static Jet constant(double v) {
        Jet j;
        j.c_[0] = v;
        return j;
    }

    /// The coordinate function x (axis 1) or y (axis 2) evaluated at v.
    static Jet variable(int axis, double v) {
        Jet j = constant(v);
        j.c_[slot(axis == 1 ? 1 : 0, axis == 1 ? 0 : 1)] = 1.0;
        return j;
    }

    static constexpr std::size_t slot(int a, int b) {
        const int order = a + b;
        const int base = order * (order + 1) / 2;
        return static_cast<std::size_t>(base + b);
    }

    double value() const { return c_[0]; }
    double d(int a, int b) const { return c_[slot(a, b)]; }
    double& d(int a, int b) { return c_[slot(a, b)]; }

    /// Pure derivative of the given order along axis 1 or 2.
    double pure(int axis, int order) const {
        return axis == 1 ? d(order, 0) : d(0, order);
    }

    Jet& operator+=(const Jet& o) {
        for (std::size_t i = 0; i < size; ++i) c_[i] += o.c_[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (std::size_t i = 0; i < size; ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Jet& operator*=(double s) {
        for (auto& v : c_) v *= s;
        return *this;
    }

    friend Jet operator+(Jet l, const Jet& r) { return l += r; }
    friend Jet operator-(Jet l, const Jet& r) { return l -= r; }
    friend Jet operator*(Jet l, double s) { return l *= s; }
    friend Jet operator*(double s, Jet r) { return r *= s; }
    friend Jet operator+(Jet l, double s) {
        l.c_[0] += s;
        return l;
    }

    friend Jet operator*(const Jet& f, const Jet& g) {
        static constexpr int binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
        Jet r;
        for (int a = 0; a <= max_order; ++a)
            for (int b = 0; a + b <= max_order; ++b) {
                double s = 0.0;
                for (int i = 0; i <= a; ++i)
                    for (int j = 0; j <= b; ++j)
                        s += binom[a][i] * binom[b][j] * f.d(i, j) * g.d(a - i, b - j);
                r.d(a, b) = s;
            }
        return r;
    }

    /// h(f) given h and its first three derivatives at f.value().
    Jet compose(const std::array<double, 4>& h) const {
        Jet r = constant(h[0]);
        for (int a = 0; a <= max_order; ++a)
            for (int b = 0; a + b <= max_order; ++b) {
                if (a + b == 0) continue;
                r.d(a, b) = chain(a, b, h);
            }
        return r;
    }

private:
    // Partial of f along the multiset of axes {axes}; axes are 0 (x) or 1 (y).
    double partial(std::initializer_list<int> axes) const {
        int a = 0;
        int b = 0;
        for (int ax : axes) (ax == 0 ? a : b) += 1;
        return d(a, b);
    }

    double chain(int a, int b, const std::array<double, 4>& h) const {
        std::array<int, 3> ax{};
        int n = 0;
        for (int i = 0; i < a; ++i) ax[n++] = 0;
        for (int i = 0; i < b; ++i) ax[n++] = 1;
        if (n == 1) return h[1] * partial({ax[0]});
        if (n == 2)
            return h[2] * partial({ax[0]}) * partial({ax[1]}) + h[1] * partial({ax[0], ax[1]});
        const double f0 = partial({ax[0]});
        const double f1 = partial({ax[1]});
        const double f2 = partial({ax[2]});
        return h[3] * f0 * f1 * f2 +
               h[2] * (partial({ax[0], ax[1]}) * f2 + partial({ax[0], ax[2]}) * f1 +
                       partial({ax[1], ax[2]}) * f0) +
               h[1] * partial({ax[0], ax[1], ax[2]});
    }

    std::array<double, size> c_;
};

inline Jet exp(const Jet& f) {
    const double e = std::exp(f.value());
    return f.compose({e, e, e, e});
}

inline Jet sin(const Jet& f) {
    const double s = std::sin(f.value());
    const double c = std::cos(f.value());
    return f.compose({s, c, -s, -c});
}

inline Jet cos(const Jet& f) {
    const double s = std::sin(f.value());
    const double c = std::cos(f.value());
    return f.compose({c, -s, -c, s});
}

/// exp(-1/(1 - t)) for t < 1 and 0 otherwise; smooth at t = 1 with every
/// derivative vanishing there.
inline Jet bump_profile(const Jet& f) {
    const double t = f.value();
    if (!(t < 1.0)) return Jet();
    const double p = 1.0 - t;
    const double h = std::exp(-1.0 / p);
    if (h == 0.0) return Jet();
    const double g1 = -1.0 / (p * p);
    const double g2 = 2.0 * g1 / p;
    const double g3 = 3.0 * g2 / p;
    return f.compose({h, g1 * h, (g2 + g1 * g1) * h, (g3 + 3.0 * g1 * g2 + g1 * g1 * g1) * h});
}

/// Closed-form function of (x, y) returning its jet at a point.
using AnalyticFunction = std::function<Jet(double, double)>;

}  // namespace sgn
