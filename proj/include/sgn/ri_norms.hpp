#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <boost/rational.hpp>

#include "sgn/errors.hpp"

namespace sgn {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

inline std::string to_string(const Rational& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

/// Parses "3", "-2", "3/2" or a finite decimal such as "1.25".
inline Rational parse_rational(std::string_view s) {
    auto fail = [&] { return InvalidArgument("not a rational number: '" + std::string(s) + "'"); };
    if (s.empty()) throw fail();
    std::string t(s);
    try {
        if (auto slash = t.find('/'); slash != std::string::npos) {
            std::size_t a = 0, b = 0;
            const long long num = std::stoll(t.substr(0, slash), &a);
            const long long den = std::stoll(t.substr(slash + 1), &b);
            if (a != slash || b != t.size() - slash - 1 || den == 0) throw fail();
            return Rational(num, den);
        }
        if (auto dot = t.find('.'); dot != std::string::npos) {
            const std::string frac = t.substr(dot + 1);
            if (frac.empty() || frac.size() > 12 ||
                !std::all_of(frac.begin(), frac.end(), [](unsigned char c) { return std::isdigit(c); }))
                throw fail();
            std::int64_t scale = 1;
            for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
            const std::string whole = t.substr(0, dot);
            const bool neg = !whole.empty() && whole[0] == '-';
            std::size_t a = 0;
            const long long w = whole.empty() || whole == "-" || whole == "+" ? 0 : std::stoll(whole, &a);
            if (!(whole.empty() || whole == "-" || whole == "+") && a != whole.size()) throw fail();
            const Rational f(std::stoll(frac), scale);
            return neg ? Rational(w) - f : Rational(w) + f;
        }
        std::size_t a = 0;
        const long long v = std::stoll(t, &a);
        if (a != t.size()) throw fail();
        return Rational(v);
    } catch (const std::logic_error&) {
        throw fail();
    }
}

/// Exponent in [1, inf], stored as its exact reciprocal (0 for inf).
class Exponent {
public:
    Exponent() = default;
    static Exponent infinity() { return Exponent(Rational(0)); }
    static Exponent from_reciprocal(const Rational& r) {
        if (r < Rational(0) || r > Rational(1))
            throw AdmissibilityError("exponent reciprocal " + sgn::to_string(r) + " outside [0, 1]");
        return Exponent(r);
    }
    static Exponent finite(const Rational& p) {
        if (p < Rational(1)) throw AdmissibilityError("exponent " + sgn::to_string(p) + " below 1");
        return Exponent(Rational(1) / p);
    }
    static Exponent of(std::int64_t p) { return finite(Rational(p)); }

    /// "inf", "oo" or a rational >= 1.
    static Exponent parse(std::string_view s) {
        if (s == "inf" || s == "oo" || s == "infinity") return infinity();
        return finite(parse_rational(s));
    }

    const Rational& reciprocal() const { return r_; }
    bool is_infinite() const { return r_ == Rational(0); }
    Rational value() const {
        if (is_infinite()) throw InvalidArgument("Exponent::value: infinite exponent");
        return Rational(1) / r_;
    }
    double as_double() const {
        return is_infinite() ? std::numeric_limits<double>::infinity() : 1.0 / to_double(r_);
    }
    std::string to_string() const { return is_infinite() ? "inf" : sgn::to_string(value()); }

    friend bool operator==(const Exponent& a, const Exponent& b) { return a.r_ == b.r_; }

private:
    explicit Exponent(Rational r) : r_(r) {}
    Rational r_{1};
};

/// Harmonic combination 1/r = theta/p + (1 - theta)/q.
inline Exponent harmonic(const Exponent& p, const Exponent& q, const Rational& theta) {
    return Exponent::from_reciprocal(theta * p.reciprocal() + (Rational(1) - theta) * q.reciprocal());
}

namespace detail {

// Root of an increasing function on (0, inf) with f(root) = target, solved in
// log coordinates.
template <class F>
double increasing_root(F&& f, double target) {
    if (target == 0.0) return 0.0;
    double lo = 1.0, hi = 1.0;
    int guard = 0;
    while (f(lo) > target) {
        lo *= 0.5;
        if (++guard > 2200) throw RangeError("numeric inverse: no lower bracket", target);
    }
    while (f(hi) < target) {
        hi *= 2.0;
        if (++guard > 2200) throw RangeError("numeric inverse: no upper bracket", target);
    }
    if (f(lo) == target) return lo;
    if (f(hi) == target) return hi;
    const double a = std::log(lo), b = std::log(hi);
    auto g = [&](double s) {
        if (s <= a) return f(lo) - target;
        if (s >= b) return f(hi) - target;
        return f(std::exp(s)) - target;
    };
    std::uintmax_t iters = 200;
    auto tol = [](double a, double b) { return std::abs(b - a) <= 4 * std::numeric_limits<double>::epsilon() * (1 + std::abs(a)); };
    const auto r = boost::math::tools::toms748_solve(g, a, b, tol, iters);
    return std::exp(0.5 * (r.first + r.second));
}

}  // namespace detail

/// Convex nondecreasing phi with phi(0) = 0, with its inverse.
class YoungFunction {
public:
    enum class Kind { power, power_log, exp_minus_one, combined };

    /// t^p, p >= 1.
    static YoungFunction power(const Rational& p) {
        if (p < Rational(1)) throw AdmissibilityError("power Young function needs p >= 1");
        YoungFunction f(Kind::power);
        f.p_ = p;
        return f;
    }
    /// t^p * log(e + t)^a, p >= 1, a >= 0.
    static YoungFunction power_log(const Rational& p, const Rational& a) {
        if (p < Rational(1) || a < Rational(0))
            throw AdmissibilityError("power-log Young function needs p >= 1 and a >= 0");
        if (a == Rational(0)) return power(p);
        YoungFunction f(Kind::power_log);
        f.p_ = p;
        f.a_ = a;
        return f;
    }
    /// e^t - 1.
    static YoungFunction exp_minus_one() { return YoungFunction(Kind::exp_minus_one); }

    /// psi with psi^{-1} = (phi1^{-1})^theta (phi2^{-1})^{1 - theta}.
    static YoungFunction combine(const YoungFunction& f1, const YoungFunction& f2, const Rational& theta) {
        if (!(theta > Rational(0) && theta < Rational(1)))
            throw InvalidArgument("YoungFunction::combine: theta must lie in (0, 1)");
        if (f1 == f2) return f1;
        if (f1.kind_ == Kind::power && f2.kind_ == Kind::power)
            return power(Rational(1) / (theta / f1.p_ + (Rational(1) - theta) / f2.p_));
        YoungFunction f(Kind::combined);
        f.theta_ = theta;
        f.left_ = std::make_shared<const YoungFunction>(f1);
        f.right_ = std::make_shared<const YoungFunction>(f2);
        return f;
    }

    Kind kind() const { return kind_; }
    const Rational& p() const { return p_; }
    const Rational& a() const { return a_; }

    /// phi(t) for t >= 0; may be +inf on overflow.
    double operator()(double t) const {
        if (!(t > 0.0)) return 0.0;
        switch (kind_) {
            case Kind::power:
                return p_ == Rational(1) ? t : std::pow(t, to_double(p_));
            case Kind::power_log:
                return std::pow(t, to_double(p_)) * std::pow(std::log(M_E + t), to_double(a_));
            case Kind::exp_minus_one:
                return std::expm1(t);
            case Kind::combined:
                if (std::isinf(t)) return t;
                return detail::increasing_root([this](double s) { return inverse(s); }, t);
        }
        return 0.0;
    }

    /// phi^{-1}(s) for s >= 0.
    double inverse(double s) const {
        if (!(s > 0.0)) return 0.0;
        switch (kind_) {
            case Kind::power:
                return p_ == Rational(1) ? s : std::pow(s, 1.0 / to_double(p_));
            case Kind::power_log:
                if (std::isinf(s)) return s;
                return detail::increasing_root([this](double t) { return (*this)(t); }, s);
            case Kind::exp_minus_one:
                return std::log1p(s);
            case Kind::combined: {
                const double th = to_double(theta_);
                return std::pow(left_->inverse(s), th) * std::pow(right_->inverse(s), 1.0 - th);
            }
        }
        return 0.0;
    }

    /// Descriptor text without the "Orl:" prefix.
    std::string to_string() const {
        switch (kind_) {
            case Kind::power:
                return "pow:" + sgn::to_string(p_);
            case Kind::power_log:
                return "powlog:" + sgn::to_string(p_) + "," + sgn::to_string(a_);
            case Kind::exp_minus_one:
                return "exp";
            case Kind::combined:
                return "cl(" + left_->to_string() + ";" + right_->to_string() + ";" + sgn::to_string(theta_) + ")";
        }
        return {};
    }

    static YoungFunction parse(std::string_view s) {
        if (s == "exp") return exp_minus_one();
        if (s.substr(0, 4) == "pow:") return power(parse_rational(s.substr(4)));
        if (s.substr(0, 7) == "powlog:") {
            const auto body = s.substr(7);
            const auto c = body.find(',');
            if (c == std::string_view::npos) throw InvalidArgument("powlog needs 'p,a'");
            return power_log(parse_rational(body.substr(0, c)), parse_rational(body.substr(c + 1)));
        }
        if (s.substr(0, 3) == "cl(" && s.back() == ')') {
            const auto body = s.substr(3, s.size() - 4);
            int depth = 0;
            std::vector<std::size_t> cuts;
            for (std::size_t i = 0; i < body.size(); ++i) {
                if (body[i] == '(') ++depth;
                if (body[i] == ')') --depth;
                if (body[i] == ';' && depth == 0) cuts.push_back(i);
            }
            if (cuts.size() != 2) throw InvalidArgument("cl(...) needs three ';'-separated parts");
            return combine(parse(body.substr(0, cuts[0])), parse(body.substr(cuts[0] + 1, cuts[1] - cuts[0] - 1)),
                           parse_rational(body.substr(cuts[1] + 1)));
        }
        throw InvalidArgument("unknown Young function '" + std::string(s) + "'");
    }

    friend bool operator==(const YoungFunction& l, const YoungFunction& r) {
        if (l.kind_ != r.kind_) return false;
        switch (l.kind_) {
            case Kind::power:
                return l.p_ == r.p_;
            case Kind::power_log:
                return l.p_ == r.p_ && l.a_ == r.a_;
            case Kind::exp_minus_one:
                return true;
            case Kind::combined:
                return l.theta_ == r.theta_ && *l.left_ == *r.left_ && *l.right_ == *r.right_;
        }
        return false;
    }

private:
    explicit YoungFunction(Kind k) : kind_(k) {}

    Kind kind_;
    Rational p_{1};
    Rational a_{0};
    Rational theta_{0};
    std::shared_ptr<const YoungFunction> left_;
    std::shared_ptr<const YoungFunction> right_;
};

/// Lebesgue L^p, Lorentz L^{P,p} or Orlicz L^phi.
class SpaceDescriptor {
public:
    enum class Tag { lebesgue, lorentz, orlicz };

    /// L^1.
    SpaceDescriptor() : tag_(Tag::lebesgue) {}

    static SpaceDescriptor lebesgue(const Exponent& p) {
        SpaceDescriptor d(Tag::lebesgue);
        d.p_ = p;
        return d;
    }
    static SpaceDescriptor lorentz(const Exponent& P, const Exponent& p) {
        if (P.reciprocal() == Rational(1) && p.reciprocal() != Rational(1))
            throw AdmissibilityError("Lorentz space with P = 1 requires p = 1");
        if (P.is_infinite() && !p.is_infinite())
            throw AdmissibilityError("Lorentz space with P = inf requires p = inf");
        SpaceDescriptor d(Tag::lorentz);
        d.P_ = P;
        d.p_ = p;
        return d;
    }
    static SpaceDescriptor orlicz(const YoungFunction& phi) {
        SpaceDescriptor d(Tag::orlicz);
        d.phi_ = std::make_shared<const YoungFunction>(phi);
        return d;
    }

    /// "L:p", "Lor:P,p", "Orl:pow:p", "Orl:powlog:p,a", "Orl:exp".
    static SpaceDescriptor parse(std::string_view s) {
        auto trim = [](std::string_view v) {
            while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
            while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
            return v;
        };
        s = trim(s);
        if (s.substr(0, 2) == "L:") return lebesgue(Exponent::parse(trim(s.substr(2))));
        if (s.substr(0, 4) == "Lor:") {
            const auto body = s.substr(4);
            const auto c = body.find(',');
            if (c == std::string_view::npos) throw InvalidArgument("Lorentz descriptor needs 'P,p'");
            return lorentz(Exponent::parse(trim(body.substr(0, c))), Exponent::parse(trim(body.substr(c + 1))));
        }
        if (s.substr(0, 4) == "Orl:") return orlicz(YoungFunction::parse(trim(s.substr(4))));
        throw InvalidArgument("unknown space descriptor '" + std::string(s) + "'");
    }

    Tag tag() const { return tag_; }
    const Exponent& p() const { return p_; }
    const Exponent& P() const { return P_; }
    const YoungFunction& phi() const {
        if (!phi_) throw InvalidArgument("SpaceDescriptor::phi: not an Orlicz space");
        return *phi_;
    }

    std::string to_string() const {
        switch (tag_) {
            case Tag::lebesgue:
                return "L:" + p_.to_string();
            case Tag::lorentz:
                return "Lor:" + P_.to_string() + "," + p_.to_string();
            case Tag::orlicz:
                return "Orl:" + phi_->to_string();
        }
        return {};
    }

    friend bool operator==(const SpaceDescriptor& l, const SpaceDescriptor& r) {
        if (l.tag_ != r.tag_) return false;
        if (l.tag_ == Tag::orlicz) return *l.phi_ == *r.phi_;
        return l.p_ == r.p_ && (l.tag_ == Tag::lebesgue || l.P_ == r.P_);
    }

private:
    explicit SpaceDescriptor(Tag t) : tag_(t) {}

    Tag tag_;
    Exponent p_;
    Exponent P_;
    std::shared_ptr<const YoungFunction> phi_;
};

/// Nonincreasing rearrangement of |f| for a node-weighted sample: steps of
/// distinct positive values with their cumulative measures.
class RearrangementProfile {
public:
    RearrangementProfile() = default;

    RearrangementProfile(const std::vector<double>& f, const std::vector<double>& weights) {
        if (f.size() != weights.size()) throw InvalidArgument("rearrangement: size mismatch");
        std::vector<std::pair<double, double>> vm;
        vm.reserve(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double v = std::abs(f[i]);
            if (!std::isfinite(v)) throw InvalidArgument("rearrangement: non-finite value");
            if (v > 0.0 && weights[i] > 0.0) vm.emplace_back(v, weights[i]);
        }
        std::sort(vm.begin(), vm.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        double m = 0.0, F = 0.0;
        for (const auto& [v, w] : vm) {
            if (!values_.empty() && values_.back() == v) {
                m += w;
                F += v * w;
                measure_.back() = m;
                integral_.back() = F;
                continue;
            }
            m += w;
            F += v * w;
            values_.push_back(v);
            measure_.push_back(m);
            integral_.push_back(F);
        }
    }

    std::size_t steps() const { return values_.size(); }
    double value(std::size_t i) const { return values_[i]; }
    /// Cumulative measure at the end of step i.
    double end(std::size_t i) const { return measure_[i]; }
    double start(std::size_t i) const { return i == 0 ? 0.0 : measure_[i - 1]; }
    /// int_0^{end(i)} f*.
    double prefix(std::size_t i) const { return integral_[i]; }

    /// Measure of the support of f*.
    double support() const { return measure_.empty() ? 0.0 : measure_.back(); }
    double total() const { return integral_.empty() ? 0.0 : integral_.back(); }
    double sup() const { return values_.empty() ? 0.0 : values_.front(); }

    /// f*(t) for t >= 0 (right-continuous steps).
    double fstar(double t) const {
        const auto it = std::upper_bound(measure_.begin(), measure_.end(), t);
        return it == measure_.end() ? 0.0 : values_[static_cast<std::size_t>(it - measure_.begin())];
    }

    /// int_0^t f*.
    double integral(double t) const {
        if (!(t > 0.0)) return 0.0;
        const auto it = std::upper_bound(measure_.begin(), measure_.end(), t);
        if (it == measure_.end()) return total();
        const auto i = static_cast<std::size_t>(it - measure_.begin());
        return (i == 0 ? 0.0 : integral_[i - 1]) + values_[i] * (t - start(i));
    }

    /// f**(t) = (1/t) int_0^t f*, t > 0.
    double fstarstar(double t) const {
        if (!(t > 0.0)) throw InvalidArgument("f**: t must be positive");
        return integral(t) / t;
    }

    /// Measure of {f* > lambda}.
    double distribution(double lambda) const {
        double m = 0.0;
        for (std::size_t i = 0; i < values_.size() && values_[i] > lambda; ++i) m = measure_[i];
        return m;
    }

private:
    std::vector<double> values_;
    std::vector<double> measure_;
    std::vector<double> integral_;
};

inline RearrangementProfile rearrangement(const std::vector<double>& f, const std::vector<double>& weights) {
    return RearrangementProfile(f, weights);
}

/// (sum w |f|^p)^{1/p}, or max |f| for p = inf.
inline double lebesgue_norm(const std::vector<double>& f, const std::vector<double>& w, const Exponent& p) {
    if (f.size() != w.size()) throw InvalidArgument("lebesgue_norm: size mismatch");
    if (p.is_infinite()) {
        double m = 0.0;
        for (double v : f) m = std::max(m, std::abs(v));
        return m;
    }
    const double q = p.as_double();
    if (p.reciprocal() == Rational(1)) {
        double s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * std::abs(f[i]);
        return s;
    }
    // scale by the sup to keep |f|^p representable
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * std::pow(std::abs(f[i]) / m, q);
    return m * std::pow(s, 1.0 / q);
}

/// Same norm evaluated on the rearrangement.
inline double lebesgue_norm(const RearrangementProfile& r, const Exponent& p) {
    if (p.is_infinite()) return r.sup();
    const double q = p.as_double();
    const double m = r.sup();
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < r.steps(); ++i) s += (r.end(i) - r.start(i)) * std::pow(r.value(i) / m, q);
    return m * std::pow(s, 1.0 / q);
}

/// || t^{1/P - 1/p} f** ||_{L^p(0, inf)}; (1,1) and (inf,inf) are L^1 and L^inf.
inline double lorentz_norm(const RearrangementProfile& r, const Exponent& P, const Exponent& p) {
    if (P.reciprocal() == Rational(1)) return lebesgue_norm(r, Exponent::of(1));
    if (P.is_infinite()) return r.sup();
    if (r.steps() == 0) return 0.0;
    const double b = to_double(P.reciprocal());  // 1/P in (0, 1)
    const double s0 = r.support();
    const double F = r.total();

    if (p.is_infinite()) {
        // sup_t t^b f**(t); on a step f** = v + c/t
        double best = 0.0;
        auto g = [&](double t) { return std::pow(t, b) * r.fstarstar(t); };
        for (std::size_t i = 0; i < r.steps(); ++i) {
            best = std::max(best, g(r.end(i)));
            const double t0 = r.start(i);
            const double c = (t0 > 0.0 ? r.prefix(i - 1) : 0.0) - r.value(i) * t0;
            if (c > 0.0) {
                const double tc = (1.0 - b) * c / (b * r.value(i));
                if (tc > t0 && tc < r.end(i)) best = std::max(best, g(tc));
            }
        }
        return best;  // the tail F t^{b-1} decreases
    }

    const double q = p.as_double();
    const double a = q * b;  // exponent of t in t^{a-1} (f**)^q
    const double m = r.sup();
    // work with f / sup to keep powers representable
    const double Fn = F / m;
    double sum = std::pow(r.end(0), a) / a;  // f** = sup on the first step
    using GL = boost::math::quadrature::gauss<double, 10>;
    for (std::size_t i = 1; i < r.steps(); ++i) {
        const double t0 = r.start(i);
        const double t1 = r.end(i);
        const double v = r.value(i) / m;
        const double c = r.prefix(i - 1) / m - v * t0;
        auto integrand = [&](double t) { return std::pow(t, a - 1.0) * std::pow(v + c / t, q); };
        double lo = t0;
        while (lo < t1) {
            const double hi = std::min(t1, lo * 1.5);
            sum += GL::integrate(integrand, lo, hi);
            lo = hi;
        }
    }
    sum += std::pow(Fn, q) * std::pow(s0, a - q) / (q - a);
    return m * std::pow(sum, 1.0 / q);
}

/// int phi(|f|) with node weights; throws RangeError when phi overflows.
inline double modular(const std::vector<double>& f, const std::vector<double>& w, const YoungFunction& phi,
                      double scale = 1.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (w[i] == 0.0 || f[i] == 0.0) continue;
        const double arg = std::abs(f[i]) / scale;
        const double v = phi(arg);
        if (!std::isfinite(v)) throw RangeError("modular: Young function overflows", arg);
        s += w[i] * v;
    }
    return s;
}

/// Relative width of the final Luxemburg bracket.
inline constexpr double luxemburg_tolerance = 1e-13;

/// inf{lambda > 0 : int phi(|f|/lambda) <= 1}; returns the upper end of the
/// final bracket so that the modular there is <= 1.
inline double luxemburg_norm(const std::vector<double>& f, const std::vector<double>& w, const YoungFunction& phi) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    if (m == 0.0) return 0.0;
    auto rho = [&](double lambda) {
        double s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (w[i] == 0.0 || f[i] == 0.0) continue;
            s += w[i] * phi(std::abs(f[i]) / lambda);
            if (!std::isfinite(s)) return s;
        }
        return s;
    };
    double lo = m, hi = m;
    int guard = 0;
    while (rho(hi) > 1.0) {
        hi *= 2.0;
        if (++guard > 200) throw RangeError("luxemburg_norm: no bracket after 200 doublings", hi);
    }
    lo = hi;
    while (rho(lo) <= 1.0) {
        hi = lo;
        lo *= 0.5;
        if (++guard > 400) throw RangeError("luxemburg_norm: no bracket after 200 halvings", lo);
    }
    while (hi - lo > luxemburg_tolerance * hi) {
        const double mid = std::sqrt(lo * hi);
        const double c = mid > lo && mid < hi ? mid : 0.5 * (lo + hi);
        if (c <= lo || c >= hi) break;
        (rho(c) <= 1.0 ? hi : lo) = c;
    }
    return hi;
}

/// Norm of a node-weighted sample in X.
inline double space_norm(const std::vector<double>& f, const std::vector<double>& w, const SpaceDescriptor& X) {
    switch (X.tag()) {
        case SpaceDescriptor::Tag::lebesgue:
            return lebesgue_norm(f, w, X.p());
        case SpaceDescriptor::Tag::lorentz:
            if (X.P().reciprocal() == Rational(1)) return lebesgue_norm(f, w, Exponent::of(1));
            if (X.P().is_infinite()) return lebesgue_norm(f, w, Exponent::infinity());
            return lorentz_norm(RearrangementProfile(f, w), X.P(), X.p());
        case SpaceDescriptor::Tag::orlicz:
            return luxemburg_norm(f, w, X.phi());
    }
    return 0.0;
}

/// Relative slack used when comparing norms of X.
inline double norm_tolerance(const SpaceDescriptor& X) {
    return X.tag() == SpaceDescriptor::Tag::orlicz ? std::max(1e-6, 2 * luxemburg_tolerance) : 1e-6;
}

/// X^theta Y^{1 - theta} for same-tag descriptors.
inline SpaceDescriptor cl_combine(const SpaceDescriptor& X, const SpaceDescriptor& Y, const Rational& theta) {
    if (!(theta > Rational(0) && theta < Rational(1)))
        throw InvalidArgument("cl_combine: theta must lie in (0, 1)");
    if (X.tag() != Y.tag())
        throw InvalidArgument("cl_combine: mixed descriptors " + X.to_string() + " and " + Y.to_string());
    switch (X.tag()) {
        case SpaceDescriptor::Tag::lebesgue:
            return SpaceDescriptor::lebesgue(harmonic(X.p(), Y.p(), theta));
        case SpaceDescriptor::Tag::lorentz:
            return SpaceDescriptor::lorentz(harmonic(X.P(), Y.P(), theta), harmonic(X.p(), Y.p(), theta));
        case SpaceDescriptor::Tag::orlicz:
            return SpaceDescriptor::orlicz(YoungFunction::combine(X.phi(), Y.phi(), theta));
    }
    return X;
}

struct FactorizationResult {
    double lhs = 0.0;  // ||h||_Z
    double rhs = 0.0;  // ||f||_X^theta ||g||_Y^{1-theta}
    bool pass = false;
};

/// Checks ||h||_{X^theta Y^{1-theta}} <= ||f||_X^theta ||g||_Y^{1-theta}
/// given |h| <= f^theta g^{1-theta} at every node.
inline FactorizationResult cl_factorization_check(const std::vector<double>& h, const std::vector<double>& f,
                                                  const std::vector<double>& g, const std::vector<double>& w,
                                                  const SpaceDescriptor& X, const SpaceDescriptor& Y,
                                                  const Rational& theta) {
    if (h.size() != w.size() || f.size() != w.size() || g.size() != w.size())
        throw InvalidArgument("cl_factorization_check: size mismatch");
    const double th = to_double(theta);
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (f[i] < 0.0 || g[i] < 0.0)
            throw PreconditionError("cl_factorization_check: f and g must be nonnegative");
        const double bound = std::pow(f[i], th) * std::pow(g[i], 1.0 - th);
        if (std::abs(h[i]) > bound * (1.0 + 1e-12))
            throw PreconditionError("cl_factorization_check: |h| exceeds f^theta g^(1-theta) at node " +
                                    std::to_string(i));
    }
    const auto Z = cl_combine(X, Y, theta);
    FactorizationResult r;
    r.lhs = space_norm(h, w, Z);
    r.rhs = std::pow(space_norm(f, w, X), th) * std::pow(space_norm(g, w, Y), 1.0 - th);
    const double tol = std::max({norm_tolerance(X), norm_tolerance(Y), norm_tolerance(Z)});
    r.pass = r.lhs <= r.rhs * (1.0 + tol);
    return r;
}

}  // namespace sgn
