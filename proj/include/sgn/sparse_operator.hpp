#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sgn/errors.hpp"
#include "sgn/ri_norms.hpp"
#include "sgn/sparse1d.hpp"
#include "sgn/sparse2d.hpp"

namespace sgn {

/// A finite family of node sets over a weighted grid. Every set is stored as
/// sorted flat node indices.
struct NodeSetFamily {
    std::vector<double> weights;
    std::vector<std::vector<std::size_t>> sets;

    std::vector<int> counts() const {
        std::vector<int> c(weights.size(), 0);
        for (const auto& s : sets)
            for (auto i : s) ++c[i];
        return c;
    }
    int max_overlap() const {
        const auto c = counts();
        return c.empty() ? 0 : *std::max_element(c.begin(), c.end());
    }
};

inline NodeSetFamily node_sets(const SparseFamily1D& f) {
    NodeSetFamily out{f.grid.weights(), {}};
    for (const auto& iv : f.intervals) {
        std::vector<std::size_t> s;
        for (std::size_t i = iv.first; i <= iv.last; ++i) s.push_back(i);
        out.sets.push_back(std::move(s));
    }
    return out;
}

inline NodeSetFamily node_sets(const SparseFamily2D& f) {
    NodeSetFamily out{f.grid.weights(), {}};
    for (const auto& slab : f.slabs) {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < slab.mask.size(); ++i)
            if (slab.mask[i]) s.push_back(i);
        out.sets.push_back(std::move(s));
    }
    return out;
}

/// T_P f = sum_P (avg_P f) chi_P.
struct SparseAverage {
    std::vector<double> coefficients;  // avg_P f per set
    std::vector<double> values;        // per node
};

inline SparseAverage apply_sparse_operator(const NodeSetFamily& family, const std::vector<double>& f) {
    if (f.size() != family.weights.size()) throw InvalidArgument("apply_sparse_operator: size mismatch");
    SparseAverage out;
    out.values.assign(f.size(), 0.0);
    for (std::size_t p = 0; p < family.sets.size(); ++p) {
        double mass = 0.0, integral = 0.0;
        for (auto i : family.sets[p]) {
            mass += family.weights[i];
            integral += family.weights[i] * f[i];
        }
        if (!(mass > 0.0))
            throw DegenerateRegion("apply_sparse_operator: set " + std::to_string(p) + " has zero measure");
        out.coefficients.push_back(integral / mass);
    }
    for (std::size_t p = 0; p < family.sets.size(); ++p)
        for (auto i : family.sets[p]) out.values[i] += out.coefficients[p];
    return out;
}

struct BoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

/// ||T_P f||_X against K ||f||_X with K the maximal overlap.
inline BoundCheck operator_norm_check(const NodeSetFamily& family, const std::vector<double>& f,
                                      const SpaceDescriptor& X) {
    const int K = family.max_overlap();
    const auto Tf = apply_sparse_operator(family, f);
    BoundCheck r;
    r.lhs = space_norm(Tf.values, family.weights, X);
    r.rhs = K * space_norm(f, family.weights, X);
    r.pass = r.lhs <= r.rhs * (1.0 + norm_tolerance(X));
    return r;
}

/// rho_phi(T_P f / K) against rho_phi(f). An infinite rho_phi(f) makes the
/// bound vacuous.
inline BoundCheck modular_contraction_check(const NodeSetFamily& family, const std::vector<double>& f,
                                            const YoungFunction& phi) {
    const int K = family.max_overlap();
    BoundCheck r;
    try {
        r.rhs = modular(f, family.weights, phi);
    } catch (const RangeError&) {
        r.rhs = INFINITY;
        r.pass = true;
        return r;
    }
    if (K == 0) {
        r.pass = true;
        return r;
    }
    const auto Tf = apply_sparse_operator(family, f);
    r.lhs = modular(Tf.values, family.weights, phi, static_cast<double>(K));
    r.pass = r.lhs <= r.rhs * (1.0 + 1e-6);
    return r;
}

}  // namespace sgn
