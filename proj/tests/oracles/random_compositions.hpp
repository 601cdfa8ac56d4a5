#pragma once

// Seeded random (f, g, α, x⁰) cases shared by the unit and acceptance tests.

#include "expconv/faa_di_bruno.hpp"
#include "oracles/symbolic_oracle.hpp"

#include <cmath>
#include <random>
#include <string>

namespace oracle {

struct CompositionCase {
    std::string label;
    Outer kind;
    std::vector<Q> params;  // polynomial coefficients, or {rate}, or {q}
    Poly g;
    std::size_t dim;
    expconv::MultiIndex alpha;
    std::vector<Q> x0;

    expconv::OuterFunction outer() const {
        switch (kind) {
            case Outer::polynomial: return expconv::OuterFunction::polynomial(params);
            case Outer::exponential: return expconv::OuterFunction::exponential(params[0]);
            case Outer::power: return expconv::OuterFunction::power(params[0]);
        }
        return {};
    }

    expconv::InnerFunction inner() const {
        expconv::Polynomial p(dim);
        for (const auto& [e, v] : g.c) p.add_term(v, expconv::MultiIndex(e));
        return expconv::InnerFunction::polynomial(p);
    }

    Q symbolic() const {
        ChainRule h(kind, params, g, dim);
        for (std::size_t axis = 0; axis < dim; ++axis)
            for (unsigned k = 0; k < alpha[axis]; ++k) h.differentiate(axis);
        return h.coefficient(x0);
    }

    long double evaluate(std::span<const long double> x) const {
        long double y = 0;
        for (const auto& [e, v] : g.c) {
            long double term = static_cast<long double>(v);
            for (std::size_t i = 0; i < dim; ++i) term *= std::pow(x[i], static_cast<int>(e[i]));
            y += term;
        }
        switch (kind) {
            case Outer::polynomial: {
                long double acc = 0;
                for (std::size_t k = params.size(); k-- > 0;) acc = acc * y + static_cast<long double>(params[k]);
                return acc;
            }
            case Outer::exponential: return std::exp(static_cast<long double>(params[0]) * y);
            case Outer::power: return std::pow(y, static_cast<long double>(params[0]));
        }
        return 0;
    }
};

inline CompositionCase random_composition(std::mt19937_64& rng) {
    auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    for (;;) {
        CompositionCase c;
        c.dim = static_cast<std::size_t>(uniform(1, 3));
        const int kind = uniform(0, 2);
        c.kind = static_cast<Outer>(kind);
        if (c.kind == Outer::polynomial) {
            const int degree = uniform(1, 5);
            for (int k = 0; k <= degree; ++k) c.params.push_back(Q(uniform(-3, 3), uniform(1, 2)));
            if (c.params.back() == 0) c.params.back() = 1;
            c.label = "poly";
        } else if (c.kind == Outer::exponential) {
            c.params.push_back(Q(uniform(-2, 2) == 0 ? 1 : uniform(-2, 2), 2));
            c.label = "exp";
        } else {
            c.params.push_back(Q(uniform(0, 1) ? 1 : 3, 2));
            c.label = "power";
        }
        c.g = Poly::constant(c.dim, c.kind == Outer::power ? Q(3) : Q(uniform(-2, 2)));
        const int monomials = uniform(1, 4);
        for (int m = 0; m < monomials; ++m) {
            Exponent e(c.dim, 0);
            const int deg = uniform(1, 3);
            for (int k = 0; k < deg; ++k) ++e[static_cast<std::size_t>(uniform(0, static_cast<int>(c.dim) - 1))];
            Poly mono;
            mono.c[e] = Q(uniform(-2, 2) == 0 ? 1 : uniform(-2, 2), uniform(1, 2));
            c.g = c.g + mono;
        }
        std::vector<unsigned> a(c.dim, 0);
        const int order = uniform(1, 5);
        for (int k = 0; k < order; ++k) ++a[static_cast<std::size_t>(uniform(0, static_cast<int>(c.dim) - 1))];
        c.alpha = expconv::MultiIndex(a);
        for (std::size_t i = 0; i < c.dim; ++i) c.x0.push_back(Q(uniform(-4, 4), 4));
        const Q y0 = c.g.at(c.x0);
        if (c.kind == Outer::power && y0 < Q(1, 2)) continue;
        if (c.kind == Outer::exponential && abs(y0 * c.params[0]) > 20) continue;
        if (c.symbolic() == 0) continue;
        c.label += " d=" + std::to_string(c.dim) + " alpha=" + c.alpha.to_string();
        return c;
    }
}

}  // namespace oracle
