#pragma once

// Repeated single-variable differentiation of f∘g, kept symbolic. An
// expression is Σ_m P_m(x)·Φ_m(g(x)) with P_m rational polynomials; one
// ∂/∂x_i step applies the product and chain rules once. Independent of the
// partition machinery.

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <vector>

namespace oracle {

using Q = boost::multiprecision::cpp_rational;
using Exponent = std::vector<unsigned>;

struct Poly {
    std::map<Exponent, Q> c;

    static Poly constant(std::size_t d, const Q& v) {
        Poly p;
        if (v != 0) p.c[Exponent(d, 0)] = v;
        return p;
    }
    Poly operator+(const Poly& o) const {
        Poly r = *this;
        for (const auto& [e, v] : o.c) {
            r.c[e] += v;
            if (r.c[e] == 0) r.c.erase(e);
        }
        return r;
    }
    Poly operator*(const Poly& o) const {
        Poly r;
        for (const auto& [e1, v1] : c)
            for (const auto& [e2, v2] : o.c) {
                Exponent e(e1.size());
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = e1[i] + e2[i];
                r.c[e] += v1 * v2;
                if (r.c[e] == 0) r.c.erase(e);
            }
        return r;
    }
    Poly scaled(const Q& s) const {
        Poly r;
        if (s == 0) return r;
        for (const auto& [e, v] : c) r.c[e] = v * s;
        return r;
    }
    Poly d(std::size_t axis) const {
        Poly r;
        for (const auto& [e, v] : c) {
            if (e[axis] == 0) continue;
            Exponent f = e;
            --f[axis];
            r.c[f] += v * e[axis];
        }
        return r;
    }
    Q at(const std::vector<Q>& x) const {
        Q total = 0;
        for (const auto& [e, v] : c) {
            Q term = v;
            for (std::size_t i = 0; i < e.size(); ++i)
                for (unsigned k = 0; k < e[i]; ++k) term *= x[i];
            total += term;
        }
        return total;
    }
};

enum class Outer { polynomial, exponential, power };

/// Derivative of f∘g as a rational coefficient times the outer scale:
/// polynomial f → scale 1; f = e^{a y} → scale e^{a g(x⁰)}; f = y^q → scale g(x⁰)^q.
class ChainRule {
public:
    ChainRule(Outer kind, std::vector<Q> params, Poly g, std::size_t dim)
        : kind_(kind), params_(std::move(params)), g_(std::move(g)), dim_(dim) {
        if (kind_ == Outer::polynomial) {
            Poly h;
            Poly gk = Poly::constant(dim_, 1);
            for (const Q& ck : params_) {
                h = h + gk.scaled(ck);
                gk = gk * g_;
            }
            terms_[0] = h;
        } else {
            terms_[0] = Poly::constant(dim_, 1);
        }
    }

    void differentiate(std::size_t axis) {
        std::map<int, Poly> next;
        const Poly dg = g_.d(axis);
        for (const auto& [m, p] : terms_) {
            next[m] = next[m] + p.d(axis);
            if (kind_ == Outer::exponential) {
                next[m] = next[m] + (p * dg).scaled(params_[0]);
            } else if (kind_ == Outer::power) {
                next[m + 1] = next[m + 1] + (p * dg).scaled(params_[0] - m);
            }
        }
        terms_ = std::move(next);
    }

    /// Coefficient of the scale at x⁰ (for power: Σ P_m(x⁰) g(x⁰)^{-m}).
    Q coefficient(const std::vector<Q>& x) const {
        const Q g0 = g_.at(x);
        Q total = 0;
        for (const auto& [m, p] : terms_) {
            Q v = p.at(x);
            for (int k = 0; k < m; ++k) v /= g0;
            total += v;
        }
        return total;
    }

private:
    Outer kind_;
    std::vector<Q> params_;
    Poly g_;
    std::size_t dim_;
    std::map<int, Poly> terms_;
};

}  // namespace oracle
