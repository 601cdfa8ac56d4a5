#pragma once

#include "expconv/error.hpp"
#include "expconv/multiindex.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace expconv {

inline constexpr double kDefaultFiniteDifferenceStep = 1e-4;

namespace detail {

// Tensor central difference with step h: per axis of order n the stencil
// h^{-n} Σ_j (-1)^j C(n,j) f(x + (n/2 - j)h), half-integer offsets for odd n.
template <class T, class F>
T central_difference(F& fn, const MultiIndex& alpha, std::span<const T> x0, T h) {
    const std::size_t d = alpha.dim();
    std::vector<unsigned> j(d, 0);
    std::vector<T> x(x0.begin(), x0.end());
    T total = 0;
    for (;;) {
        T coeff = 1;
        for (std::size_t a = 0; a < d; ++a) {
            const unsigned n = alpha[a];
            T binom = 1;
            for (unsigned i = 0; i < j[a]; ++i) binom = binom * T(n - i) / T(i + 1);
            coeff *= (j[a] % 2 ? -binom : binom);
            x[a] = x0[a] + (T(n) / 2 - T(j[a])) * h;
        }
        total += coeff * fn(std::span<const T>(x));
        std::size_t a = 0;
        while (a < d && ++j[a] > alpha[a]) j[a++] = 0;
        if (a == d) break;
    }
    return total / std::pow(h, static_cast<int>(alpha.order()));
}

}  // namespace detail

/// Step balancing the O(h⁴) Richardson error against roundoff for order n.
template <class T>
T finite_difference_auto_step(unsigned order, std::span<const T> x0) {
    T scale = 1;
    for (const T& v : x0) scale = std::max<T>(scale, std::fabs(v));
    return std::pow(std::numeric_limits<T>::epsilon(), T(1) / T(order + 4)) * scale;
}

/// Central-difference approximation of ∂^α fn(x⁰), coordinate by coordinate,
/// with one level of Richardson extrapolation: (4 D(h) − D(2h)) / 3.
template <class T, class F>
T finite_difference_derivative(F&& fn, const MultiIndex& alpha, std::span<const T> x0,
                               std::optional<T> step = std::nullopt) {
    if (alpha.dim() != x0.size()) throw InputError("finite difference: dimension mismatch");
    const T h = step.value_or(T(kDefaultFiniteDifferenceStep));
    if (!(h > 0)) throw InputError("finite difference: step must be > 0");
    if (alpha.order() == 0) return fn(x0);
    const T fine = detail::central_difference<T>(fn, alpha, x0, h);
    const T coarse = detail::central_difference<T>(fn, alpha, x0, 2 * h);
    return (4 * fine - coarse) / 3;
}

/// finite_difference_derivative over the steps h₀·2^k, k = −3..3, returning
/// the estimate that agrees best with the next coarser one. For derivatives
/// much smaller than |fn| a fixed step is dominated by roundoff.
template <class T, class F>
T finite_difference_derivative_adaptive(F&& fn, const MultiIndex& alpha, std::span<const T> x0, T h0) {
    if (!(h0 > 0)) throw InputError("finite difference: step must be > 0");
    std::vector<T> estimates;
    for (int k = -3; k <= 3; ++k) estimates.push_back(finite_difference_derivative<T>(fn, alpha, x0, h0 * std::ldexp(T(1), k)));
    std::size_t best = 0;
    for (std::size_t i = 1; i + 1 < estimates.size(); ++i)
        if (std::fabs(estimates[i] - estimates[i + 1]) < std::fabs(estimates[best] - estimates[best + 1])) best = i;
    return estimates[best];
}

}  // namespace expconv
