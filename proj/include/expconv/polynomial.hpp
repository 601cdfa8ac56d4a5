#pragma once

#include "expconv/multiindex.hpp"
#include "expconv/rational.hpp"

#include <map>
#include <span>
#include <string>

namespace expconv {

/// Multivariate polynomial with exact rational coefficients.
class Polynomial {
public:
    explicit Polynomial(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }
    const std::map<MultiIndex, Rational>& terms() const { return terms_; }

    /// Adds coeff · x^monomial.
    Polynomial& add_term(const Rational& coeff, const MultiIndex& monomial);

    unsigned degree() const;

    Rational evaluate(std::span<const Rational> x) const;
    double evaluate(std::span<const double> x) const;

    /// ∂^β p, evaluated directly from the coefficient table.
    Rational derivative(const MultiIndex& beta, std::span<const Rational> x) const;
    double derivative(const MultiIndex& beta, std::span<const double> x) const;

    std::string to_string() const;

    /// 1 + |x|² in d variables.
    static Polynomial one_plus_norm_squared(std::size_t dim);

private:
    std::size_t dim_;
    std::map<MultiIndex, Rational> terms_;
};

}  // namespace expconv
