#include "expconv/polynomial.hpp"

#include "expconv/error.hpp"

#include <cmath>
#include <sstream>

namespace expconv {

Polynomial& Polynomial::add_term(const Rational& coeff, const MultiIndex& monomial) {
    if (monomial.dim() != dim_) throw InputError("polynomial monomial dimension mismatch");
    auto& c = terms_[monomial];
    c += coeff;
    if (c == 0) terms_.erase(monomial);
    return *this;
}

unsigned Polynomial::degree() const {
    unsigned deg = 0;
    for (const auto& [m, c] : terms_) deg = std::max(deg, m.order());
    return deg;
}

Rational Polynomial::evaluate(std::span<const Rational> x) const {
    return derivative(MultiIndex::zero(dim_), x);
}

double Polynomial::evaluate(std::span<const double> x) const {
    return derivative(MultiIndex::zero(dim_), x);
}

Rational Polynomial::derivative(const MultiIndex& beta, std::span<const Rational> x) const {
    if (x.size() != dim_ || beta.dim() != dim_) throw InputError("polynomial evaluation dimension mismatch");
    Rational total = 0;
    for (const auto& [m, c] : terms_) {
        if (!beta.divides_into(m)) continue;
        Rational term = c;
        for (std::size_t i = 0; i < dim_; ++i) {
            term *= falling_factorial(Rational(m[i]), beta[i]);
            term *= pow(x[i], static_cast<int>(m[i] - beta[i]));
        }
        total += term;
    }
    return total;
}

double Polynomial::derivative(const MultiIndex& beta, std::span<const double> x) const {
    if (x.size() != dim_ || beta.dim() != dim_) throw InputError("polynomial evaluation dimension mismatch");
    double total = 0.0;
    for (const auto& [m, c] : terms_) {
        if (!beta.divides_into(m)) continue;
        double term = to_double(c);
        for (std::size_t i = 0; i < dim_; ++i) {
            for (unsigned j = 0; j < beta[i]; ++j) term *= static_cast<double>(m[i] - j);
            term *= std::pow(x[i], static_cast<int>(m[i] - beta[i]));
        }
        total += term;
    }
    return total;
}

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        out << (first ? "" : " + ") << "(" << expconv::to_string(c) << ")";
        for (std::size_t i = 0; i < dim_; ++i)
            if (m[i] > 0) out << "*x" << (i + 1) << (m[i] > 1 ? "^" + std::to_string(m[i]) : "");
        first = false;
    }
    return out.str();
}

Polynomial Polynomial::one_plus_norm_squared(std::size_t dim) {
    Polynomial p(dim);
    p.add_term(1, MultiIndex::zero(dim));
    for (std::size_t i = 0; i < dim; ++i) p.add_term(1, MultiIndex::unit(dim, i, 2));
    return p;
}

}  // namespace expconv
