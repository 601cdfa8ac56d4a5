#include "expconv/error.hpp"
#include "expconv/faa_di_bruno.hpp"
#include "expconv/finite_difference.hpp"
#include "oracles/random_compositions.hpp"

#include <doctest.h>

#include <cmath>

using namespace expconv;

namespace {

InnerFunction poly_inner(std::size_t dim, std::vector<std::pair<Rational, MultiIndex>> terms) {
    Polynomial p(dim);
    for (auto& [c, m] : terms) p.add_term(c, m);
    return InnerFunction::polynomial(p);
}

}  // namespace

TEST_CASE("compose_derivative examples") {
    const auto sum = poly_inner(2, {{1, {1, 0}}, {1, {0, 1}}});
    const auto square = OuterFunction::polynomial({0, 0, 1});
    const std::vector<double> origin2{0.0, 0.0};
    CHECK(compose_derivative(square, sum, {1, 1}, origin2).value.to_double() == doctest::Approx(2.0));
    const std::vector<Rational> origin2q{0, 0};
    CHECK(compose_derivative_exact(square, sum, {1, 1}, origin2q).coefficient == 2);

    const auto x2 = poly_inner(1, {{1, {2}}});
    const std::vector<double> one{1.0};
    CHECK(compose_derivative(OuterFunction::exponential(Rational(1)), x2, {2}, one).value.to_double() ==
          doctest::Approx(6.0 * std::exp(1.0)));
    const auto exact = compose_derivative_exact(OuterFunction::exponential(Rational(1)), x2, {2}, std::vector<Rational>{1});
    CHECK(exact.coefficient == 6);
    CHECK(exact.scale.label == "exp(1)");

    const auto bracket_sq = InnerFunction::polynomial(Polynomial::one_plus_norm_squared(1));
    const auto sqrt_outer = OuterFunction::power(Rational(1, 2));
    CHECK(compose_derivative(sqrt_outer, bracket_sq, {1}, std::vector<double>{0.0}).value.is_zero());
    CHECK(compose_derivative_exact(sqrt_outer, bracket_sq, {1}, std::vector<Rational>{0}).coefficient == 0);
}

TEST_CASE("zero order returns f(g(x0))") {
    const auto g = poly_inner(1, {{2, {0}}, {1, {1}}});
    const auto f = OuterFunction::polynomial({1, 0, 3});
    CHECK(compose_derivative(f, g, {0}, std::vector<double>{1.0}).value.to_double() == doctest::Approx(28.0));
    CHECK(compose_derivative_exact(f, g, {0}, std::vector<Rational>{1}).coefficient == 28);
}

TEST_CASE("exact mode is refused for float-only oracles") {
    const auto g = poly_inner(1, {{1, {1}}});
    CHECK_THROWS_AS(compose_derivative_exact(OuterFunction::power(0.7), g, {1}, std::vector<Rational>{1}), InputError);
}

TEST_CASE("oracle equivalence on random compositions") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 20; ++i) {
        const auto c = oracle::random_composition(rng);
        CAPTURE(c.label);
        const auto exact = compose_derivative_exact(c.outer(), c.inner(), c.alpha, c.x0);
        CHECK(exact.coefficient == c.symbolic());

        std::vector<double> xd;
        std::vector<long double> xl;
        for (const auto& v : c.x0) {
            xd.push_back(to_double(v));
            xl.push_back(static_cast<long double>(v));
        }
        const double value = compose_derivative(c.outer(), c.inner(), c.alpha, xd).value.to_double();
        CHECK(value == doctest::Approx(exact.to_double()).epsilon(1e-12));
        const long double fd = finite_difference_derivative_adaptive<long double>(
            [&](std::span<const long double> x) { return c.evaluate(x); }, c.alpha, std::span<const long double>(xl),
            finite_difference_auto_step<long double>(c.alpha.order(), xl));
        CHECK(std::fabs(static_cast<double>(fd) - value) <= 1e-5 * std::fabs(value));
    }
}

TEST_CASE("linearity in the outer function") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 10; ++i) {
        auto c = oracle::random_composition(rng);
        const auto inner = c.inner();
        const std::vector<Rational> f1{1, -2, 0, 3}, f2{0, 5, 1, 0, -1};
        const Rational a(3, 2), b(-2);
        std::vector<Rational> combo(5, 0);
        for (std::size_t k = 0; k < f1.size(); ++k) combo[k] += a * f1[k];
        for (std::size_t k = 0; k < f2.size(); ++k) combo[k] += b * f2[k];
        const auto v1 = compose_derivative_exact(OuterFunction::polynomial(f1), inner, c.alpha, c.x0).coefficient;
        const auto v2 = compose_derivative_exact(OuterFunction::polynomial(f2), inner, c.alpha, c.x0).coefficient;
        const auto v = compose_derivative_exact(OuterFunction::polynomial(combo), inner, c.alpha, c.x0).coefficient;
        CHECK(v == a * v1 + b * v2);
    }
}

TEST_CASE("compose_jet agrees with single-target composition") {
    const auto layout = jet_layout(2, 4);
    const auto g = poly_inner(2, {{1, {0, 0}}, {1, {2, 0}}, {-1, {1, 1}}, {1, {0, 3}}});
    const std::vector<double> x{0.3, -0.7};
    Jet<LogValue> inner(layout);
    for (std::size_t s = 0; s < layout->size(); ++s) inner[s] = g.derivative(layout->index(s), x);
    const auto f = OuterFunction::exponential(0.5);
    std::vector<LogValue> outer;
    for (unsigned r = 0; r <= 4; ++r) outer.push_back(f.derivative(r, inner[0]));
    const auto jet = compose_jet(outer, inner);
    for (std::size_t s = 0; s < layout->size(); ++s) {
        const double direct = compose_derivative(f, g, layout->index(s), x).value.to_double();
        CHECK(jet[s].to_double() == doctest::Approx(direct).epsilon(1e-13));
    }
}

TEST_CASE("finite difference examples") {
    const std::vector<double> one{1.0}, two{2.0}, p{3.0, 5.0};
    CHECK(std::fabs(finite_difference_derivative<double>([](std::span<const double> x) { return x[0] * x[0]; },
                                                         MultiIndex{1}, std::span<const double>(one), 1e-4) -
                    2.0) <= 1e-8);
    CHECK(std::fabs(finite_difference_derivative<double>(
                        [](std::span<const double> x) { return x[0] * x[0] * x[0]; }, MultiIndex{2},
                        std::span<const double>(two), 1e-4) -
                    12.0) <= 1e-6);
    CHECK(std::fabs(finite_difference_derivative<double>([](std::span<const double> x) { return x[0] * x[1]; },
                                                         MultiIndex{1, 1}, std::span<const double>(p), 1e-4) -
                    1.0) <= 1e-6);
}

TEST_CASE("adaptive step survives a small derivative on a large function") {
    // (1 + x^2)^{1/2} at x = 4: |f| / |f^(5)| is about 3e3.
    const std::vector<long double> x{4.0L};
    auto f = [](std::span<const long double> t) { return std::sqrt(1.0L + t[0] * t[0]); };
    const long double h0 = finite_difference_auto_step<long double>(5, x);
    const double exact = compose_derivative(OuterFunction::power(Rational(1, 2)),
                                            InnerFunction::polynomial(Polynomial::one_plus_norm_squared(1)), {5},
                                            std::vector<double>{4.0})
                             .value.to_double();
    const long double fd = finite_difference_derivative_adaptive<long double>(f, MultiIndex{5}, std::span<const long double>(x), h0);
    CHECK(std::fabs(static_cast<double>(fd) / exact - 1.0) <= 1e-6);
}

TEST_CASE("log-domain composition flags cancellation") {
    // f = exp at y = 0 and g' = 1e10, g'' = -1e20: f''(g')^2 + f'g'' = 0.
    const auto g = poly_inner(1, {{Rational(10000000000LL), {1}}, {Rational(-50000000000LL) * 1000000000LL, {2}}});
    const auto r = compose_derivative(OuterFunction::exponential(1.0), g, {2}, std::vector<double>{0.0});
    CHECK(r.ill_conditioned);
    CHECK(r.cancellation_nats > 30.0);
    const auto clean = compose_derivative(OuterFunction::exponential(1.0), g, {1}, std::vector<double>{0.0});
    CHECK_FALSE(clean.ill_conditioned);
}
