#include "expconv/error.hpp"
#include "expconv/spaces.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace expconv;

namespace {

// e^{-a<x>} in d = 1
TestFunctionSpec exp_bracket(double a, double q1 = 1.0) { return TestFunctionSpec::gauss_exp(1, a, q1); }

// Brute-force: smallest integer H with (p+q)! <= H^{p+q} p! q! for all p + q <= n.
unsigned factorial_m2_oracle(unsigned n) {
    for (unsigned H = 1;; ++H) {
        bool ok = true;
        for (unsigned total = 0; total <= n && ok; ++total)
            for (unsigned p = 0; p <= total && ok; ++p) {
                const BigInt lhs = factorial(total);
                BigInt rhs = factorial(p) * factorial(total - p);
                for (unsigned i = 0; i < total; ++i) rhs *= H;
                ok = lhs <= rhs;
            }
        if (ok) return H;
    }
}

}  // namespace

TEST_CASE("weight sequence examples for p!") {
    const auto m = WeightSequence::gevrey(1.0);
    const auto checks = weight_sequence_checks(m, 20);
    CHECK(checks.m1_holds);
    CHECK(checks.m1_failures.empty());
    CHECK(checks.m2_holds);
    CHECK(checks.m2_c0 == 1);
    CHECK(checks.m2_H == 2);
    CHECK(checks.m2_H == factorial_m2_oracle(20));
    CHECK(checks.m6.holds);
    CHECK(checks.m6.C == 1.0);
    CHECK(checks.m6.L == 1);
    CHECK(checks.m5_c0_estimate > 0.0);
}

TEST_CASE("weight sequences: gevrey exponents and tables") {
    const auto g2 = weight_sequence_checks(WeightSequence::gevrey(2.0), 15);
    CHECK(g2.m1_holds);
    CHECK(g2.m2_H == 4);  // binom(p, p/2)^2 < 4^p
    const auto g15 = weight_sequence_checks(WeightSequence::gevrey(1.5), 15);
    CHECK(g15.m1_holds);
    CHECK(g15.m2_holds);
    CHECK(g15.m2_H == 3);  // 2^{1.5} < 3

    // Not log-convex at p = 2.
    const auto bad = weight_sequence_checks(WeightSequence::table({1, 1, 3, 4, 20, 200}), 4);
    CHECK_FALSE(bad.m1_holds);
    REQUIRE(bad.m1_failures.size() >= 1);
    CHECK(bad.m1_failures.front() == 2);

    const auto table = weight_sequence_checks(WeightSequence::table({1, 1, 2, 6, 24, 120, 720, 5040}), 7);
    CHECK(table.m1_holds);
    CHECK(table.m2_H == 2);

    CHECK_THROWS_AS(WeightSequence::table({2, 1, 2}), InputError);
    CHECK_THROWS_AS(WeightSequence::gevrey(0.5), InputError);
    CHECK_THROWS_AS(weight_sequence_checks(WeightSequence::gevrey(1.0), 2), InputError);
    CHECK_THROWS_AS(weight_sequence_checks(WeightSequence::table({1, 1, 2, 6}), 5), InputError);
}

TEST_CASE("gevrey inclusion") {
    CHECK(gevrey_inclusion(1.5, WeightSequence::gevrey(2.0), 30).holds);
    CHECK_FALSE(gevrey_inclusion(2.5, WeightSequence::gevrey(2.0), 30).holds);
    std::vector<double> table;
    for (unsigned p = 0; p <= 30; ++p) table.push_back(std::tgamma(p + 1.0) * std::pow(3.0, p));
    table[1] = 1.0;
    // 3^p p! contains p! with L = 1.
    const auto inc = gevrey_inclusion(1.0, WeightSequence::table(table), 30);
    CHECK(inc.holds);
    CHECK_FALSE(gevrey_inclusion(1.5, WeightSequence::table(table), 30).holds);
}

TEST_CASE("seminorm examples") {
    // e^{-|x|^2} = e · e^{-<x>^2}
    const auto phi = TestFunctionSpec::gauss_exp(1, 1.0, 2.0, std::exp(1.0));
    const auto m = WeightSequence::gevrey(1.0);
    SamplePlan grid;
    grid.radius = 6.0;
    grid.points_per_axis = 121;
    const auto r0 = gs_seminorm(phi, 0.5, m, 2.0, 0, grid);
    CHECK_FALSE(r0.unbounded);
    CHECK(r0.value == doctest::Approx(1.0).epsilon(1e-12));
    const auto r1 = gs_seminorm(phi, 0.5, m, 2.0, 1, grid);
    CHECK(r1.value == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(r1.terms.size() == 2);
    CHECK(r1.terms[1].value == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
    CHECK(std::fabs(r1.terms[1].location[0]) == doctest::Approx(1.0).epsilon(1e-4));
    const auto r2 = gs_seminorm(phi, 2.0, m, 2.0, 1, grid);
    CHECK(r2.unbounded);
}

TEST_CASE("seminorm flags growth the analysis cannot decide") {
    // h = η at q = q1: e^{h|x|^2} e^{-<x>^2} ~ e^{-1}, and the α = 1 derivative grows like |x|.
    const auto phi = TestFunctionSpec::gauss_exp(1, 1.0, 2.0);
    SamplePlan grid;
    grid.radius = 8.0;
    grid.points_per_axis = 65;
    const auto r = gs_seminorm(phi, 1.0, WeightSequence::gevrey(1.0), 2.0, 1, grid);
    CHECK(r.unbounded);
}

TEST_CASE("exponent identity q' < q < q1") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double q = 1.0 + 4.0 * u(rng) + 1e-9;
        const double q1 = q + 4.0 * u(rng) + 1e-9;
        const double qp = (q - 1.0) * q1 / (q1 - 1.0);
        REQUIRE(qp < q);
        REQUIRE(q < q1);
    }
    CHECK((1.0 - 1.0) * 3.0 / (3.0 - 1.0) == 0.0);
}

TEST_CASE("leading-exponent analysis") {
    CHECK(weighted_density_integrable(exp_bracket(2.0), 1.0, 1.0, 0.0, 0.0));
    CHECK_FALSE(weighted_density_integrable(exp_bracket(1.0), 1.0, 1.0, 0.0, 0.0));
    CHECK_FALSE(weighted_density_integrable(exp_bracket(0.5), 1.0, 1.0, 0.0, 0.0));
    // q = q1 = 2, the η = s tie falls through to the k<x>^{q'} term.
    const auto g = TestFunctionSpec::gauss_exp(1, 1.0, 2.0);
    CHECK_FALSE(weighted_density_integrable(g, 1.0, 2.0, 1.0, 1.5));
    const auto g3 = TestFunctionSpec::gauss_exp(1, 1.0, 3.0);
    CHECK(weighted_density_integrable(g3, 5.0, 2.0, 4.0, 1.5));
}

TEST_CASE("convolvability examples") {
    ConvolvabilityOptions opts;
    const auto v1 = convolvability_report(TestFunctionSpec::gauss_exp(1, 2.0, 1.0), {1.0, 1.0}, 2.0, opts);
    CHECK(v1.verdict == Verdict::convolvable);

    const auto v2 = convolvability_report(TestFunctionSpec::gauss_exp(1, 1.0, 1.0), {1.0, 1.0}, 2.0, opts);
    CHECK(v2.verdict == Verdict::not_convolvable);
    CHECK(v2.k_results[0].divergent);

    TestFunctionSpec s3;
    s3.dim = 1;
    s3.terms.push_back({1.0, MultiIndex{0}, 3.0, 2.0});
    s3.terms.push_back({1.0, MultiIndex{2}, 3.0, 2.0});
    opts.k_list = {0.0, 1.0, 2.0};
    const auto v3 = convolvability_report(s3, {1.0, 2.0}, 3.0, opts);
    CHECK(v3.verdict == Verdict::convolvable);
    CHECK(v3.q_prime == doctest::Approx(1.5));
    CHECK(v3.k_results.size() == 3);
    for (const auto& w : v3.k_results) CHECK_FALSE(w.divergent);
    CHECK_FALSE(v3.notes.empty());

    TestFunctionSpec empty;
    empty.dim = 1;
    CHECK_THROWS_AS(convolvability_report(empty, {1.0, 1.0}, 2.0), InputError);
    CHECK_THROWS_AS(convolvability_report(exp_bracket(2.0), {1.0, 2.0}, 2.0), InputError);
}

TEST_CASE("q = 1 family: convolvable exactly when a > s") {
    for (double a : {0.5, 1.0, 1.5, 2.0, 4.0}) {
        const auto v = convolvability_report(exp_bracket(a), {1.0, 1.0}, 2.0);
        CHECK(v.verdict == (a > 1.0 ? Verdict::convolvable : Verdict::not_convolvable));
        for (const auto& w : v.k_results) CHECK(w.analytic_finite == (a > 1.0));
    }
}

TEST_CASE("q > 1: divergence needs the weight hypothesis") {
    // e^{-<x>^2} against e^{<x>^2.5} is not integrable.
    const auto s = TestFunctionSpec::gauss_exp(1, 1.0, 2.0);
    ConvolvabilityOptions opts;
    const auto strong = convolvability_report(s, {1.0, 2.5}, 3.5, opts);
    CHECK(strong.hypothesis_q1);
    CHECK(strong.verdict == Verdict::not_convolvable);

    opts.weights = WeightSequence::gevrey(1.2);
    const auto weak = convolvability_report(s, {1.0, 2.5}, 3.5, opts);
    CHECK_FALSE(weak.hypothesis_q1);
    CHECK(weak.verdict == Verdict::inconclusive);
}

TEST_CASE("monotonicity in s") {
    ConvolvabilityOptions opts;
    opts.s_primes = {0.5, -0.5, -2.0};
    for (double a : {1.5, 2.0, 4.0}) {
        const auto v = convolvability_report(exp_bracket(a), {1.0, 1.0}, 2.0, opts);
        REQUIRE(v.verdict == Verdict::convolvable);
        REQUIRE(v.monotone_shadow.has_value());
        CHECK(*v.monotone_shadow);
        for (double sp : opts.s_primes) {
            const auto lower = convolvability_report(exp_bracket(a), {sp, 1.0}, 2.0);
            CHECK(lower.verdict == Verdict::convolvable);
        }
    }
}
