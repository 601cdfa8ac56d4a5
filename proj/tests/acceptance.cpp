// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.

#include "expconv/convolution.hpp"
#include "expconv/faa_di_bruno.hpp"
#include "expconv/finite_difference.hpp"
#include "expconv/kernel.hpp"
#include "expconv/multiindex.hpp"
#include "expconv/spaces.hpp"
#include "oracles/gaussian_oracle.hpp"
#include "oracles/partition_oracle.hpp"
#include "oracles/random_compositions.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace expconv;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

int failures = 0;

void criterion(int id, const char* name, double time_limit, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (time_limit > 0.0 && seconds >= time_limit) {
        o.pass = false;
        o.detail += fmt("; over the %.0f s limit", time_limit);
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %-22s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), seconds);
    std::fflush(stdout);
}

Outcome faa_di_bruno_cases() {
    std::mt19937_64 rng(20240601);
    int exact_ok = 0;
    double worst_fd = 0.0;
    const int n = 20;
    for (int i = 0; i < n; ++i) {
        const auto c = oracle::random_composition(rng);
        const auto exact = compose_derivative_exact(c.outer(), c.inner(), c.alpha, c.x0);
        if (exact.coefficient == c.symbolic()) ++exact_ok;

        std::vector<double> xd;
        std::vector<long double> xl;
        for (const auto& v : c.x0) {
            xd.push_back(to_double(v));
            xl.push_back(static_cast<long double>(v));
        }
        const double value = compose_derivative(c.outer(), c.inner(), c.alpha, xd).value.to_double();
        const long double fd = finite_difference_derivative_adaptive<long double>(
            [&](std::span<const long double> x) { return c.evaluate(x); }, c.alpha, std::span<const long double>(xl),
            finite_difference_auto_step<long double>(c.alpha.order(), xl));
        worst_fd = std::max(worst_fd, std::fabs(static_cast<double>(fd) - value) / std::fabs(value));
    }
    return {exact_ok == n && worst_fd <= 1e-5,
            fmt("%d/%d exact equal to the symbolic oracle, float vs finite differences max rel err %.2e", exact_ok, n,
                worst_fd)};
}

Outcome partition_counts() {
    const std::vector<std::size_t> expected = {1, 2, 3, 5, 7, 11, 15};
    std::vector<std::size_t> brute, enumerated;
    for (unsigned m = 1; m <= 7; ++m) brute.push_back(oracle::integer_partitions(m).size());
    bool ok = brute == expected;
    for (unsigned m = 1; m <= 7; ++m) {
        std::size_t total = 0;
        for (unsigned r = 1; r <= m; ++r) {
            const auto set = enumerate_partition_terms(MultiIndex{m}, r);
            total += set->terms.size();
            ok = ok && set->terms.size() == oracle::partition_terms({m}, r).size();
        }
        enumerated.push_back(total);
    }
    ok = ok && enumerated == expected;
    std::string counts;
    for (auto c : enumerated) counts += (counts.empty() ? "" : ",") + std::to_string(c);
    return {ok, "n=1..7 -> " + counts + " (brute force agrees)"};
}

Outcome weight_sums() {
    std::size_t checked = 0, bad = 0;
    double worst = 0.0;
    for (std::size_t d = 1; d <= 3; ++d) {
        for (const auto& alpha : multi_indices_up_to(d, 6)) {
            if (alpha.is_zero()) continue;
            const Rational sum = faa_di_bruno_weight_sum(alpha);
            const Rational bound(faa_di_bruno_weight_bound(alpha));
            ++checked;
            if (sum > bound) ++bad;
            worst = std::max(worst, to_double(sum / bound));
        }
    }
    return {bad == 0, fmt("%zu multi-indices, max sum/bound %.4f", checked, worst)};
}

Outcome inequality_suite() {
    std::size_t runs = 0, failed = 0;
    double worst = 0.0;
    std::string first_failure;
    auto record = [&](const BoundReport& r, const std::string& label) {
        ++runs;
        worst = std::max(worst, r.worst_ratio);
        if (!r.passed() || r.validation_count < 10000) {
            ++failed;
            if (first_failure.empty()) first_failure = label;
        }
    };
    for (std::size_t d = 1; d <= 2; ++d) {
        SamplePlan plan;
        plan.dim = d;
        plan.radius = 10.0;
        plan.points_per_axis = d == 1 ? 201 : 41;
        plan.validation_samples = 10000;
        plan.seed = 100 + d;
        record(check_derivative_bounds(BoundId::prva1, {1.0, 2.0}, 6, plan), "prva1 d=" + std::to_string(d));
        for (double q : {1.0, 1.5, 2.0, 3.0}) {
            for (BoundId id : {BoundId::r_ta, BoundId::lemma33, BoundId::cor34})
                record(check_derivative_bounds(id, {1.0, q}, 6, plan),
                       to_string(id) + " d=" + std::to_string(d) + " q=" + fmt("%g", q));
        }
    }
    const auto samples = random_shift_samples(1000000, 2, 20.0, 1.0, 3.0, -3.0, 3.0, 35);
    const BoundReport shift = check_shift_inequality(samples);
    ++runs;
    if (!shift.passed()) {
        ++failed;
        if (first_failure.empty()) first_failure = "lemma35";
    }
    std::string detail = fmt("%zu reports, %zu failed, lemma35 %zu samples with %zu violations", runs, failed,
                             samples.size(), shift.violation_count);
    if (!first_failure.empty()) detail += ", first failure " + first_failure;
    return {failed == 0, detail};
}

Outcome gaussian_oracle() {
    double worst = 0.0;
    for (double eta : {2.0, 4.0}) {
        const auto phi = TestFunctionSpec::gauss_exp(1, eta, 2.0);
        for (int i = 0; i <= 40; ++i) {
            const std::vector<double> x{-5.0 + 0.25 * i};
            const LogValue v = convolve(phi, {1.0, 2.0}, {0}, x);
            const double err = v.sign() == 1 ? std::fabs(std::expm1(v.log_magnitude() - oracle::log_gaussian_convolution(eta, 1.0, x)))
                                             : 1.0;
            worst = std::max(worst, err);
        }
    }
    return {worst <= 1e-6, fmt("eta in {2,4}, 41 points, max rel err %.2e", worst)};
}

Outcome profile_bound() {
    const auto phi = TestFunctionSpec::gauss_exp(1, 2.0, 3.0);
    const KernelSpec spec{1.0, 1.5};
    SamplePlan coarse;
    coarse.radius = 8.0;
    coarse.points_per_axis = 41;
    SamplePlan fine = coarse;
    fine.points_per_axis = 81;
    const BoundReport a = upper_bound_profile(phi, spec, 3, coarse);
    const BoundReport b = upper_bound_profile(phi, spec, 3, fine);
    const double c2a = *a.parameter("C2"), c2b = *b.parameter("C2");
    const double drift = std::fabs(c2b / c2a - 1.0);
    const bool ok = a.passed() && b.passed() && std::isfinite(c2a) && drift <= 0.05;
    return {ok, fmt("C2 %.6g -> %.6g (drift %.2e), C1 %.6g, violations %zu/%zu", c2a, c2b, drift, *b.parameter("C1"),
                    a.violation_count, b.violation_count)};
}

Outcome lower_bound() {
    const auto g = TestFunctionSpec::gauss_exp(1, 1.0, 3.0);
    bool ok = true;
    std::string detail;
    for (double s : {1.0, -1.0}) {
        for (double k : {0.0, 1.0}) {
            SamplePlan six;
            six.radius = 6.0;
            six.points_per_axis = 33;
            SamplePlan eight = six;
            eight.radius = 8.0;
            const auto r6 = lower_bound_recipe(g, {s, 1.5}, k, six);
            const auto r8 = lower_bound_recipe(g, {s, 1.5}, k, eight);
            // c > 0 and c on |x| <= 8 not far below the value on |x| <= 6
            const bool here = r8.report.passed() && r6.report.passed() && std::isfinite(r8.recipe.log_c) &&
                              r8.recipe.log_c >= r6.recipe.log_c + std::log(0.9);
            ok = ok && here;
            detail += fmt("%s[s=%g k=%g log c=%.4g%s]", detail.empty() ? "" : " ", s, k, r8.recipe.log_c,
                          s < 0 ? fmt(" c'=%.4g", r8.recipe.c_prime).c_str() : "");
        }
    }
    return {ok, detail};
}

Outcome reciprocal_bound() {
    const auto g = TestFunctionSpec::gauss_exp(1, 2.0, 2.0);
    SamplePlan plan;
    plan.radius = 6.0;
    plan.points_per_axis = 49;
    plan.validation_samples = 200;
    const BoundReport r = reciprocal_derivative_bound_check(g, {1.0, 2.0}, 3, plan);
    double c_i = NAN, c_ii = NAN;
    for (const auto& f : r.fits) {
        if (f.label == "(i) (1)") c_i = f.fitted_constant;
        if (f.label == "(ii) (1)") c_ii = f.fitted_constant;
    }
    const bool ok = r.passed() && std::fabs(c_ii / 2.0 - 1.0) <= 0.10;
    return {ok, fmt("violations %zu, alpha=(1) fits C(i)=%.5g C(ii)=%.5g", r.violation_count, c_i, c_ii)};
}

Outcome exponential_family() {
    ConvolvabilityOptions with_shadow;
    with_shadow.s_primes = {0.5, -0.5, -2.0};
    bool ok = true;
    std::string detail;
    for (double a : {0.5, 1.0, 1.5, 2.0, 4.0}) {
        const auto v = convolvability_report(TestFunctionSpec::gauss_exp(1, a, 1.0), {1.0, 1.0}, 2.0, with_shadow);
        const bool expect = a > 1.0;
        bool here = v.verdict == (expect ? Verdict::convolvable : Verdict::not_convolvable);
        if (expect) here = here && v.monotone_shadow.value_or(false);
        ok = ok && here;
        detail += fmt("%sa=%g:%s", detail.empty() ? "" : " ", a, to_string(v.verdict).c_str());
    }
    return {ok, detail + "; s' in {0.5,-0.5,-2} finite whenever convolvable"};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome cli_determinism() {
    const std::string cli = EXPCONV_CLI_PATH;
    const auto dir = std::filesystem::temp_directory_path();
    const std::vector<std::string> commands = {
        "verify --bound lemma35 --q 1.5 --s -2 --samples 20000 --seed 11",
        "verify --bound thm36 --s 1 --q 1.5 --alpha-max 2 --points 17",
        "convolve --phi '{\"terms\":[{\"coeff\":1,\"monomial\":[1],\"eta\":2,\"q1\":3}]}' --s 1 --q 2 --alpha 1 --format csv",
        "report --subject '{\"terms\":[{\"coeff\":1,\"monomial\":[0],\"eta\":2,\"q1\":1}]}' --s 1 --q 1 --s-primes 0.5",
    };
    std::size_t identical = 0;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        std::string outputs[2];
        for (int run = 0; run < 2; ++run) {
            const std::string path = (dir / ("expconv_acceptance_" + std::to_string(i) + "_" + std::to_string(run))).string();
            std::filesystem::remove(path);
            const int status = std::system((cli + " " + commands[i] + " --out " + path + " 2>/dev/null").c_str());
            if (status != 0) return {false, "nonzero exit from: " + commands[i]};
            outputs[run] = slurp(path);
            std::filesystem::remove(path);
        }
        if (!outputs[0].empty() && outputs[0] == outputs[1]) ++identical;
    }
    return {identical == commands.size(), fmt("%zu/%zu commands byte-identical across two runs", identical, commands.size())};
}

}  // namespace

int main() {
    criterion(1, "faa-di-bruno", 60.0, faa_di_bruno_cases);
    criterion(2, "partition-counts", 5.0, partition_counts);
    criterion(3, "weight-sum-bound", 120.0, weight_sums);
    criterion(4, "inequality-suite", 0.0, inequality_suite);
    criterion(5, "gaussian-oracle", 30.0, gaussian_oracle);
    criterion(6, "upper-profile", 0.0, profile_bound);
    criterion(7, "lower-bound", 0.0, lower_bound);
    criterion(8, "reciprocal-bound", 0.0, reciprocal_bound);
    criterion(9, "exponential-family", 0.0, exponential_family);
    criterion(10, "cli-determinism", 0.0, cli_determinism);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
