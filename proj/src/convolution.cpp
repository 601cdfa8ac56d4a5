#include "expconv/convolution.hpp"

#include "expconv/error.hpp"
#include "expconv/faa_di_bruno.hpp"
#include "expconv/parallel.hpp"
#include "expconv/random.hpp"
#include "pattern_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace expconv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSlack = 1e-9;

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double log_multi_factorial(const MultiIndex& a) {
    double r = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) r += std::lgamma(a[i] + 1.0);
    return r;
}

double unit_ball_volume(std::size_t d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return std::numbers::pi;
        default: return 4.0 * std::numbers::pi / 3.0;
    }
}

std::vector<double> grid_point(const SamplePlan& plan, std::size_t flat) {
    std::vector<double> x(plan.dim);
    const unsigned n = plan.points_per_axis;
    for (std::size_t a = 0; a < plan.dim; ++a) {
        const std::size_t i = flat % n;
        flat /= n;
        x[a] = n == 1 ? 0.0 : -plan.radius + 2.0 * plan.radius * static_cast<double>(i) / (n - 1.0);
    }
    return x;
}

std::vector<std::vector<double>> grid_points(const SamplePlan& plan) {
    std::size_t total = 1;
    for (std::size_t a = 0; a < plan.dim; ++a) total *= plan.points_per_axis;
    std::vector<std::vector<double>> pts(total);
    for (std::size_t p = 0; p < total; ++p) pts[p] = grid_point(plan, p);
    return pts;
}

void check_plan(const SamplePlan& plan, std::size_t dim) {
    if (plan.dim != dim) throw InputError("grid dimension does not match the test function");
    if (!(plan.radius > 0.0) || plan.points_per_axis < 2) throw InputError("grid needs radius > 0 and >= 2 points");
}

void check_convolvable(const TestFunctionSpec& phi, const KernelSpec& spec) {
    phi.validate();
    spec.validate_for_convolution();
    if (phi.dim > 3) throw InputError("convolution supports d <= 3");
    // q₁ = q is still integrable when the Gaussian-type rate wins: η > s.
    if (spec.s > 0.0)
        for (const auto& t : phi.terms)
            if (t.coeff != 0.0 && !(t.q1 > spec.q || (t.q1 == spec.q && t.eta > spec.s)))
                throw InputError("convolution with s > 0 needs q1 > q (or q1 = q and eta > s) in every term");
}

QuadratureConfig with_envelope(QuadratureConfig config, std::size_t dim,
                               std::function<double(double)> envelope) {
    config.dim = dim;
    if (auto* tail = std::get_if<TailEnvelope>(&config.truncation); tail && !tail->log_envelope)
        tail->log_envelope = std::move(envelope);
    return config;
}

// Largest log e^{s⟨x−t⟩^q} over |t| = r.
double kernel_log_max(const KernelSpec& spec, double abs_x, double r) {
    if (spec.s > 0.0) return spec.s * std::pow(abs_x + std::sqrt(1.0 + r * r), spec.q);
    const double gap = std::max(0.0, r - abs_x);
    return spec.s * std::pow(std::sqrt(1.0 + gap * gap), spec.q);
}

}  // namespace

double convolution_log_envelope(const TestFunctionSpec& phi, const KernelSpec& spec, unsigned order,
                                std::span<const double> x, double rho) {
    const double abs_x = norm(x);
    auto f = [&](double r) { return phi.log_tail_envelope(order, r) + kernel_log_max(spec, abs_x, r); };
    // The sum is eventually decreasing (q₁ > q, or s < 0); scan geometrically
    // past its single interior peak to bound the sup over r ≥ ρ.
    double best = f(rho);
    double previous = best;
    double r = rho;
    for (int k = 0; k < 200; ++k) {
        r = (r + 1.0) * 1.15 - 1.0;
        const double v = f(r);
        if (v == kNegInf) break;
        best = std::max(best, v);
        if (v < previous && v < best - 200.0 && r > 4.0 * rho) break;
        previous = v;
    }
    return best;
}

ConvolutionResult convolve_detailed(const TestFunctionSpec& phi, const KernelSpec& spec, const MultiIndex& alpha,
                                    std::span<const double> x, const QuadratureConfig& config) {
    check_convolvable(phi, spec);
    if (alpha.dim() != phi.dim || x.size() != phi.dim) throw InputError("convolve: dimension mismatch");
    for (double v : x)
        if (!std::isfinite(v)) throw InputError("convolve: x must be finite");

    ConvolutionResult out;
    if (phi.is_zero()) {
        out.value = LogValue::zero();
        return out;
    }
    const std::vector<double> xs(x.begin(), x.end());
    const unsigned order = alpha.order();
    const std::size_t d = phi.dim;
    const auto cfg = with_envelope(config, d, [&phi, &spec, order, xs](double rho) {
        return convolution_log_envelope(phi, spec, order, xs, rho);
    });
    LogIntegrand integrand = [&](std::span<const double> t) {
        double diff[3];
        for (std::size_t i = 0; i < d; ++i) diff[i] = xs[i] - t[i];
        const LogValue v = phi.derivative(alpha, t);
        if (v.is_zero()) return v;
        return v.shifted(spec.s * std::pow(bracket(std::span<const double>(diff, d)), spec.q));
    };
    out.quadrature = integrate_log_domain(integrand, cfg);
    out.value = out.quadrature.value;
    return out;
}

LogValue convolve(const TestFunctionSpec& phi, const KernelSpec& spec, const MultiIndex& alpha,
                  std::span<const double> x, const QuadratureConfig& config) {
    return convolve_detailed(phi, spec, alpha, x, config).value;
}

LogValue convolve_kernel_side(const TestFunctionSpec& phi, const KernelSpec& spec, const MultiIndex& alpha,
                              std::span<const double> x, const QuadratureConfig& config) {
    check_convolvable(phi, spec);
    if (alpha.dim() != phi.dim || x.size() != phi.dim) throw InputError("convolve: dimension mismatch");
    if (phi.is_zero()) return LogValue::zero();
    const std::vector<double> xs(x.begin(), x.end());
    const unsigned n = alpha.order();
    const std::size_t d = phi.dim;
    const double abs_x = norm(x);
    // Kernel derivatives grow at most like n! (c⟨·⟩^q)^n times the kernel.
    const double log_poly_rate = std::log(4.0 * (1.0 + std::fabs(spec.s)) * (1.0 + spec.q) * (1.0 + d));
    const auto cfg = with_envelope(config, d, [&phi, &spec, n, xs, abs_x, log_poly_rate](double rho) {
        const double base = convolution_log_envelope(phi, spec, 0, xs, rho);
        const double reach = abs_x + std::sqrt(1.0 + rho * rho);
        return base + n * (log_poly_rate + spec.q * std::log(reach)) + std::lgamma(n + 1.0) +
               n * spec.q * std::log(1.0 + rho);
    });
    LogIntegrand integrand = [&](std::span<const double> t) {
        double diff[3];
        for (std::size_t i = 0; i < d; ++i) diff[i] = xs[i] - t[i];
        const LogValue v = phi.value(t);
        if (v.is_zero()) return v;
        return v * exp_kernel_derivative(spec, alpha, std::span<const double>(diff, d));
    };
    return integrate_log_domain(integrand, cfg).value;
}

LogValue l1_norm(const TestFunctionSpec& phi, const QuadratureConfig& config) {
    phi.validate();
    if (phi.is_zero()) return LogValue::zero();
    const auto cfg = with_envelope(config, phi.dim, [&phi](double rho) { return phi.log_tail_envelope(0, rho); });
    return integrate_log_domain([&](std::span<const double> t) { return phi.value(t).abs(); }, cfg).value;
}

// ---------------------------------------------------------------------------
// Upper-bound profile

ProfileConstants profile_constants(const KernelSpec& spec, double eta, double q1) {
    spec.validate_for_convolution();
    if (!(eta > 0.0)) throw InputError("profile needs eta > 0");
    if (!(q1 > spec.q)) throw InputError("profile needs q1 > q");
    const double q = spec.q;
    const double abs_s = std::fabs(spec.s);
    ProfileConstants c{};
    c.lambda = q == 1.0 ? 1.0 : std::pow(eta / (std::pow(4.0, q) * q * abs_s), 1.0 / (q - 1.0));
    c.c1 = q * std::pow(2.0, q - 1.0) * abs_s * std::pow(c.lambda, -(q - 1.0) / (q1 - 1.0));
    c.q_prime = (q - 1.0) * q1 / (q1 - 1.0);
    return c;
}

double log_profile(const KernelSpec& spec, const ProfileConstants& constants, std::span<const double> x) {
    const double b = bracket(x);
    return spec.s * std::pow(b, spec.q) + constants.c1 * std::pow(b, constants.q_prime);
}

BoundReport upper_bound_profile(const TestFunctionSpec& phi, const KernelSpec& spec, unsigned alpha_max,
                                const SamplePlan& grid, const QuadratureConfig& config) {
    check_convolvable(phi, spec);
    check_plan(grid, phi.dim);
    if (phi.is_zero()) throw InputError("profile needs a nonzero test function");
    const double q1 = phi.dominant_q1();
    const double eta = phi.dominant_eta();
    const auto constants = profile_constants(spec, eta, q1);

    BoundReport report;
    report.id = BoundId::thm36;
    report.add_parameter("s", spec.s);
    report.add_parameter("q", spec.q);
    report.add_parameter("q1", q1);
    report.add_parameter("eta", eta);
    report.add_parameter("lambda", constants.lambda);
    report.add_parameter("c1", constants.c1);
    report.add_parameter("q_prime", constants.q_prime);
    report.add_parameter("alpha_max", alpha_max);
    report.add_parameter("radius", grid.radius);
    report.add_parameter("points_per_axis", grid.points_per_axis);

    const auto indices = multi_indices_up_to(phi.dim, alpha_max);
    const std::size_t K = indices.size();
    std::vector<double> log_fact(K);
    for (std::size_t i = 0; i < K; ++i) log_fact[i] = log_multi_factorial(indices[i]);

    auto log_ratio = [&](std::size_t i, std::span<const double> x) {
        const LogValue v = convolve(phi, spec, indices[i], x, config);
        if (v.is_zero()) return kNegInf;
        return v.log_magnitude() - log_fact[i] - log_profile(spec, constants, x);
    };

    const auto pts = grid_points(grid);
    const auto ratios = parallel_map<std::vector<double>>(pts.size(), [&](std::size_t p) {
        std::vector<double> r(K);
        for (std::size_t i = 0; i < K; ++i) r[i] = log_ratio(i, pts[p]);
        return r;
    });
    report.sample_count = pts.size() * K;

    std::vector<double> best(K, kNegInf);
    std::vector<std::vector<double>> where(K, pts[0]);
    for (std::size_t p = 0; p < pts.size(); ++p)
        for (std::size_t i = 0; i < K; ++i)
            if (ratios[p][i] > best[i]) {
                best[i] = ratios[p][i];
                where[i] = pts[p];
            }

    // Growth toward the edge of the box: compare the outer two radial shells.
    const double R = grid.radius;
    for (std::size_t i = 0; i < K; ++i) {
        double outer = kNegInf, inner = kNegInf;
        for (std::size_t p = 0; p < pts.size(); ++p) {
            const double r = norm(pts[p]);
            if (r > R * (1.0 + 1e-12)) continue;
            if (r >= 0.75 * R) outer = std::max(outer, ratios[p][i]);
            else if (r >= 0.5 * R) inner = std::max(inner, ratios[p][i]);
        }
        if (outer != kNegInf && outer >= best[i] && outer > inner + std::log(1.05)) {
            report.add_violation({indices[i].to_string(), where[i], {}, std::exp(outer - inner),
                                  "ratio still growing at the edge of the grid"});
        }
    }

    if (grid.refine_maxima) {
        const double spacing = 2.0 * grid.radius / (grid.points_per_axis - 1.0);
        std::vector<std::size_t> evaluations(K, 0);
        parallel_for(K, [&](std::size_t i) {
            if (best[i] == kNegInf) return;
            evaluations[i] = detail::pattern_maximize([&](std::span<const double> x) { return log_ratio(i, x); },
                                                      where[i], best[i], spacing, grid.radius, 1e-3, 200);
        });
        for (std::size_t e : evaluations) report.sample_count += e;
    }

    const double log_c2 = best[0];
    double log_c1 = 0.0;
    report.fits.resize(K);
    for (std::size_t i = 0; i < K; ++i) {
        auto& fit = report.fits[i];
        fit.label = indices[i].to_string();
        fit.order = indices[i].order();
        fit.worst_location = where[i];
        if (i > 0 && best[i] != kNegInf) log_c1 = std::max(log_c1, (best[i] - log_c2) / fit.order);
        fit.fitted_constant = std::exp(best[i]);
    }
    double worst = kNegInf;
    for (std::size_t i = 0; i < K; ++i) {
        const double excess = best[i] - log_c2 - indices[i].order() * log_c1;
        report.fits[i].worst_ratio = std::exp(excess);
        if (excess > worst) {
            worst = excess;
            report.worst_location = where[i];
            report.worst_label = indices[i].to_string();
        }
    }
    report.worst_ratio = std::exp(worst);
    report.fitted_constant = std::exp(log_c1);
    report.add_parameter("C2", std::exp(log_c2));
    report.add_parameter("C1", std::exp(log_c1));
    report.notes.push_back("fits[i].fitted_constant is sup |conv_alpha| / (alpha! P) for that multi-index");
    report.notes.push_back("edge growth compares radial shells [0.75R, R] and [0.5R, 0.75R)");
    return report;
}

// ---------------------------------------------------------------------------
// Lower-bound recipe

LowerBoundRecipe lower_bound_constants(const TestFunctionSpec& g, const KernelSpec& spec, double k) {
    spec.validate_for_convolution();
    if (!(k >= 0.0) || !std::isfinite(k)) throw InputError("lower bound rate k must be finite and >= 0");
    const auto two = g.two_sided_bound();
    if (!(two.q1 > spec.q)) throw InputError("lower bound recipe needs q1 > q");
    const double q = spec.q;
    LowerBoundRecipe r;
    r.k = k;
    r.eta1 = two.eta1;
    r.c1_prime = two.c1;
    r.q1 = two.q1;
    r.q_prime = (q - 1.0) * two.q1 / (two.q1 - 1.0);
    if (spec.s > 0.0) {
        r.k1 = 1.0 + 4.0 * (k + 1.0) / (q * spec.s);
    } else {
        r.k1 = 1.0 + std::pow(4.0, q) * (k + 1.0) / (q * std::fabs(spec.s));
        // smallest c′ ≥ 4 with k₁ c′^{−1+(q−1)/(q₁−1)} ≤ 1/2
        const double decay = 1.0 - (q - 1.0) / (two.q1 - 1.0);
        r.c_prime = std::max(4.0, std::pow(2.0 * r.k1, 1.0 / decay));
    }
    r.epsilon = 1.0 / (std::pow(4.0, two.q1) * (r.eta1 + 1.0) * r.k1);
    return r;
}

LowerBoundResult lower_bound_recipe(const TestFunctionSpec& g, const KernelSpec& spec, double k,
                                    const SamplePlan& grid, const QuadratureConfig& config) {
    check_convolvable(g, spec);
    check_plan(grid, g.dim);
    LowerBoundResult out;
    auto& recipe = out.recipe;
    recipe = lower_bound_constants(g, spec, k);
    const TestFunctionSpec g_eps = g.dilated(recipe.epsilon);
    const std::size_t d = g.dim;

    auto& report = out.report;
    report.id = BoundId::lemma41;
    report.add_parameter("s", spec.s);
    report.add_parameter("q", spec.q);
    report.add_parameter("q1", recipe.q1);
    report.add_parameter("eta1", recipe.eta1);
    report.add_parameter("C1_prime", recipe.c1_prime);
    report.add_parameter("k", k);
    report.add_parameter("k1", recipe.k1);
    report.add_parameter("epsilon", recipe.epsilon);
    report.add_parameter("q_prime", recipe.q_prime);
    if (spec.s < 0.0) report.add_parameter("c_prime", recipe.c_prime);
    report.add_parameter("radius", grid.radius);
    report.add_parameter("points_per_axis", grid.points_per_axis);

    const bool linear = spec.q == 1.0;
    std::vector<double> origin(d, 0.0);
    if (linear) {
        // ⟨x⟩ − ⟨t⟩ ≤ ⟨x − t⟩ ≤ ⟨x⟩ + ⟨t⟩ gives this floor for either sign of s.
        const LogValue mass = convolve(g_eps, KernelSpec{-std::fabs(spec.s), 1.0}, MultiIndex::zero(d), origin, config);
        recipe.log_floor = mass.log_magnitude() - k;
    } else {
        recipe.log_floor = std::log(unit_ball_volume(d) * recipe.c1_prime) - std::pow(8.0, recipe.q1) * recipe.eta1;
    }
    report.add_parameter("log_floor", recipe.log_floor);

    auto log_ratio = [&](std::span<const double> x, int* sign) {
        const LogValue v = convolve(g_eps, spec, MultiIndex::zero(d), x, config);
        *sign = v.sign();
        const double b = bracket(x);
        return v.log_magnitude() - spec.s * std::pow(b, spec.q) - k * std::pow(b, recipe.q_prime);
    };

    // Checked points, and for s < 0 the interior points that only need positivity.
    std::vector<std::vector<double>> checked, interior;
    const auto box = grid_points(grid);
    if (spec.s > 0.0 || linear) {
        checked = box;
    } else {
        for (const auto& p : box) {
            const double r = norm(p);
            if (r == 0.0) continue;
            std::vector<double> x = p;
            for (double& v : x) v *= (recipe.c_prime + r) / r;
            checked.push_back(std::move(x));
        }
        SamplePlan inside = grid;
        inside.radius = recipe.c_prime;
        for (auto& p : grid_points(inside))
            if (norm(p) < recipe.c_prime) interior.push_back(std::move(p));
    }

    struct Sample {
        double log_ratio;
        int sign;
    };
    const auto values = parallel_map<Sample>(checked.size(), [&](std::size_t p) {
        Sample s{};
        s.log_ratio = log_ratio(checked[p], &s.sign);
        return s;
    });
    const auto inside_values = parallel_map<Sample>(interior.size(), [&](std::size_t p) {
        Sample s{};
        s.log_ratio = log_ratio(interior[p], &s.sign);
        return s;
    });
    report.sample_count = checked.size() + interior.size();

    double log_c = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < checked.size(); ++p) {
        const auto& v = values[p];
        if (v.sign != 1) {
            report.add_violation({"positivity", checked[p], {}, 0.0, "convolution is not positive"});
            continue;
        }
        if (v.log_ratio < log_c) {
            log_c = v.log_ratio;
            report.worst_location = checked[p];
        }
        const bool floor_applies = linear || (spec.s > 0.0 && norm(checked[p]) >= 2.0);
        if (floor_applies && v.log_ratio < recipe.log_floor - kLogSlack * std::max(1.0, std::fabs(recipe.log_floor)))
            report.add_violation({"floor", checked[p], {}, std::exp(recipe.log_floor - v.log_ratio),
                                  "ratio below the explicit floor"});
    }
    for (std::size_t p = 0; p < interior.size(); ++p)
        if (inside_values[p].sign != 1)
            report.add_violation({"positivity inside c'", interior[p], {}, 0.0, "convolution is not positive"});

    recipe.log_c = log_c;
    report.worst_label = "min ratio";
    report.worst_ratio = std::exp(log_c);
    report.fitted_constant = std::exp(log_c);
    report.add_parameter("log_c", log_c);
    ConstantFit fit;
    fit.label = "c";
    fit.fitted_constant = report.fitted_constant;
    fit.worst_ratio = std::exp(recipe.log_floor - log_c);
    fit.worst_location = report.worst_location;
    report.fits.push_back(fit);
    if (!linear && spec.s < 0.0)
        report.notes.push_back("checked on the shell c' <= |x| <= c' + radius; positivity only inside c'");
    if (linear) report.notes.push_back("q = 1: floor is e^{-k} times the integral of g(eps t) e^{-|s|<t>}");
    return out;
}

// ---------------------------------------------------------------------------
// Reciprocal derivative bounds

BoundReport reciprocal_derivative_bound_check(const TestFunctionSpec& g, const KernelSpec& spec, unsigned alpha_max,
                                              const SamplePlan& grid, const QuadratureConfig& config) {
    check_convolvable(g, spec);
    check_plan(grid, g.dim);
    if (!(spec.s > 0.0)) throw InputError("reciprocal derivative bounds need s > 0");
    (void)g.two_sided_bound();  // g ≥ 0, not a.e. zero
    const std::size_t d = g.dim;

    BoundReport report;
    report.id = BoundId::lemma42;
    report.add_parameter("s", spec.s);
    report.add_parameter("q", spec.q);
    report.add_parameter("alpha_max", alpha_max);
    report.add_parameter("radius", grid.radius);
    report.add_parameter("points_per_axis", grid.points_per_axis);

    const auto layout = jet_layout(d, alpha_max);
    const std::size_t K = layout->size();
    std::vector<double> log_fact(K);
    for (std::size_t i = 0; i < K; ++i) log_fact[i] = log_multi_factorial(layout->index(i));
    const auto reciprocal = OuterFunction::reciprocal();
    const double log_norm = l1_norm(g, config).log_magnitude();
    report.add_parameter("log_l1_norm", log_norm);

    struct PointResult {
        std::vector<double> first, second;  // log-ratios for (i) and (ii), per slot
        double log_f = 0.0;
        int sign = 1;
    };
    auto evaluate = [&](std::span<const double> x) {
        Jet<LogValue> jet(layout);
        for (std::size_t i = 0; i < K; ++i) jet[i] = convolve(g, spec, layout->index(i), x, config);
        std::vector<LogValue> outer;
        for (unsigned r = 0; r <= alpha_max; ++r) outer.push_back(reciprocal.derivative(r, jet[0]));
        const Jet<LogValue> inv = compose_jet(outer, jet);
        PointResult r;
        r.sign = jet[0].sign();
        r.log_f = jet[0].log_magnitude();
        const double lb = std::log(bracket(x));
        for (std::size_t i = 0; i < K; ++i) {
            const double base = log_fact[i] + (spec.q - 1.0) * layout->index(i).order() * lb;
            r.first.push_back(jet[i].is_zero() ? kNegInf : jet[i].log_magnitude() - base - r.log_f);
            r.second.push_back(inv[i].is_zero() ? kNegInf : inv[i].log_magnitude() - base + r.log_f);
        }
        return r;
    };

    const auto pts = grid_points(grid);
    const auto results = parallel_map<PointResult>(pts.size(), [&](std::size_t p) { return evaluate(pts[p]); });

    // best[part][slot]
    std::vector<std::vector<double>> best(2, std::vector<double>(K, kNegInf));
    std::vector<std::vector<std::vector<double>>> where(2, std::vector<std::vector<double>>(K, pts[0]));
    for (std::size_t p = 0; p < pts.size(); ++p)
        for (std::size_t i = 0; i < K; ++i)
            for (int part = 0; part < 2; ++part) {
                const double v = part == 0 ? results[p].first[i] : results[p].second[i];
                if (v > best[part][i]) {
                    best[part][i] = v;
                    where[part][i] = pts[p];
                }
            }
    report.sample_count = pts.size();

    if (grid.refine_maxima) {
        const double spacing = 2.0 * grid.radius / (grid.points_per_axis - 1.0);
        std::vector<std::size_t> evaluations(2 * K, 0);
        parallel_for(2 * K, [&](std::size_t job) {
            const int part = static_cast<int>(job / K);
            const std::size_t i = job % K;
            if (best[part][i] == kNegInf) return;
            evaluations[job] = detail::pattern_maximize(
                [&](std::span<const double> x) {
                    const auto r = evaluate(x);
                    return part == 0 ? r.first[i] : r.second[i];
                },
                where[part][i], best[part][i], spacing, grid.radius, 1e-3, 200);
        });
        for (std::size_t e : evaluations) report.sample_count += e;
    }

    const char* part_name[2] = {"(i) ", "(ii) "};
    double log_c[2] = {0.0, 0.0};
    for (int part = 0; part < 2; ++part) {
        for (std::size_t i = 0; i < K; ++i) {
            const unsigned order = layout->index(i).order();
            ConstantFit fit;
            fit.label = part_name[part] + layout->index(i).to_string();
            fit.order = order;
            fit.fitted_constant = best[part][i] == kNegInf ? 1.0 : std::max(1.0, std::exp(best[part][i] / (order + 1.0)));
            fit.worst_location = where[part][i];
            log_c[part] = std::max(log_c[part], std::log(fit.fitted_constant));
            report.fits.push_back(fit);
        }
    }
    report.add_parameter("C_i", std::exp(log_c[0]));
    report.add_parameter("C_ii", std::exp(log_c[1]));
    report.fitted_constant = std::exp(std::max(log_c[0], log_c[1]));

    double worst = kNegInf;
    auto track = [&](int part, std::size_t i, double lr, std::span<const double> x) {
        const double excess = lr - (layout->index(i).order() + 1.0) * log_c[part];
        auto& fit = report.fits[part * K + i];
        if (excess > std::log(fit.worst_ratio)) {
            fit.worst_ratio = std::exp(excess);
            fit.worst_location.assign(x.begin(), x.end());
        }
        if (excess > worst) {
            worst = excess;
            report.worst_location.assign(x.begin(), x.end());
            report.worst_label = fit.label;
        }
        return excess;
    };
    auto check_floor = [&](const PointResult& r, std::span<const double> x) {
        if (r.sign != 1 || r.log_f < log_norm - 1e-6)
            report.add_violation({"floor", {x.begin(), x.end()}, {}, std::exp(log_norm - r.log_f),
                                  "g * K below the L1 norm of g"});
    };
    for (int part = 0; part < 2; ++part)
        for (std::size_t i = 0; i < K; ++i)
            if (best[part][i] != kNegInf) track(part, i, best[part][i], where[part][i]);
    for (std::size_t p = 0; p < pts.size(); ++p) {
        check_floor(results[p], pts[p]);
        for (std::size_t i = 0; i < K; ++i) {
            track(0, i, results[p].first[i], pts[p]);
            track(1, i, results[p].second[i], pts[p]);
        }
    }

    std::mt19937_64 rng(grid.seed);
    std::vector<std::vector<double>> fresh(grid.validation_samples, std::vector<double>(d));
    for (auto& x : fresh)
        for (double& v : x) v = uniform(rng, -grid.radius, grid.radius);
    const auto fresh_results =
        parallel_map<PointResult>(fresh.size(), [&](std::size_t p) { return evaluate(fresh[p]); });
    report.validation_count = fresh.size();
    for (std::size_t p = 0; p < fresh.size(); ++p) {
        check_floor(fresh_results[p], fresh[p]);
        for (int part = 0; part < 2; ++part)
            for (std::size_t i = 0; i < K; ++i) {
                const double lr = part == 0 ? fresh_results[p].first[i] : fresh_results[p].second[i];
                const double excess = track(part, i, lr, fresh[p]);
                if (excess > kLogSlack)
                    report.add_violation({report.fits[part * K + i].label, fresh[p], {}, std::exp(excess),
                                          "fresh sample exceeds fitted constant"});
            }
    }
    report.worst_ratio = std::exp(worst);
    return report;
}

}  // namespace expconv
