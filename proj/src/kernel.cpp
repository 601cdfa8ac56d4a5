#include "expconv/kernel.hpp"

#include "expconv/error.hpp"
#include "expconv/parallel.hpp"
#include "expconv/random.hpp"
#include "pattern_search.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace expconv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Jet values are compared to closed-form bounds; this absorbs roundoff.
constexpr double kLogSlack = 1e-9;

double log_factorial(unsigned n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double log_multi_factorial(const MultiIndex& a) {
    double s = 0.0;
    for (unsigned v : a.components()) s += log_factorial(v);
    return s;
}

Jet<LogValue> one_plus_norm_squared_jet(std::size_t dim, unsigned order, std::span<const double> x) {
    Jet<LogValue> jet(jet_layout(dim, order));
    double norm2 = 0.0;
    for (double v : x) norm2 += v * v;
    jet[0] = LogValue::from_double(1.0 + norm2);
    for (std::size_t i = 0; i < dim; ++i) {
        if (order >= 1) jet.at(MultiIndex::unit(dim, i)) = LogValue::from_double(2.0 * x[i]);
        if (order >= 2) jet.at(MultiIndex::unit(dim, i, 2)) = LogValue::from_double(2.0);
    }
    return jet;
}

std::vector<LogValue> outer_derivatives(const OuterFunction& f, unsigned order, const LogValue& y) {
    std::vector<LogValue> out;
    for (unsigned r = 0; r <= order; ++r) out.push_back(f.derivative(r, y));
    return out;
}

std::vector<double> grid_points(const SamplePlan& plan, std::size_t flat) {
    std::vector<double> x(plan.dim);
    const unsigned n = plan.points_per_axis;
    for (std::size_t a = 0; a < plan.dim; ++a) {
        const std::size_t i = flat % n;
        flat /= n;
        x[a] = n == 1 ? 0.0 : -plan.radius + 2.0 * plan.radius * static_cast<double>(i) / (n - 1.0);
    }
    return x;
}

std::size_t grid_size(const SamplePlan& plan) {
    std::size_t total = 1;
    for (std::size_t a = 0; a < plan.dim; ++a) total *= plan.points_per_axis;
    return total;
}

}  // namespace

void KernelSpec::validate() const {
    if (!std::isfinite(s) || s == 0.0) throw InputError("kernel rate s must be finite and nonzero");
    if (!std::isfinite(q) || !(q > 0.0)) throw InputError("kernel exponent q must be finite and > 0");
}

void KernelSpec::validate_for_convolution() const {
    validate();
    if (q < 1.0) throw InputError("convolution needs kernel exponent q >= 1");
}

double bracket(std::span<const double> x) {
    double norm2 = 0.0;
    for (double v : x) norm2 += v * v;
    return std::sqrt(1.0 + norm2);
}

KernelJets kernel_jets(const KernelSpec& spec, unsigned order, std::span<const double> x, bool with_exp) {
    const std::size_t dim = x.size();
    if (dim == 0) throw InputError("kernel: empty point");
    const auto layout = jet_layout(dim, order);
    KernelJets out{bracket(x), 0.0, Jet<LogValue>(layout), Jet<LogValue>(layout), Jet<LogValue>(layout), {}};
    out.power = std::pow(out.bracket, spec.q);

    const auto base = one_plus_norm_squared_jet(dim, order, x);
    out.bracket_jet = compose_jet(outer_derivatives(OuterFunction::power(0.5), order, base[0]), base);
    out.bracket_jet[0] = LogValue::from_double(out.bracket);

    out.power_jet = compose_jet(outer_derivatives(OuterFunction::power(spec.q), order, out.bracket_jet[0]),
                                out.bracket_jet);
    out.power_jet[0] = LogValue::from_double(out.power);

    if (with_exp) {
        std::vector<LogValue> outer;
        const double log_rate = std::log(std::fabs(spec.s));
        for (unsigned r = 0; r <= order; ++r)
            outer.push_back(LogValue::from_log(r * log_rate + spec.s * out.power, (spec.s < 0 && (r & 1u)) ? -1 : 1));
        out.exp_jet = compose_jet(outer, out.power_jet, &out.exp_diagnostics);
    }
    return out;
}

double bracket_derivative(const MultiIndex& beta, std::span<const double> x) {
    if (beta.dim() != x.size()) throw InputError("bracket_derivative: dimension mismatch");
    const auto jets = kernel_jets(KernelSpec{1.0, 1.0}, beta.order(), x, false);
    const LogValue v = jets.bracket_jet.at(beta);
    const unsigned n = beta.order();
    const double log_bound = (n + 1.0) * std::log(2.0) + log_factorial(n) + (1.0 - n) * std::log(jets.bracket);
    if (!v.is_zero() && v.log_magnitude() > log_bound + kLogSlack)
        throw InternalConsistencyError("bracket derivative " + beta.to_string() + " exceeds its bound");
    return v.to_double();
}

ExactValue bracket_derivative_exact(const MultiIndex& beta, std::span<const Rational> x) {
    return compose_derivative_exact(OuterFunction::power(Rational(1, 2)),
                                    InnerFunction::polynomial(Polynomial::one_plus_norm_squared(beta.dim())), beta, x);
}

double bracket_power_derivative(double q, const MultiIndex& alpha, std::span<const double> x) {
    if (alpha.dim() != x.size()) throw InputError("bracket_power_derivative: dimension mismatch");
    if (!std::isfinite(q)) throw InputError("bracket_power_derivative: q must be finite");
    // spec.s is unused when the exp jet is skipped.
    return kernel_jets(KernelSpec{1.0, q}, alpha.order(), x, false).power_jet.at(alpha).to_double();
}

LogValue exp_kernel_derivative(const KernelSpec& spec, const MultiIndex& alpha, std::span<const double> x,
                               ComposeResult* diagnostics) {
    spec.validate();
    if (alpha.dim() != x.size()) throw InputError("exp_kernel_derivative: dimension mismatch");
    auto jets = kernel_jets(spec, alpha.order(), x);
    const std::size_t slot = jets.exp_jet.layout().slot(alpha);
    if (diagnostics) *diagnostics = jets.exp_diagnostics[slot];
    return jets.exp_jet[slot];
}

// ---------------------------------------------------------------------------
// Derivative bounds

namespace {

struct RatioModel {
    BoundId id;
    KernelSpec spec;
    std::vector<MultiIndex> indices;
    unsigned order;

    // log(|LHS| / bound-without-C) for every index; second form for prva1.
    void evaluate(std::span<const double> x, std::vector<double>& out, std::vector<double>* second,
                  std::size_t* ill_conditioned) const {
        const auto jets = kernel_jets(spec, order, x, id == BoundId::lemma33 || id == BoundId::cor34);
        const double lb = std::log(jets.bracket);
        const double d = static_cast<double>(x.size());
        out.resize(indices.size());
        if (second) second->resize(indices.size());
        for (std::size_t i = 0; i < indices.size(); ++i) {
            const MultiIndex& a = indices[i];
            const unsigned n = a.order();
            const double la = log_multi_factorial(a);
            double lhs = kNegInf, rhs = 0.0;
            switch (id) {
                case BoundId::r_ta:
                    lhs = jets.power_jet.at(a).log_magnitude();
                    rhs = la + (spec.q - n) * lb;
                    break;
                case BoundId::prva1:
                    lhs = jets.bracket_jet.at(a).log_magnitude();
                    rhs = (n + 1.0) * std::log(2.0) + log_factorial(n) + (1.0 - n) * lb;
                    if (second)
                        (*second)[i] = lhs - (std::log(2.0) + n * std::log(2.0 * d) + la + (1.0 - n) * lb);
                    break;
                case BoundId::lemma33: {
                    const std::size_t slot = jets.exp_jet.layout().slot(a);
                    lhs = jets.exp_jet[slot].log_magnitude();
                    if (ill_conditioned && jets.exp_diagnostics[slot].ill_conditioned) ++*ill_conditioned;
                    LogSum sum;
                    for (unsigned m = 1; m <= n; ++m) sum.add_log((spec.q * m - n) * lb - log_factorial(m), 1);
                    rhs = la + spec.s * jets.power + sum.value().log_magnitude();
                    break;
                }
                case BoundId::cor34: {
                    const std::size_t slot = jets.exp_jet.layout().slot(a);
                    lhs = jets.exp_jet[slot].log_magnitude();
                    if (ill_conditioned && jets.exp_diagnostics[slot].ill_conditioned) ++*ill_conditioned;
                    rhs = la + spec.s * jets.power + std::pow(jets.bracket, spec.q - 1.0);
                    break;
                }
                default:
                    throw InputError("not a derivative bound: " + to_string(id));
            }
            out[i] = lhs - rhs;
        }
    }

    double single(std::size_t i, std::span<const double> x) const {
        std::vector<double> out;
        evaluate(x, out, nullptr, nullptr);
        return out[i];
    }
};

}  // namespace

BoundReport check_derivative_bounds(BoundId id, const KernelSpec& spec, unsigned alpha_max, const SamplePlan& plan) {
    if (id != BoundId::r_ta && id != BoundId::prva1 && id != BoundId::lemma33 && id != BoundId::cor34)
        throw InputError("check_derivative_bounds: unsupported bound " + to_string(id));
    if (id == BoundId::lemma33 || id == BoundId::cor34) spec.validate();
    if (id == BoundId::r_ta && !std::isfinite(spec.q)) throw InputError("q must be finite");
    if (plan.dim < 1 || plan.dim > 3) throw InputError("sample plan dimension must be 1..3");
    if (!(plan.radius > 0.0) || plan.points_per_axis < 2) throw InputError("sample plan needs radius > 0 and >= 2 points");

    RatioModel model{id, spec, {}, alpha_max};
    for (const auto& a : multi_indices_up_to(plan.dim, alpha_max))
        if (!(id == BoundId::lemma33 && a.is_zero())) model.indices.push_back(a);
    if (model.indices.empty()) throw InputError("no multi-indices to check");
    const std::size_t K = model.indices.size();

    BoundReport report;
    report.id = id;
    report.add_parameter("q", spec.q);
    if (id == BoundId::lemma33 || id == BoundId::cor34) report.add_parameter("s", spec.s);
    report.add_parameter("dim", static_cast<double>(plan.dim));
    report.add_parameter("alpha_max", alpha_max);
    report.add_parameter("radius", plan.radius);
    report.add_parameter("points_per_axis", plan.points_per_axis);

    struct PointResult {
        std::vector<double> ratios, second;
        std::size_t ill = 0;
    };
    const bool two_forms = id == BoundId::prva1;
    auto eval_points = [&](const std::vector<std::vector<double>>& pts) {
        return parallel_map<PointResult>(pts.size(), [&](std::size_t p) {
            PointResult r;
            model.evaluate(pts[p], r.ratios, two_forms ? &r.second : nullptr, &r.ill);
            return r;
        });
    };

    std::vector<std::vector<double>> grid(grid_size(plan));
    for (std::size_t p = 0; p < grid.size(); ++p) grid[p] = grid_points(plan, p);
    const auto grid_results = eval_points(grid);
    report.sample_count = grid.size();

    // Per-index sup of the log-ratio and where it is attained.
    std::vector<double> best(K, kNegInf);
    std::vector<std::vector<double>> where(K, grid[0]);
    for (std::size_t p = 0; p < grid.size(); ++p)
        for (std::size_t i = 0; i < K; ++i)
            if (grid_results[p].ratios[i] > best[i]) {
                best[i] = grid_results[p].ratios[i];
                where[i] = grid[p];
            }

    if (plan.refine_maxima) {
        const double spacing = 2.0 * plan.radius / (plan.points_per_axis - 1.0);
        std::vector<std::size_t> evaluations(K, 0);
        parallel_for(K, [&](std::size_t i) {
            if (best[i] == kNegInf) return;
            evaluations[i] = detail::pattern_maximize(
                [&](std::span<const double> x) { return model.single(i, x); }, where[i], best[i], spacing,
                plan.radius);
        });
        for (std::size_t e : evaluations) report.sample_count += e;
    }

    double log_c = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        const double exponent = std::max(1u, model.indices[i].order());
        if (best[i] != kNegInf) log_c = std::max(log_c, best[i] / exponent);
    }
    report.fitted_constant = std::exp(log_c);

    report.fits.resize(K);
    double worst = kNegInf;
    auto track = [&](std::size_t i, double lr, std::span<const double> x) {
        const double excess = lr - model.indices[i].order() * log_c;
        auto& fit = report.fits[i];
        if (fit.worst_location.empty() || excess > std::log(fit.worst_ratio)) {
            fit.worst_ratio = std::exp(excess);
            fit.worst_location.assign(x.begin(), x.end());
        }
        if (excess > worst) {
            worst = excess;
            report.worst_location.assign(x.begin(), x.end());
            report.worst_label = model.indices[i].to_string();
        }
        return excess;
    };
    for (std::size_t i = 0; i < K; ++i) {
        const double exponent = std::max(1u, model.indices[i].order());
        report.fits[i].label = model.indices[i].to_string();
        report.fits[i].order = model.indices[i].order();
        report.fits[i].fitted_constant = best[i] == kNegInf ? 1.0 : std::max(1.0, std::exp(best[i] / exponent));
        if (best[i] != kNegInf) track(i, best[i], where[i]);
    }

    std::size_t ill = 0;
    auto explicit_checks = [&](const PointResult& r, std::span<const double> x) {
        ill += r.ill;
        if (!two_forms) return;
        for (std::size_t i = 0; i < K; ++i) {
            for (int form = 0; form < 2; ++form) {
                const double lr = form == 0 ? r.ratios[i] : r.second[i];
                if (lr > kLogSlack)
                    report.add_violation({model.indices[i].to_string() + (form == 0 ? " explicit" : " explicit (2d)"),
                                          {x.begin(), x.end()}, {}, std::exp(lr), "explicit constant exceeded"});
            }
        }
    };
    for (std::size_t p = 0; p < grid.size(); ++p) {
        for (std::size_t i = 0; i < K; ++i) track(i, grid_results[p].ratios[i], grid[p]);
        explicit_checks(grid_results[p], grid[p]);
    }

    std::mt19937_64 rng(plan.seed);
    std::vector<std::vector<double>> fresh(plan.validation_samples, std::vector<double>(plan.dim));
    for (auto& x : fresh)
        for (double& v : x) v = uniform(rng, -plan.radius, plan.radius);
    const auto fresh_results = eval_points(fresh);
    report.validation_count = fresh.size();
    for (std::size_t p = 0; p < fresh.size(); ++p) {
        for (std::size_t i = 0; i < K; ++i) {
            const double excess = track(i, fresh_results[p].ratios[i], fresh[p]);
            if (excess > kLogSlack)
                report.add_violation({model.indices[i].to_string(), fresh[p], {}, std::exp(excess),
                                      "fresh sample exceeds fitted constant"});
        }
        explicit_checks(fresh_results[p], fresh[p]);
    }
    report.worst_ratio = std::exp(worst);
    if (ill > 0)
        report.notes.push_back(std::to_string(ill) + " derivative evaluations flagged for cancellation (> 30 nats)");
    if (id == BoundId::prva1) report.notes.push_back("explicit constants checked with C = 1 in both forms");
    return report;
}

// ---------------------------------------------------------------------------
// Shift inequality

namespace {

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

// ⟨b⟩^q − ⟨a⟩^q given ⟨a⟩² and |b|² − |a|², without cancellation.
double power_difference(double q, double bracket_a_sq, double diff_sq) {
    const double base = std::pow(bracket_a_sq, 0.5 * q);
    return base * std::expm1(0.5 * q * std::log1p(diff_sq / bracket_a_sq));
}

}  // namespace

BoundReport check_shift_inequality(const std::vector<ShiftSample>& samples) {
    BoundReport report;
    report.id = BoundId::lemma35;
    report.sample_count = samples.size();
    double worst_excess = kNegInf;
    double worst_mv = kNegInf;
    std::size_t mean_value_checked = 0;
    for (const auto& sample : samples) {
        const auto& spec = sample.spec;
        spec.validate_for_convolution();
        if (sample.x.size() != sample.t.size() || sample.x.empty())
            throw InputError("shift sample: x and t must have equal nonzero dimension");
        const double q = spec.q, s = spec.s;
        double x2 = 0.0, diff = 0.0, t2 = 0.0;
        for (std::size_t i = 0; i < sample.x.size(); ++i) {
            x2 += sample.x[i] * sample.x[i];
            t2 += sample.t[i] * sample.t[i];
            diff += sample.t[i] * (sample.t[i] - 2.0 * sample.x[i]);  // |x−t|² − |x|²
        }
        const double lhs = s * power_difference(q, 1.0 + x2, diff);
        const double tn = std::sqrt(t2);
        const double rhs = q * std::pow(2.0, q - 1.0) * std::fabs(s) * tn *
                           (std::pow(1.0 + x2, 0.5 * (q - 1.0)) + std::pow(1.0 + t2, 0.5 * (q - 1.0)));
        const double slack = 1e-12 * std::max(1.0, std::fabs(rhs));
        const double excess = (lhs - rhs) / std::max(1.0, std::fabs(rhs));
        if (excess > worst_excess) {
            worst_excess = excess;
            report.worst_location = sample.x;
            report.worst_label = "shift";
        }
        if (lhs - rhs > slack)
            report.add_violation({"shift", sample.x, sample.t, rhs != 0.0 ? lhs / rhs : INFINITY,
                                  "s<x-t>^q - s<x>^q exceeds the bound"});

        // Scalar mean-value step on λ₁ = |x−t|, λ₂ = |x|.
        std::vector<double> xt(sample.x.size());
        for (std::size_t i = 0; i < xt.size(); ++i) xt[i] = sample.x[i] - sample.t[i];
        const double l1 = norm(xt), l2 = std::sqrt(x2);
        const double dl = l1 - l2;
        const double diff_l = s * power_difference(q, 1.0 + l2 * l2, dl * (l1 + l2));
        const double lmax = std::max(l1, l2);
        const double mv_bound = q * std::fabs(s) * std::fabs(dl) * std::pow(1.0 + lmax * lmax, 0.5 * (q - 1.0));
        if (diff_l - mv_bound > 1e-12 * std::max(1.0, std::fabs(mv_bound)))
            report.add_violation({"mean-value bound", sample.x, sample.t, diff_l / mv_bound,
                                  "q|s||l1-l2|<max>^{q-1} exceeded"});
        if (std::fabs(dl) > 1e-6 * std::max(1.0, lmax)) {
            ++mean_value_checked;
            const double quotient = diff_l / (s * q * dl);  // = λ'⟨λ'⟩^{q−2}
            auto phi = [q](double l) { return l * std::pow(1.0 + l * l, 0.5 * (q - 2.0)); };
            const double lo = phi(std::min(l1, l2)), hi = phi(lmax);
            const double tol = 1e-9 * std::max(1.0, hi);
            const double out_of_range = std::max(lo - quotient, quotient - hi);
            worst_mv = std::max(worst_mv, out_of_range / std::max(1.0, hi));
            if (out_of_range > tol)
                report.add_violation({"mean-value point", sample.x, sample.t, quotient,
                                      "difference quotient outside [phi(min), phi(max)]"});
        }
    }
    report.validation_count = mean_value_checked;
    report.worst_ratio = worst_excess == kNegInf ? 0.0 : worst_excess;
    report.fits.push_back({"shift (LHS-RHS)/max(1,|RHS|)", 0, 1.0, report.worst_ratio, report.worst_location});
    report.fits.push_back({"mean-value quotient excess", 0, 1.0, worst_mv == kNegInf ? 0.0 : worst_mv, {}});
    report.notes.push_back("worst_ratio here is max (LHS-RHS)/max(1,|RHS|); negative means slack");
    if (!samples.empty()) {
        bool uniform_spec = true;
        for (const auto& s : samples)
            uniform_spec = uniform_spec && s.spec.s == samples[0].spec.s && s.spec.q == samples[0].spec.q;
        if (uniform_spec) {
            report.add_parameter("s", samples[0].spec.s);
            report.add_parameter("q", samples[0].spec.q);
        } else {
            report.notes.push_back("per-sample (s, q)");
        }
        report.add_parameter("dim", static_cast<double>(samples[0].x.size()));
    }
    return report;
}

BoundReport check_shift_inequality(const KernelSpec& spec,
                                   const std::vector<std::pair<std::vector<double>, std::vector<double>>>& samples) {
    std::vector<ShiftSample> full;
    full.reserve(samples.size());
    for (const auto& [x, t] : samples) full.push_back({spec, x, t});
    auto report = check_shift_inequality(full);
    if (samples.empty()) {
        report.add_parameter("s", spec.s);
        report.add_parameter("q", spec.q);
    }
    return report;
}

std::vector<ShiftSample> random_shift_samples(std::size_t n, std::size_t dim, double radius, double q_lo,
                                              double q_hi, double s_lo, double s_hi, std::uint64_t seed) {
    if (dim < 1) throw InputError("random_shift_samples: dim must be >= 1");
    std::mt19937_64 rng(seed);
    auto ball = [&] {
        std::vector<double> v(dim);
        for (;;) {
            for (double& c : v) c = uniform(rng, -radius, radius);
            if (norm(v) <= radius) return v;
        }
    };
    std::vector<ShiftSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ShiftSample s;
        s.spec.q = uniform(rng, q_lo, q_hi);
        do s.spec.s = uniform(rng, s_lo, s_hi);
        while (s.spec.s == 0.0);
        s.x = ball();
        s.t = ball();
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace expconv
