#include "expconv/faa_di_bruno.hpp"

#include "expconv/error.hpp"

#include <cmath>
#include <mutex>
#include <utility>

namespace expconv {

JetLayout::JetLayout(std::size_t dim, unsigned order)
    : dim_(dim), order_(order), indices_(multi_indices_up_to(dim, order)) {
    for (std::size_t i = 0; i < indices_.size(); ++i) slots_.emplace(indices_[i], i);
}

std::size_t JetLayout::slot(const MultiIndex& beta) const {
    auto it = slots_.find(beta);
    if (it == slots_.end()) throw InputError("multi-index " + beta.to_string() + " outside jet layout");
    return it->second;
}

namespace {

template <class Value, class Build>
std::shared_ptr<const Value> cached(std::size_t dim, unsigned order, Build build) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, unsigned>, std::shared_ptr<const Value>> store;
    std::lock_guard lock(mutex);
    auto& entry = store[{dim, order}];
    if (!entry) entry = build();
    return entry;
}

}  // namespace

std::shared_ptr<const JetLayout> jet_layout(std::size_t dim, unsigned order) {
    return cached<JetLayout>(dim, order, [&] { return std::make_shared<const JetLayout>(dim, order); });
}

std::shared_ptr<const CompositionPlan> composition_plan(std::size_t dim, unsigned order) {
    auto layout = jet_layout(dim, order);
    return cached<CompositionPlan>(dim, order, [&] {
        auto plan = std::make_shared<CompositionPlan>();
        plan->layout = layout;
        plan->by_target.resize(layout->size());
        for (std::size_t target = 1; target < layout->size(); ++target) {
            const MultiIndex& alpha = layout->index(target);
            const BigInt alpha_factorial = alpha.factorial();
            for (unsigned r = 1; r <= alpha.order(); ++r) {
                for (const auto& term : enumerate_partition_terms(alpha, r)->terms) {
                    CompositionPlan::Term flat;
                    flat.r = r;
                    BigInt denom = 1;
                    for (std::size_t j = 0; j < term.parts.size(); ++j) {
                        const unsigned k = term.multiplicities[j];
                        denom *= factorial(k) * boost::multiprecision::pow(term.parts[j].factorial(), k);
                        flat.factors.push_back({static_cast<std::uint32_t>(layout->slot(term.parts[j])), k});
                    }
                    flat.weight = Rational(alpha_factorial, denom);
                    flat.log_weight = std::log(to_double(flat.weight));
                    plan->by_target[target].push_back(std::move(flat));
                }
            }
        }
        return std::shared_ptr<const CompositionPlan>(std::move(plan));
    });
}

namespace {

ComposeResult compose_slot(const CompositionPlan& plan, std::size_t target, std::span<const LogValue> outer,
                           const Jet<LogValue>& inner) {
    LogSum sum;
    for (const auto& term : plan.by_target[target]) {
        const LogValue& fr = outer[term.r];
        if (fr.is_zero()) continue;
        double log_mag = fr.log_magnitude() + term.log_weight;
        int sign = fr.sign();
        bool zero = false;
        for (const auto& factor : term.factors) {
            const LogValue& g = inner[factor.slot];
            if (g.is_zero()) {
                zero = true;
                break;
            }
            log_mag += factor.power * g.log_magnitude();
            if (g.sign() < 0 && (factor.power & 1u)) sign = -sign;
        }
        if (!zero) sum.add_log(log_mag, sign);
    }
    const CheckedLogValue checked = sum.checked_value();
    return {checked.value, checked.cancellation_nats, checked.ill_conditioned};
}

Rational compose_slot(const CompositionPlan& plan, std::size_t target, std::span<const Rational> outer,
                      const Jet<Rational>& inner) {
    Rational total = 0;
    for (const auto& term : plan.by_target[target]) {
        if (outer[term.r] == 0) continue;
        Rational product = term.weight;
        for (const auto& factor : term.factors) product *= pow(inner[factor.slot], static_cast<int>(factor.power));
        total += outer[term.r] * product;
    }
    return total;
}

void check_outer_size(std::size_t outer_size, unsigned order) {
    if (outer_size < order + 1u) throw InputError("compose: need outer derivatives up to the jet order");
}

}  // namespace

Jet<LogValue> compose_jet(std::span<const LogValue> outer, const Jet<LogValue>& inner,
                          std::vector<ComposeResult>* diagnostics) {
    const auto& layout = inner.layout();
    check_outer_size(outer.size(), layout.order());
    const auto plan = composition_plan(layout.dim(), layout.order());
    Jet<LogValue> out(inner.layout_ptr());
    out[0] = outer[0];
    if (diagnostics) diagnostics->assign(layout.size(), ComposeResult{outer[0]});
    for (std::size_t slot = 1; slot < layout.size(); ++slot) {
        ComposeResult r = compose_slot(*plan, slot, outer, inner);
        out[slot] = r.value;
        if (diagnostics) (*diagnostics)[slot] = r;
    }
    return out;
}

Jet<Rational> compose_jet(std::span<const Rational> outer, const Jet<Rational>& inner) {
    const auto& layout = inner.layout();
    check_outer_size(outer.size(), layout.order());
    const auto plan = composition_plan(layout.dim(), layout.order());
    Jet<Rational> out(inner.layout_ptr());
    out[0] = outer[0];
    for (std::size_t slot = 1; slot < layout.size(); ++slot) out[slot] = compose_slot(*plan, slot, outer, inner);
    return out;
}

// ---------------------------------------------------------------------------
// Oracles

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_integer(const Rational& q) { return boost::multiprecision::denominator(q) == 1; }

LogValue falling_log(double q, unsigned r) {
    double log_mag = 0.0;
    int sign = 1;
    for (unsigned j = 0; j < r; ++j) {
        const double f = q - static_cast<double>(j);
        if (f == 0.0) return LogValue::zero();
        log_mag += std::log(std::fabs(f));
        if (f < 0) sign = -sign;
    }
    return LogValue::from_log(log_mag, sign);
}

}  // namespace

OuterFunction OuterFunction::polynomial(std::vector<Rational> coefficients) {
    OuterFunction f;
    f.name = "polynomial";
    auto coeffs = std::make_shared<const std::vector<Rational>>(std::move(coefficients));
    std::vector<double> as_double;
    for (const auto& c : *coeffs) as_double.push_back(to_double(c));
    f.derivative = [as_double](unsigned r, const LogValue& y) {
        const double yv = y.to_double();
        double total = 0.0;
        for (std::size_t k = as_double.size(); k-- > r;) {
            double term = as_double[k];
            for (unsigned j = 0; j < r; ++j) term *= static_cast<double>(k - j);
            total += term * std::pow(yv, static_cast<int>(k - r));
        }
        return LogValue::from_double(total);
    };
    f.exact_scale = [](const Rational&) { return ExactScale{}; };
    f.exact_relative = [coeffs](unsigned r, const Rational& y) {
        Rational total = 0;
        for (std::size_t k = r; k < coeffs->size(); ++k)
            total += (*coeffs)[k] * falling_factorial(Rational(k), r) * pow(y, static_cast<int>(k - r));
        return total;
    };
    return f;
}

OuterFunction OuterFunction::exponential(double rate) {
    OuterFunction f;
    f.name = "exp";
    f.derivative = [rate](unsigned r, const LogValue& y) {
        if (rate == 0.0) return r == 0 ? LogValue::one() : LogValue::zero();
        const int sign = (rate < 0 && (r & 1u)) ? -1 : 1;
        return LogValue::from_log(r * std::log(std::fabs(rate)) + rate * y.to_double(), sign);
    };
    return f;
}

OuterFunction OuterFunction::exponential(const Rational& rate) {
    OuterFunction f = exponential(to_double(rate));
    f.exact_scale = [rate](const Rational& y) {
        const Rational exponent = rate * y;
        return ExactScale{"exp(" + to_string(exponent) + ")", std::exp(to_double(exponent))};
    };
    f.exact_relative = [rate](unsigned r, const Rational&) { return pow(rate, static_cast<int>(r)); };
    return f;
}

OuterFunction OuterFunction::power(double q) {
    OuterFunction f;
    f.name = "power";
    const bool integral = std::floor(q) == q;
    f.derivative = [q, integral](unsigned r, const LogValue& y) {
        const LogValue coeff = falling_log(q, r);
        if (coeff.is_zero()) return LogValue::zero();
        if (y.sign() < 0 && !integral) throw EvaluationError("power: non-integer exponent at negative argument");
        if (y.is_zero()) {
            if (q - r > 0) return LogValue::zero();
            if (q - r == 0) return coeff;
            throw EvaluationError("power: singular derivative at zero");
        }
        int sign = coeff.sign();
        const double e = q - static_cast<double>(r);
        if (y.sign() < 0 && std::fmod(std::fabs(e), 2.0) == 1.0) sign = -sign;
        return LogValue::from_log(coeff.log_magnitude() + e * y.log_magnitude(), sign);
    };
    return f;
}

OuterFunction OuterFunction::power(const Rational& q) {
    OuterFunction f = power(to_double(q));
    const bool integral = is_integer(q);
    f.exact_scale = [q, integral](const Rational& y) {
        if (integral) return ExactScale{};
        if (y <= 0) throw EvaluationError("power: exact mode needs a positive argument");
        return ExactScale{"(" + to_string(y) + ")^(" + to_string(q) + ")", std::pow(to_double(y), to_double(q))};
    };
    f.exact_relative = [q, integral](unsigned r, const Rational& y) {
        const Rational coeff = falling_factorial(q, r);
        if (coeff == 0) return Rational(0);
        if (integral) {
            const int e = static_cast<int>(boost::multiprecision::numerator(q)) - static_cast<int>(r);
            return coeff * pow(y, e);
        }
        return coeff * pow(y, -static_cast<int>(r));
    };
    return f;
}

OuterFunction OuterFunction::reciprocal() {
    OuterFunction f;
    f.name = "reciprocal";
    f.derivative = [](unsigned r, const LogValue& y) {
        if (y.is_zero()) throw EvaluationError("reciprocal: zero argument");
        const double log_fact = std::lgamma(static_cast<double>(r) + 1.0);
        int sign = (r & 1u) ? -1 : 1;
        if (y.sign() < 0 && ((r + 1) & 1u)) sign = -sign;
        return LogValue::from_log(log_fact - (r + 1.0) * y.log_magnitude(), sign);
    };
    f.exact_scale = [](const Rational&) { return ExactScale{}; };
    f.exact_relative = [](unsigned r, const Rational& y) {
        if (y == 0) throw EvaluationError("reciprocal: zero argument");
        const Rational sign = (r & 1u) ? -1 : 1;
        return sign * Rational(factorial(r)) * pow(y, -static_cast<int>(r) - 1);
    };
    return f;
}

InnerFunction InnerFunction::polynomial(Polynomial p) {
    InnerFunction g;
    g.name = p.to_string();
    g.dim = p.dim();
    auto shared = std::make_shared<const Polynomial>(std::move(p));
    g.derivative = [shared](const MultiIndex& beta, std::span<const double> x) {
        return LogValue::from_double(shared->derivative(beta, x));
    };
    g.exact_derivative = [shared](const MultiIndex& beta, std::span<const Rational> x) {
        return shared->derivative(beta, x);
    };
    return g;
}

std::string ExactValue::to_string() const {
    const std::string c = expconv::to_string(coefficient);
    return scale.label.empty() ? c : c + " * " + scale.label;
}

ComposeResult compose_derivative(const OuterFunction& outer, const InnerFunction& inner, const MultiIndex& alpha,
                                 std::span<const double> x0) {
    if (alpha.dim() != inner.dim || x0.size() != inner.dim)
        throw InputError("compose_derivative: dimension mismatch");
    if (!outer.derivative || !inner.derivative) throw InputError("compose_derivative: oracle lacks float mode");
    const unsigned n = alpha.order();
    auto layout = jet_layout(inner.dim, n);
    Jet<LogValue> inner_jet(layout);
    for (const auto& beta : sub_indices(alpha)) inner_jet.at(beta) = inner.derivative(beta, x0);
    const LogValue y0 = inner_jet[0];
    std::vector<LogValue> outer_derivs;
    for (unsigned r = 0; r <= n; ++r) outer_derivs.push_back(outer.derivative(r, y0));
    if (n == 0) return {outer_derivs[0]};
    const auto plan = composition_plan(inner.dim, n);
    return compose_slot(*plan, layout->slot(alpha), outer_derivs, inner_jet);
}

ExactValue compose_derivative_exact(const OuterFunction& outer, const InnerFunction& inner, const MultiIndex& alpha,
                                    std::span<const Rational> x0) {
    if (alpha.dim() != inner.dim || x0.size() != inner.dim)
        throw InputError("compose_derivative_exact: dimension mismatch");
    if (!outer.has_exact()) throw InputError("outer function '" + outer.name + "' has no exact mode");
    if (!inner.has_exact()) throw InputError("inner function '" + inner.name + "' has no exact mode");
    const unsigned n = alpha.order();
    auto layout = jet_layout(inner.dim, n);
    Jet<Rational> inner_jet(layout);
    for (const auto& beta : sub_indices(alpha)) inner_jet.at(beta) = inner.exact_derivative(beta, x0);
    const Rational y0 = inner_jet[0];
    ExactValue result;
    result.scale = outer.exact_scale(y0);
    std::vector<Rational> outer_derivs;
    for (unsigned r = 0; r <= n; ++r) outer_derivs.push_back(outer.exact_relative(r, y0));
    if (n == 0) {
        result.coefficient = outer_derivs[0];
        return result;
    }
    const auto plan = composition_plan(inner.dim, n);
    result.coefficient = compose_slot(*plan, layout->slot(alpha), outer_derivs, inner_jet);
    return result;
}

}  // namespace expconv
