#pragma once

#include "expconv/log_value.hpp"
#include "expconv/multiindex.hpp"
#include "expconv/polynomial.hpp"
#include "expconv/rational.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace expconv {

/// Slot layout for all multi-indices β with |β| ≤ order in d variables,
/// ≺-ascending (slot 0 is the zero index). Shared per (d, order).
class JetLayout {
public:
    JetLayout(std::size_t dim, unsigned order);

    std::size_t dim() const { return dim_; }
    unsigned order() const { return order_; }
    std::size_t size() const { return indices_.size(); }
    const MultiIndex& index(std::size_t slot) const { return indices_[slot]; }
    std::size_t slot(const MultiIndex& beta) const;

private:
    std::size_t dim_;
    unsigned order_;
    std::vector<MultiIndex> indices_;
    std::map<MultiIndex, std::size_t> slots_;
};

std::shared_ptr<const JetLayout> jet_layout(std::size_t dim, unsigned order);

/// Values ∂^β u(x⁰) for every slot of a layout.
template <class T>
class Jet {
public:
    explicit Jet(std::shared_ptr<const JetLayout> layout, T fill = T{})
        : layout_(std::move(layout)), values_(layout_->size(), fill) {}

    const JetLayout& layout() const { return *layout_; }
    const std::shared_ptr<const JetLayout>& layout_ptr() const { return layout_; }
    std::size_t size() const { return values_.size(); }

    T& operator[](std::size_t slot) { return values_[slot]; }
    const T& operator[](std::size_t slot) const { return values_[slot]; }
    T& at(const MultiIndex& beta) { return values_[layout_->slot(beta)]; }
    const T& at(const MultiIndex& beta) const { return values_[layout_->slot(beta)]; }

private:
    std::shared_ptr<const JetLayout> layout_;
    std::vector<T> values_;
};

/// Every Faà di Bruno term for every target slot of a layout, flattened from
/// the partition sets p(α, r) with slot indices resolved. Shared per (d, order).
struct CompositionPlan {
    struct Factor {
        std::uint32_t slot;
        std::uint32_t power;
    };
    struct Term {
        unsigned r;
        Rational weight;    // α!/Π(k_j! (α⁽ʲ⁾!)^{k_j})
        double log_weight;  // log of the same
        std::vector<Factor> factors;
    };
    std::shared_ptr<const JetLayout> layout;
    std::vector<std::vector<Term>> by_target;
};

std::shared_ptr<const CompositionPlan> composition_plan(std::size_t dim, unsigned order);

struct ComposeResult {
    LogValue value;
    double cancellation_nats = 0.0;
    bool ill_conditioned = false;
};

/// Jet of f∘g from f^{(r)}(y⁰), r = 0..order, and the jet of g at x⁰.
/// `diagnostics`, if given, receives the per-slot cancellation record.
Jet<LogValue> compose_jet(std::span<const LogValue> outer, const Jet<LogValue>& inner,
                          std::vector<ComposeResult>* diagnostics = nullptr);
Jet<Rational> compose_jet(std::span<const Rational> outer, const Jet<Rational>& inner);

/// Transcendental factor shared by every derivative of an outer function in
/// exact mode: f^{(r)}(y) = scale(y) · relative(r, y) with relative(r, y) ∈ ℚ.
struct ExactScale {
    std::string label;  // empty means 1
    double value = 1.0;
    bool operator==(const ExactScale&) const = default;
};

/// Outer scalar function f, queried for f^{(r)}(y) at any r ≥ 0.
/// Callables must be thread-safe for concurrent use.
struct OuterFunction {
    std::string name;
    std::function<LogValue(unsigned r, const LogValue& y)> derivative;
    std::function<ExactScale(const Rational& y)> exact_scale;
    std::function<Rational(unsigned r, const Rational& y)> exact_relative;

    bool has_exact() const { return static_cast<bool>(exact_scale) && static_cast<bool>(exact_relative); }

    /// Σ c_k y^k
    static OuterFunction polynomial(std::vector<Rational> coefficients);
    /// e^{a y}
    static OuterFunction exponential(const Rational& rate);
    static OuterFunction exponential(double rate);
    /// y^q; exact mode for rational q when y⁰ > 0
    static OuterFunction power(const Rational& q);
    static OuterFunction power(double q);
    /// 1/y
    static OuterFunction reciprocal();
};

/// Inner function g: ℝ^d → ℝ, queried for ∂^β g(x) at any β.
struct InnerFunction {
    std::string name;
    std::size_t dim = 1;
    std::function<LogValue(const MultiIndex& beta, std::span<const double> x)> derivative;
    std::function<Rational(const MultiIndex& beta, std::span<const Rational> x)> exact_derivative;

    bool has_exact() const { return static_cast<bool>(exact_derivative); }

    static InnerFunction polynomial(Polynomial p);
};

/// ∂^α(f∘g)(x⁰) in the signed log domain.
ComposeResult compose_derivative(const OuterFunction& outer, const InnerFunction& inner, const MultiIndex& alpha,
                                 std::span<const double> x0);

struct ExactValue {
    Rational coefficient;
    ExactScale scale;
    double to_double() const { return expconv::to_double(coefficient) * scale.value; }
    std::string to_string() const;
};

/// ∂^α(f∘g)(x⁰) exactly: the rational coefficient of the outer function's
/// common scale factor. Throws InputError if either oracle lacks exact mode.
ExactValue compose_derivative_exact(const OuterFunction& outer, const InnerFunction& inner, const MultiIndex& alpha,
                                    std::span<const Rational> x0);

}  // namespace expconv
