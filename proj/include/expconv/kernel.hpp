#pragma once

#include "expconv/bound_report.hpp"
#include "expconv/faa_di_bruno.hpp"
#include "expconv/log_value.hpp"
#include "expconv/multiindex.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace expconv {

/// The kernel e^{s⟨x⟩^q}.
struct KernelSpec {
    double s = 1.0;
    double q = 2.0;

    /// s ≠ 0, q > 0, both finite.
    void validate() const;
    /// validate() and q ≥ 1.
    void validate_for_convolution() const;
};

/// ⟨x⟩ = (1 + |x|²)^{1/2}
double bracket(std::span<const double> x);

/// Every derivative of ⟨x⟩, ⟨x⟩^q and e^{s⟨x⟩^q} up to `order` at one point.
struct KernelJets {
    double bracket = 1.0;
    double power = 1.0;  // ⟨x⟩^q
    Jet<LogValue> bracket_jet;
    Jet<LogValue> power_jet;
    Jet<LogValue> exp_jet;  // empty layout size unless requested
    std::vector<ComposeResult> exp_diagnostics;
};

/// ⟨x⟩ by composing ρ^{1/2} with 1 + |x|²; ⟨x⟩^q by composing ρ^q with ⟨x⟩;
/// e^{s⟨x⟩^q} by composing e^{sρ} with ⟨x⟩^q. Slot 0 of the exp jet carries
/// log-magnitude exactly s·⟨x⟩^q.
KernelJets kernel_jets(const KernelSpec& spec, unsigned order, std::span<const double> x, bool with_exp = true);

/// ∂^β⟨x⟩. Throws InternalConsistencyError if |∂^β⟨x⟩| exceeds 2^{|β|+1}|β|!⟨x⟩^{1−|β|}.
double bracket_derivative(const MultiIndex& beta, std::span<const double> x);
/// ∂^β⟨x⟩ at a rational point: a rational multiple of ⟨x⟩.
ExactValue bracket_derivative_exact(const MultiIndex& beta, std::span<const Rational> x);

/// ∂^α⟨x⟩^q for any real q.
double bracket_power_derivative(double q, const MultiIndex& alpha, std::span<const double> x);

/// ∂^α e^{s⟨x⟩^q} in the log domain. `diagnostics`, if given, receives the
/// cancellation record of the final composition.
LogValue exp_kernel_derivative(const KernelSpec& spec, const MultiIndex& alpha, std::span<const double> x,
                               ComposeResult* diagnostics = nullptr);

struct SamplePlan {
    std::size_t dim = 1;
    double radius = 10.0;            // box |x_i| ≤ radius
    unsigned points_per_axis = 41;   // fitting grid
    std::size_t validation_samples = 10000;
    std::uint64_t seed = 1;
    /// Locally maximize each multi-index's ratio from its best grid point
    /// before fixing C, so the fit reflects the sup rather than the grid.
    bool refine_maxima = true;
};

/// Fits C := max(1, sup ratio^{1/max(|α|,1)}) on the grid for every |α| ≤ alpha_max,
/// where ratio is |LHS| over the bound without its C^{|α|} factor, then checks
/// ratio ≤ C^{|α|} on fresh uniform samples. `id` is one of r_ta, prva1,
/// lemma33, cor34. For r_ta only spec.q is used and any real q is accepted.
/// For prva1 the explicit constants are also checked (C = 1, both forms).
BoundReport check_derivative_bounds(BoundId id, const KernelSpec& spec, unsigned alpha_max, const SamplePlan& plan);

struct ShiftSample {
    KernelSpec spec;
    std::vector<double> x;
    std::vector<double> t;
};

/// LHS = s⟨x−t⟩^q − s⟨x⟩^q against q2^{q−1}|s||t|(⟨x⟩^{q−1} + ⟨t⟩^{q−1}), with slack
/// 1e−12·max(1,|RHS|). Also checks the scalar mean-value step on λ₁ = |x−t|,
/// λ₂ = |x|: the difference quotient lies between λ⟨λ⟩^{q−2} at the endpoints
/// and the bound q|s||λ₁−λ₂|⟨max λ⟩^{q−1} holds. Requires q ≥ 1.
BoundReport check_shift_inequality(const std::vector<ShiftSample>& samples);
BoundReport check_shift_inequality(const KernelSpec& spec,
                                   const std::vector<std::pair<std::vector<double>, std::vector<double>>>& samples);

/// n samples with x, t uniform in the ball |·| ≤ radius and, per sample, q
/// uniform in [q_lo, q_hi] and s uniform in [s_lo, s_hi] (s = 0 redrawn).
std::vector<ShiftSample> random_shift_samples(std::size_t n, std::size_t dim, double radius, double q_lo,
                                              double q_hi, double s_lo, double s_hi, std::uint64_t seed);

}  // namespace expconv
