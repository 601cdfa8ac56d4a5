#pragma once

#include "expconv/bound_report.hpp"
#include "expconv/kernel.hpp"
#include "expconv/log_value.hpp"
#include "expconv/multiindex.hpp"
#include "expconv/quadrature.hpp"
#include "expconv/test_function.hpp"

#include <span>

namespace expconv {

/// Upper bound on log|∫_{|t|≥ρ} ...| integrand for the convolution at x:
/// sup over r ≥ ρ of φ's tail envelope plus the kernel's largest value on |t| = r.
double convolution_log_envelope(const TestFunctionSpec& phi, const KernelSpec& spec, unsigned order,
                                std::span<const double> x, double rho);

struct ConvolutionResult {
    LogValue value;
    QuadratureResult quadrature;
};

/// ((∂^α φ) * e^{s⟨·⟩^q})(x) = ∫ ∂^αφ(t) e^{s⟨x−t⟩^q} dt. config.dim is taken
/// from phi; an empty tail envelope is replaced by convolution_log_envelope.
/// Requires q ≥ 1 and, when s > 0, every term's q₁ > q.
/// Throws QuadratureDivergence if refinement does not settle.
LogValue convolve(const TestFunctionSpec& phi, const KernelSpec& spec, const MultiIndex& alpha,
                  std::span<const double> x, const QuadratureConfig& config = {});
ConvolutionResult convolve_detailed(const TestFunctionSpec& phi, const KernelSpec& spec, const MultiIndex& alpha,
                                    std::span<const double> x, const QuadratureConfig& config = {});

/// The same derivative with ∂^α moved onto the kernel: ∫ φ(t) ∂^α_x e^{s⟨x−t⟩^q} dt.
/// Cross-check only.
LogValue convolve_kernel_side(const TestFunctionSpec& phi, const KernelSpec& spec, const MultiIndex& alpha,
                              std::span<const double> x, const QuadratureConfig& config = {});

/// Constants of the upper-bound profile e^{s⟨x⟩^q + c₁⟨x⟩^{q′}}.
struct ProfileConstants {
    double lambda;   // (η/(4^q q|s|))^{1/(q−1)}, or 1 when q = 1
    double c1;       // q 2^{q−1}|s| λ^{−(q−1)/(q₁−1)}
    double q_prime;  // (q−1)q₁/(q₁−1)
};
ProfileConstants profile_constants(const KernelSpec& spec, double eta, double q1);

/// log of e^{s⟨x⟩^q + c₁⟨x⟩^{q′}}
double log_profile(const KernelSpec& spec, const ProfileConstants& constants, std::span<const double> x);

/// For every |α| ≤ alpha_max and every grid point: ratio = |((∂^αφ) * K)(x)| / (α! P(x)).
/// Fits C₂ = sup ratio at α = 0 and C₁ = max(1, sup_α (sup ratio_α / C₂)^{1/|α|}).
/// A multi-index whose ratio peaks on the outer radial shell [0.75R, R] and exceeds
/// the next shell [0.5R, 0.75R] by more than 5% is reported as growth.
/// Uses phi's dominant (η, q₁). Requires q₁ > q ≥ 1.
BoundReport upper_bound_profile(const TestFunctionSpec& phi, const KernelSpec& spec, unsigned alpha_max,
                                const SamplePlan& grid, const QuadratureConfig& config = {});

struct LowerBoundRecipe {
    double k = 0.0;
    double k1 = 1.0;
    double epsilon = 1.0;
    double eta1 = 0.0;
    double c1_prime = 0.0;  // C′₁ of the two-sided bound
    double q1 = 2.0;
    double q_prime = 0.0;
    double c_prime = 0.0;  // s < 0: the bound is checked for |x| ≥ c′
    double log_c = 0.0;    // fitted: min over the checked points of the log-ratio
    double log_floor = 0.0;  // explicit floor the fit is compared against
};

/// (k₁, ε) from the recipe for target rate k.
LowerBoundRecipe lower_bound_constants(const TestFunctionSpec& g, const KernelSpec& spec, double k);

struct LowerBoundResult {
    LowerBoundRecipe recipe;
    BoundReport report;
};

/// Evaluates (g(ε·) * K)(x) / e^{s⟨x⟩^q + k⟨x⟩^{q′}} and fits c as its minimum.
/// s > 0: over the grid box, compared against ω_d C′₁ e^{−8^{q₁}η₁} for |x| ≥ 2.
/// s < 0: over the shell c′ ≤ |x| ≤ c′ + grid.radius; inside c′ only positivity.
/// q = 1: compared against e^{−k}∫g(εt)e^{−|s|⟨t⟩}dt everywhere.
/// g must be a positive sum of pure e^{−η⟨·⟩^{q₁}} terms with one q₁ > q ≥ 1.
LowerBoundResult lower_bound_recipe(const TestFunctionSpec& g, const KernelSpec& spec, double k,
                                    const SamplePlan& grid, const QuadratureConfig& config = {});

/// With F = g * K: (i) |∂^αF| ≤ C^{|α|+1} α! ⟨x⟩^{(q−1)|α|} F and
/// (ii) |∂^α(1/F)| ≤ C^{|α|+1} α! ⟨x⟩^{(q−1)|α|} / F, C fitted on the grid for each
/// part and validated on grid.validation_samples fresh points. Also checks
/// F ≥ ‖g‖_{L¹} with sign +1. Requires s > 0 and g ≥ 0 (positive pure terms).
BoundReport reciprocal_derivative_bound_check(const TestFunctionSpec& g, const KernelSpec& spec, unsigned alpha_max,
                                              const SamplePlan& grid, const QuadratureConfig& config = {});

/// ∫ |φ| in the log domain.
LogValue l1_norm(const TestFunctionSpec& phi, const QuadratureConfig& config = {});

}  // namespace expconv
