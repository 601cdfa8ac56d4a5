#pragma once

#include "expconv/kernel.hpp"
#include "expconv/log_value.hpp"
#include "expconv/multiindex.hpp"
#include "expconv/quadrature.hpp"
#include "expconv/rational.hpp"
#include "expconv/test_function.hpp"

#include <optional>
#include <string>
#include <vector>

namespace expconv {

/// M_p = p!^κ, or an explicit table M_0..M_n (indices past n are an error).
class WeightSequence {
public:
    enum class Kind { gevrey, table };

    static WeightSequence gevrey(double kappa);
    static WeightSequence table(std::vector<double> values);

    Kind kind() const { return kind_; }
    double kappa() const { return kappa_; }
    const std::vector<double>& values() const { return values_; }
    /// Largest p with a defined M_p (unbounded for gevrey).
    std::size_t max_index() const;
    double log_m(std::size_t p) const;
    std::string to_string() const;

    /// gevrey: κ finite and ≥ 1. table: ≥ 2 entries, all finite and > 0, M₀ = M₁ = 1.
    void validate() const;

private:
    Kind kind_ = Kind::gevrey;
    double kappa_ = 1.0;
    std::vector<double> values_;
};

/// p!^κ ⊂ M_p: p!^κ ≤ C L^p M_p for all p.
struct Inclusion {
    bool holds = false;
    double C = 0.0;
    unsigned L = 0;
    bool analytic = false;  // decided from the Gevrey exponents rather than sampled
};
/// For gevrey M this is exact (κ ≤ μ). For tables it is a finite-horizon
/// reading: the increments of log(p!^κ/M_p) must stop growing over the second
/// half of the horizon, and L bounds their exponential there.
Inclusion gevrey_inclusion(double kappa, const WeightSequence& m, std::size_t horizon);

struct WeightChecks {
    std::size_t horizon = 0;
    bool m1_holds = true;
    std::vector<std::size_t> m1_failures;  // p with M_p² > M_{p−1}M_{p+1}
    // (M.2): smallest (c₀, H) on the integer lattice, lexicographically.
    bool m2_holds = false;
    unsigned m2_c0 = 0;
    unsigned m2_H = 0;
    // (M.6): p! ⊂ M_p
    Inclusion m6;
    // (M.5) partial sums Σ_{j=p+1}^{horizon} (M_{j−1}/M_j)^e against p (M_p/M_{p+1})^e
    double m5_exponent = 1.0;
    double m5_c0_estimate = 0.0;
    std::vector<std::string> notes;
};

/// horizon ≥ 3, and within the table for explicit sequences.
/// (M.1) is exact: integer arithmetic for gevrey, exact rationals for tables.
WeightChecks weight_sequence_checks(const WeightSequence& m, std::size_t horizon, double m5_exponent = 1.0);

struct SeminormTerm {
    MultiIndex alpha;
    double value = 0.0;  // h^{|α|} sup e^{h|x|^q}|∂^αφ| / M_{|α|}
    std::vector<double> location;
    bool edge_growth = false;
};

struct SeminormResult {
    bool unbounded = false;
    std::string reason;
    double value = 0.0;
    std::vector<SeminormTerm> terms;
};

/// max over |α| ≤ alpha_max of h^{|α|} sup_x e^{h|x|^q}|∂^αφ(x)| / M_{|α|} on the grid,
/// each sup refined by local search. Unbounded when h|x|^q beats φ's slowest
/// decay analytically, or when a sup sits on the outer shell of the grid.
SeminormResult gs_seminorm(const TestFunctionSpec& phi, double h, const WeightSequence& m, double q,
                           unsigned alpha_max, const SamplePlan& grid);

/// Whether ∫ e^{E(x)} dx < ∞ for E the exponent of each term of |S| times
/// e^{s⟨x⟩^q + k⟨x⟩^{q′}}, by comparing leading powers of ⟨x⟩.
bool weighted_density_integrable(const TestFunctionSpec& subject, double s, double q, double k, double q_prime);

struct WeightedIntegral {
    double s = 0.0;
    double k = 0.0;
    std::vector<double> radii;
    std::vector<LogValue> truncated;  // ∫_{|x_i| ≤ R} per radius; zero if not computed
    bool quadrature_failed = false;
    bool divergent = false;           // numeric probe
    bool analytic_finite = true;      // leading-exponent comparison
    LogValue value;                   // the largest-radius value when finite
    std::string detail;
};

enum class Verdict { convolvable, not_convolvable, inconclusive };
std::string to_string(Verdict v);

struct ConvolvabilityOptions {
    std::vector<double> k_list = {0.0, 1.0, 2.0, 4.0};
    std::vector<double> s_primes;  // s′ < s probed at k = 0
    std::optional<WeightSequence> weights;  // default p!^2
    std::vector<double> radii = {8.0, 16.0, 32.0};
    QuadratureConfig quadrature;
};

struct ConvolvabilityVerdict {
    TestFunctionSpec subject;
    KernelSpec kernel;
    double q1 = 0.0;
    double q_prime = 0.0;
    std::string weights;  // description of M_p used for the hypotheses
    bool hypothesis_q = false;   // p!^{2−1/q} ⊂ M_p
    bool hypothesis_q1 = false;  // p!^{2−1/q₁} ⊂ M_p
    std::vector<WeightedIntegral> k_results;
    std::vector<WeightedIntegral> s_prime_results;
    Verdict verdict = Verdict::inconclusive;
    std::string criterion;
    std::optional<bool> monotone_shadow;  // convolvable at s ⇒ every probed s′ finite
    std::vector<std::string> notes;
};

/// Convolvability of S with e^{s⟨·⟩^q} in S′^{M_p}_{p!^{1/q₁}}, with D′_{L¹}
/// membership read as absolute integrability (noted in every verdict).
/// A probe diverges when its log grows by more than log 10 over the last
/// doubling of the radius, when the last increment is at least half the one
/// before (and not negligible), or when quadrature fails.
/// Requires q₁ > q ≥ 1 and a nonzero subject.
ConvolvabilityVerdict convolvability_report(const TestFunctionSpec& subject, const KernelSpec& spec, double q1,
                                            const ConvolvabilityOptions& options = {});

}  // namespace expconv
