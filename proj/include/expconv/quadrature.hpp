#pragma once

#include "expconv/log_value.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace expconv {

/// Integrate over the box [-radius, radius]^d.
struct ExplicitRadius {
    double radius = 10.0;
};

/// Upper bound on log|f(t)| valid for all |t| ≥ ρ, non-increasing for large ρ.
/// The box is grown until the envelope (with a volume factor) falls below
/// log(tolerance/10) relative to the largest sampled log|f|. An empty
/// function means the caller (e.g. convolve) supplies the envelope.
struct TailEnvelope {
    std::function<double(double rho)> log_envelope;
};

struct QuadratureConfig {
    double rel_tolerance = 1e-8;
    unsigned max_depth = 16;
    std::variant<TailEnvelope, ExplicitRadius> truncation = TailEnvelope{};
    std::size_t dim = 1;

    unsigned initial_intervals = 0;  // per axis at level 0; 0 picks 64, 32, 16 for d = 1, 2, 3
    unsigned min_levels = 3;
    std::size_t max_points = std::size_t{1} << 23;
};

using LogIntegrand = std::function<LogValue(std::span<const double>)>;

struct QuadratureResult {
    LogValue value;
    LogValue absolute;  // ∫|f| on the same grid
    double radius = 0.0;
    unsigned levels = 0;
    std::size_t evaluations = 0;
    double estimated_rel_error = 0.0;
    bool cancellation = false;        // |∫f| ≪ ∫|f|
    bool boundary_significant = false; // truncation edge carries mass; Romberg used
    std::vector<LogValue> trace;      // per-level estimates
};

/// Thrown when successive refinements fail to agree within max_depth (or the
/// point budget). Carries the per-level partial values.
class QuadratureDivergence : public std::runtime_error {
public:
    QuadratureDivergence(const std::string& what, std::vector<LogValue> trace, double radius)
        : std::runtime_error(what), trace_(std::move(trace)), radius_(radius) {}
    const std::vector<LogValue>& trace() const { return trace_; }
    double radius() const { return radius_; }

private:
    std::vector<LogValue> trace_;
    double radius_;
};

/// ∫_{ℝ^d} e^{L(t)} dt for d ≤ 3 by nested tensor trapezoid refinement in the
/// log domain (Romberg-extrapolated when the truncation edge is significant).
QuadratureResult integrate_log_domain(const LogIntegrand& log_integrand, const QuadratureConfig& config);

/// The truncation radius the config resolves to for this integrand.
double resolve_truncation_radius(const LogIntegrand& log_integrand, const QuadratureConfig& config);

}  // namespace expconv
