#include "expconv/quadrature.hpp"

#include "expconv/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace expconv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Adjacent samples near the peak must differ by at most this many nats.
constexpr double kResolutionNats = 3.0;
constexpr double kPeakBandNats = 3.0;
// ... or differ in value by at most this fraction of the peak magnitude.
const double kMaxJump = 1.0 - std::exp(-kResolutionNats);

std::size_t ipow(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) r *= base;
    return r;
}

void validate(const QuadratureConfig& config) {
    if (!(config.rel_tolerance > 0.0)) throw InputError("quadrature tolerance must be > 0");
    if (config.max_depth < 1) throw InputError("quadrature max depth must be >= 1");
    if (config.dim < 1 || config.dim > 3) throw InputError("quadrature supports 1 <= d <= 3");
    if (config.initial_intervals != 0 && config.initial_intervals < 2) throw InputError("quadrature needs >= 2 initial intervals");
    if (const auto* explicit_radius = std::get_if<ExplicitRadius>(&config.truncation))
        if (!(explicit_radius->radius > 0.0)) throw InputError("truncation radius must be > 0");
    if (const auto* tail = std::get_if<TailEnvelope>(&config.truncation))
        if (!tail->log_envelope) throw InputError("quadrature needs a tail envelope or an explicit radius");
}

struct Grid {
    std::size_t dim;
    std::size_t intervals;
    double radius;

    std::size_t per_axis() const { return intervals + 1; }
    std::size_t size() const { return ipow(per_axis(), dim); }
    double step() const { return 2.0 * radius / static_cast<double>(intervals); }

    void coords(std::size_t flat, std::size_t* idx) const {
        for (std::size_t a = 0; a < dim; ++a) {
            idx[a] = flat % per_axis();
            flat /= per_axis();
        }
    }
    void point(const std::size_t* idx, double* t) const {
        const double h = step();
        for (std::size_t a = 0; a < dim; ++a) t[a] = -radius + static_cast<double>(idx[a]) * h;
    }
};

double max_log_on_box(const LogIntegrand& f, std::size_t dim, double radius, std::size_t per_axis) {
    Grid grid{dim, per_axis - 1, radius};
    double best = kNegInf;
    std::size_t idx[3];
    double t[3];
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
        grid.coords(flat, idx);
        grid.point(idx, t);
        const LogValue v = f(std::span<const double>(t, dim));
        if (!v.is_zero()) best = std::max(best, v.log_magnitude());
    }
    return best;
}

double tail_radius(const TailEnvelope& tail, std::size_t dim, double tolerance, double reference) {
    const double threshold = reference + std::log(tolerance / 10.0) - 5.0;
    auto tail_ok = [&](double radius) {
        for (double m : {1.0, 1.25, 1.5, 2.0, 3.0, 4.0}) {
            const double rho = m * radius;
            if (tail.log_envelope(rho) + static_cast<double>(dim) * std::log(2.0 * rho + 2.0) > threshold)
                return false;
        }
        return true;
    };
    double hi = 1.0;
    while (!tail_ok(hi)) {
        hi *= 2.0;
        if (hi > 1e12) throw InputError("tail envelope never decays below the tolerance");
    }
    double lo = hi / 2.0;
    if (hi == 1.0) return hi;
    for (int it = 0; it < 60 && hi - lo > 1e-6 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail_ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace

double resolve_truncation_radius(const LogIntegrand& f, const QuadratureConfig& config) {
    validate(config);
    if (const auto* explicit_radius = std::get_if<ExplicitRadius>(&config.truncation))
        return explicit_radius->radius;
    const auto& tail = std::get<TailEnvelope>(config.truncation);
    const std::size_t d = config.dim;

    std::vector<double> origin(d, 0.0);
    const LogValue at_origin = f(origin);
    double reference = at_origin.is_zero() ? tail.log_envelope(0.0) : at_origin.log_magnitude();
    if (reference == kNegInf) return 1.0;
    double radius = tail_radius(tail, d, config.rel_tolerance, reference);

    const std::size_t coarse = d == 1 ? 513 : (d == 2 ? 65 : 17);
    const double sampled = max_log_on_box(f, d, radius, coarse);
    // A higher reference only loosens the threshold; never shrink below the
    // first radius, which already covers the region the envelope allowed.
    if (sampled > reference) radius = std::max(radius, tail_radius(tail, d, config.rel_tolerance, sampled));
    return radius;
}

QuadratureResult integrate_log_domain(const LogIntegrand& f, const QuadratureConfig& config) {
    validate(config);
    const std::size_t d = config.dim;
    const double radius = resolve_truncation_radius(f, config);

    QuadratureResult result;
    result.radius = radius;

    const std::size_t initial = config.initial_intervals != 0 ? config.initial_intervals : (128u >> d);
    Grid grid{d, initial, radius};
    std::vector<double> logs(grid.size());
    std::vector<std::int8_t> signs(grid.size());

    std::size_t idx[3];
    double t[3];
    auto evaluate = [&](std::size_t flat, const Grid& g) {
        g.coords(flat, idx);
        g.point(idx, t);
        const LogValue v = f(std::span<const double>(t, d));
        logs[flat] = v.log_magnitude();
        signs[flat] = static_cast<std::int8_t>(v.sign());
        ++result.evaluations;
    };
    for (std::size_t flat = 0; flat < grid.size(); ++flat) evaluate(flat, grid);

    std::vector<std::vector<LogValue>> romberg;
    LogValue previous;
    for (unsigned level = 0;; ++level) {
        if (level > 0) {
            Grid fine{d, grid.intervals * 2, radius};
            if (fine.size() > config.max_points) {
                throw QuadratureDivergence("quadrature point budget exhausted at radius " +
                                               std::to_string(radius),
                                           result.trace, radius);
            }
            std::vector<double> old_logs = std::move(logs);
            std::vector<std::int8_t> old_signs = std::move(signs);
            logs.assign(fine.size(), kNegInf);
            signs.assign(fine.size(), 0);
            for (std::size_t flat = 0; flat < fine.size(); ++flat) {
                fine.coords(flat, idx);
                bool coarse_point = true;
                std::size_t old_flat = 0;
                for (std::size_t a = d; a-- > 0;) {
                    coarse_point = coarse_point && idx[a] % 2 == 0;
                    old_flat = old_flat * grid.per_axis() + idx[a] / 2;
                }
                if (coarse_point) {
                    logs[flat] = old_logs[old_flat];
                    signs[flat] = old_signs[old_flat];
                } else {
                    evaluate(flat, fine);
                }
            }
            grid = fine;
        }

        // Trapezoid sum, peak, boundary mass, and resolution near the peak.
        const double log_cell = static_cast<double>(d) * std::log(grid.step());
        const std::size_t n = grid.intervals;
        LogSum sum;
        double peak = kNegInf;
        double boundary_peak = kNegInf;
        for (std::size_t flat = 0; flat < logs.size(); ++flat) {
            if (signs[flat] == 0) continue;
            grid.coords(flat, idx);
            double log_weight = log_cell;
            bool on_boundary = false;
            for (std::size_t a = 0; a < d; ++a) {
                if (idx[a] == 0 || idx[a] == n) {
                    log_weight -= std::log(2.0);
                    on_boundary = true;
                }
            }
            sum.add_log(logs[flat] + log_weight, signs[flat]);
            peak = std::max(peak, logs[flat]);
            if (on_boundary) boundary_peak = std::max(boundary_peak, logs[flat]);
        }
        bool resolved = true;
        if (peak != kNegInf) {
            std::size_t stride = 1;
            for (std::size_t a = 0; a < d && resolved; ++a, stride *= grid.per_axis()) {
                for (std::size_t flat = 0; flat < logs.size(); ++flat) {
                    if ((flat / stride) % grid.per_axis() == n) continue;
                    const double l0 = logs[flat];
                    const double l1 = logs[flat + stride];
                    if (std::max(l0, l1) < peak - kPeakBandNats) continue;
                    const bool same_sign = signs[flat] == signs[flat + stride];
                    if (same_sign && std::fabs(l0 - l1) <= kResolutionNats) continue;
                    // Steep in log but not in value, e.g. next to a sign change.
                    const double jump = std::fabs(signs[flat] * std::exp(l0 - peak) -
                                                  signs[flat + stride] * std::exp(l1 - peak));
                    if (jump > kMaxJump) {
                        resolved = false;
                        break;
                    }
                }
            }
        }

        const LogValue trapezoid = sum.value();
        result.absolute = sum.absolute();
        result.boundary_significant =
            boundary_peak != kNegInf && boundary_peak >= peak + std::log(config.rel_tolerance) - 7.0;

        romberg.emplace_back();
        romberg.back().push_back(trapezoid);
        if (romberg.size() > 1) {
            const auto& above = romberg[romberg.size() - 2];
            auto& row = romberg.back();
            double factor = 1.0;
            for (std::size_t j = 1; j < romberg.size(); ++j) {
                factor *= 4.0;
                row.push_back(row[j - 1] + (row[j - 1] - above[j - 1]) / LogValue::from_double(factor - 1.0));
            }
        }
        const LogValue estimate = result.boundary_significant ? romberg.back().back() : trapezoid;
        result.trace.push_back(estimate);
        result.value = estimate;
        result.levels = level + 1;

        if (level > 0) {
            const LogValue diff = estimate - previous;
            double rel = 0.0;
            if (!diff.is_zero())
                rel = estimate.is_zero() ? std::numeric_limits<double>::infinity()
                                         : std::exp(diff.log_magnitude() - estimate.log_magnitude());
            const bool at_noise_floor =
                diff.is_zero() || diff.log_magnitude() <= result.absolute.log_magnitude() + std::log(1e-13);
            result.estimated_rel_error = rel;
            if (level + 1 >= config.min_levels && resolved && (rel <= config.rel_tolerance || at_noise_floor))
                break;
        } else if (peak == kNegInf && level + 1 >= config.min_levels) {
            break;
        }
        if (level >= config.max_depth) {
            throw QuadratureDivergence("quadrature did not converge after " + std::to_string(level + 1) +
                                           " levels at radius " + std::to_string(radius),
                                       result.trace, radius);
        }
        previous = estimate;
    }

    if (!result.value.is_zero() && !result.absolute.is_zero())
        result.cancellation =
            result.absolute.log_magnitude() - result.value.log_magnitude() > kCancellationThresholdNats;
    else if (result.value.is_zero() && !result.absolute.is_zero())
        result.cancellation = true;
    return result;
}

}  // namespace expconv
