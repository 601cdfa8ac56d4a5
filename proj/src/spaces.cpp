#include "expconv/spaces.hpp"

#include "expconv/error.hpp"
#include "expconv/parallel.hpp"
#include "pattern_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace expconv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSlack = 1e-12;
constexpr unsigned kMaxLatticeConstant = 1024;
constexpr unsigned kMaxInclusionL = 64;

double log_factorial(std::size_t p) { return std::lgamma(static_cast<double>(p) + 1.0); }

bool integral_kappa(double kappa) { return kappa == std::floor(kappa) && kappa <= 64.0; }

// Exact M_0..M_horizon when available: integer κ or a table.
std::optional<std::vector<Rational>> exact_values(const WeightSequence& m, std::size_t horizon) {
    std::vector<Rational> out;
    if (m.kind() == WeightSequence::Kind::table) {
        for (std::size_t p = 0; p <= horizon; ++p) out.emplace_back(m.values()[p]);
        return out;
    }
    if (!integral_kappa(m.kappa())) return std::nullopt;
    const unsigned k = static_cast<unsigned>(m.kappa());
    for (std::size_t p = 0; p <= horizon; ++p) out.push_back(pow(Rational(factorial(static_cast<unsigned>(p))), k));
    return out;
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<std::vector<double>> grid_points(const SamplePlan& plan) {
    std::size_t total = 1;
    for (std::size_t a = 0; a < plan.dim; ++a) total *= plan.points_per_axis;
    std::vector<std::vector<double>> pts(total, std::vector<double>(plan.dim));
    const unsigned n = plan.points_per_axis;
    for (std::size_t p = 0; p < total; ++p) {
        std::size_t flat = p;
        for (std::size_t a = 0; a < plan.dim; ++a) {
            pts[p][a] = -plan.radius + 2.0 * plan.radius * static_cast<double>(flat % n) / (n - 1.0);
            flat /= n;
        }
    }
    return pts;
}

}  // namespace

// ---------------------------------------------------------------------------
// Weight sequences

WeightSequence WeightSequence::gevrey(double kappa) {
    WeightSequence m;
    m.kind_ = Kind::gevrey;
    m.kappa_ = kappa;
    m.validate();
    return m;
}

WeightSequence WeightSequence::table(std::vector<double> values) {
    WeightSequence m;
    m.kind_ = Kind::table;
    m.values_ = std::move(values);
    m.validate();
    return m;
}

void WeightSequence::validate() const {
    if (kind_ == Kind::gevrey) {
        if (!std::isfinite(kappa_) || kappa_ < 1.0) throw InputError("gevrey weight needs a finite kappa >= 1");
        return;
    }
    if (values_.size() < 2) throw InputError("weight table needs at least M_0 and M_1");
    for (double v : values_)
        if (!std::isfinite(v) || !(v > 0.0)) throw InputError("weight table entries must be finite and > 0");
    if (values_[0] != 1.0 || values_[1] != 1.0) throw InputError("weight table needs M_0 = M_1 = 1");
}

std::size_t WeightSequence::max_index() const {
    return kind_ == Kind::gevrey ? std::numeric_limits<std::size_t>::max() : values_.size() - 1;
}

double WeightSequence::log_m(std::size_t p) const {
    if (kind_ == Kind::gevrey) return kappa_ * log_factorial(p);
    if (p >= values_.size()) throw InputError("weight table has no entry M_" + std::to_string(p));
    return std::log(values_[p]);
}

std::string WeightSequence::to_string() const {
    std::ostringstream os;
    os.precision(17);
    if (kind_ == Kind::gevrey) {
        os << "p!^" << kappa_;
    } else {
        os << "table[" << values_.size() << "]";
    }
    return os.str();
}

Inclusion gevrey_inclusion(double kappa, const WeightSequence& m, std::size_t horizon) {
    m.validate();
    Inclusion inc;
    if (m.kind() == WeightSequence::Kind::gevrey) {
        inc.analytic = true;
        inc.holds = kappa <= m.kappa();
        if (inc.holds) {
            inc.C = 1.0;
            inc.L = 1;
        }
        return inc;
    }
    horizon = std::min(horizon, m.max_index());
    if (horizon < 4) throw InputError("inclusion check needs at least M_0..M_4");
    // r_p = log(p!^κ / M_p); the inclusion holds iff r_p − p log L stays bounded
    // for some L, i.e. the increments of r_p stay bounded. Increments that are
    // still growing over the second half of the horizon read as super-geometric.
    std::vector<double> r(horizon + 1), inc_log(horizon);
    for (std::size_t p = 0; p <= horizon; ++p) r[p] = kappa * log_factorial(p) - m.log_m(p);
    for (std::size_t p = 0; p < horizon; ++p) inc_log[p] = r[p + 1] - r[p];
    const std::size_t half = horizon / 2;
    double mean_x = 0.0, mean_y = 0.0;
    const double n = static_cast<double>(horizon - half);
    for (std::size_t p = half; p < horizon; ++p) {
        mean_x += p / n;
        mean_y += inc_log[p] / n;
    }
    double sxy = 0.0, sxx = 0.0, top = kNegInf;
    for (std::size_t p = half; p < horizon; ++p) {
        sxy += (p - mean_x) * (inc_log[p] - mean_y);
        sxx += (p - mean_x) * (p - mean_x);
        top = std::max(top, inc_log[p]);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    if (slope * n > 0.1) return inc;
    const double L = std::max(1.0, std::ceil(std::exp(top) - 1e-12));
    if (L > kMaxInclusionL) return inc;
    double best = kNegInf;
    for (std::size_t p = 0; p <= horizon; ++p) best = std::max(best, r[p] - p * std::log(L));
    inc.holds = true;
    inc.L = static_cast<unsigned>(L);
    inc.C = std::max(1.0, std::exp(best));
    return inc;
}

WeightChecks weight_sequence_checks(const WeightSequence& m, std::size_t horizon, double m5_exponent) {
    m.validate();
    if (horizon < 3) throw InputError("weight checks need horizon >= 3");
    if (horizon > m.max_index()) throw InputError("horizon exceeds the weight table");
    if (!(m5_exponent > 0.0) || !std::isfinite(m5_exponent)) throw InputError("(M.5) exponent must be > 0");

    WeightChecks out;
    out.horizon = horizon;
    out.m5_exponent = m5_exponent;
    const auto exact = exact_values(m, horizon + 1 <= m.max_index() ? horizon + 1 : horizon);

    // (M.1)
    for (std::size_t p = 1; p + 1 <= horizon; ++p) {
        bool ok;
        if (exact) {
            ok = (*exact)[p] * (*exact)[p] <= (*exact)[p - 1] * (*exact)[p + 1];
        } else {
            // p!^κ is log-convex for every κ > 0 iff p!² ≤ (p−1)!(p+1)!.
            const BigInt f = factorial(static_cast<unsigned>(p));
            ok = f * f <= factorial(static_cast<unsigned>(p - 1)) * factorial(static_cast<unsigned>(p + 1));
        }
        if (!ok) {
            out.m1_holds = false;
            out.m1_failures.push_back(p);
        }
    }
    if (!exact) out.notes.push_back("(M.1) decided through p!^2 <= (p-1)!(p+1)! since kappa > 0");

    // (M.2): M_p ≤ c₀ H^p min_q M_q M_{p−q}
    std::vector<double> log_min_split(horizon + 1, std::numeric_limits<double>::infinity());
    std::vector<Rational> exact_min_split;
    for (std::size_t p = 0; p <= horizon; ++p) {
        for (std::size_t q = 0; q <= p; ++q) log_min_split[p] = std::min(log_min_split[p], m.log_m(q) + m.log_m(p - q));
        if (exact) {
            Rational best = (*exact)[0] * (*exact)[p];
            for (std::size_t q = 1; q <= p; ++q) {
                Rational product = (*exact)[q] * (*exact)[p - q];
                if (product < best) best = std::move(product);
            }
            exact_min_split.push_back(best);
        }
    }
    auto m2_ok = [&](unsigned c0, unsigned H) {
        for (std::size_t p = 0; p <= horizon; ++p) {
            if (exact) {
                const Rational rhs = Rational(c0) * pow(Rational(H), static_cast<int>(p)) * exact_min_split[p];
                if ((*exact)[p] > rhs) return false;
            } else {
                const double rhs = std::log(static_cast<double>(c0)) + p * std::log(static_cast<double>(H)) +
                                   log_min_split[p];
                if (m.log_m(p) > rhs + kLogSlack * std::max(1.0, std::fabs(rhs))) return false;
            }
        }
        return true;
    };
    for (unsigned c0 = 1; c0 <= kMaxLatticeConstant && !out.m2_holds; ++c0) {
        double need = 1.0;
        for (std::size_t p = 1; p <= horizon; ++p)
            need = std::max(need, std::exp((m.log_m(p) - std::log(static_cast<double>(c0)) - log_min_split[p]) / p));
        unsigned H = static_cast<unsigned>(std::max(1.0, std::ceil(need - 1e-12)));
        if (H > kMaxLatticeConstant) continue;
        // The float estimate can be off by one at the ceiling.
        if (H > 1 && m2_ok(c0, H - 1)) --H;
        while (H <= kMaxLatticeConstant && !m2_ok(c0, H)) ++H;
        if (H <= kMaxLatticeConstant) {
            out.m2_holds = true;
            out.m2_c0 = c0;
            out.m2_H = H;
        }
    }

    // (M.6)
    out.m6 = gevrey_inclusion(1.0, m, horizon);

    // (M.5) finite partial sums
    double worst = 0.0;
    for (std::size_t p = 1; p < horizon; ++p) {
        double tail = 0.0;
        for (std::size_t j = p + 1; j <= horizon; ++j) tail += std::exp(m5_exponent * (m.log_m(j - 1) - m.log_m(j)));
        const double rhs = p * std::exp(m5_exponent * (m.log_m(p) - m.log_m(p + 1)));
        worst = std::max(worst, tail / rhs);
    }
    out.m5_c0_estimate = worst;
    out.notes.push_back("(M.5) is a partial-sum diagnostic truncated at the horizon, not a proof");
    return out;
}

// ---------------------------------------------------------------------------
// Seminorm

SeminormResult gs_seminorm(const TestFunctionSpec& phi, double h, const WeightSequence& m, double q,
                           unsigned alpha_max, const SamplePlan& grid) {
    phi.validate();
    m.validate();
    if (!(h > 0.0) || !std::isfinite(h)) throw InputError("seminorm needs h > 0");
    if (!(q > 0.0) || !std::isfinite(q)) throw InputError("seminorm needs q > 0");
    if (grid.dim != phi.dim) throw InputError("grid dimension does not match the test function");
    if (!(grid.radius > 0.0) || grid.points_per_axis < 2) throw InputError("grid needs radius > 0 and >= 2 points");
    if (alpha_max > m.max_index()) throw InputError("alpha_max exceeds the weight table");

    SeminormResult out;
    if (phi.is_zero()) return out;
    const double q1 = phi.dominant_q1();
    const double eta = phi.dominant_eta();
    if (q > q1 || (q == q1 && h > eta)) {
        out.unbounded = true;
        out.reason = "weight e^{h|x|^q} dominates the decay e^{-eta<x>^q1}";
        return out;
    }

    const auto indices = multi_indices_up_to(phi.dim, alpha_max);
    const auto pts = grid_points(grid);
    auto log_weighted = [&](const MultiIndex& alpha, std::span<const double> x) {
        const LogValue v = phi.derivative(alpha, x);
        if (v.is_zero()) return kNegInf;
        const double r = norm(x);
        return v.log_magnitude() + h * std::pow(r, q) + alpha.order() * std::log(h) - m.log_m(alpha.order());
    };
    out.terms = parallel_map<SeminormTerm>(indices.size(), [&](std::size_t i) {
        SeminormTerm term;
        term.alpha = indices[i];
        double best = kNegInf, outer = kNegInf, inner = kNegInf;
        std::vector<double> where = pts[0];
        for (const auto& x : pts) {
            const double v = log_weighted(indices[i], x);
            if (v > best) {
                best = v;
                where = x;
            }
            const double r = norm(x);
            if (r > grid.radius * (1.0 + 1e-12)) continue;
            if (r >= 0.75 * grid.radius) outer = std::max(outer, v);
            else if (r >= 0.5 * grid.radius) inner = std::max(inner, v);
        }
        term.edge_growth = outer != kNegInf && outer >= best && outer > inner + std::log(1.05);
        if (best != kNegInf && !term.edge_growth) {
            const double spacing = 2.0 * grid.radius / (grid.points_per_axis - 1.0);
            detail::pattern_maximize([&](std::span<const double> x) { return log_weighted(indices[i], x); }, where,
                                     best, spacing, grid.radius, 1e-9);
        }
        term.value = best == kNegInf ? 0.0 : std::exp(best);
        term.location = where;
        return term;
    });
    for (const auto& t : out.terms) {
        if (t.edge_growth) {
            out.unbounded = true;
            out.reason = "weighted derivative " + t.alpha.to_string() + " grows toward the edge of the grid";
        }
        out.value = std::max(out.value, t.value);
    }
    if (out.unbounded) out.value = std::numeric_limits<double>::infinity();
    return out;
}

// ---------------------------------------------------------------------------
// Convolvability

bool weighted_density_integrable(const TestFunctionSpec& subject, double s, double q, double k, double q_prime) {
    for (const auto& t : subject.terms) {
        if (t.coeff == 0.0) continue;
        std::map<double, double, std::greater<>> powers;
        powers[t.q1] -= t.eta;
        powers[q] += s;
        if (q_prime > 0.0) powers[q_prime] += k;
        bool decided = false;
        for (const auto& [power, coeff] : powers) {
            if (power <= 0.0 || coeff == 0.0) continue;
            if (coeff > 0.0) return false;
            decided = true;
            break;
        }
        // Only constants and a polynomial factor remain: not integrable on ℝ^d.
        if (!decided) return false;
    }
    return true;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::convolvable: return "convolvable";
        case Verdict::not_convolvable: return "not-convolvable";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

namespace {

WeightedIntegral weighted_integral(const TestFunctionSpec& subject, double s, double q, double k, double q_prime,
                                   const ConvolvabilityOptions& options) {
    WeightedIntegral w;
    w.s = s;
    w.k = k;
    w.radii = options.radii;
    w.analytic_finite = weighted_density_integrable(subject, s, q, k, q_prime);
    auto integrand = [&](std::span<const double> x) {
        const LogValue v = subject.value(x).abs();
        if (v.is_zero()) return v;
        const double b = bracket(x);
        return v.shifted(s * std::pow(b, q) + k * std::pow(b, q_prime));
    };
    for (double R : options.radii) {
        QuadratureConfig cfg = options.quadrature;
        cfg.dim = subject.dim;
        cfg.truncation = ExplicitRadius{R};
        try {
            w.truncated.push_back(integrate_log_domain(integrand, cfg).value);
        } catch (const QuadratureDivergence& e) {
            w.quadrature_failed = true;
            w.truncated.push_back(LogValue::zero());
            w.detail = e.what();
            break;
        }
    }
    if (w.quadrature_failed) {
        w.divergent = true;
        return w;
    }
    const std::size_t n = w.truncated.size();
    if (n >= 3) {
        const double d1 = w.truncated[n - 2].log_magnitude() - w.truncated[n - 3].log_magnitude();
        const double d2 = w.truncated[n - 1].log_magnitude() - w.truncated[n - 2].log_magnitude();
        w.divergent = d2 > std::log(10.0) || (d2 > 1e-6 && d2 >= 0.5 * d1);
        std::ostringstream os;
        os.precision(17);
        os << "log increments " << d1 << ", " << d2;
        w.detail = os.str();
    } else if (n == 2) {
        const double d = w.truncated[1].log_magnitude() - w.truncated[0].log_magnitude();
        w.divergent = d > std::log(10.0);
    }
    if (!w.divergent) w.value = w.truncated.back();
    return w;
}

}  // namespace

ConvolvabilityVerdict convolvability_report(const TestFunctionSpec& subject, const KernelSpec& spec, double q1,
                                            const ConvolvabilityOptions& options) {
    subject.validate();
    spec.validate_for_convolution();
    if (subject.is_zero()) throw InputError("convolvability needs a nonzero subject density");
    if (!(q1 > spec.q) || !std::isfinite(q1)) throw InputError("convolvability needs q1 > q");
    if (options.radii.size() < 2) throw InputError("convolvability needs at least two probe radii");
    for (std::size_t i = 1; i < options.radii.size(); ++i)
        if (!(options.radii[i] > options.radii[i - 1])) throw InputError("probe radii must increase");
    for (double k : options.k_list)
        if (!(k >= 0.0) || !std::isfinite(k)) throw InputError("k values must be finite and >= 0");
    for (double sp : options.s_primes)
        if (!(sp < spec.s) || sp == 0.0 || !std::isfinite(sp)) throw InputError("each s' must satisfy s' < s, s' != 0");

    const double q = spec.q;
    ConvolvabilityVerdict out;
    out.subject = subject;
    out.kernel = spec;
    out.q1 = q1;
    out.q_prime = (q - 1.0) * q1 / (q1 - 1.0);
    if (q > 1.0 && !(out.q_prime < q && q < q1))
        throw InternalConsistencyError("exponent bookkeeping: expected q' < q < q1");
    if (!(out.q_prime < q1)) throw InternalConsistencyError("k-weight exponent must stay below q1");

    const WeightSequence weights = options.weights.value_or(WeightSequence::gevrey(2.0));
    out.weights = weights.to_string();
    const std::size_t horizon = std::min<std::size_t>(40, weights.max_index());
    out.hypothesis_q = gevrey_inclusion(2.0 - 1.0 / q, weights, horizon).holds;
    out.hypothesis_q1 = gevrey_inclusion(2.0 - 1.0 / q1, weights, horizon).holds;

    const std::size_t nk = options.k_list.size();
    std::vector<std::pair<double, double>> jobs;  // (s, k)
    for (double k : options.k_list) jobs.emplace_back(spec.s, k);
    for (double sp : options.s_primes) jobs.emplace_back(sp, 0.0);
    auto results = parallel_map<WeightedIntegral>(jobs.size(), [&](std::size_t i) {
        return weighted_integral(subject, jobs[i].first, q, jobs[i].second, out.q_prime, options);
    });
    out.k_results.assign(results.begin(), results.begin() + nk);
    out.s_prime_results.assign(results.begin() + nk, results.end());

    bool disagree = false, any_divergent = false;
    for (const auto& w : out.k_results) {
        if (w.divergent == w.analytic_finite) disagree = true;
        any_divergent = any_divergent || w.divergent;
    }
    bool s_prime_divergent = false;
    for (const auto& w : out.s_prime_results) {
        if (w.divergent == w.analytic_finite) disagree = true;
        s_prime_divergent = s_prime_divergent || w.divergent;
    }

    if (disagree) {
        out.verdict = Verdict::inconclusive;
        out.criterion = "numeric probes disagree with the leading-exponent analysis";
    } else if (!any_divergent && !out.k_results.empty()) {
        out.verdict = Verdict::convolvable;
        out.criterion = q == 1.0 ? "e^{s<x>}S integrable (iff for q = 1)"
                                 : "e^{s<x>^q + k<x>^q'}S integrable for every probed k (sufficient)";
    } else if (any_divergent && q == 1.0 && spec.s > 0.0) {
        out.verdict = Verdict::not_convolvable;
        out.criterion = "e^{s<x>}S not integrable (iff for q = 1)";
    } else if (any_divergent && spec.s > 0.0 && out.hypothesis_q1) {
        out.verdict = Verdict::not_convolvable;
        out.criterion = "e^{s<x>^q + k<x>^q'}S not integrable for some k; necessary under p!^{2-1/q1} in M_p";
    } else if (s_prime_divergent && spec.s > 0.0 && out.hypothesis_q) {
        out.verdict = Verdict::not_convolvable;
        out.criterion = "e^{s'<x>^q}S not integrable for some s' < s; necessary under p!^{2-1/q} in M_p";
    } else {
        out.verdict = Verdict::inconclusive;
        out.criterion = out.k_results.empty() ? "no k probes requested"
                                              : "sufficient condition fails and no necessary condition applies";
    }

    if (out.verdict == Verdict::convolvable && !out.s_prime_results.empty()) {
        bool all_finite = true;
        for (const auto& w : out.s_prime_results) all_finite = all_finite && !w.divergent;
        out.monotone_shadow = all_finite;
    }
    out.notes.push_back(
        "membership in D'_{L^1} is read as absolute integrability of the weighted density; the distributional "
        "class is strictly larger");
    if (q == 1.0) out.notes.push_back("q = 1: q' = 0, so every k weight is the constant e^k");
    return out;
}

}  // namespace expconv
