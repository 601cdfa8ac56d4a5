#include "cli.hpp"

#include "json_io.hpp"

#include "expconv/convolution.hpp"
#include "expconv/error.hpp"
#include "expconv/faa_di_bruno.hpp"
#include "expconv/kernel.hpp"
#include "expconv/multiindex.hpp"
#include "expconv/parallel.hpp"
#include "expconv/quadrature.hpp"
#include "expconv/spaces.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

namespace expconv::cli {

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::string format = "json";

    std::string alpha;
    std::size_t dim = 1;
    unsigned r = 0;
    std::string outer;
    std::string inner;
    std::vector<std::string> xs;
    std::string mode = "float";

    std::string bound;
    std::string kernel;
    std::string phi;
    std::string grid;
    std::string weights;
    double s = 1.0;
    double q = 2.0;
    double radius = 0.0;
    unsigned points = 0;
    double tolerance = 1e-6;
    unsigned alpha_max = 0;
    std::size_t samples = 0;
    std::uint64_t seed = 1;
    double k = 0.0;
    double q1 = 3.0;
    double h = 1.0;
    std::size_t horizon = 32;
    double m5_exponent = 1.0;
    std::vector<double> k_list;
    std::vector<double> s_primes;
};

std::vector<std::string> split(const std::string& text, char delimiter) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : text) {
        if (c == delimiter) {
            parts.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    parts.push_back(current);
    return parts;
}

double parse_double(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v)) throw InputError(what + ": '" + text + "' is not a finite number");
    return v;
}

std::vector<double> parse_point(const std::string& text, const std::string& what) {
    std::vector<double> x;
    for (const auto& part : split(text, ',')) x.push_back(parse_double(part, what));
    return x;
}

MultiIndex parse_alpha(const std::string& text) {
    std::vector<unsigned> comps;
    for (const auto& part : split(text, ',')) {
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != part.size() || part[0] == '-' || v > 1000)
            throw InputError("--alpha: '" + text + "' is not a comma-separated list of non-negative integers");
        comps.push_back(static_cast<unsigned>(v));
    }
    return MultiIndex(std::move(comps));
}

Json integer_json(const BigInt& v) {
    if (v >= 0 && v <= std::numeric_limits<std::uint64_t>::max()) return Json(static_cast<std::uint64_t>(v));
    return Json(v.str());
}

/// Flag, then config file, then default, for every shared parameter.
class Context {
public:
    Context(const CLI::App& sub, const Flags& f, Json config) : sub_(sub), f_(f), config_(std::move(config)) {}

    bool given(const std::string& option) const { return sub_.get_option_no_throw(option) && sub_.count(option) > 0; }
    const Json* config(const std::string& key) const {
        auto it = config_.find(key);
        return it == config_.end() ? nullptr : &*it;
    }

    double number(const std::string& option, double flag_value, const std::string& key, double fallback) const {
        if (given(option)) return flag_value;
        if (const Json* j = config(key)) return read_number(*j, "config." + key);
        return fallback;
    }
    unsigned count(const std::string& option, unsigned flag_value, const std::string& key, unsigned fallback) const {
        if (given(option)) return flag_value;
        if (const Json* j = config(key)) {
            if (!j->is_number_unsigned()) throw InputError("field config." + key + ": expected a non-negative integer");
            return j->get<unsigned>();
        }
        return fallback;
    }

    KernelSpec kernel(KernelSpec spec = {}) const {
        if (const Json* j = config("kernel")) spec = read_kernel(*j, "config.kernel");
        if (given("--kernel")) spec = read_kernel(load_json_argument(f_.kernel, "--kernel"), "kernel");
        if (given("--s")) spec.s = f_.s;
        if (given("--q")) spec.q = f_.q;
        return spec;
    }

    std::optional<TestFunctionSpec> test_function(const std::string& option, const std::string& text) const {
        if (given(option)) return read_test_function(load_json_argument(text, option), option.substr(2));
        if (const Json* j = config("test_function")) return read_test_function(*j, "config.test_function");
        return std::nullopt;
    }

    SamplePlan plan(std::size_t dim, double radius, unsigned points, std::size_t samples) const {
        SamplePlan plan;
        plan.dim = dim;
        plan.radius = radius;
        plan.points_per_axis = points;
        plan.validation_samples = samples;
        if (const Json* j = config("grid")) read_grid(*j, "config.grid", plan);
        if (given("--grid")) read_grid(load_json_argument(f_.grid, "--grid"), "grid", plan);
        if (given("--radius")) plan.radius = f_.radius;
        if (given("--points")) plan.points_per_axis = f_.points;
        if (!(plan.radius > 0.0)) throw InputError("--radius must be > 0");
        if (plan.points_per_axis < 2) throw InputError("--points must be >= 2");
        if (given("--samples")) {
            plan.validation_samples = f_.samples;
        } else if (const Json* j = config("samples")) {
            if (!j->is_number_unsigned()) throw InputError("field config.samples: expected a non-negative integer");
            plan.validation_samples = j->get<std::size_t>();
        }
        if (given("--seed")) {
            plan.seed = f_.seed;
        } else if (const Json* j = config("seed")) {
            if (!j->is_number_unsigned()) throw InputError("field config.seed: expected a non-negative integer");
            plan.seed = j->get<std::uint64_t>();
        }
        return plan;
    }

    QuadratureConfig quadrature() const {
        QuadratureConfig cfg;
        cfg.rel_tolerance = number("--tolerance", f_.tolerance, "tolerance", 1e-6);
        if (!(cfg.rel_tolerance > 0.0) || cfg.rel_tolerance >= 1.0) throw InputError("--tolerance must be in (0, 1)");
        return cfg;
    }

    std::optional<WeightSequence> weights() const {
        std::optional<WeightSequence> m;
        if (const Json* j = config("weights")) m = read_weights(*j, "config.weights");
        if (given("--weights")) m = read_weights(load_json_argument(f_.weights, "--weights"), "weights");
        if (m) m->validate();
        return m;
    }

    std::vector<double> list(const std::string& option, const std::vector<double>& flag_value, const std::string& key,
                             std::vector<double> fallback) const {
        if (given(option)) return flag_value;
        if (const Json* j = config(key)) {
            if (!j->is_array()) throw InputError("field config." + key + ": expected an array of numbers");
            std::vector<double> out;
            for (std::size_t i = 0; i < j->size(); ++i)
                out.push_back(read_number((*j)[i], "config." + key + "[" + std::to_string(i) + "]"));
            return out;
        }
        return fallback;
    }

private:
    const CLI::App& sub_;
    const Flags& f_;
    Json config_;
};

Json load_config(const std::string& path) {
    if (path.empty()) return Json::object();
    Json j = load_json_argument(path, "--config");
    if (!j.is_object()) throw InputError("field config: expected an object");
    static const char* known[] = {"kernel", "test_function", "grid", "tolerance", "seed", "samples", "alpha_max",
                                  "k", "k_list", "s_primes", "weights", "q1", "h"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw InputError("field config." + it.key() + ": unknown field");
    }
    return j;
}

struct Output {
    std::string text;
    int code = 0;
};

Output json_output(const Json& j, int code) { return {j.dump(2) + "\n", code}; }

/// Every point of the tensor grid [−R, R]^d with `points` nodes per axis.
std::vector<std::vector<double>> tensor_grid(std::size_t dim, double radius, unsigned points) {
    std::size_t total = 1;
    for (std::size_t a = 0; a < dim; ++a) total *= points;
    std::vector<std::vector<double>> out(total, std::vector<double>(dim));
    const double h = 2.0 * radius / static_cast<double>(points - 1);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rest = flat;
        for (std::size_t a = 0; a < dim; ++a) {
            out[flat][a] = -radius + h * static_cast<double>(rest % points);
            rest /= points;
        }
    }
    return out;
}

struct Row {
    std::vector<double> x;
    LogValue value;
    double profile_log = std::numeric_limits<double>::quiet_NaN();
    double ratio = std::numeric_limits<double>::quiet_NaN();
    std::optional<QuadratureResult> quadrature;
    std::string error;
};

using ProfileFn = std::function<double(std::span<const double>)>;

std::vector<Row> convolution_rows(const TestFunctionSpec& phi, const KernelSpec& spec, const MultiIndex& alpha,
                                  const std::vector<std::vector<double>>& points, const QuadratureConfig& cfg,
                                  const ProfileFn& profile) {
    const double log_alpha_factorial = std::log(static_cast<double>(alpha.factorial()));
    return parallel_map<Row>(points.size(), [&](std::size_t i) {
        Row row;
        row.x = points[i];
        try {
            ConvolutionResult r = convolve_detailed(phi, spec, alpha, row.x, cfg);
            row.value = r.value;
            row.quadrature = std::move(r.quadrature);
        } catch (const QuadratureDivergence& e) {
            row.error = e.what();
            return row;
        }
        if (profile) {
            row.profile_log = profile(row.x);
            row.ratio = std::exp(row.value.log_magnitude() - log_alpha_factorial - row.profile_log);
        }
        return row;
    });
}

std::string rows_csv(const std::vector<Row>& rows, std::size_t dim) {
    std::ostringstream out;
    if (dim == 1) {
        out << "x";
    } else {
        for (std::size_t a = 0; a < dim; ++a) out << (a ? "," : "") << "x" << a + 1;
    }
    out << ",log_value,sign,profile_log,ratio\n";
    for (const auto& row : rows) {
        for (std::size_t a = 0; a < dim; ++a) out << (a ? "," : "") << format_double(row.x[a]);
        if (!row.error.empty()) {
            out << ",nan,0,nan,nan\n";
            continue;
        }
        out << "," << format_double(row.value.log_magnitude()) << "," << row.value.sign() << ","
            << format_double(row.profile_log) << "," << format_double(row.ratio) << "\n";
    }
    return out.str();
}

Json rows_json(const std::vector<Row>& rows) {
    Json out = Json::array();
    for (const auto& row : rows) {
        Json e{{"x", to_json(row.x)}};
        if (!row.error.empty()) {
            e["error"] = row.error;
        } else {
            e["value"] = to_json(row.value);
            e["profile_log"] = row.profile_log;
            e["ratio"] = row.ratio;
            const auto& q = *row.quadrature;
            e["quadrature"] = Json{{"radius", q.radius},
                                   {"levels", q.levels},
                                   {"evaluations", q.evaluations},
                                   {"estimated_rel_error", q.estimated_rel_error},
                                   {"cancellation", q.cancellation}};
        }
        out.push_back(std::move(e));
    }
    return out;
}

void require_format(const Flags& f, bool csv_allowed, const std::string& what) {
    if (f.format == "csv" && !csv_allowed) throw InputError("--format csv is not available for " + what);
}

Output run_partitions(const Flags& f, const Context& ctx) {
    require_format(f, false, "partitions");
    const MultiIndex alpha = parse_alpha(f.alpha);
    if (ctx.given("--dim") && f.dim != alpha.dim())
        throw InputError("--alpha has " + std::to_string(alpha.dim()) + " components but --dim is " + std::to_string(f.dim));
    const unsigned n = alpha.order();
    if (n == 0) throw InputError("--alpha must have |alpha| >= 1");
    if (n > 12) throw InputError("--alpha: |alpha| <= 12 supported by partitions");
    if (ctx.given("--r") && (f.r < 1 || f.r > n)) throw InputError("--r must satisfy 1 <= r <= |alpha|");

    Json terms = Json::array();
    Json counts = Json::array();
    std::size_t total = 0;
    for (unsigned r = 1; r <= n; ++r) {
        if (ctx.given("--r") && r != f.r) continue;
        const auto set = enumerate_partition_terms(alpha, r);
        counts.push_back(Json{{"r", r}, {"count", set->terms.size()}});
        for (const auto& term : set->terms) {
            Json parts = Json::array();
            BigInt denominator = 1;
            for (std::size_t i = 0; i < term.parts.size(); ++i) {
                parts.push_back(to_json(term.parts[i]));
                denominator *= factorial(term.multiplicities[i]);
            }
            terms.push_back(Json{{"r", r},
                                 {"parts", std::move(parts)},
                                 {"multiplicities", term.multiplicities},
                                 {"weight", integer_json(factorial(r) / denominator)}});
        }
        total += set->terms.size();
    }
    Json out{{"alpha", to_json(alpha)}, {"dim", alpha.dim()}, {"order", n}, {"counts", std::move(counts)},
             {"term_count", total}, {"terms", std::move(terms)}};
    if (!ctx.given("--r")) {
        const Rational sum = faa_di_bruno_weight_sum(alpha);
        out["weight_sum"] = integer_json(numerator(sum) / denominator(sum));
        out["weight_bound"] = integer_json(faa_di_bruno_weight_bound(alpha));
    }
    return json_output(out, 0);
}

OuterFunction parse_outer(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? std::string() : text.substr(colon + 1);
    if (name == "reciprocal" && arg.empty()) return OuterFunction::reciprocal();
    if (name == "exp") return OuterFunction::exponential(arg.empty() ? Rational(1) : parse_rational(arg));
    if (name == "power" && !arg.empty()) return OuterFunction::power(parse_rational(arg));
    if (name == "poly" && !arg.empty()) {
        std::vector<Rational> coeffs;
        for (const auto& c : split(arg, ',')) coeffs.push_back(parse_rational(c));
        return OuterFunction::polynomial(std::move(coeffs));
    }
    throw InputError("--outer: expected exp[:a], power:q, poly:c0,c1,... or reciprocal, got '" + text + "'");
}

Output run_compose(const Flags& f, const Context&) {
    require_format(f, false, "compose");
    const OuterFunction outer = parse_outer(f.outer);
    const Polynomial p = read_polynomial(load_json_argument(f.inner, "--inner"), "inner");
    const InnerFunction inner = InnerFunction::polynomial(p);
    const MultiIndex alpha = parse_alpha(f.alpha);
    if (f.xs.size() != 1) throw InputError("--x: give exactly one point");
    const auto coords = split(f.xs.front(), ',');

    Json out{{"outer", f.outer}, {"inner", p.to_string()}, {"alpha", to_json(alpha)}, {"mode", f.mode}};
    if (f.mode == "exact") {
        std::vector<Rational> x;
        Json xj = Json::array();
        for (const auto& c : coords) {
            x.push_back(parse_rational(c));
            xj.push_back(to_string(x.back()));
        }
        const ExactValue v = compose_derivative_exact(outer, inner, alpha, x);
        out["x"] = std::move(xj);
        out["coefficient"] = to_string(v.coefficient);
        out["scale"] = v.scale.label.empty() ? "1" : v.scale.label;
        out["scale_value"] = v.scale.value;
        out["value"] = v.to_double();
    } else if (f.mode == "float") {
        std::vector<double> x;
        for (const auto& c : coords) x.push_back(parse_double(c, "--x"));
        const ComposeResult r = compose_derivative(outer, inner, alpha, x);
        out["x"] = to_json(x);
        out["log_value"] = to_json(r.value);
        out["value"] = r.value.to_double();
        out["cancellation_nats"] = r.cancellation_nats;
        out["ill_conditioned"] = r.ill_conditioned;
    } else {
        throw InputError("--mode must be float or exact");
    }
    return json_output(out, 0);
}

TestFunctionSpec default_phi(const Context& ctx, const Flags& f, double eta, double q1) {
    if (auto phi = ctx.test_function("--phi", f.phi)) return *phi;
    return TestFunctionSpec::gauss_exp(ctx.given("--dim") ? f.dim : 1, eta, q1);
}

Output run_verify(const Flags& f, const Context& ctx) {
    const BoundId id = parse_bound_id(f.bound);
    const bool csv_bound = id == BoundId::thm36 || id == BoundId::lemma41 || id == BoundId::lemma42;
    require_format(f, csv_bound, "verify --bound " + f.bound);
    const unsigned alpha_max = ctx.count("--alpha-max", f.alpha_max, "alpha_max", 3);

    auto finish = [&](const BoundReport& report, const std::function<std::vector<Row>()>& rows, std::size_t dim) {
        const int code = report.passed() ? 0 : 1;
        if (f.format == "csv") return Output{rows_csv(rows(), dim), code};
        return json_output(to_json(report), code);
    };

    switch (id) {
        case BoundId::r_ta:
        case BoundId::prva1:
        case BoundId::lemma33:
        case BoundId::cor34: {
            const KernelSpec spec = ctx.kernel();
            const SamplePlan plan = ctx.plan(f.dim, 10.0, 41, 10000);
            return finish(check_derivative_bounds(id, spec, alpha_max, plan), {}, plan.dim);
        }
        case BoundId::lemma35: {
            const KernelSpec spec = ctx.kernel();
            spec.validate();
            const SamplePlan plan = ctx.plan(f.dim, 10.0, 41, 10000);
            if (plan.validation_samples == 0) throw InputError("--samples must be >= 1");
            const auto samples = random_shift_samples(plan.validation_samples, plan.dim, plan.radius, spec.q, spec.q,
                                                      spec.s, spec.s, plan.seed);
            BoundReport report = check_shift_inequality(samples);
            report.add_parameter("seed", static_cast<double>(plan.seed));
            report.add_parameter("radius", plan.radius);
            return finish(report, {}, plan.dim);
        }
        case BoundId::thm36: {
            const TestFunctionSpec phi = default_phi(ctx, f, 2.0, 3.0);
            const KernelSpec spec = ctx.kernel();
            const SamplePlan plan = ctx.plan(phi.dim, 8.0, 41, 0);
            const QuadratureConfig cfg = ctx.quadrature();
            const BoundReport report = upper_bound_profile(phi, spec, alpha_max, plan, cfg);
            return finish(report, [&] {
                const ProfileConstants c = profile_constants(spec, phi.dominant_eta(), phi.dominant_q1());
                return convolution_rows(phi, spec, MultiIndex::zero(phi.dim),
                                        tensor_grid(phi.dim, plan.radius, plan.points_per_axis), cfg,
                                        [&](std::span<const double> x) { return log_profile(spec, c, x); });
            }, phi.dim);
        }
        case BoundId::lemma41: {
            const TestFunctionSpec g = default_phi(ctx, f, 1.0, 3.0);
            const KernelSpec spec = ctx.kernel();
            const double k = ctx.number("--k", f.k, "k", 0.0);
            const SamplePlan plan = ctx.plan(g.dim, 8.0, 41, 0);
            const QuadratureConfig cfg = ctx.quadrature();
            const LowerBoundResult result = lower_bound_recipe(g, spec, k, plan, cfg);
            const LowerBoundRecipe& r = result.recipe;
            return finish(result.report, [&] {
                return convolution_rows(g.dilated(r.epsilon), spec, MultiIndex::zero(g.dim),
                                        tensor_grid(g.dim, plan.radius, plan.points_per_axis), cfg,
                                        [&](std::span<const double> x) {
                                            const double b = bracket(x);
                                            return spec.s * std::pow(b, spec.q) + r.k * std::pow(b, r.q_prime);
                                        });
            }, g.dim);
        }
        case BoundId::lemma42: {
            const TestFunctionSpec g = default_phi(ctx, f, 2.0, 2.0);
            const KernelSpec spec = ctx.kernel();
            const SamplePlan plan = ctx.plan(g.dim, 6.0, 41, 200);
            const QuadratureConfig cfg = ctx.quadrature();
            const BoundReport report = reciprocal_derivative_bound_check(g, spec, alpha_max, plan, cfg);
            return finish(report, [&] {
                const double floor = l1_norm(g, cfg).log_magnitude();
                return convolution_rows(g, spec, MultiIndex::zero(g.dim),
                                        tensor_grid(g.dim, plan.radius, plan.points_per_axis), cfg,
                                        [&](std::span<const double>) { return floor; });
            }, g.dim);
        }
        case BoundId::weights: {
            const WeightSequence m = ctx.weights().value_or(WeightSequence::gevrey(1.0));
            const WeightChecks checks = weight_sequence_checks(m, f.horizon, f.m5_exponent);
            Json out{{"bound", "weights"}, {"weights", m.to_string()}};
            const Json body = to_json(checks);
            for (auto it = body.begin(); it != body.end(); ++it) out[it.key()] = it.value();
            const bool passed = checks.m1_holds && checks.m2_holds && checks.m6.holds;
            out["passed"] = passed;
            return json_output(out, passed ? 0 : 1);
        }
    }
    throw InputError("unknown bound");
}

Output run_convolve(const Flags& f, const Context& ctx) {
    require_format(f, true, "convolve");
    const auto phi = ctx.test_function("--phi", f.phi);
    if (!phi) throw InputError("convolve needs --phi (or test_function in --config)");
    const KernelSpec spec = ctx.kernel();
    const MultiIndex alpha = f.alpha.empty() ? MultiIndex::zero(phi->dim) : parse_alpha(f.alpha);
    if (alpha.dim() != phi->dim) throw InputError("--alpha dimension differs from the test function's");
    const QuadratureConfig cfg = ctx.quadrature();

    std::vector<std::vector<double>> points;
    if (!f.xs.empty()) {
        for (const auto& text : f.xs) {
            points.push_back(parse_point(text, "--x"));
            if (points.back().size() != phi->dim) throw InputError("--x '" + text + "' has the wrong dimension");
        }
    } else {
        const SamplePlan plan = ctx.plan(phi->dim, 5.0, 41, 0);
        points = tensor_grid(phi->dim, plan.radius, plan.points_per_axis);
    }

    std::optional<ProfileConstants> constants;
    if (!phi->is_zero() && spec.q >= 1.0 && phi->dominant_q1() > spec.q)
        constants = profile_constants(spec, phi->dominant_eta(), phi->dominant_q1());
    ProfileFn profile;
    if (constants) profile = [&](std::span<const double> x) { return log_profile(spec, *constants, x); };

    const auto rows = convolution_rows(*phi, spec, alpha, points, cfg, profile);
    int code = 0;
    for (const auto& row : rows)
        if (!row.error.empty()) code = 1;
    if (f.format == "csv") return {rows_csv(rows, phi->dim), code};

    Json out{{"kernel", to_json(spec)}, {"test_function", to_json(*phi)}, {"alpha", to_json(alpha)},
             {"tolerance", cfg.rel_tolerance}};
    out["profile"] = constants ? Json{{"lambda", constants->lambda}, {"c1", constants->c1}, {"q_prime", constants->q_prime}}
                               : Json(nullptr);
    out["points"] = rows_json(rows);
    return json_output(out, code);
}

Output run_seminorm(const Flags& f, const Context& ctx) {
    require_format(f, false, "seminorm");
    const auto phi = ctx.test_function("--phi", f.phi);
    if (!phi) throw InputError("seminorm needs --phi (or test_function in --config)");
    const double h = ctx.number("--h", f.h, "h", 1.0);
    const double q = ctx.given("--q") ? f.q : ctx.kernel().q;
    const WeightSequence m = ctx.weights().value_or(WeightSequence::gevrey(1.0));
    const unsigned alpha_max = ctx.count("--alpha-max", f.alpha_max, "alpha_max", 2);
    const SamplePlan plan = ctx.plan(phi->dim, 8.0, 41, 0);
    const SeminormResult r = gs_seminorm(*phi, h, m, q, alpha_max, plan);
    Json out{{"test_function", to_json(*phi)}, {"h", h}, {"q", q}, {"weights", m.to_string()}, {"alpha_max", alpha_max}};
    const Json body = to_json(r);
    for (auto it = body.begin(); it != body.end(); ++it) out[it.key()] = it.value();
    return json_output(out, 0);
}

Output run_report(const Flags& f, const Context& ctx) {
    require_format(f, false, "report");
    const auto subject = ctx.test_function("--subject", f.phi);
    if (!subject) throw InputError("report needs --subject (or test_function in --config)");
    if (subject->is_zero()) throw InputError("--subject is the zero density");
    const KernelSpec spec = ctx.kernel();
    const double q1 = ctx.number("--q1", f.q1, "q1", 3.0);
    ConvolvabilityOptions options;
    options.k_list = ctx.list("--k-list", f.k_list, "k_list", options.k_list);
    options.s_primes = ctx.list("--s-primes", f.s_primes, "s_primes", {});
    options.weights = ctx.weights();
    options.quadrature = ctx.quadrature();
    const ConvolvabilityVerdict v = convolvability_report(*subject, spec, q1, options);
    const int code = v.monotone_shadow.value_or(true) ? 0 : 1;
    return json_output(to_json(v), code);
}

void add_common(CLI::App* sub, Flags& f, bool csv) {
    sub->add_option("--config", f.config, "JSON file with kernel, test_function, grid and other parameters");
    sub->add_option("--out", f.out, "Output file (default stdout)");
    sub->add_option("--format", f.format, "Output format")
        ->check(CLI::IsMember(csv ? std::vector<std::string>{"json", "csv"} : std::vector<std::string>{"json"}));
}

void add_kernel(CLI::App* sub, Flags& f) {
    sub->add_option("--kernel", f.kernel, "Kernel {s, q} as inline JSON or a file");
    sub->add_option("--s", f.s, "Kernel coefficient s");
    sub->add_option("--q", f.q, "Kernel exponent q");
}

void add_grid(CLI::App* sub, Flags& f) {
    sub->add_option("--grid", f.grid, "Grid {radius, points_per_axis} as inline JSON or a file");
    sub->add_option("--radius", f.radius, "Box half-width");
    sub->add_option("--points", f.points, "Grid points per axis");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Convolutions with e^{s<x>^q}, their derivative bounds and convolvability checks", "expconv"};
    app.require_subcommand(1, 1);
    Flags f;

    auto* partitions = app.add_subcommand("partitions", "Enumerate the Faa di Bruno index set p(alpha, r)");
    add_common(partitions, f, false);
    partitions->add_option("--alpha", f.alpha, "Multi-index, e.g. 3 or 2,1")->required();
    partitions->add_option("--dim", f.dim, "Dimension (must match --alpha)");
    partitions->add_option("--r", f.r, "Only this r");

    auto* compose = app.add_subcommand("compose", "One derivative of f(g(x)) for a polynomial g");
    add_common(compose, f, false);
    compose->add_option("--outer", f.outer, "exp[:a], power:q, poly:c0,c1,... or reciprocal")->required();
    compose->add_option("--inner", f.inner, "Polynomial {dim, terms: [{coeff, monomial}]}")->required();
    compose->add_option("--alpha", f.alpha, "Multi-index")->required();
    compose->add_option("--x", f.xs, "Point, comma-separated (rationals in exact mode)")->required();
    compose->add_option("--mode", f.mode, "float or exact")->check(CLI::IsMember({"float", "exact"}));

    auto* verify = app.add_subcommand("verify", "Check one inequality and fit its constants");
    add_common(verify, f, true);
    verify->add_option("--bound", f.bound, "r-ta|prva1|lemma33|cor34|lemma35|thm36|lemma41|lemma42|weights")->required();
    add_kernel(verify, f);
    add_grid(verify, f);
    verify->add_option("--dim", f.dim, "Dimension when no test function is given");
    verify->add_option("--phi", f.phi, "Test function as inline JSON or a file");
    verify->add_option("--alpha-max", f.alpha_max, "Largest |alpha|");
    verify->add_option("--samples", f.samples, "Fresh validation samples");
    verify->add_option("--seed", f.seed, "Seed for the sampled points");
    verify->add_option("--tolerance", f.tolerance, "Relative quadrature tolerance");
    verify->add_option("--k", f.k, "Target rate k (lemma41)");
    verify->add_option("--weights", f.weights, "{\"gevrey\": kappa} or {\"table\": [...]} (weights)");
    verify->add_option("--horizon", f.horizon, "Largest p checked (weights)");
    verify->add_option("--m5-exponent", f.m5_exponent, "Exponent of the (M.5) partial sums (weights)");

    auto* convolve = app.add_subcommand("convolve", "(D^alpha phi) * e^{s<.>^q} at points or on a grid");
    add_common(convolve, f, true);
    add_kernel(convolve, f);
    add_grid(convolve, f);
    convolve->add_option("--phi", f.phi, "Test function as inline JSON or a file");
    convolve->add_option("--alpha", f.alpha, "Multi-index (default 0)");
    convolve->add_option("--x", f.xs, "Point, comma-separated; repeatable (default: the grid)");
    convolve->add_option("--tolerance", f.tolerance, "Relative quadrature tolerance");

    auto* seminorm = app.add_subcommand("seminorm", "Grid estimate of the Gelfand-Shilov seminorm");
    add_common(seminorm, f, false);
    seminorm->set_help_flag("--help", "Print this help message and exit");
    add_grid(seminorm, f);
    seminorm->add_option("--phi", f.phi, "Test function as inline JSON or a file");
    seminorm->add_option("--h", f.h, "Seminorm parameter h");
    seminorm->add_option("--q", f.q, "Weight exponent q");
    seminorm->add_option("--weights", f.weights, "{\"gevrey\": kappa} or {\"table\": [...]}");
    seminorm->add_option("--alpha-max", f.alpha_max, "Largest |alpha|");

    auto* report = app.add_subcommand("report", "Convolvability verdict for a density and a kernel");
    add_common(report, f, false);
    add_kernel(report, f);
    report->add_option("--subject", f.phi, "Density as inline JSON or a file");
    report->add_option("--q1", f.q1, "Gevrey exponent q1 of the test space");
    report->add_option("--k-list", f.k_list, "k values, comma-separated")->delimiter(',');
    report->add_option("--s-primes", f.s_primes, "s' < s values, comma-separated")->delimiter(',');
    report->add_option("--weights", f.weights, "{\"gevrey\": kappa} or {\"table\": [...]}");
    report->add_option("--tolerance", f.tolerance, "Relative quadrature tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    Output result;
    try {
        const Context ctx(*sub, f, load_config(f.config));
        if (sub == partitions) result = run_partitions(f, ctx);
        else if (sub == compose) result = run_compose(f, ctx);
        else if (sub == verify) result = run_verify(f, ctx);
        else if (sub == convolve) result = run_convolve(f, ctx);
        else if (sub == seminorm) result = run_seminorm(f, ctx);
        else result = run_report(f, ctx);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const EvaluationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const QuadratureDivergence& e) {
        err << "quadrature failure: " << e.what() << "\n";
        return 1;
    } catch (const InternalConsistencyError& e) {
        err << "internal consistency failure: " << e.what() << "\n";
        return 1;
    }

    if (f.out.empty()) {
        out << result.text;
    } else {
        std::ofstream file(f.out, std::ios::binary | std::ios::trunc);
        if (!file) {
            err << "error: cannot open " << f.out << " for writing\n";
            return 2;
        }
        file << result.text;
        if (!file.flush()) {
            err << "error: writing " << f.out << " failed\n";
            return 2;
        }
    }
    return result.code;
}

}  // namespace expconv::cli
