#include "json_io.hpp"

#include "expconv/error.hpp"
#include "expconv/rational.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace expconv::cli {

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
    throw InputError("field " + path + ": " + what);
}

const Json& require(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) field_error(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) field_error(path + "." + key, "missing");
    return *it;
}

void reject_unknown(const Json& j, std::initializer_list<const char*> known, const std::string& path) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) field_error(path + "." + it.key(), "unknown field");
    }
}

MultiIndex read_monomial(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) field_error(path, "expected a non-empty array of non-negative integers");
    std::vector<unsigned> comps;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Json& c = j[i];
        if (!c.is_number_unsigned()) field_error(path + "[" + std::to_string(i) + "]", "expected a non-negative integer");
        comps.push_back(c.get<unsigned>());
    }
    return MultiIndex(std::move(comps));
}

Rational read_rational(const Json& j, const std::string& path) {
    if (j.is_number_integer()) return Rational(BigInt(j.get<long long>()));
    if (j.is_string()) {
        try {
            return parse_rational(j.get<std::string>());
        } catch (const InputError& e) {
            field_error(path, e.what());
        }
    }
    field_error(path, "expected an integer or a rational string such as \"3/2\"");
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw InputError(source + ": malformed JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(column));
    }
}

Json load_json_argument(const std::string& argument, const std::string& option) {
    const auto first = argument.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (argument[first] == '{' || argument[first] == '['))
        return parse_json_text(argument, option);
    std::ifstream in(argument, std::ios::binary);
    if (!in) throw InputError(option + ": '" + argument + "' is neither inline JSON nor a readable file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_json_text(buffer.str(), argument);
}

double read_number(const Json& j, const std::string& path) {
    if (!j.is_number()) field_error(path, "expected a number");
    return j.get<double>();
}

KernelSpec read_kernel(const Json& j, const std::string& path) {
    if (!j.is_object()) field_error(path, "expected an object {s, q}");
    reject_unknown(j, {"s", "q"}, path);
    KernelSpec spec;
    spec.s = read_number(require(j, "s", path), path + ".s");
    spec.q = read_number(require(j, "q", path), path + ".q");
    return spec;
}

TestFunctionSpec read_test_function(const Json& j, const std::string& path) {
    if (!j.is_object()) field_error(path, "expected an object {terms: [...]}");
    reject_unknown(j, {"dim", "terms", "scale", "shift"}, path);
    const Json& terms = require(j, "terms", path);
    if (!terms.is_array()) field_error(path + ".terms", "expected an array");

    TestFunctionSpec phi;
    phi.dim = 0;
    if (auto it = j.find("dim"); it != j.end()) {
        if (!it->is_number_unsigned() || it->get<std::size_t>() == 0) field_error(path + ".dim", "expected a positive integer");
        phi.dim = it->get<std::size_t>();
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string tp = path + ".terms[" + std::to_string(i) + "]";
        const Json& t = terms[i];
        if (!t.is_object()) field_error(tp, "expected an object {coeff, monomial, eta, q1}");
        reject_unknown(t, {"coeff", "monomial", "eta", "q1"}, tp);
        GaussExpTerm term;
        term.coeff = read_number(require(t, "coeff", tp), tp + ".coeff");
        term.monomial = read_monomial(require(t, "monomial", tp), tp + ".monomial");
        term.eta = read_number(require(t, "eta", tp), tp + ".eta");
        term.q1 = read_number(require(t, "q1", tp), tp + ".q1");
        if (phi.dim == 0) phi.dim = term.monomial.dim();
        if (term.monomial.dim() != phi.dim)
            field_error(tp + ".monomial", "has " + std::to_string(term.monomial.dim()) + " components, expected " +
                                              std::to_string(phi.dim));
        phi.terms.push_back(std::move(term));
    }
    if (phi.dim == 0) phi.dim = 1;
    if (auto it = j.find("scale"); it != j.end()) phi.scale = read_number(*it, path + ".scale");
    if (auto it = j.find("shift"); it != j.end()) {
        if (!it->is_array()) field_error(path + ".shift", "expected an array of numbers");
        for (std::size_t i = 0; i < it->size(); ++i)
            phi.shift.push_back(read_number((*it)[i], path + ".shift[" + std::to_string(i) + "]"));
    }
    try {
        phi.validate();
    } catch (const InputError& e) {
        field_error(path, e.what());
    }
    return phi;
}

void read_grid(const Json& j, const std::string& path, SamplePlan& plan) {
    if (!j.is_object()) field_error(path, "expected an object {radius, points_per_axis}");
    reject_unknown(j, {"radius", "points_per_axis"}, path);
    if (auto it = j.find("radius"); it != j.end()) {
        plan.radius = read_number(*it, path + ".radius");
        if (!(plan.radius > 0.0)) field_error(path + ".radius", "must be > 0");
    }
    if (auto it = j.find("points_per_axis"); it != j.end()) {
        if (!it->is_number_unsigned() || it->get<unsigned>() < 2)
            field_error(path + ".points_per_axis", "expected an integer >= 2");
        plan.points_per_axis = it->get<unsigned>();
    }
}

WeightSequence read_weights(const Json& j, const std::string& path) {
    if (!j.is_object() || j.size() != 1) field_error(path, "expected {\"gevrey\": kappa} or {\"table\": [...]}");
    if (auto it = j.find("gevrey"); it != j.end()) return WeightSequence::gevrey(read_number(*it, path + ".gevrey"));
    if (auto it = j.find("table"); it != j.end()) {
        if (!it->is_array()) field_error(path + ".table", "expected an array of numbers");
        std::vector<double> values;
        for (std::size_t i = 0; i < it->size(); ++i)
            values.push_back(read_number((*it)[i], path + ".table[" + std::to_string(i) + "]"));
        return WeightSequence::table(std::move(values));
    }
    field_error(path + "." + j.begin().key(), "unknown field");
}

Polynomial read_polynomial(const Json& j, const std::string& path) {
    if (!j.is_object()) field_error(path, "expected an object {dim, terms: [...]}");
    reject_unknown(j, {"dim", "terms"}, path);
    const Json& d = require(j, "dim", path);
    if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) field_error(path + ".dim", "expected a positive integer");
    Polynomial p(d.get<std::size_t>());
    const Json& terms = require(j, "terms", path);
    if (!terms.is_array()) field_error(path + ".terms", "expected an array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string tp = path + ".terms[" + std::to_string(i) + "]";
        reject_unknown(terms[i], {"coeff", "monomial"}, tp);
        const Rational c = read_rational(require(terms[i], "coeff", tp), tp + ".coeff");
        const MultiIndex m = read_monomial(require(terms[i], "monomial", tp), tp + ".monomial");
        if (m.dim() != p.dim()) field_error(tp + ".monomial", "dimension differs from dim");
        p.add_term(c, m);
    }
    return p;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json to_json(const LogValue& v) {
    return Json{{"sign", v.sign()}, {"log_magnitude", v.log_magnitude()}};
}

Json to_json(const MultiIndex& alpha) {
    Json out = Json::array();
    for (unsigned c : alpha.components()) out.push_back(c);
    return out;
}

Json to_json(const std::vector<double>& xs) {
    Json out = Json::array();
    for (double x : xs) out.push_back(x);
    return out;
}

Json to_json(const KernelSpec& spec) { return Json{{"s", spec.s}, {"q", spec.q}}; }

Json to_json(const TestFunctionSpec& phi) {
    Json terms = Json::array();
    for (const auto& t : phi.terms)
        terms.push_back(Json{{"coeff", t.coeff}, {"monomial", to_json(t.monomial)}, {"eta", t.eta}, {"q1", t.q1}});
    Json out{{"dim", phi.dim}, {"terms", std::move(terms)}};
    if (phi.scale != 1.0) out["scale"] = phi.scale;
    if (!phi.shift.empty()) out["shift"] = to_json(phi.shift);
    return out;
}

Json to_json(const BoundReport& report) {
    Json params = Json::object();
    for (const auto& [name, value] : report.parameters) params[name] = value;
    Json fits = Json::array();
    for (const auto& f : report.fits)
        fits.push_back(Json{{"label", f.label},
                            {"order", f.order},
                            {"fitted_constant", f.fitted_constant},
                            {"worst_ratio", f.worst_ratio},
                            {"worst_location", to_json(f.worst_location)}});
    Json violations = Json::array();
    for (const auto& v : report.violations) {
        Json e{{"label", v.label}, {"x", to_json(v.x)}};
        if (!v.t.empty()) e["t"] = to_json(v.t);
        e["ratio"] = v.ratio;
        if (!v.detail.empty()) e["detail"] = v.detail;
        violations.push_back(std::move(e));
    }
    return Json{{"bound", to_string(report.id)},
                {"passed", report.passed()},
                {"parameters", std::move(params)},
                {"sample_count", report.sample_count},
                {"validation_count", report.validation_count},
                {"fitted_constant", report.fitted_constant},
                {"worst_ratio", report.worst_ratio},
                {"worst_location", to_json(report.worst_location)},
                {"worst_label", report.worst_label},
                {"fits", std::move(fits)},
                {"violation_count", report.violation_count},
                {"violations", std::move(violations)},
                {"notes", report.notes}};
}

Json to_json(const WeightChecks& c) {
    Json m1_failures = Json::array();
    for (auto p : c.m1_failures) m1_failures.push_back(p);
    return Json{{"horizon", c.horizon},
                {"m1", Json{{"holds", c.m1_holds}, {"failures", std::move(m1_failures)}}},
                {"m2", Json{{"holds", c.m2_holds}, {"c0", c.m2_c0}, {"H", c.m2_H}}},
                {"m6", Json{{"holds", c.m6.holds}, {"C", c.m6.C}, {"L", c.m6.L}, {"analytic", c.m6.analytic}}},
                {"m5", Json{{"exponent", c.m5_exponent}, {"c0_estimate", c.m5_c0_estimate}}},
                {"notes", c.notes}};
}

Json to_json(const SeminormResult& r) {
    Json terms = Json::array();
    for (const auto& t : r.terms)
        terms.push_back(Json{{"alpha", to_json(t.alpha)},
                             {"value", t.value},
                             {"location", to_json(t.location)},
                             {"edge_growth", t.edge_growth}});
    Json out{{"unbounded", r.unbounded}};
    if (!r.reason.empty()) out["reason"] = r.reason;
    out["value"] = r.unbounded ? Json(nullptr) : Json(r.value);
    out["terms"] = std::move(terms);
    return out;
}

namespace {

Json integral_json(const WeightedIntegral& w) {
    Json truncated = Json::array();
    for (const auto& v : w.truncated) truncated.push_back(to_json(v));
    return Json{{"s", w.s},
                {"k", w.k},
                {"radii", to_json(w.radii)},
                {"truncated", std::move(truncated)},
                {"quadrature_failed", w.quadrature_failed},
                {"divergent", w.divergent},
                {"analytic_finite", w.analytic_finite},
                {"value", to_json(w.value)},
                {"detail", w.detail}};
}

}  // namespace

Json to_json(const ConvolvabilityVerdict& v) {
    Json ks = Json::array();
    for (const auto& w : v.k_results) ks.push_back(integral_json(w));
    Json sps = Json::array();
    for (const auto& w : v.s_prime_results) sps.push_back(integral_json(w));
    return Json{{"subject", to_json(v.subject)},
                {"kernel", to_json(v.kernel)},
                {"q1", v.q1},
                {"q_prime", v.q_prime},
                {"weights", v.weights},
                {"hypothesis_q", v.hypothesis_q},
                {"hypothesis_q1", v.hypothesis_q1},
                {"k_results", std::move(ks)},
                {"s_prime_results", std::move(sps)},
                {"verdict", to_string(v.verdict)},
                {"criterion", v.criterion},
                {"monotone_shadow", v.monotone_shadow ? Json(*v.monotone_shadow) : Json(nullptr)},
                {"notes", v.notes}};
}

}  // namespace expconv::cli
