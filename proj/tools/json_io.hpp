#pragma once

#include "expconv/bound_report.hpp"
#include "expconv/kernel.hpp"
#include "expconv/log_value.hpp"
#include "expconv/multiindex.hpp"
#include "expconv/polynomial.hpp"
#include "expconv/spaces.hpp"
#include "expconv/test_function.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace expconv::cli {

using Json = nlohmann::ordered_json;

/// Parses `text` as JSON. Syntax errors become InputError naming `source`
/// and the line and column.
Json parse_json_text(const std::string& text, const std::string& source);
/// Inline JSON when the argument starts with '{' or '[', otherwise a file path.
Json load_json_argument(const std::string& argument, const std::string& option);

// Readers. `path` names the field in diagnostics, e.g. "test_function.terms[2]".
double read_number(const Json& j, const std::string& path);
KernelSpec read_kernel(const Json& j, const std::string& path);
/// {terms: [{coeff, monomial, eta, q1}], dim?, scale?, shift?}
TestFunctionSpec read_test_function(const Json& j, const std::string& path);
/// {radius, points_per_axis}
void read_grid(const Json& j, const std::string& path, SamplePlan& plan);
/// {"gevrey": κ} or {"table": [M_0, M_1, ...]}
WeightSequence read_weights(const Json& j, const std::string& path);
/// {dim, terms: [{coeff, monomial}]} with coefficients as numbers or rational strings
Polynomial read_polynomial(const Json& j, const std::string& path);

Json to_json(const LogValue& v);
Json to_json(const MultiIndex& alpha);
Json to_json(const std::vector<double>& xs);
Json to_json(const KernelSpec& spec);
Json to_json(const TestFunctionSpec& phi);
Json to_json(const BoundReport& report);
Json to_json(const WeightChecks& checks);
Json to_json(const SeminormResult& result);
Json to_json(const ConvolvabilityVerdict& verdict);

/// 17 significant digits.
std::string format_double(double v);

}  // namespace expconv::cli
