#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace expconv {

enum class BoundId { r_ta, prva1, lemma33, cor34, lemma35, thm36, lemma41, lemma42, weights };

std::string to_string(BoundId id);
/// Accepts the CLI spellings: r-ta, prva1, lemma33, cor34, lemma35, thm36,
/// lemma41, lemma42, weights. Throws InputError otherwise.
BoundId parse_bound_id(const std::string& text);

struct Violation {
    std::string label;  // which multi-index or sub-check
    std::vector<double> x;
    std::vector<double> t;  // shift, when the check has one
    double ratio = 0.0;     // observed/allowed; > 1 is the violation
    std::string detail;
};

/// Fit for one multi-index (or one named sub-check).
struct ConstantFit {
    std::string label;
    unsigned order = 0;
    double fitted_constant = 1.0;
    double worst_ratio = 0.0;  // sup of observed/allowed under the report's constant
    std::vector<double> worst_location;
};

struct BoundReport {
    BoundId id = BoundId::r_ta;
    std::vector<std::pair<std::string, double>> parameters;
    std::size_t sample_count = 0;
    std::size_t validation_count = 0;
    double fitted_constant = 1.0;
    double worst_ratio = 0.0;
    std::vector<double> worst_location;
    std::string worst_label;
    std::vector<ConstantFit> fits;
    std::size_t violation_count = 0;
    std::vector<Violation> violations;  // first kMaxStoredViolations only
    std::vector<std::string> notes;

    static constexpr std::size_t kMaxStoredViolations = 100;

    bool passed() const { return violation_count == 0; }
    void add_violation(Violation v);
    void add_parameter(std::string name, double value) { parameters.emplace_back(std::move(name), value); }
    std::optional<double> parameter(const std::string& name) const;
};

}  // namespace expconv
