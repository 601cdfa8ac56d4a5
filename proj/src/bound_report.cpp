#include "expconv/bound_report.hpp"

#include "expconv/error.hpp"

#include <array>

namespace expconv {

namespace {
constexpr std::array<std::pair<BoundId, const char*>, 9> kNames{{
    {BoundId::r_ta, "r-ta"},
    {BoundId::prva1, "prva1"},
    {BoundId::lemma33, "lemma33"},
    {BoundId::cor34, "cor34"},
    {BoundId::lemma35, "lemma35"},
    {BoundId::thm36, "thm36"},
    {BoundId::lemma41, "lemma41"},
    {BoundId::lemma42, "lemma42"},
    {BoundId::weights, "weights"},
}};
}  // namespace

std::string to_string(BoundId id) {
    for (const auto& [k, name] : kNames)
        if (k == id) return name;
    return "unknown";
}

BoundId parse_bound_id(const std::string& text) {
    for (const auto& [k, name] : kNames)
        if (text == name) return k;
    throw InputError("unknown bound id '" + text + "'");
}

void BoundReport::add_violation(Violation v) {
    ++violation_count;
    if (violations.size() < kMaxStoredViolations) violations.push_back(std::move(v));
}

std::optional<double> BoundReport::parameter(const std::string& name) const {
    for (const auto& [k, v] : parameters)
        if (k == name) return v;
    return std::nullopt;
}

}  // namespace expconv
