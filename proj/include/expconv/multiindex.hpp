#pragma once

#include "expconv/rational.hpp"

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace expconv {

/// A multi-index α ∈ ℕ^d, d ≥ 1.
class MultiIndex {
public:
    MultiIndex() = default;
    MultiIndex(std::initializer_list<unsigned> components);
    explicit MultiIndex(std::vector<unsigned> components);

    static MultiIndex zero(std::size_t dim);
    static MultiIndex unit(std::size_t dim, std::size_t axis, unsigned height = 1);

    std::size_t dim() const { return components_.size(); }
    unsigned operator[](std::size_t i) const { return components_[i]; }
    std::span<const unsigned> components() const { return components_; }

    /// |α| = Σ αᵢ
    unsigned order() const;
    /// α! = Π αᵢ!
    BigInt factorial() const;
    bool is_zero() const { return order() == 0; }

    /// Componentwise β ≤ α.
    bool divides_into(const MultiIndex& alpha) const;

    MultiIndex operator+(const MultiIndex& other) const;
    MultiIndex operator-(const MultiIndex& other) const;
    MultiIndex scaled(unsigned k) const;

    bool operator==(const MultiIndex&) const = default;
    /// Plain lexicographic order for use as a map key; not the ≺ relation.
    auto operator<=>(const MultiIndex&) const = default;

    std::string to_string() const;

private:
    std::vector<unsigned> components_;
};

/// β ≺ α: lower order first, then the first differing component decides.
/// Throws InputError on dimension mismatch.
bool prec_less(const MultiIndex& beta, const MultiIndex& alpha);

/// Every multi-index of dimension d with |β| ≤ max_order, ≺-ascending.
std::vector<MultiIndex> multi_indices_up_to(std::size_t dim, unsigned max_order);

/// Every β ≤ α componentwise, ≺-ascending (includes 0 and α).
std::vector<MultiIndex> sub_indices(const MultiIndex& alpha);

/// α!/(β!(α-β)!)
BigInt binomial(const MultiIndex& alpha, const MultiIndex& beta);

/// One element of p(α, r). Only the s nonzero parts are stored; the padded
/// length-n view of the formula (k_j = 0, α⁽ʲ⁾ = 0 for j ≤ n - s) is derived.
struct PartitionTerm {
    unsigned n = 0;  // |α|
    std::vector<MultiIndex> parts;        // strictly ≺-ascending, all nonzero
    std::vector<unsigned> multiplicities; // parallel to parts, all > 0

    std::size_t nonzero_count() const { return parts.size(); }
    /// 1-based padded accessors over j = 1..n.
    unsigned multiplicity(unsigned j) const;
    MultiIndex part(unsigned j) const;

    unsigned total_multiplicity() const;
    MultiIndex weighted_sum() const;

    bool operator==(const PartitionTerm&) const = default;
};

struct PartitionSet {
    MultiIndex alpha;
    unsigned r = 0;
    std::vector<PartitionTerm> terms;
};

/// Canonical term order: part sequences compared element-wise by ≺
/// (a proper prefix sorts first), then multiplicity sequences.
bool canonical_less(const PartitionTerm& a, const PartitionTerm& b);

/// Exactly p(α, r), canonically ordered. Requires |α| ≥ 1 and 1 ≤ r ≤ |α|.
/// Results are cached per (α, r) for the lifetime of the process.
std::shared_ptr<const PartitionSet> enumerate_partition_terms(const MultiIndex& alpha, unsigned r);

/// Σ_{m=1}^{|α|} m! Σ_{p(α,m)} Π 1/k_j!
Rational faa_di_bruno_weight_sum(const MultiIndex& alpha);

/// 2^{|α|(d+1)}
BigInt faa_di_bruno_weight_bound(const MultiIndex& alpha);

}  // namespace expconv
