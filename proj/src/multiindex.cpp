#include "expconv/multiindex.hpp"

#include "expconv/error.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <utility>

namespace expconv {

MultiIndex::MultiIndex(std::initializer_list<unsigned> components) : components_(components) {
    if (components_.empty()) throw InputError("multi-index needs dimension >= 1");
}

MultiIndex::MultiIndex(std::vector<unsigned> components) : components_(std::move(components)) {
    if (components_.empty()) throw InputError("multi-index needs dimension >= 1");
}

MultiIndex MultiIndex::zero(std::size_t dim) { return MultiIndex(std::vector<unsigned>(dim, 0)); }

MultiIndex MultiIndex::unit(std::size_t dim, std::size_t axis, unsigned height) {
    std::vector<unsigned> c(dim, 0);
    c.at(axis) = height;
    return MultiIndex(std::move(c));
}

unsigned MultiIndex::order() const {
    return std::accumulate(components_.begin(), components_.end(), 0u);
}

BigInt MultiIndex::factorial() const {
    BigInt result = 1;
    for (unsigned c : components_) result *= expconv::factorial(c);
    return result;
}

bool MultiIndex::divides_into(const MultiIndex& alpha) const {
    if (dim() != alpha.dim()) throw InputError("multi-index dimension mismatch");
    for (std::size_t i = 0; i < dim(); ++i)
        if (components_[i] > alpha.components_[i]) return false;
    return true;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
    if (dim() != other.dim()) throw InputError("multi-index dimension mismatch");
    std::vector<unsigned> c(components_);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += other.components_[i];
    return MultiIndex(std::move(c));
}

MultiIndex MultiIndex::operator-(const MultiIndex& other) const {
    if (!other.divides_into(*this)) throw InputError("multi-index subtraction underflow");
    std::vector<unsigned> c(components_);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= other.components_[i];
    return MultiIndex(std::move(c));
}

MultiIndex MultiIndex::scaled(unsigned k) const {
    std::vector<unsigned> c(components_);
    for (auto& v : c) v *= k;
    return MultiIndex(std::move(c));
}

std::string MultiIndex::to_string() const {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < components_.size(); ++i) out << (i ? "," : "") << components_[i];
    out << ')';
    return out.str();
}

bool prec_less(const MultiIndex& beta, const MultiIndex& alpha) {
    if (beta.dim() != alpha.dim())
        throw InputError("prec_less: dimension mismatch " + beta.to_string() + " vs " + alpha.to_string());
    const unsigned nb = beta.order();
    const unsigned na = alpha.order();
    if (nb != na) return nb < na;
    for (std::size_t i = 0; i < beta.dim(); ++i)
        if (beta[i] != alpha[i]) return beta[i] < alpha[i];
    return false;
}

namespace {

void collect_up_to(std::size_t dim, unsigned remaining, std::vector<unsigned>& current,
                   std::vector<MultiIndex>& out) {
    if (current.size() == dim) {
        out.emplace_back(current);
        return;
    }
    for (unsigned v = 0; v <= remaining; ++v) {
        current.push_back(v);
        collect_up_to(dim, remaining - v, current, out);
        current.pop_back();
    }
}

void collect_box(const MultiIndex& alpha, std::vector<unsigned>& current, std::vector<MultiIndex>& out) {
    if (current.size() == alpha.dim()) {
        out.emplace_back(current);
        return;
    }
    for (unsigned v = 0; v <= alpha[current.size()]; ++v) {
        current.push_back(v);
        collect_box(alpha, current, out);
        current.pop_back();
    }
}

}  // namespace

std::vector<MultiIndex> multi_indices_up_to(std::size_t dim, unsigned max_order) {
    if (dim == 0) throw InputError("dimension must be >= 1");
    std::vector<MultiIndex> out;
    std::vector<unsigned> current;
    collect_up_to(dim, max_order, current, out);
    std::sort(out.begin(), out.end(), prec_less);
    return out;
}

std::vector<MultiIndex> sub_indices(const MultiIndex& alpha) {
    std::vector<MultiIndex> out;
    std::vector<unsigned> current;
    collect_box(alpha, current, out);
    std::sort(out.begin(), out.end(), prec_less);
    return out;
}

BigInt binomial(const MultiIndex& alpha, const MultiIndex& beta) {
    return alpha.factorial() / (beta.factorial() * (alpha - beta).factorial());
}

unsigned PartitionTerm::multiplicity(unsigned j) const {
    if (j == 0 || j > n) throw InputError("partition term index out of range");
    const unsigned leading_zeros = n - static_cast<unsigned>(parts.size());
    return j <= leading_zeros ? 0u : multiplicities[j - leading_zeros - 1];
}

MultiIndex PartitionTerm::part(unsigned j) const {
    if (j == 0 || j > n) throw InputError("partition term index out of range");
    const unsigned leading_zeros = n - static_cast<unsigned>(parts.size());
    return j <= leading_zeros ? MultiIndex::zero(parts.front().dim()) : parts[j - leading_zeros - 1];
}

unsigned PartitionTerm::total_multiplicity() const {
    return std::accumulate(multiplicities.begin(), multiplicities.end(), 0u);
}

MultiIndex PartitionTerm::weighted_sum() const {
    MultiIndex sum = MultiIndex::zero(parts.front().dim());
    for (std::size_t j = 0; j < parts.size(); ++j) sum = sum + parts[j].scaled(multiplicities[j]);
    return sum;
}

bool canonical_less(const PartitionTerm& a, const PartitionTerm& b) {
    const std::size_t common = std::min(a.parts.size(), b.parts.size());
    for (std::size_t j = 0; j < common; ++j) {
        if (prec_less(a.parts[j], b.parts[j])) return true;
        if (prec_less(b.parts[j], a.parts[j])) return false;
    }
    if (a.parts.size() != b.parts.size()) return a.parts.size() < b.parts.size();
    return a.multiplicities < b.multiplicities;
}

namespace {

// Descends from the ≺-largest admissible part, so every emitted sequence is
// strictly ≺-decreasing and each element of p(α, r) is produced exactly once.
class PartitionEnumerator {
public:
    PartitionEnumerator(const MultiIndex& alpha, unsigned r) : alpha_(alpha), r_(r) {
        for (auto& beta : sub_indices(alpha))
            if (!beta.is_zero()) candidates_.push_back(std::move(beta));
    }

    std::vector<PartitionTerm> run() {
        descend(alpha_.components(), r_, candidates_.size());
        return std::move(out_);
    }

private:
    void descend(std::span<const unsigned> residual, unsigned count_left, std::size_t upper) {
        for (std::size_t c = upper; c-- > 0;) {
            const MultiIndex& beta = candidates_[c];
            unsigned kmax = count_left;
            for (std::size_t i = 0; i < beta.dim(); ++i)
                if (beta[i] > 0) kmax = std::min(kmax, residual[i] / beta[i]);
            for (unsigned k = kmax; k >= 1; --k) {
                std::vector<unsigned> next(residual.begin(), residual.end());
                unsigned next_order = 0;
                for (std::size_t i = 0; i < next.size(); ++i) {
                    next[i] -= k * beta[i];
                    next_order += next[i];
                }
                const unsigned next_count = count_left - k;
                stack_parts_.push_back(c);
                stack_mult_.push_back(k);
                if (next_order == 0) {
                    if (next_count == 0) emit();
                } else if (next_count >= 1 && next_count <= next_order) {
                    descend(next, next_count, c);
                }
                stack_parts_.pop_back();
                stack_mult_.pop_back();
            }
        }
    }

    void emit() {
        PartitionTerm term;
        term.n = alpha_.order();
        for (std::size_t j = stack_parts_.size(); j-- > 0;) {
            term.parts.push_back(candidates_[stack_parts_[j]]);
            term.multiplicities.push_back(stack_mult_[j]);
        }
        out_.push_back(std::move(term));
    }

    const MultiIndex& alpha_;
    unsigned r_;
    std::vector<MultiIndex> candidates_;
    std::vector<std::size_t> stack_parts_;
    std::vector<unsigned> stack_mult_;
    std::vector<PartitionTerm> out_;
};

std::mutex cache_mutex;
std::map<std::pair<MultiIndex, unsigned>, std::shared_ptr<const PartitionSet>> cache;

}  // namespace

std::shared_ptr<const PartitionSet> enumerate_partition_terms(const MultiIndex& alpha, unsigned r) {
    const unsigned n = alpha.order();
    if (n == 0) throw InputError("enumerate_partition_terms: |alpha| must be >= 1");
    if (r < 1 || r > n)
        throw InputError("enumerate_partition_terms: r=" + std::to_string(r) + " outside [1," +
                         std::to_string(n) + "]");
    const auto key = std::make_pair(alpha, r);
    {
        std::lock_guard lock(cache_mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto set = std::make_shared<PartitionSet>();
    set->alpha = alpha;
    set->r = r;
    set->terms = PartitionEnumerator(alpha, r).run();
    std::sort(set->terms.begin(), set->terms.end(), canonical_less);
    std::lock_guard lock(cache_mutex);
    return cache.emplace(key, std::move(set)).first->second;
}

Rational faa_di_bruno_weight_sum(const MultiIndex& alpha) {
    const unsigned n = alpha.order();
    if (n == 0) throw InputError("faa_di_bruno_weight_sum: |alpha| must be >= 1");
    Rational total = 0;
    for (unsigned m = 1; m <= n; ++m) {
        Rational inner = 0;
        for (const auto& term : enumerate_partition_terms(alpha, m)->terms) {
            BigInt denom = 1;
            for (unsigned k : term.multiplicities) denom *= factorial(k);
            inner += Rational(1, denom);
        }
        total += Rational(factorial(m)) * inner;
    }
    return total;
}

BigInt faa_di_bruno_weight_bound(const MultiIndex& alpha) {
    return BigInt(1) << (alpha.order() * (alpha.dim() + 1));
}

}  // namespace expconv
