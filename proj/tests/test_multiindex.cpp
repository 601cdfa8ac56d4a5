#include "expconv/error.hpp"
#include "expconv/multiindex.hpp"
#include "oracles/partition_oracle.hpp"

#include <doctest.h>

#include <random>

using namespace expconv;

namespace {

oracle::Index raw(const MultiIndex& a) { return {a.components().begin(), a.components().end()}; }

std::vector<oracle::Term> as_oracle_terms(const PartitionSet& set) {
    std::vector<oracle::Term> out;
    for (const auto& t : set.terms) {
        oracle::Term o;
        for (const auto& p : t.parts) o.parts.push_back(raw(p));
        o.multiplicities = t.multiplicities;
        out.push_back(o);
    }
    return out;
}

}  // namespace

TEST_CASE("prec_less examples and errors") {
    CHECK(prec_less({0, 1}, {1, 0}));
    CHECK(prec_less({1, 0}, {0, 2}));
    CHECK_FALSE(prec_less({1, 1}, {1, 1}));
    CHECK_THROWS_AS(prec_less({1}, {1, 0}), InputError);
}

TEST_CASE("prec_less is a strict total order") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<unsigned> comp(0, 3), dim(1, 3);
    for (int i = 0; i < 10000; ++i) {
        const std::size_t d = dim(rng);
        std::vector<unsigned> a(d), b(d);
        for (auto& v : a) v = comp(rng);
        for (auto& v : b) v = comp(rng);
        const MultiIndex alpha(a), beta(b);
        const int holds = int(prec_less(beta, alpha)) + int(prec_less(alpha, beta)) + int(alpha == beta);
        REQUIRE(holds == 1);
        CHECK(prec_less(beta, alpha) == oracle::prec(b, a));
    }
}

TEST_CASE("multi-index basics") {
    const MultiIndex a{2, 0, 3};
    CHECK(a.order() == 5);
    CHECK(a.factorial() == 12);
    CHECK_THROWS_AS(MultiIndex(std::vector<unsigned>{}), InputError);
    const auto all = multi_indices_up_to(2, 3);
    CHECK(all.size() == 10);
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(prec_less(all[i - 1], all[i]));
    CHECK(sub_indices({1, 2}).size() == 6);
    CHECK(binomial({3, 2}, {1, 1}) == 6);
}

TEST_CASE("partition examples") {
    auto one = enumerate_partition_terms({1}, 1);
    REQUIRE(one->terms.size() == 1);
    CHECK(one->terms[0].parts == std::vector<MultiIndex>{{1}});
    CHECK(one->terms[0].multiplicities == std::vector<unsigned>{1});

    auto two = enumerate_partition_terms({2}, 2);
    REQUIRE(two->terms.size() == 1);
    CHECK(two->terms[0].parts == std::vector<MultiIndex>{{1}});
    CHECK(two->terms[0].multiplicities == std::vector<unsigned>{2});
    CHECK(as_oracle_terms(*two) == oracle::partition_terms({2}, 2));

    auto mixed = enumerate_partition_terms({1, 1}, 2);
    REQUIRE(mixed->terms.size() == 1);
    CHECK(mixed->terms[0].parts == std::vector<MultiIndex>{{0, 1}, {1, 0}});
    CHECK(mixed->terms[0].multiplicities == std::vector<unsigned>{1, 1});

    CHECK_THROWS_AS(enumerate_partition_terms({2}, 3), InputError);
    CHECK_THROWS_AS(enumerate_partition_terms({2}, 0), InputError);
    CHECK_THROWS_AS(enumerate_partition_terms({0, 0}, 1), InputError);
}

TEST_CASE("padded accessors follow the zero-prefix convention") {
    auto set = enumerate_partition_terms({3}, 2);
    REQUIRE(set->terms.size() == 1);
    const auto& t = set->terms[0];
    CHECK(t.n == 3);
    CHECK(t.multiplicity(1) == 0);
    CHECK(t.part(1) == MultiIndex{0});
    CHECK(t.part(2) == MultiIndex{1});
    CHECK(t.part(3) == MultiIndex{2});
    CHECK(t.multiplicity(2) == 1);
    CHECK(t.multiplicity(3) == 1);
}

TEST_CASE("enumerator matches brute force and term invariants for d <= 3") {
    for (std::size_t d = 1; d <= 3; ++d) {
        for (const auto& alpha : multi_indices_up_to(d, d == 3 ? 4 : 5)) {
            if (alpha.is_zero()) continue;
            for (unsigned r = 1; r <= alpha.order(); ++r) {
                auto set = enumerate_partition_terms(alpha, r);
                for (const auto& t : set->terms) {
                    REQUIRE(t.total_multiplicity() == r);
                    REQUIRE(t.weighted_sum() == alpha);
                    for (std::size_t j = 1; j < t.parts.size(); ++j) REQUIRE(prec_less(t.parts[j - 1], t.parts[j]));
                }
                for (std::size_t i = 1; i < set->terms.size(); ++i)
                    REQUIRE(canonical_less(set->terms[i - 1], set->terms[i]));
                auto expected = oracle::partition_terms(raw(alpha), r);
                auto got = as_oracle_terms(*set);
                auto by_value = [](const oracle::Term& a, const oracle::Term& b) {
                    return std::tie(a.parts, a.multiplicities) < std::tie(b.parts, b.multiplicities);
                };
                std::sort(expected.begin(), expected.end(), by_value);
                std::sort(got.begin(), got.end(), by_value);
                REQUIRE(got == expected);
            }
        }
    }
}

TEST_CASE("d = 1 term counts equal integer partition counts") {
    for (unsigned n = 1; n <= 7; ++n) {
        const std::size_t reference = oracle::integer_partitions(n).size();
        std::size_t total = 0;
        for (unsigned r = 1; r <= n; ++r) total += enumerate_partition_terms({n}, r)->terms.size();
        CHECK(total == reference);
    }
}

TEST_CASE("weight sum examples and bound") {
    CHECK(faa_di_bruno_weight_sum({1}) == 1);
    CHECK(faa_di_bruno_weight_sum({3}) == 4);
    CHECK(faa_di_bruno_weight_sum({1, 1}) == 3);
    CHECK(faa_di_bruno_weight_bound({1, 1}) == 64);
    for (const auto& alpha : multi_indices_up_to(2, 4))
        if (!alpha.is_zero()) CHECK(Rational(faa_di_bruno_weight_bound(alpha)) >= faa_di_bruno_weight_sum(alpha));
}
