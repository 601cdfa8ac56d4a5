#pragma once

// Brute-force references for the partition enumerator. Deliberately naive:
// no pruning beyond the running sum, and an independent ≺ implementation.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

using Index = std::vector<unsigned>;

inline unsigned order(const Index& a) {
    unsigned s = 0;
    for (unsigned v : a) s += v;
    return s;
}

inline bool prec(const Index& b, const Index& a) {
    if (order(b) != order(a)) return order(b) < order(a);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (b[i] != a[i]) return b[i] < a[i];
    return false;
}

/// All integer partitions of n, each as a non-increasing list.
inline std::vector<std::vector<unsigned>> integer_partitions(unsigned n) {
    std::vector<std::vector<unsigned>> out;
    std::vector<unsigned> current;
    std::function<void(unsigned, unsigned)> go = [&](unsigned remaining, unsigned cap) {
        if (remaining == 0) {
            out.push_back(current);
            return;
        }
        for (unsigned p = std::min(cap, remaining); p >= 1; --p) {
            current.push_back(p);
            go(remaining - p, p);
            current.pop_back();
        }
    };
    go(n, n);
    return out;
}

struct Term {
    std::vector<Index> parts;  // ≺-ascending
    std::vector<unsigned> multiplicities;
    bool operator==(const Term&) const = default;
};

/// p(α, r) by exhaustive search over multisets of r nonzero indices ≤ α.
inline std::vector<Term> partition_terms(const Index& alpha, unsigned r) {
    const std::size_t d = alpha.size();
    std::vector<Index> candidates;
    Index cur(d, 0);
    std::function<void(std::size_t)> all = [&](std::size_t axis) {
        if (axis == d) {
            if (order(cur) > 0) candidates.push_back(cur);
            return;
        }
        for (unsigned v = 0; v <= alpha[axis]; ++v) {
            cur[axis] = v;
            all(axis + 1);
        }
    };
    all(0);
    std::sort(candidates.begin(), candidates.end(), prec);

    std::vector<Term> out;
    std::vector<std::size_t> chosen;
    std::function<void(std::size_t)> pick = [&](std::size_t start) {
        if (chosen.size() == r) {
            Index sum(d, 0);
            for (std::size_t c : chosen)
                for (std::size_t i = 0; i < d; ++i) sum[i] += candidates[c][i];
            if (sum != alpha) return;
            Term t;
            for (std::size_t c : chosen) {
                if (!t.parts.empty() && t.parts.back() == candidates[c]) {
                    ++t.multiplicities.back();
                } else {
                    t.parts.push_back(candidates[c]);
                    t.multiplicities.push_back(1);
                }
            }
            out.push_back(t);
            return;
        }
        for (std::size_t c = start; c < candidates.size(); ++c) {
            chosen.push_back(c);
            pick(c);
            chosen.pop_back();
        }
    };
    pick(0);
    return out;
}

}  // namespace oracle
