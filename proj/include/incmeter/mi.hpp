#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "incmeter/core.hpp"

namespace incmeter {

// Enumeration caps. Exceeding one raises BudgetError; results are never
// silently truncated.
struct MiBudget {
    std::uint64_t max_mis = 1'000'000;
    std::uint64_t max_supports_per_literal = 10'000;
};

class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MISubset {
    std::vector<ElementId> element_ids;  // sorted

    friend bool operator==(const MISubset&, const MISubset&) = default;
    friend auto operator<=>(const MISubset&, const MISubset&) = default;
};

struct MICollection {
    std::vector<MISubset> subsets;  // canonical: sorted lexicographically

    bool element_participates(ElementId id) const {
        for (const MISubset& m : subsets)
            if (std::binary_search(m.element_ids.begin(), m.element_ids.end(), id)) return true;
        return false;
    }

    friend bool operator==(const MICollection&, const MICollection&) = default;
};

namespace detail {

inline void canonicalize(MICollection& mic) {
    for (MISubset& m : mic.subsets) std::sort(m.element_ids.begin(), m.element_ids.end());
    std::sort(mic.subsets.begin(), mic.subsets.end());
}

inline bool is_mi_mask(const BaseIndex& index, const Bitset& mask) {
    if (index.subset_consistent(mask)) return false;
    Bitset probe = mask;
    bool minimal = true;
    mask.for_each([&](std::size_t i) {
        if (!minimal) return;
        probe.reset(i);
        if (!index.subset_consistent(probe)) minimal = false;
        probe.set(i);
    });
    return minimal;
}

// Antichain insert: keeps only subset-minimal members. Returns true if the
// family changed.
inline bool insert_minimal(std::vector<Bitset>& family, const Bitset& candidate) {
    for (const Bitset& s : family)
        if (s.subset_of(candidate)) return false;
    std::erase_if(family, [&](const Bitset& s) { return candidate.subset_of(s); });
    family.push_back(candidate);
    return true;
}

}  // namespace detail

// True iff the candidate subset is inconsistent while every single-element
// removal is consistent.
inline bool is_mi(const RuleBase& base, std::span<const ElementId> candidate) {
    detail::Bitset mask(base.size());
    for (ElementId id : candidate) {
        if (id >= base.size()) throw std::out_of_range("unknown element id");
        mask.set(id);
    }
    detail::BaseIndex index(base);
    return detail::is_mi_mask(index, mask);
}

// Reference oracle: examines every subset of the base. Hard-capped at 20
// elements.
inline MICollection enumerate_mi_bruteforce(const RuleBase& base) {
    if (base.size() > 20) throw std::invalid_argument("enumerate_mi_bruteforce: base exceeds 20 elements");
    const std::uint32_t n = static_cast<std::uint32_t>(base.size());
    detail::BaseIndex index(base);

    const std::uint32_t total = 1u << n;
    std::vector<bool> inconsistent(total, false);
    detail::Bitset mask(n);
    for (std::uint32_t m = 1; m < total; ++m) {
        for (std::uint32_t i = 0; i < n; ++i) {
            if ((m >> i) & 1)
                mask.set(i);
            else
                mask.reset(i);
        }
        inconsistent[m] = !index.subset_consistent(mask);
    }

    MICollection out;
    for (std::uint32_t m = 1; m < total; ++m) {
        if (!inconsistent[m]) continue;
        bool minimal = true;
        for (std::uint32_t i = 0; i < n && minimal; ++i)
            if (((m >> i) & 1) && inconsistent[m & ~(1u << i)]) minimal = false;
        if (!minimal) continue;
        MISubset sub;
        for (std::uint32_t i = 0; i < n; ++i)
            if ((m >> i) & 1) sub.element_ids.push_back(i);
        out.subsets.push_back(std::move(sub));
    }
    detail::canonicalize(out);
    return out;
}

// Enumerates the minimal inconsistent subsets via derivation-support
// tracking: every derivable literal carries its subset-minimal support
// sets; each complementary literal pair contributes the unions of its
// support pairs; the union family is minimized and each survivor verified.
inline MICollection enumerate_mi(const RuleBase& base, const MiBudget& budget = {}) {
    const std::size_t n = base.size();
    detail::BaseIndex index(base);

    std::vector<std::uint32_t> model_lits;
    bool consistent = index.closure(nullptr, false, &model_lits);
    if (consistent) return {};

    std::vector<bool> derived(index.literal_count(), false);
    for (std::uint32_t li : model_lits) derived[li] = true;

    // Minimal support families, per derived literal.
    std::vector<std::vector<detail::Bitset>> supports(index.literal_count());
    std::vector<std::vector<std::uint32_t>> consumers(index.literal_count());  // live rules by body literal
    std::vector<std::uint32_t> live_rules;
    for (std::uint32_t ei = 0; ei < n; ++ei) {
        auto body = index.body_of(ei);
        if (body.empty()) {
            detail::Bitset s(n);
            s.set(ei);
            detail::insert_minimal(supports[index.head_of(ei)], s);
            continue;
        }
        bool live = true;
        for (std::uint32_t li : body)
            if (!derived[li]) live = false;
        if (!live) continue;
        live_rules.push_back(ei);
        for (std::uint32_t li : body) consumers[li].push_back(ei);
    }

    std::vector<bool> queued(n, false);
    std::vector<std::uint32_t> worklist = live_rules;
    for (std::uint32_t ei : worklist) queued[ei] = true;

    auto combine = [&](std::uint32_t ei) -> bool {
        auto body = index.body_of(ei);
        std::uint32_t head = index.head_of(ei);
        bool changed = false;
        detail::Bitset acc(n);
        acc.set(ei);
        // Cross product over the body literals' support families.
        std::vector<std::size_t> choice(body.size(), 0);
        std::vector<detail::Bitset> stack;
        stack.reserve(body.size() + 1);
        stack.push_back(acc);
        std::size_t depth = 0;
        while (true) {
            if (depth == body.size()) {
                if (detail::insert_minimal(supports[head], stack.back())) {
                    changed = true;
                    if (supports[head].size() > budget.max_supports_per_literal)
                        throw BudgetError("support budget exhausted while enumerating minimal inconsistent subsets");
                }
                // backtrack
                while (depth > 0) {
                    --depth;
                    stack.pop_back();
                    if (++choice[depth] < supports[body[depth]].size()) break;
                    choice[depth] = 0;
                }
                if (depth == 0 && choice[0] == 0) break;
            }
            const auto& family = supports[body[depth]];
            if (family.empty()) break;  // nothing derivable yet through this literal
            detail::Bitset next = stack.back();
            next |= family[choice[depth]];
            stack.push_back(std::move(next));
            ++depth;
        }
        return changed;
    };

    for (std::size_t qi = 0; qi < worklist.size(); ++qi) {
        std::uint32_t ei = worklist[qi];
        queued[ei] = false;
        if (!combine(ei)) continue;
        for (std::uint32_t consumer : consumers[index.head_of(ei)]) {
            if (!queued[consumer]) {
                queued[consumer] = true;
                worklist.push_back(consumer);
            }
        }
    }

    // Union the support pairs of every complementary literal pair.
    std::vector<detail::Bitset> candidates;
    for (std::uint32_t li : model_lits) {
        if (index.literal_key(li) & 1) continue;  // visit each atom once, from the positive side
        std::uint32_t ci = index.complement(li);
        if (ci == 0xffffffffu || !derived[ci]) continue;
        for (const detail::Bitset& sa : supports[li]) {
            for (const detail::Bitset& sb : supports[ci]) {
                detail::Bitset u = sa;
                u |= sb;
                if (detail::insert_minimal(candidates, u) && candidates.size() > budget.max_mis)
                    throw BudgetError("minimal-inconsistent-subset budget exhausted");
            }
        }
    }

    MICollection out;
    for (const detail::Bitset& c : candidates) {
        if (!detail::is_mi_mask(index, c)) continue;
        out.subsets.push_back(MISubset{c.to_ids()});
    }
    if (out.subsets.size() > budget.max_mis)
        throw BudgetError("minimal-inconsistent-subset budget exhausted");
    detail::canonicalize(out);
    return out;
}

inline bool participates(const RuleBase& base, ElementId id, const MiBudget& budget = {}) {
    if (id >= base.size()) throw std::out_of_range("unknown element id");
    return enumerate_mi(base, budget).element_participates(id);
}

}  // namespace incmeter
