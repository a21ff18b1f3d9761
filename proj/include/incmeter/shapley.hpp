#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "incmeter/core.hpp"
#include "incmeter/measures.hpp"
#include "incmeter/mi.hpp"
#include "incmeter/rational.hpp"

namespace incmeter {

// Exact coalition enumeration is limited to this many participating
// elements; larger instances fail hard rather than approximate.
inline constexpr std::uint32_t kMaxExactSubsetBits = 24;

struct PayoffVector {
    std::vector<Rational> values;  // indexed by element id
    // Set when some minimal inconsistent subset contains no rule at all
    // (contradictory facts): its fact blame has nowhere to go and the
    // distribution identity fails.
    bool blame_unassigned = false;
};

struct ShapleyOptions {
    MiBudget budget{};
    // Reference route: no dummy-player reduction, every coalition evaluated
    // by constructing the sub-base. Slow; intended for cross-checking.
    bool reference = false;
};

struct AdjustedOptions {
    MiBudget budget{};
    bool reference = false;
};

struct ActiveReduction {
    RuleBase active;
    std::vector<ElementId> to_original;  // active id -> original id, ascending
};

// Restricts a base to the union of its minimal inconsistent subsets. For
// measures independent of free formulas, the removed elements are dummy
// players: their payoff is zero and the remaining payoffs are unchanged
// when weights are recomputed for the reduced size.
inline ActiveReduction reduce_to_active(const RuleBase& base, const MICollection& mic) {
    std::vector<bool> hit(base.size(), false);
    for (const MISubset& m : mic.subsets)
        for (ElementId id : m.element_ids) hit[id] = true;
    ActiveReduction red;
    for (ElementId i = 0; i < base.size(); ++i)
        if (hit[i]) red.to_original.push_back(i);
    red.active = base.restrict_to(red.to_original);
    return red;
}

inline ActiveReduction reduce_to_active(const RuleBase& base, const MiBudget& budget = {}) {
    return reduce_to_active(base, enumerate_mi(base, budget));
}

namespace detail {

struct CoalitionSums {
    std::vector<Rational> standard;  // weighted marginal sums, per element
    std::vector<Rational> adjusted;  // facts 0, rules standard + shifted fact blame
    bool blame_unassigned = false;
};

inline std::vector<Rational> coalition_weights(std::uint32_t n) {
    // w(s, n) = (s-1)! (n-s)! / n!, indexed by coalition size s.
    std::vector<Rational> w(n + 1, Rational(0));
    BigInt nfact = factorial(n);
    for (std::uint32_t s = 1; s <= n; ++s)
        w[s] = Rational(factorial(s - 1) * factorial(n - s), nfact);
    return w;
}

inline std::uint32_t rules_mask_of(const RuleBase& base) {
    std::uint32_t mask = 0;
    for (ElementId i = 0; i < base.size(); ++i)
        if (!base.element(i).is_fact()) mask |= (1u << i);
    return mask;
}

// The fact payoff of a coalition decomposes over the minimal inconsistent
// subsets it contains; each subset's fact share moves to that subset's own
// rules. Summed over all coalitions the weights telescope
// (sum over S containing M of w(|S|, n) = 1/|M|), leaving a closed form
// independent of the enumeration route.
inline void add_shifted_fact_blame(const RuleBase& base, const std::vector<std::uint32_t>& mi_masks,
                                   CoalitionSums& sums) {
    const std::uint32_t rules_mask = rules_mask_of(base);
    for (std::uint32_t m : mi_masks) {
        const std::uint32_t size = static_cast<std::uint32_t>(std::popcount(m));
        const std::uint32_t n_rules = static_cast<std::uint32_t>(std::popcount(m & rules_mask));
        const std::uint32_t n_facts = size - n_rules;
        if (n_facts == 0) continue;
        if (n_rules == 0) {
            sums.blame_unassigned = true;  // nothing to shift the blame to
            continue;
        }
        const Rational share(n_facts, static_cast<std::uint64_t>(size) * n_rules);
        std::uint32_t bits = m & rules_mask;
        while (bits) {
            const unsigned e = static_cast<unsigned>(std::countr_zero(bits));
            sums.adjusted[e] += share;
            bits &= bits - 1;
        }
    }
}

// Integer-tally path, valid when the measure of any sub-base equals the
// number of minimal inconsistent subsets contained in it. All inner-loop
// arithmetic is integral; exact weights are applied once at the end.
inline CoalitionSums coalition_sums_counting(const RuleBase& base,
                                             const std::vector<std::uint32_t>& mi_masks,
                                             bool need_adjusted) {
    const std::uint32_t n = static_cast<std::uint32_t>(base.size());
    const std::size_t sdim = n + 1;
    std::vector<std::int64_t> cp(n * sdim, 0);

    const std::uint32_t total = n >= 32 ? 0 : (1u << n);
    for (std::uint32_t coalition = 1; coalition < total; ++coalition) {
        const std::uint32_t s = static_cast<std::uint32_t>(std::popcount(coalition));
        for (const std::uint32_t m : mi_masks) {
            if ((m & coalition) != m) continue;
            // The marginal of e in this coalition counts the contained
            // subsets e belongs to.
            std::uint32_t bits = m;
            while (bits) {
                const unsigned e = static_cast<unsigned>(std::countr_zero(bits));
                ++cp[e * sdim + s];
                bits &= bits - 1;
            }
        }
    }

    CoalitionSums out;
    out.standard.assign(n, Rational(0));
    out.adjusted.assign(n, Rational(0));
    const std::vector<Rational> w = coalition_weights(n);
    for (std::uint32_t e = 0; e < n; ++e)
        for (std::uint32_t s = 1; s <= n; ++s)
            if (cp[e * sdim + s] != 0) out.standard[e] += w[s] * cp[e * sdim + s];
    if (need_adjusted) {
        for (std::uint32_t e = 0; e < n; ++e)
            if (!base.element(e).is_fact()) out.adjusted[e] = out.standard[e];
        add_shifted_fact_blame(base, mi_masks, out);
    }
    return out;
}

// General path: the measure is evaluated on an explicitly constructed
// sub-base for every coalition.
inline CoalitionSums coalition_sums_generic(const RuleBase& base, const InconsistencyMeasure& measure,
                                            const std::vector<std::uint32_t>& mi_masks,
                                            bool need_adjusted) {
    const std::uint32_t n = static_cast<std::uint32_t>(base.size());
    const std::uint32_t total = n >= 32 ? 0 : (1u << n);

    std::vector<Rational> value(total, Rational(0));
    std::vector<ElementId> keep;
    for (std::uint32_t coalition = 1; coalition < total; ++coalition) {
        keep.clear();
        for (std::uint32_t i = 0; i < n; ++i)
            if ((coalition >> i) & 1) keep.push_back(i);
        value[coalition] = measure.eval(base.restrict_to(keep));
    }

    CoalitionSums out;
    out.standard.assign(n, Rational(0));
    out.adjusted.assign(n, Rational(0));
    const std::vector<Rational> w = coalition_weights(n);

    for (std::uint32_t coalition = 1; coalition < total; ++coalition) {
        const std::uint32_t s = static_cast<std::uint32_t>(std::popcount(coalition));
        std::uint32_t bits = coalition;
        while (bits) {
            const unsigned e = static_cast<unsigned>(std::countr_zero(bits));
            bits &= bits - 1;
            Rational marginal = value[coalition] - value[coalition & ~(1u << e)];
            if (marginal != 0) out.standard[e] += w[s] * marginal;
        }
    }
    if (need_adjusted) {
        for (std::uint32_t e = 0; e < n; ++e)
            if (!base.element(e).is_fact()) out.adjusted[e] = out.standard[e];
        add_shifted_fact_blame(base, mi_masks, out);
    }
    return out;
}

inline std::vector<std::uint32_t> mi_masks_for(const MICollection& mic,
                                               const std::vector<ElementId>* remap_to_dense,
                                               std::size_t base_size) {
    std::vector<std::uint32_t> inverse;
    if (remap_to_dense) {
        inverse.assign(base_size, 0xffffffffu);
        for (std::uint32_t j = 0; j < remap_to_dense->size(); ++j) inverse[(*remap_to_dense)[j]] = j;
    }
    std::vector<std::uint32_t> masks;
    masks.reserve(mic.subsets.size());
    for (const MISubset& m : mic.subsets) {
        std::uint32_t mask = 0;
        for (ElementId id : m.element_ids) mask |= (1u << (remap_to_dense ? inverse[id] : id));
        masks.push_back(mask);
    }
    return masks;
}

}  // namespace detail

// Standard coalition-weighted marginal payoff of every element:
// S_e = sum over coalitions C containing e of w(|C|, n) (I(C) - I(C \ {e})).
inline PayoffVector shapley(const RuleBase& base, const InconsistencyMeasure& measure,
                            const ShapleyOptions& opts = {}) {
    PayoffVector out{std::vector<Rational>(base.size(), Rational(0)), false};
    if (base.empty()) return out;

    if (!opts.reference && measure.free_formula_independence_prime) {
        MICollection mic = enumerate_mi(base, opts.budget);
        ActiveReduction red = reduce_to_active(base, mic);
        if (red.to_original.empty()) return out;
        if (red.to_original.size() > kMaxExactSubsetBits)
            throw BudgetError("coalition enumeration budget exhausted: active part exceeds " +
                              std::to_string(kMaxExactSubsetBits) + " elements");
        auto masks = detail::mi_masks_for(mic, &red.to_original, base.size());
        detail::CoalitionSums sums =
            measure.counts_mis ? detail::coalition_sums_counting(red.active, masks, false)
                               : detail::coalition_sums_generic(red.active, measure, masks, false);
        for (std::uint32_t j = 0; j < red.to_original.size(); ++j)
            out.values[red.to_original[j]] = sums.standard[j];
        return out;
    }

    if (base.size() > kMaxExactSubsetBits)
        throw BudgetError("coalition enumeration budget exhausted: base exceeds " +
                          std::to_string(kMaxExactSubsetBits) + " elements");
    detail::CoalitionSums sums = detail::coalition_sums_generic(base, measure, {}, false);
    out.values = std::move(sums.standard);
    return out;
}

// Closed form of the standard payoff for the MI-counting measure: each
// minimal inconsistent subset spreads one unit evenly over its members.
inline PayoffVector shapley_mi_closedform(const RuleBase& base, const MiBudget& budget = {}) {
    PayoffVector out{std::vector<Rational>(base.size(), Rational(0)), false};
    for (const MISubset& m : enumerate_mi(base, budget).subsets) {
        Rational share(1, static_cast<unsigned>(m.element_ids.size()));
        for (ElementId id : m.element_ids) out.values[id] += share;
    }
    return out;
}

// Fact-aware payoff: facts receive zero; each rule keeps its standard
// payoff and additionally absorbs, for every minimal inconsistent subset it
// belongs to, an even share of that subset's fact payoff.
inline PayoffVector adjusted_shapley(const RuleBase& base, const InconsistencyMeasure& measure,
                                     const AdjustedOptions& opts, const MICollection& mic) {
    if (!measure.consistency_prime || !measure.monotony_prime || !measure.free_formula_independence_prime)
        throw std::invalid_argument(
            "adjusted payoff requires a measure declaring consistency', monotony' and "
            "free formula independence'");

    PayoffVector out{std::vector<Rational>(base.size(), Rational(0)), false};
    if (base.empty() || mic.subsets.empty()) return out;

    if (!opts.reference) {
        ActiveReduction red = reduce_to_active(base, mic);
        if (red.to_original.size() > kMaxExactSubsetBits)
            throw BudgetError("coalition enumeration budget exhausted: active part exceeds " +
                              std::to_string(kMaxExactSubsetBits) + " elements");
        auto masks = detail::mi_masks_for(mic, &red.to_original, base.size());
        detail::CoalitionSums sums =
            measure.counts_mis ? detail::coalition_sums_counting(red.active, masks, true)
                               : detail::coalition_sums_generic(red.active, measure, masks, true);
        for (std::uint32_t j = 0; j < red.to_original.size(); ++j)
            out.values[red.to_original[j]] = sums.adjusted[j];
        out.blame_unassigned = sums.blame_unassigned;
        return out;
    }

    if (base.size() > kMaxExactSubsetBits)
        throw BudgetError("coalition enumeration budget exhausted: base exceeds " +
                          std::to_string(kMaxExactSubsetBits) + " elements");
    auto masks = detail::mi_masks_for(mic, nullptr, base.size());
    detail::CoalitionSums sums = detail::coalition_sums_generic(base, measure, masks, true);
    out.values = std::move(sums.adjusted);
    out.blame_unassigned = sums.blame_unassigned;
    return out;
}

inline PayoffVector adjusted_shapley(const RuleBase& base, const InconsistencyMeasure& measure,
                                     const AdjustedOptions& opts = {}) {
    return adjusted_shapley(base, measure, opts, enumerate_mi(base, opts.budget));
}

}  // namespace incmeter
