#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "incmeter/core.hpp"
#include "incmeter/mi.hpp"
#include "incmeter/rational.hpp"

namespace incmeter {

// A nonnegative function on rule bases; higher means more severely
// inconsistent. The declared single-base properties gate which derived
// constructions are valid for it.
struct InconsistencyMeasure {
    std::string name;
    bool consistency_prime = false;
    bool monotony_prime = false;
    bool free_formula_independence_prime = false;
    // True iff eval(B) equals the number of minimal inconsistent subsets of
    // B; enables the integer subset-evaluation fast path.
    bool counts_mis = false;
    std::function<Rational(const RuleBase&)> eval;
};

struct CulpabilityEval {
    std::vector<Rational> values;  // indexed by element id
    bool blame_unassigned = false;
};

// A nonnegative per-element blame assignment.
struct CulpabilityMeasure {
    std::string name;
    bool satisfies_min = false;
    std::function<Rational(const RuleBase&, ElementId)> eval;
    std::function<CulpabilityEval(const RuleBase&)> eval_all;
};

inline Rational i_mi(const RuleBase& base, const MiBudget& budget = {}) {
    return Rational(enumerate_mi(base, budget).subsets.size());
}

inline InconsistencyMeasure mi_measure(const MiBudget& budget = {}) {
    InconsistencyMeasure m;
    m.name = "mi";
    m.consistency_prime = true;
    m.monotony_prime = true;
    m.free_formula_independence_prime = true;
    m.counts_mis = true;
    m.eval = [budget](const RuleBase& b) { return i_mi(b, budget); };
    return m;
}

namespace detail {

inline std::vector<Rational> cd_values(const RuleBase& base, const MICollection& mic) {
    std::vector<Rational> out(base.size(), Rational(0));
    for (const MISubset& m : mic.subsets)
        for (ElementId id : m.element_ids) out[id] = 1;
    return out;
}

inline std::vector<Rational> chash_values(const RuleBase& base, const MICollection& mic) {
    std::vector<Rational> out(base.size(), Rational(0));
    for (const MISubset& m : mic.subsets)
        for (ElementId id : m.element_ids) out[id] += 1;
    return out;
}

}  // namespace detail

// 1 iff the element occurs in at least one minimal inconsistent subset.
inline Rational c_d(const RuleBase& base, ElementId id, const MiBudget& budget = {}) {
    if (id >= base.size()) throw std::out_of_range("unknown element id");
    return enumerate_mi(base, budget).element_participates(id) ? Rational(1) : Rational(0);
}

// Number of minimal inconsistent subsets the element occurs in.
inline Rational c_hash(const RuleBase& base, ElementId id, const MiBudget& budget = {}) {
    if (id >= base.size()) throw std::out_of_range("unknown element id");
    return detail::chash_values(base, enumerate_mi(base, budget))[id];
}

// Elements occurring in no minimal inconsistent subset.
inline std::vector<ElementId> free_formulas(const RuleBase& base, const MiBudget& budget = {}) {
    MICollection mic = enumerate_mi(base, budget);
    std::vector<bool> hit(base.size(), false);
    for (const MISubset& m : mic.subsets)
        for (ElementId id : m.element_ids) hit[id] = true;
    std::vector<ElementId> out;
    for (ElementId i = 0; i < base.size(); ++i)
        if (!hit[i]) out.push_back(i);
    return out;
}

}  // namespace incmeter
