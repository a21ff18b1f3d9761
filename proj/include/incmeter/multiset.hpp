#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "incmeter/core.hpp"
#include "incmeter/measures.hpp"
#include "incmeter/mi.hpp"
#include "incmeter/parser.hpp"
#include "incmeter/rational.hpp"

namespace incmeter {

// A shared rule set evaluated against an ordered sequence of case-dependent
// fact sets. Identical fact sets are folded into one class with a
// multiplicity; every observable value equals the per-case construction.
struct CaseSet {
    struct Entry {
        std::string case_id;
        std::uint32_t class_index = 0;
    };

    struct FactClass {
        std::vector<Literal> facts;  // sorted by key, unique
        std::uint32_t multiplicity = 0;
        RuleBase base;  // rule ids 0..R-1 shared across classes, then facts
    };

    RuleProgram program;
    std::vector<Entry> cases;
    std::vector<FactClass> classes;

    std::size_t case_count() const { return cases.size(); }
    std::size_t rule_count() const { return program.size(); }

    const RuleBase& case_base(std::size_t case_index) const {
        return classes[cases[case_index].class_index].base;
    }

    // The same rule added to every case's base. Adding an existing rule is a
    // no-op; otherwise the new rule gets id R and fact ids shift up by one.
    CaseSet with_rule(const Rule& r) const;
};

namespace detail {

inline RuleBase class_base(const RuleProgram& program, std::span<const Literal> facts) {
    RuleBase base;
    for (const Rule& r : program.rules) base.add(r);
    for (Literal f : facts) base.add_fact(f);
    return base;
}

}  // namespace detail

inline CaseSet build_caseset(const RuleProgram& program, std::span<const CaseRecord> records) {
    CaseSet cs;
    cs.program = program;
    std::map<std::vector<Literal>, std::uint32_t> class_of;
    for (const CaseRecord& rec : records) {
        auto [it, inserted] = class_of.try_emplace(rec.facts, static_cast<std::uint32_t>(cs.classes.size()));
        if (inserted) {
            CaseSet::FactClass cls;
            cls.facts = rec.facts;
            cls.base = detail::class_base(program, rec.facts);
            cs.classes.push_back(std::move(cls));
        }
        cs.classes[it->second].multiplicity += 1;
        cs.cases.push_back(CaseSet::Entry{rec.case_id, it->second});
    }
    return cs;
}

inline CaseSet CaseSet::with_rule(const Rule& r) const {
    if (r.is_fact()) throw std::invalid_argument("only proper rules can join the shared rule set");
    CaseSet out;
    out.program = program;
    out.program.add(r);
    out.cases = cases;
    out.classes.reserve(classes.size());
    for (const FactClass& cls : classes) {
        FactClass rebuilt;
        rebuilt.facts = cls.facts;
        rebuilt.multiplicity = cls.multiplicity;
        rebuilt.base = detail::class_base(out.program, cls.facts);
        out.classes.push_back(std::move(rebuilt));
    }
    return out;
}

// Sum of the measure over all cases.
inline Rational sigma_measure(const CaseSet& cs, const InconsistencyMeasure& measure) {
    Rational total(0);
    for (const CaseSet::FactClass& cls : cs.classes)
        total += measure.eval(cls.base) * cls.multiplicity;
    return total;
}

// Sum of the per-case culpability of one shared rule over all cases.
inline Rational sigma_culpability(const CaseSet& cs, const CulpabilityMeasure& cmeasure,
                                  ElementId rule_id) {
    if (rule_id >= cs.rule_count()) throw std::out_of_range("unknown rule id");
    Rational total(0);
    for (const CaseSet::FactClass& cls : cs.classes)
        total += cmeasure.eval_all(cls.base).values[rule_id] * cls.multiplicity;
    return total;
}

// Fact probe used by the fact-minimality check; a case without the fact
// contributes zero.
inline Rational sigma_culpability_fact(const CaseSet& cs, const CulpabilityMeasure& cmeasure,
                                       Literal fact) {
    Rational total(0);
    const Rule probe = Rule::fact(fact);
    for (const CaseSet::FactClass& cls : cs.classes) {
        if (!std::binary_search(cls.facts.begin(), cls.facts.end(), fact)) continue;
        CulpabilityEval eval = cmeasure.eval_all(cls.base);
        for (ElementId id = static_cast<ElementId>(cs.rule_count()); id < cls.base.size(); ++id) {
            if (cls.base.element(id) == probe) {
                total += eval.values[id] * cls.multiplicity;
                break;
            }
        }
    }
    return total;
}

struct CulpabilityVector {
    std::string measure;
    std::vector<Rational> values;  // per rule id of the shared rule set
    Rational max_value{0};
    bool blame_unassigned = false;
};

inline CulpabilityVector culpability_vector(const CaseSet& cs, const CulpabilityMeasure& cmeasure) {
    CulpabilityVector out;
    out.measure = cmeasure.name;
    out.values.assign(cs.rule_count(), Rational(0));
    for (const CaseSet::FactClass& cls : cs.classes) {
        CulpabilityEval eval = cmeasure.eval_all(cls.base);
        out.blame_unassigned = out.blame_unassigned || eval.blame_unassigned;
        for (ElementId r = 0; r < cs.rule_count(); ++r)
            out.values[r] += eval.values[r] * cls.multiplicity;
    }
    for (const Rational& v : out.values) out.max_value = std::max(out.max_value, v);
    return out;
}

// Rules participating in no minimal inconsistent subset of any case.
inline std::vector<ElementId> multiset_free_formulas(const CaseSet& cs, const MiBudget& budget = {}) {
    std::vector<bool> hit(cs.rule_count(), false);
    for (const CaseSet::FactClass& cls : cs.classes)
        for (const MISubset& m : enumerate_mi(cls.base, budget).subsets)
            for (ElementId id : m.element_ids)
                if (id < cs.rule_count()) hit[id] = true;
    std::vector<ElementId> out;
    for (ElementId r = 0; r < cs.rule_count(); ++r)
        if (!hit[r]) out.push_back(r);
    return out;
}

// Descending ranks with ties sharing the mean of the positions they occupy:
// values (5,3,2,2,2) rank as (1, 2, 4, 4, 4).
inline std::vector<double> rank_rules(std::span<const Rational> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

struct RankDistribution {
    // Rules that participate in at least one inconsistency somewhere.
    std::vector<ElementId> rules;
    // ranks[i][c] is the local participation-count rank of rules[i] in the
    // c-th case (input order).
    std::vector<std::vector<double>> ranks;
};

// Local per-case ranking by the participation-count measure, collected over
// every case of the stream.
inline RankDistribution per_case_rank_distribution(const CaseSet& cs, const MiBudget& budget = {}) {
    const std::size_t n_rules = cs.rule_count();
    std::vector<std::vector<double>> class_ranks(cs.classes.size());
    std::vector<bool> hit(n_rules, false);
    for (std::size_t c = 0; c < cs.classes.size(); ++c) {
        MICollection mic = enumerate_mi(cs.classes[c].base, budget);
        std::vector<Rational> local = detail::chash_values(cs.classes[c].base, mic);
        local.resize(n_rules);  // rules only
        for (ElementId r = 0; r < n_rules; ++r)
            if (local[r] != 0) hit[r] = true;
        class_ranks[c] = rank_rules(local);
    }

    RankDistribution out;
    for (ElementId r = 0; r < n_rules; ++r)
        if (hit[r]) out.rules.push_back(r);
    out.ranks.assign(out.rules.size(), {});
    for (const CaseSet::Entry& entry : cs.cases)
        for (std::size_t i = 0; i < out.rules.size(); ++i)
            out.ranks[i].push_back(class_ranks[entry.class_index][out.rules[i]]);
    return out;
}

}  // namespace incmeter
