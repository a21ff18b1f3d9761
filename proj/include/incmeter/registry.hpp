#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "incmeter/measures.hpp"
#include "incmeter/shapley.hpp"

namespace incmeter {

// Stable command-line tokens.
inline const std::vector<std::string>& inconsistency_measure_tokens() {
    static const std::vector<std::string> tokens{"mi"};
    return tokens;
}

inline const std::vector<std::string>& culpability_measure_tokens() {
    static const std::vector<std::string> tokens{"cd", "chash", "shapley-mi", "adj-shapley-mi"};
    return tokens;
}

inline InconsistencyMeasure make_inconsistency_measure(std::string_view token, const MiBudget& budget = {}) {
    if (token == "mi") return mi_measure(budget);
    throw std::invalid_argument("unknown inconsistency measure: '" + std::string(token) + "'");
}

inline CulpabilityMeasure make_culpability_measure(std::string_view token, const MiBudget& budget = {}) {
    CulpabilityMeasure m;
    m.name = std::string(token);
    if (token == "cd") {
        m.satisfies_min = true;
        m.eval_all = [budget](const RuleBase& b) {
            return CulpabilityEval{detail::cd_values(b, enumerate_mi(b, budget)), false};
        };
    } else if (token == "chash") {
        m.satisfies_min = true;
        m.eval_all = [budget](const RuleBase& b) {
            return CulpabilityEval{detail::chash_values(b, enumerate_mi(b, budget)), false};
        };
    } else if (token == "shapley-mi") {
        m.satisfies_min = true;
        m.eval_all = [budget](const RuleBase& b) {
            return CulpabilityEval{shapley_mi_closedform(b, budget).values, false};
        };
    } else if (token == "adj-shapley-mi") {
        m.satisfies_min = true;
        m.eval_all = [budget](const RuleBase& b) {
            PayoffVector p = adjusted_shapley(b, mi_measure(budget), AdjustedOptions{budget});
            return CulpabilityEval{std::move(p.values), p.blame_unassigned};
        };
    } else {
        throw std::invalid_argument("unknown culpability measure: '" + std::string(token) + "'");
    }
    m.eval = [eval_all = m.eval_all](const RuleBase& b, ElementId id) {
        if (id >= b.size()) throw std::out_of_range("unknown element id");
        return eval_all(b).values[id];
    };
    return m;
}

}  // namespace incmeter
