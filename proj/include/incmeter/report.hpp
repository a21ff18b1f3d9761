#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "incmeter/multiset.hpp"
#include "incmeter/registry.hpp"
#include "incmeter/shapley.hpp"

namespace incmeter {

struct AnalyzeOptions {
    std::vector<std::string> measures{"mi", "cd", "chash"};
    MiBudget budget{};
    unsigned workers = 1;
    std::optional<std::uint64_t> top_k;  // truncates the rendered ranking only
    // Analyze each distinct fact set once and weight by multiplicity. Values
    // are identical either way; disabling it makes wall-clock time reflect
    // the per-case cost (used by the bench command).
    bool fold_identical_cases = true;
};

struct AnalysisResult {
    Rational overall{0};                     // summed MI count over all cases
    std::vector<std::int64_t> case_i_mi;     // aligned with caseset.cases
    std::vector<std::string> culp_tokens;    // requested element-based measures, in order
    std::map<std::string, std::vector<Rational>> rule_values;  // token -> per rule id
    std::vector<double> ranks;               // per rule id, by the first requested
                                             // element-based measure
    std::vector<std::string> flags;          // sorted, unique
};

namespace detail {

struct ClassAnalysis {
    std::int64_t i_mi = 0;
    std::vector<CulpabilityEval> culp;  // aligned with the requested token list
};

inline ClassAnalysis analyze_class(const RuleBase& base, const std::vector<std::string>& culp_tokens,
                                   const MiBudget& budget) {
    ClassAnalysis out;
    MICollection mic = enumerate_mi(base, budget);
    out.i_mi = static_cast<std::int64_t>(mic.subsets.size());
    out.culp.reserve(culp_tokens.size());
    for (const std::string& token : culp_tokens) {
        if (token == "cd") {
            out.culp.push_back(CulpabilityEval{cd_values(base, mic), false});
        } else if (token == "chash") {
            out.culp.push_back(CulpabilityEval{chash_values(base, mic), false});
        } else if (token == "shapley-mi") {
            std::vector<Rational> values(base.size(), Rational(0));
            for (const MISubset& m : mic.subsets) {
                Rational share(1, static_cast<unsigned>(m.element_ids.size()));
                for (ElementId id : m.element_ids) values[id] += share;
            }
            out.culp.push_back(CulpabilityEval{std::move(values), false});
        } else if (token == "adj-shapley-mi") {
            PayoffVector p = adjusted_shapley(base, mi_measure(budget), AdjustedOptions{budget}, mic);
            out.culp.push_back(CulpabilityEval{std::move(p.values), p.blame_unassigned});
        }
    }
    return out;
}

}  // namespace detail

// Full per-class analysis, multiplicity-weighted aggregation, ranking.
// Classes are analyzed independently (optionally across workers); the
// aggregation order is fixed by class index, so the result is identical for
// any worker count.
inline AnalysisResult analyze_caseset(const CaseSet& cs, const AnalyzeOptions& options) {
    std::vector<std::string> culp_tokens;
    for (const std::string& token : options.measures) {
        if (token == "mi") continue;  // always reported
        bool known = false;
        for (const std::string& t : culpability_measure_tokens()) known = known || t == token;
        if (!known) throw std::invalid_argument("unknown measure: '" + token + "'");
        if (std::find(culp_tokens.begin(), culp_tokens.end(), token) == culp_tokens.end())
            culp_tokens.push_back(token);
    }

    // One work unit per distinct fact class, or per case when folding is off.
    const bool fold = options.fold_identical_cases;
    const std::size_t n_units = fold ? cs.classes.size() : cs.cases.size();
    auto unit_base = [&](std::size_t u) -> const RuleBase& {
        return fold ? cs.classes[u].base : cs.case_base(u);
    };
    auto unit_weight = [&](std::size_t u) -> std::uint32_t {
        return fold ? cs.classes[u].multiplicity : 1u;
    };

    std::vector<detail::ClassAnalysis> per_unit(n_units);
    std::vector<std::exception_ptr> errors(n_units);

    unsigned workers = std::max(1u, options.workers);
    if (workers == 1 || n_units <= 1) {
        for (std::size_t u = 0; u < n_units; ++u)
            per_unit[u] = detail::analyze_class(unit_base(u), culp_tokens, options.budget);
    } else {
        std::atomic<std::size_t> next{0};
        auto work = [&]() {
            while (true) {
                std::size_t u = next.fetch_add(1);
                if (u >= n_units) return;
                try {
                    per_unit[u] = detail::analyze_class(unit_base(u), culp_tokens, options.budget);
                } catch (...) {
                    errors[u] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
        for (std::size_t u = 0; u < n_units; ++u)
            if (errors[u]) std::rethrow_exception(errors[u]);
    }

    AnalysisResult result;
    result.culp_tokens = culp_tokens;
    for (const std::string& token : culp_tokens)
        result.rule_values[token].assign(cs.rule_count(), Rational(0));

    bool blame_unassigned = false;
    std::int64_t overall = 0;
    for (std::size_t u = 0; u < n_units; ++u) {
        const std::uint32_t mult = unit_weight(u);
        overall += per_unit[u].i_mi * mult;
        for (std::size_t t = 0; t < culp_tokens.size(); ++t) {
            const CulpabilityEval& eval = per_unit[u].culp[t];
            blame_unassigned = blame_unassigned || eval.blame_unassigned;
            auto& sums = result.rule_values[culp_tokens[t]];
            // Most rules sit out most cases; skip the zero contributions.
            for (ElementId r = 0; r < cs.rule_count(); ++r)
                if (!eval.values[r].is_zero()) sums[r] += eval.values[r] * mult;
        }
    }
    result.overall = overall;
    if (blame_unassigned) result.flags.push_back("blame_unassigned");

    result.case_i_mi.reserve(cs.cases.size());
    for (std::size_t i = 0; i < cs.cases.size(); ++i)
        result.case_i_mi.push_back(fold ? per_unit[cs.cases[i].class_index].i_mi : per_unit[i].i_mi);

    if (!culp_tokens.empty()) {
        result.ranks = rank_rules(result.rule_values.at(culp_tokens.front()));
    } else {
        // No element-based measure requested: every rule ties.
        result.ranks = rank_rules(std::vector<Rational>(cs.rule_count(), Rational(0)));
    }
    return result;
}

namespace detail {

inline nlohmann::ordered_json rank_json(double rank) {
    if (rank == static_cast<double>(static_cast<std::int64_t>(rank)))
        return static_cast<std::int64_t>(rank);
    return rank;
}

// Rule rows sorted by rank, ties by rule id; truncated to top_k when set.
inline std::vector<ElementId> report_rule_order(const AnalysisResult& result, std::size_t n_rules,
                                                std::optional<std::uint64_t> top_k) {
    std::vector<ElementId> order(n_rules);
    for (ElementId i = 0; i < n_rules; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](ElementId a, ElementId b) {
        if (result.ranks[a] != result.ranks[b]) return result.ranks[a] < result.ranks[b];
        return a < b;
    });
    if (top_k && *top_k < order.size()) order.resize(*top_k);
    return order;
}

}  // namespace detail

inline nlohmann::ordered_json report_json(const CaseSet& cs, const AnalysisResult& result,
                                          std::optional<std::uint64_t> top_k = {}) {
    nlohmann::ordered_json report;
    report["overall"] = {{"measure", "mi"}, {"value", to_string(result.overall)}};

    report["rules"] = nlohmann::ordered_json::array();
    for (ElementId r : detail::report_rule_order(result, cs.rule_count(), top_k)) {
        nlohmann::ordered_json row;
        row["rule"] = rule_text(cs.program.rules[r]);
        nlohmann::ordered_json values;
        for (const std::string& token : result.culp_tokens)
            values[token] = to_string(result.rule_values.at(token)[r]);
        row["values"] = std::move(values);
        row["rank"] = detail::rank_json(result.ranks[r]);
        report["rules"].push_back(std::move(row));
    }

    // Sorted by case_id so the report is invariant under input reordering.
    std::vector<std::size_t> case_order(cs.cases.size());
    for (std::size_t i = 0; i < case_order.size(); ++i) case_order[i] = i;
    std::sort(case_order.begin(), case_order.end(), [&](std::size_t a, std::size_t b) {
        return cs.cases[a].case_id < cs.cases[b].case_id;
    });
    report["cases"] = nlohmann::ordered_json::array();
    for (std::size_t i : case_order) {
        report["cases"].push_back(
            {{"case_id", cs.cases[i].case_id}, {"i_mi", result.case_i_mi[i]}});
    }

    report["flags"] = result.flags;
    return report;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += "\"";
    return quoted;
}

inline std::string format_rank(double rank) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", rank);
    return buf;
}

}  // namespace detail

// Mirrors the report's rules array: exact value and decimal approximation
// per measure, plus the rank.
inline std::string report_csv(const CaseSet& cs, const AnalysisResult& result,
                              std::optional<std::uint64_t> top_k = {}) {
    std::string out = "rule";
    for (const std::string& token : result.culp_tokens) out += "," + token + "," + token + "_dec";
    out += ",rank\n";
    for (ElementId r : detail::report_rule_order(result, cs.rule_count(), top_k)) {
        out += detail::csv_field(rule_text(cs.program.rules[r]));
        for (const std::string& token : result.culp_tokens) {
            const Rational& v = result.rule_values.at(token)[r];
            out += "," + to_string(v) + "," + to_decimal_string(v);
        }
        out += "," + detail::format_rank(result.ranks[r]) + "\n";
    }
    return out;
}

}  // namespace incmeter
