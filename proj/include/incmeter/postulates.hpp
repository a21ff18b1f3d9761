#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "incmeter/multiset.hpp"
#include "incmeter/registry.hpp"
#include "incmeter/synth.hpp"

namespace incmeter {

enum class Postulate { RS, RM, CO, MO, IN, DIS, UB, FM };

inline const std::vector<Postulate>& all_postulates() {
    static const std::vector<Postulate> all{Postulate::RS, Postulate::RM, Postulate::CO,
                                            Postulate::MO, Postulate::IN, Postulate::DIS,
                                            Postulate::UB, Postulate::FM};
    return all;
}

inline std::string_view postulate_name(Postulate p) {
    switch (p) {
        case Postulate::RS: return "RS";
        case Postulate::RM: return "RM";
        case Postulate::CO: return "CO";
        case Postulate::MO: return "MO";
        case Postulate::IN: return "IN";
        case Postulate::DIS: return "DIS";
        case Postulate::UB: return "UB";
        case Postulate::FM: return "FM";
    }
    return "?";
}

inline std::optional<Postulate> postulate_from_name(std::string_view name) {
    for (Postulate p : all_postulates())
        if (postulate_name(p) == name) return p;
    return std::nullopt;
}

// Distribution and upper-bound relate a payoff decomposition back to the
// measure that induced it; they are undefined for the baseline counters.
inline bool postulate_applicable(Postulate p, std::string_view measure_token) {
    if (p == Postulate::DIS || p == Postulate::UB) return measure_token == "adj-shapley-mi";
    return true;
}

struct PostulateResult {
    Postulate postulate = Postulate::RS;
    std::string measure;
    std::uint64_t trials = 0;
    bool applicable = true;
    bool counterexample = false;
    nlohmann::ordered_json witness;  // null unless a counterexample was found

    std::string verdict() const {
        if (!applicable) return "n/a";
        return counterexample ? "counterexample" : "no-counterexample";
    }
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

inline nlohmann::ordered_json caseset_witness(const CaseSet& cs) {
    nlohmann::ordered_json w;
    w["rules"] = nlohmann::ordered_json::array();
    for (const Rule& r : cs.program.rules) w["rules"].push_back(rule_text(r));
    w["cases"] = nlohmann::ordered_json::array();
    for (const CaseSet::Entry& e : cs.cases) {
        nlohmann::ordered_json c;
        c["case_id"] = e.case_id;
        c["facts"] = nlohmann::ordered_json::array();
        for (Literal f : cs.classes[e.class_index].facts) c["facts"].push_back(f.text());
        w["cases"].push_back(std::move(c));
    }
    return w;
}

inline CaseSet caseset_from_witness(const nlohmann::json& w) {
    RuleProgram program;
    for (const auto& r : w.at("rules")) program.add(parse_rules(r.get<std::string>() + ".").rules.at(0));
    std::vector<CaseRecord> records;
    int lineno = 0;
    for (const auto& c : w.at("cases")) {
        ++lineno;
        CaseRecord rec;
        rec.case_id = c.at("case_id").get<std::string>();
        std::vector<Literal> facts;
        for (const auto& f : c.at("facts")) facts.push_back(parse_fact_literal(f.get<std::string>(), lineno));
        rec.facts = normalize_facts(std::move(facts));
        records.push_back(std::move(rec));
    }
    return build_caseset(program, records);
}

inline std::vector<CaseRecord> records_of(const CaseSet& cs) {
    std::vector<CaseRecord> records;
    for (const CaseSet::Entry& e : cs.cases)
        records.push_back(CaseRecord{e.case_id, cs.classes[e.class_index].facts});
    return records;
}

inline Rule rule_from_text(const std::string& text) {
    return parse_rules(text + ".").rules.at(0);
}

// One random proper rule over the first n_atoms alphabet atoms; when fresh
// is set the rule uses atoms foreign to the stream, making it free by
// construction.
inline Rule random_probe_rule(std::mt19937_64& rng, std::uint32_t n_atoms, bool fresh) {
    auto atom_at = [&](std::uint32_t i) {
        return fresh ? Atom::named("x" + std::to_string(i)) : Atom::named(atom_name(i));
    };
    const std::uint32_t pool = fresh ? 3 : n_atoms;
    const std::uint32_t body_size = 1 + static_cast<std::uint32_t>(rng() % 2);
    std::vector<Literal> body;
    for (std::uint32_t b = 0; b < body_size; ++b)
        body.push_back(Literal{atom_at(static_cast<std::uint32_t>(rng() % pool)), rng() % 2 == 0});
    Literal head{atom_at(static_cast<std::uint32_t>(rng() % pool)), rng() % 2 == 0};
    return Rule::make(std::move(body), head);
}

struct TrialContext {
    CaseSet caseset;
    std::mt19937_64 rng;
    std::uint32_t n_atoms = 0;
};

inline TrialContext make_trial(std::uint64_t tseed) {
    std::mt19937_64 rng(tseed);
    RandomCasesetConfig cfg;
    cfg.n_atoms = 2 + static_cast<std::uint32_t>(rng() % 5);
    cfg.max_rules = 8;
    cfg.max_body = 1 + static_cast<std::uint32_t>(rng() % 2);
    cfg.max_cases = 6;
    cfg.fact_probability = 0.2 + 0.6 * uniform01(rng);
    cfg.seed = rng();
    TrialContext ctx{random_caseset(cfg), std::mt19937_64(rng()), cfg.n_atoms};
    return ctx;
}

// Evaluates one postulate on one random stream; returns the witness when the
// predicate is violated.
inline std::optional<nlohmann::ordered_json> run_trial(Postulate p, const CulpabilityMeasure& cm,
                                                       const InconsistencyMeasure& inducing,
                                                       TrialContext& ctx) {
    const CaseSet& M = ctx.caseset;
    auto base_witness = [&]() { return caseset_witness(M); };

    switch (p) {
        case Postulate::RS: {
            CulpabilityVector v = culpability_vector(M, cm);
            std::vector<CaseRecord> records = records_of(M);
            std::vector<std::size_t> perm(records.size());
            for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
            std::shuffle(perm.begin(), perm.end(), ctx.rng);
            std::vector<CaseRecord> shuffled;
            for (std::size_t i : perm) shuffled.push_back(records[i]);
            CulpabilityVector vp = culpability_vector(build_caseset(M.program, shuffled), cm);
            for (ElementId r = 0; r < M.rule_count(); ++r) {
                if (v.values[r] != vp.values[r]) {
                    auto w = base_witness();
                    w["permutation"] = perm;
                    w["rule"] = rule_text(M.program.rules[r]);
                    w["observed"] = {{"original", to_string(v.values[r])},
                                     {"permuted", to_string(vp.values[r])}};
                    return w;
                }
            }
            return std::nullopt;
        }
        case Postulate::RM: {
            CulpabilityVector v = culpability_vector(M, cm);
            for (ElementId r : multiset_free_formulas(M)) {
                if (v.values[r] != 0) {
                    auto w = base_witness();
                    w["rule"] = rule_text(M.program.rules[r]);
                    w["observed"] = {{"value", to_string(v.values[r])}};
                    return w;
                }
            }
            return std::nullopt;
        }
        case Postulate::CO: {
            CulpabilityVector v = culpability_vector(M, cm);
            bool any_inconsistent = false;
            for (const CaseSet::FactClass& cls : M.classes)
                if (!is_consistent(cls.base)) any_inconsistent = true;
            bool zero = v.max_value == 0;
            if (zero == any_inconsistent) {
                auto w = base_witness();
                w["observed"] = {{"max_value", to_string(v.max_value)},
                                 {"any_inconsistent_case", any_inconsistent}};
                return w;
            }
            return std::nullopt;
        }
        case Postulate::MO: {
            Rule r = random_probe_rule(ctx.rng, ctx.n_atoms, false);
            CulpabilityVector before = culpability_vector(M, cm);
            CulpabilityVector after = culpability_vector(M.with_rule(r), cm);
            if (after.max_value < before.max_value) {
                auto w = base_witness();
                w["added_rule"] = rule_text(r);
                w["observed"] = {{"before", to_string(before.max_value)},
                                 {"after", to_string(after.max_value)}};
                return w;
            }
            return std::nullopt;
        }
        case Postulate::IN: {
            bool fresh = ctx.rng() % 2 == 0;
            Rule r = random_probe_rule(ctx.rng, ctx.n_atoms, fresh);
            CaseSet extended = M.with_rule(r);
            ElementId rid = extended.program.add(r);  // id of r (existing or appended)
            auto free = multiset_free_formulas(extended);
            if (!std::binary_search(free.begin(), free.end(), rid)) return std::nullopt;
            CulpabilityVector before = culpability_vector(M, cm);
            CulpabilityVector after = culpability_vector(extended, cm);
            if (after.max_value != before.max_value) {
                auto w = base_witness();
                w["added_rule"] = rule_text(r);
                w["observed"] = {{"before", to_string(before.max_value)},
                                 {"after", to_string(after.max_value)}};
                return w;
            }
            return std::nullopt;
        }
        case Postulate::DIS: {
            CulpabilityVector v = culpability_vector(M, cm);
            Rational total(0);
            for (const Rational& x : v.values) total += x;
            Rational expected = sigma_measure(M, inducing);
            if (total != expected) {
                auto w = base_witness();
                w["observed"] = {{"sum", to_string(total)}, {"measure_total", to_string(expected)}};
                return w;
            }
            return std::nullopt;
        }
        case Postulate::UB: {
            CulpabilityVector v = culpability_vector(M, cm);
            Rational expected = sigma_measure(M, inducing);
            if (v.max_value > expected) {
                auto w = base_witness();
                w["observed"] = {{"max_value", to_string(v.max_value)},
                                 {"measure_total", to_string(expected)}};
                return w;
            }
            return std::nullopt;
        }
        case Postulate::FM: {
            std::map<std::uint32_t, std::pair<Literal, Rational>> totals;
            for (const CaseSet::FactClass& cls : M.classes) {
                CulpabilityEval eval = cm.eval_all(cls.base);
                for (ElementId id = static_cast<ElementId>(M.rule_count()); id < cls.base.size(); ++id) {
                    Literal f = cls.base.element(id).head;
                    auto [it, _] = totals.try_emplace(f.key(), f, Rational(0));
                    it->second.second += eval.values[id] * cls.multiplicity;
                }
            }
            for (const auto& [key, entry] : totals) {
                if (entry.second != 0) {
                    auto w = base_witness();
                    w["fact"] = entry.first.text();
                    w["observed"] = {{"value", to_string(entry.second)}};
                    return w;
                }
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace detail

// Runs `trials` random streams against one postulate and measure.
// Deterministic for a fixed seed; each trial derives an independent seed, so
// results do not depend on how trials are batched.
inline PostulateResult check_postulate(Postulate p, std::string_view measure_token,
                                       std::uint64_t trials, std::uint64_t seed) {
    PostulateResult result;
    result.postulate = p;
    result.measure = std::string(measure_token);

    if (!postulate_applicable(p, measure_token)) {
        result.applicable = false;
        return result;
    }

    CulpabilityMeasure cm = make_culpability_measure(measure_token);
    InconsistencyMeasure inducing = mi_measure();
    const std::uint64_t cell = detail::mix64(detail::fnv1a(postulate_name(p)),
                                             detail::fnv1a(measure_token));

    for (std::uint64_t t = 0; t < trials; ++t) {
        result.trials = t + 1;
        std::uint64_t tseed = detail::mix64(detail::mix64(seed, cell), t);
        detail::TrialContext ctx = detail::make_trial(tseed);
        if (auto witness = detail::run_trial(p, cm, inducing, ctx)) {
            (*witness)["postulate"] = postulate_name(p);
            (*witness)["measure"] = result.measure;
            (*witness)["trial"] = t;
            (*witness)["seed"] = tseed;
            result.counterexample = true;
            result.witness = std::move(*witness);
            return result;
        }
    }
    return result;
}

// Re-evaluates a recorded counterexample from its serialized form; true iff
// the violation reproduces.
inline bool replay_witness(const nlohmann::json& witness) {
    auto p = postulate_from_name(witness.at("postulate").get<std::string>());
    if (!p) throw std::invalid_argument("unknown postulate in witness");
    CulpabilityMeasure cm = make_culpability_measure(witness.at("measure").get<std::string>());
    InconsistencyMeasure inducing = mi_measure();
    CaseSet M = detail::caseset_from_witness(witness);

    switch (*p) {
        case Postulate::RS: {
            std::vector<CaseRecord> records = detail::records_of(M);
            std::vector<CaseRecord> shuffled;
            for (std::size_t i : witness.at("permutation").get<std::vector<std::size_t>>())
                shuffled.push_back(records.at(i));
            CulpabilityVector v = culpability_vector(M, cm);
            CulpabilityVector vp = culpability_vector(build_caseset(M.program, shuffled), cm);
            return v.values != vp.values;
        }
        case Postulate::RM: {
            Rule r = detail::rule_from_text(witness.at("rule").get<std::string>());
            ElementId rid = 0;
            for (ElementId i = 0; i < M.program.size(); ++i)
                if (M.program.rules[i] == r) rid = i;
            auto free = multiset_free_formulas(M);
            if (!std::binary_search(free.begin(), free.end(), rid)) return false;
            return culpability_vector(M, cm).values[rid] != 0;
        }
        case Postulate::CO: {
            bool any_inconsistent = false;
            for (const CaseSet::FactClass& cls : M.classes)
                if (!is_consistent(cls.base)) any_inconsistent = true;
            return (culpability_vector(M, cm).max_value == 0) == any_inconsistent;
        }
        case Postulate::MO: {
            Rule r = detail::rule_from_text(witness.at("added_rule").get<std::string>());
            return culpability_vector(M.with_rule(r), cm).max_value <
                   culpability_vector(M, cm).max_value;
        }
        case Postulate::IN: {
            Rule r = detail::rule_from_text(witness.at("added_rule").get<std::string>());
            CaseSet extended = M.with_rule(r);
            ElementId rid = extended.program.add(r);
            auto free = multiset_free_formulas(extended);
            if (!std::binary_search(free.begin(), free.end(), rid)) return false;
            return culpability_vector(extended, cm).max_value !=
                   culpability_vector(M, cm).max_value;
        }
        case Postulate::DIS: {
            Rational total(0);
            for (const Rational& x : culpability_vector(M, cm).values) total += x;
            return total != sigma_measure(M, inducing);
        }
        case Postulate::UB:
            return culpability_vector(M, cm).max_value > sigma_measure(M, inducing);
        case Postulate::FM: {
            Literal f = detail::parse_fact_literal(witness.at("fact").get<std::string>(), 1);
            return sigma_culpability_fact(M, cm, f) != 0;
        }
    }
    return false;
}

inline const std::vector<std::string>& table1_measures() {
    static const std::vector<std::string> measures{"cd", "chash", "adj-shapley-mi"};
    return measures;
}

// The full compliance matrix: every registered baseline and payoff measure
// against every postulate.
inline std::vector<PostulateResult> table1(std::uint64_t trials, std::uint64_t seed) {
    std::vector<PostulateResult> results;
    for (const std::string& m : table1_measures())
        for (Postulate p : all_postulates()) results.push_back(check_postulate(p, m, trials, seed));
    return results;
}

inline std::string render_table(const std::vector<PostulateResult>& results) {
    auto pad = [](std::string_view text, std::size_t display_width, std::size_t columns) {
        std::string cell(text);
        while (display_width < columns) {
            cell += ' ';
            ++display_width;
        }
        return cell;
    };

    std::vector<std::string> measures;
    std::vector<Postulate> postulates;
    for (const PostulateResult& r : results) {
        if (std::find(measures.begin(), measures.end(), r.measure) == measures.end())
            measures.push_back(r.measure);
        if (std::find(postulates.begin(), postulates.end(), r.postulate) == postulates.end())
            postulates.push_back(r.postulate);
    }

    std::string out = pad("measure", 7, 16);
    for (Postulate p : postulates) out += pad(postulate_name(p), postulate_name(p).size(), 5);
    out += "\n";
    for (const std::string& m : measures) {
        out += pad(m, m.size(), 16);
        for (Postulate p : postulates) {
            const PostulateResult* cell = nullptr;
            for (const PostulateResult& r : results)
                if (r.postulate == p && r.measure == m) cell = &r;
            if (!cell) {
                out += pad("-", 1, 5);
            } else if (!cell->applicable) {
                out += pad("n/a", 3, 5);
            } else {
                out += pad(cell->counterexample ? "✗" : "✓", 1, 5);
            }
        }
        out += "\n";
    }
    return out;
}

inline nlohmann::ordered_json table_json(const std::vector<PostulateResult>& results) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const PostulateResult& r : results) {
        nlohmann::ordered_json cell;
        cell["measure"] = r.measure;
        cell["postulate"] = postulate_name(r.postulate);
        cell["verdict"] = r.verdict();
        cell["trials"] = r.trials;
        if (r.counterexample) cell["witness"] = r.witness;
        out.push_back(std::move(cell));
    }
    return out;
}

}  // namespace incmeter
