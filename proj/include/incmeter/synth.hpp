#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "incmeter/core.hpp"
#include "incmeter/multiset.hpp"
#include "incmeter/parser.hpp"

namespace incmeter {

// Bijective base-26 spelling: 0 -> "a", 25 -> "z", 26 -> "aa", ...
inline std::string atom_name(std::uint32_t index) {
    std::string s;
    std::uint64_t n = index;
    while (true) {
        s.insert(s.begin(), static_cast<char>('a' + n % 26));
        if (n < 26) break;
        n = n / 26 - 1;
    }
    return s;
}

struct GenConfig {
    std::uint32_t n_rules = 0;
    std::uint32_t n_cases = 0;
    double fact_probability = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

// Portable deterministic randomness: the raw mt19937_64 stream is mandated
// bit-exactly by the standard; the [0,1) mapping keeps 53 bits.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) { return mix64(mix64(a) ^ b); }

}  // namespace detail

// Chain rule set over consecutive alphabet atoms: rule i is
// "atom_i -> -atom_{i+1}".
inline RuleProgram generate_rules(std::uint32_t n_rules) {
    RuleProgram program;
    for (std::uint32_t i = 0; i < n_rules; ++i) {
        Literal body = Literal::positive(atom_name(i));
        Literal head = Literal::negative(atom_name(i + 1));
        program.add(Rule::make({body}, head));
    }
    return program;
}

// Each atom of the rule base joins a case's fact set independently, as a
// positive fact, with the configured probability.
inline std::vector<CaseRecord> generate_case_records(const GenConfig& config) {
    if (config.fact_probability < 0.0 || config.fact_probability > 1.0)
        throw std::invalid_argument("fact probability must lie in [0, 1]");
    const std::uint32_t n_atoms = config.n_rules == 0 ? 0 : config.n_rules + 1;
    std::vector<Atom> atoms;
    atoms.reserve(n_atoms);
    for (std::uint32_t i = 0; i < n_atoms; ++i) atoms.push_back(Atom::named(atom_name(i)));

    std::mt19937_64 rng(config.seed);
    std::vector<CaseRecord> records;
    records.reserve(config.n_cases);
    for (std::uint32_t c = 0; c < config.n_cases; ++c) {
        CaseRecord rec;
        rec.case_id = "c" + std::to_string(c + 1);
        for (Atom a : atoms)
            if (detail::uniform01(rng) < config.fact_probability)
                rec.facts.push_back(Literal{a, false});
        rec.facts = detail::normalize_facts(std::move(rec.facts));
        records.push_back(std::move(rec));
    }
    return records;
}

inline CaseSet generate_cases(const GenConfig& config) {
    RuleProgram program = generate_rules(config.n_rules);
    std::vector<CaseRecord> records = generate_case_records(config);
    return build_caseset(program, records);
}

// Structured-random streams for the property harness: random bodies and
// heads with mixed polarity, fact sets internally consistent by choosing one
// polarity per atom up front.
struct RandomCasesetConfig {
    std::uint32_t n_atoms = 4;
    std::uint32_t max_rules = 8;
    std::uint32_t max_body = 2;
    std::uint32_t max_cases = 6;
    double fact_probability = 0.5;
    bool mixed_polarity_facts = true;
    std::uint64_t seed = 0;
};

inline CaseSet random_caseset(const RandomCasesetConfig& config) {
    if (config.n_atoms == 0) throw std::invalid_argument("need at least one atom");
    std::mt19937_64 rng(config.seed);
    auto pick = [&](std::uint32_t bound) {
        return static_cast<std::uint32_t>(rng() % bound);
    };

    std::vector<Atom> atoms;
    for (std::uint32_t i = 0; i < config.n_atoms; ++i) atoms.push_back(Atom::named(atom_name(i)));

    RuleProgram program;
    const std::uint32_t n_rules = config.max_rules == 0 ? 0 : 1 + pick(config.max_rules);
    for (std::uint32_t r = 0; r < n_rules; ++r) {
        const std::uint32_t body_size = 1 + pick(std::max(1u, config.max_body));
        std::vector<Literal> body;
        for (std::uint32_t b = 0; b < body_size; ++b)
            body.push_back(Literal{atoms[pick(config.n_atoms)], rng() % 2 == 0});
        Literal head{atoms[pick(config.n_atoms)], rng() % 2 == 0};
        program.add(Rule::make(std::move(body), head));
    }

    const std::uint32_t n_cases = config.max_cases == 0 ? 0 : 1 + pick(config.max_cases);
    std::vector<CaseRecord> records;
    for (std::uint32_t c = 0; c < n_cases; ++c) {
        CaseRecord rec;
        rec.case_id = "t" + std::to_string(c);
        for (Atom a : atoms) {
            bool negated = config.mixed_polarity_facts && rng() % 2 == 1;
            if (detail::uniform01(rng) < config.fact_probability)
                rec.facts.push_back(Literal{a, negated});
        }
        rec.facts = detail::normalize_facts(std::move(rec.facts));
        records.push_back(std::move(rec));
    }
    return build_caseset(program, records);
}

}  // namespace incmeter
