#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "test_helpers.hpp"

using namespace incmeter;
using th::L;
using th::N;

TEST_CASE("parses a single rule") {
    RuleProgram p = parse_rules("platinumCustomer -> creditWorthy.");
    REQUIRE(p.size() == 1);
    CHECK(p.rules[0] == Rule::make({L("platinumCustomer")}, L("creditWorthy")));
    CHECK(p.spans[0].line == 1);
    CHECK(p.spans[0].col == 1);
}

TEST_CASE("parses negated heads and bodies") {
    RuleProgram p = parse_rules("a -> -b.\n-b, c -> -d.");
    REQUIRE(p.size() == 2);
    CHECK(p.rules[0] == Rule::make({L("a")}, N("b")));
    CHECK(p.rules[1] == Rule::make({N("b"), L("c")}, N("d")));
}

TEST_CASE("duplicate rules collapse") {
    RuleProgram p = parse_rules("a, b -> c. a, b -> c.");
    CHECK(p.size() == 1);
    CHECK(parse_rules("a, b -> c. b, a -> c.").size() == 1);
}

TEST_CASE("not-sign is accepted as a negation alias") {
    RuleProgram p = parse_rules("a -> ¬b.");
    REQUIRE(p.size() == 1);
    CHECK(p.rules[0] == Rule::make({L("a")}, N("b")));
}

TEST_CASE("comments and whitespace are insignificant") {
    RuleProgram p = parse_rules("% a comment\n  a ,\tb\n  ->\n c . % trailing\n");
    REQUIRE(p.size() == 1);
    CHECK(p.rules[0] == Rule::make({L("a"), L("b")}, L("c")));
}

TEST_CASE("syntax errors carry position") {
    try {
        parse_rules("a -> b.\nc -> .");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 6);
    }
}

TEST_CASE("facts are rejected in a rules file") {
    CHECK_THROWS_AS(parse_rules("-> a."), ParseError);
    CHECK_THROWS_AS(parse_rules("a."), ParseError);
    CHECK_THROWS_MATCHES(parse_rules("a."), ParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("facts are not allowed")));
}

TEST_CASE("token garbage is rejected") {
    CHECK_THROWS_AS(parse_rules("a -> 9b."), ParseError);
    CHECK_THROWS_AS(parse_rules("a => b."), ParseError);
    CHECK_THROWS_AS(parse_rules("a -> b"), ParseError);  // missing period
}

TEST_CASE("render and reparse round-trips") {
    std::mt19937_64 rng(4100);
    for (int trial = 0; trial < 100; ++trial) {
        RuleProgram program;
        const int n = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) {
            std::vector<Literal> body{th::random_literal(rng, 6)};
            if (rng() % 2 == 0) body.push_back(th::random_literal(rng, 6));
            program.add(Rule::make(std::move(body), th::random_literal(rng, 6)));
        }
        CHECK(parse_rules(render(program)) == program);
    }
}

TEST_CASE("jsonl cases parse") {
    auto records = parse_cases("{\"case_id\":\"c1\",\"facts\":[\"a\",\"c\"]}\n", CaseFormat::jsonl);
    REQUIRE(records.size() == 1);
    CHECK(records[0].case_id == "c1");
    CHECK(records[0].facts == th::lits({L("a"), L("c")}));
}

TEST_CASE("jsonl negation marker") {
    auto records = parse_cases("{\"case_id\":\"c1\",\"facts\":[\"-a\",\"b\"]}", CaseFormat::jsonl);
    REQUIRE(records.size() == 1);
    CHECK(records[0].facts == th::lits({N("a"), L("b")}));

    auto alias = parse_cases("{\"case_id\":\"c1\",\"facts\":[\"¬a\"]}", CaseFormat::jsonl);
    CHECK(alias[0].facts == std::vector<Literal>{N("a")});
    auto csv_alias = parse_cases("case_id,facts\nc1,¬a;b\n", CaseFormat::csv);
    CHECK(csv_alias[0].facts == th::lits({N("a"), L("b")}));
}

TEST_CASE("malformed jsonl reports the line") {
    try {
        parse_cases("{\"case_id\":\"c1\",\"facts\":[]}\nnot json\n", CaseFormat::jsonl);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("duplicate case ids are rejected") {
    CHECK_THROWS_AS(parse_cases("{\"case_id\":\"c1\",\"facts\":[]}\n"
                                "{\"case_id\":\"c1\",\"facts\":[\"a\"]}\n",
                                CaseFormat::jsonl),
                    ParseError);
}

TEST_CASE("contradictory facts are rejected unless allowed") {
    const std::string text = "{\"case_id\":\"c1\",\"facts\":[\"a\",\"-a\"]}\n";
    CHECK_THROWS_AS(parse_cases(text, CaseFormat::jsonl), ParseError);
    auto records = parse_cases(text, CaseFormat::jsonl, CaseParseOptions{true});
    REQUIRE(records.size() == 1);
    CHECK(records[0].facts.size() == 2);
}

TEST_CASE("csv cases parse") {
    auto records = parse_cases("case_id,facts\nc3,a;y\nc4,\n", CaseFormat::csv);
    REQUIRE(records.size() == 2);
    CHECK(records[0].case_id == "c3");
    CHECK(records[0].facts == th::lits({L("a"), L("y")}));
    CHECK(records[1].facts.empty());
}

TEST_CASE("csv header is validated") {
    CHECK_THROWS_AS(parse_cases("id,facts\nc1,a\n", CaseFormat::csv), ParseError);
    CHECK_THROWS_AS(parse_cases("", CaseFormat::csv), ParseError);
}

TEST_CASE("csv rows need two columns") {
    CHECK_THROWS_AS(parse_cases("case_id,facts\nc1\n", CaseFormat::csv), ParseError);
}

TEST_CASE("cases jsonl writer round-trips") {
    auto records = parse_cases(th::kStreamCasesJsonl, CaseFormat::jsonl);
    std::string rendered = render_cases_jsonl(records);
    auto reparsed = parse_cases(rendered, CaseFormat::jsonl);
    REQUIRE(reparsed.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(reparsed[i].case_id == records[i].case_id);
        CHECK(reparsed[i].facts == records[i].facts);
    }
}

TEST_CASE("caseset construction matches the stream") {
    CaseSet cs = th::stream_fixture();
    CHECK(cs.case_count() == 4);
    CHECK(cs.rule_count() == 5);
    CHECK(cs.classes.size() == 3);  // b1 and b2 share one fact class
    CHECK(cs.classes[cs.cases[0].class_index].multiplicity == 2);
    for (const auto& cls : cs.classes) {
        for (ElementId r = 0; r < cs.rule_count(); ++r)
            CHECK(cls.base.element(r) == cs.program.rules[r]);
    }
}

TEST_CASE("empty caseset") {
    RuleProgram program = parse_rules("a -> b.");
    CaseSet cs = build_caseset(program, {});
    CHECK(cs.case_count() == 0);
    CHECK(cs.classes.empty());
    CHECK(sigma_measure(cs, mi_measure()) == 0);
}

TEST_CASE("identical fact sets dedup to one class with multiplicity") {
    RuleProgram program = parse_rules("a -> b.");
    auto records = parse_cases(
        "{\"case_id\":\"c1\",\"facts\":[\"a\"]}\n{\"case_id\":\"c2\",\"facts\":[\"a\"]}\n",
        CaseFormat::jsonl);
    CaseSet cs = build_caseset(program, records);
    CHECK(cs.case_count() == 2);
    CHECK(cs.classes.size() == 1);
    CHECK(cs.classes[0].multiplicity == 2);
}

TEST_CASE("dedup is transparent to aggregated values") {
    std::mt19937_64 rng(4200);
    for (int trial = 0; trial < 30; ++trial) {
        RandomCasesetConfig cfg;
        cfg.n_atoms = 4;
        cfg.max_rules = 5;
        cfg.max_cases = 6;
        cfg.fact_probability = 0.5;
        cfg.seed = rng();
        CaseSet cs = random_caseset(cfg);

        CulpabilityMeasure chash = make_culpability_measure("chash");
        CulpabilityVector aggregated = culpability_vector(cs, chash);

        // Per-case evaluation without any class folding.
        std::vector<Rational> naive(cs.rule_count(), Rational(0));
        for (const auto& entry : cs.cases) {
            RuleBase base = detail::class_base(cs.program, cs.classes[entry.class_index].facts);
            CulpabilityEval eval = chash.eval_all(base);
            for (ElementId r = 0; r < cs.rule_count(); ++r) naive[r] += eval.values[r];
        }
        CHECK(aggregated.values == naive);
    }
}
