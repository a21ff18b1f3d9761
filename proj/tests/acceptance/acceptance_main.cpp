// Acceptance suite: exercises the full set of exit criteria end to end and
// prints one pass/fail line per criterion. Needs the CLI binary path as
// argv[1] for the scaling and determinism criteria.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "incmeter/incmeter.hpp"

namespace fs = std::filesystem;
using namespace incmeter;

namespace {

std::string g_tool;
fs::path g_dir;
int g_failures = 0;

struct Criterion {
    std::string label;
    bool ok = true;
    std::vector<std::string> notes;

    explicit Criterion(std::string l) : label(std::move(l)) {}

    void expect(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            notes.push_back(what);
        }
    }

    void finish() {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", label.c_str());
        for (const std::string& n : notes) std::printf("       - %s\n", n.c_str());
        std::fflush(stdout);
        if (!ok) ++g_failures;
    }
};

Literal L(std::string_view s) { return Literal::positive(s); }
Literal N(std::string_view s) { return Literal::negative(s); }

std::string write_file(const std::string& name, const std::string& content) {
    fs::path p = g_dir / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_tool(const std::string& args) {
    std::string cmd = g_tool + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

constexpr std::string_view kStreamRules =
    "a -> b.\nc -> -b.\nb -> x.\nx -> z.\ny -> -z.\n";
constexpr std::string_view kStreamCases =
    "{\"case_id\":\"b1\",\"facts\":[\"a\",\"c\"]}\n"
    "{\"case_id\":\"b2\",\"facts\":[\"a\",\"c\"]}\n"
    "{\"case_id\":\"b3\",\"facts\":[\"a\",\"y\"]}\n"
    "{\"case_id\":\"b4\",\"facts\":[\"a\",\"c\",\"y\"]}\n";

CaseSet worked_stream() {
    return build_caseset(parse_rules(kStreamRules), parse_cases(kStreamCases, CaseFormat::jsonl));
}

Literal random_literal(std::mt19937_64& rng, std::uint32_t n_atoms) {
    return Literal{Atom::named(atom_name(static_cast<std::uint32_t>(rng() % n_atoms))),
                   rng() % 2 == 0};
}

RuleBase random_base(std::mt19937_64& rng, std::uint32_t max_elems, std::uint32_t n_atoms) {
    RuleBase base;
    const std::uint32_t target = static_cast<std::uint32_t>(rng() % (max_elems + 1));
    while (base.size() < target) {
        if (rng() % 3 == 0) {
            base.add_fact(random_literal(rng, n_atoms));
        } else {
            std::vector<Literal> body{random_literal(rng, n_atoms)};
            if (rng() % 2 == 0) body.push_back(random_literal(rng, n_atoms));
            base.add(Rule::make(std::move(body), random_literal(rng, n_atoms)));
        }
    }
    return base;
}

void criterion_worked_examples() {
    Criterion c("criterion 1: worked-example fidelity (exact rationals)");

    // Loan base: one minimal inconsistent subset covering all four elements.
    RuleBase b1;
    b1.add_fact(L("mentalCondition"));
    b1.add_fact(L("platinumCustomer"));
    b1.add(Rule::make({L("platinumCustomer")}, L("creditWorthy")));
    b1.add(Rule::make({L("mentalCondition")}, N("creditWorthy")));
    c.expect(i_mi(b1) == 1, "loan base measure != 1");
    MICollection mic = enumerate_mi(b1);
    c.expect(mic.subsets.size() == 1 && mic.subsets[0].element_ids == std::vector<ElementId>{0, 1, 2, 3},
             "loan base subset is not the full four-element set");

    // Fork base: every element 1/3.
    RuleBase b2;
    b2.add_fact(L("a"));
    b2.add(Rule::make({L("a")}, L("b")));
    b2.add(Rule::make({L("a")}, N("b")));
    PayoffVector sh = shapley(b2, mi_measure());
    c.expect(sh.values == std::vector<Rational>{Rational(1, 3), Rational(1, 3), Rational(1, 3)},
             "fork payoffs are not all 1/3");

    PayoffVector adj2 = adjusted_shapley(b2, mi_measure());
    c.expect(adj2.values == std::vector<Rational>{0, Rational(1, 2), Rational(1, 2)},
             "fork adjusted payoffs are not (0, 1/2, 1/2)");

    RuleBase b3;
    b3.add_fact(L("a"));
    b3.add(Rule::make({L("a")}, L("b")));
    b3.add_fact(N("b"));
    PayoffVector adj3 = adjusted_shapley(b3, mi_measure());
    c.expect(adj3.values == std::vector<Rational>{0, 1, 0},
             "clash adjusted payoffs are not (0, 0, 1) over (facts, rule)");

    // Reconstructed stream: first confirm the per-case profile the
    // reconstruction must reproduce, then the aggregate columns.
    CaseSet cs = worked_stream();
    AnalyzeOptions options;
    options.measures = {"mi", "cd", "chash", "adj-shapley-mi"};
    AnalysisResult result = analyze_caseset(cs, options);
    c.expect(result.case_i_mi == std::vector<std::int64_t>{1, 1, 1, 2},
             "per-case counts are not (1, 1, 1, 2)");
    c.expect(result.overall == 5, "overall total is not 5");
    c.expect(result.rule_values.at("cd") == std::vector<Rational>{4, 3, 2, 2, 2},
             "participation column is not (4, 3, 2, 2, 2)");
    c.expect(result.rule_values.at("chash") == std::vector<Rational>{5, 3, 2, 2, 2},
             "count column is not (5, 3, 2, 2, 2)");
    c.expect(result.rule_values.at("adj-shapley-mi") ==
                 std::vector<Rational>{2, Rational(3, 2), Rational(1, 2), Rational(1, 2),
                                       Rational(1, 2)},
             "adjusted column is not (2, 3/2, 1/2, 1/2, 1/2)");
    bool r1_first = result.ranks[0] == 1.0;
    for (std::size_t i = 1; i < result.ranks.size(); ++i) r1_first = r1_first && result.ranks[i] > 1.0;
    c.expect(r1_first, "the first rule is not ranked strictly first");

    c.finish();
}

void criterion_oracle_equivalence() {
    Criterion c("criterion 2: oracle equivalence (exact)");

    std::mt19937_64 rng(90001);
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        RuleBase base = random_base(rng, 12, 5);
        if (enumerate_mi(base) != enumerate_mi_bruteforce(base)) ++mismatches;
    }
    c.expect(mismatches == 0,
             "subset enumeration disagreed with the exhaustive oracle on " +
                 std::to_string(mismatches) + "/1000 bases");

    InconsistencyMeasure m = mi_measure();
    int payoff_mismatches = 0;
    for (int trial = 0; trial < 300; ++trial) {
        RuleBase base = random_base(rng, 10, 4);
        if (shapley(base, m, ShapleyOptions{{}, true}).values != shapley_mi_closedform(base).values)
            ++payoff_mismatches;
    }
    c.expect(payoff_mismatches == 0,
             "coalition payoff disagreed with the closed form on " +
                 std::to_string(payoff_mismatches) + "/300 bases");

    int adj_mismatches = 0;
    for (int trial = 0; trial < 300; ++trial) {
        RuleBase base = random_base(rng, 10, 4);
        PayoffVector reduced = adjusted_shapley(base, m);
        PayoffVector full = adjusted_shapley(base, m, AdjustedOptions{{}, true});
        if (reduced.values != full.values || reduced.blame_unassigned != full.blame_unassigned)
            ++adj_mismatches;
    }
    c.expect(adj_mismatches == 0,
             "reduced adjusted payoff disagreed with full enumeration on " +
                 std::to_string(adj_mismatches) + "/300 bases");

    c.finish();
}

void criterion_postulates() {
    Criterion c("criterion 3: postulate suite (10000 trials per cell)");
    const std::uint64_t trials = 10000;
    const std::uint64_t seed = 424242;

    for (const char* measure : {"cd", "chash", "adj-shapley-mi"}) {
        for (Postulate p : {Postulate::RS, Postulate::RM, Postulate::CO, Postulate::MO,
                            Postulate::IN}) {
            PostulateResult r = check_postulate(p, measure, trials, seed);
            c.expect(!r.counterexample, std::string(postulate_name(p)) + "/" + measure +
                                            " found a counterexample: " + r.witness.dump());
        }
    }
    for (Postulate p : {Postulate::DIS, Postulate::UB, Postulate::FM}) {
        PostulateResult r = check_postulate(p, "adj-shapley-mi", trials, seed);
        c.expect(!r.counterexample, std::string(postulate_name(p)) +
                                        "/adj-shapley-mi found a counterexample: " +
                                        r.witness.dump());
    }
    for (const char* measure : {"cd", "chash"}) {
        PostulateResult r = check_postulate(Postulate::FM, measure, trials, seed);
        c.expect(r.counterexample,
                 std::string("FM/") + measure + " produced no counterexample in 10000 trials");
        if (r.counterexample)
            c.expect(replay_witness(r.witness),
                     std::string("FM/") + measure + " witness did not replay to a violation");
    }

    c.finish();
}

void criterion_scaling() {
    Criterion c("criterion 4: desk-scale timing and proportional growth");

    std::string csv_path = (g_dir / "bench.csv").string();
    int code = run_tool(
        "bench --sizes 10,20,40 --cases 5000,10000,20000 --probability 0.3 --seed 1 --workers 1 "
        "--out " + csv_path);
    c.expect(code == 0, "bench run failed with exit code " + std::to_string(code));

    std::map<std::pair<unsigned, unsigned>, double> cell;
    std::istringstream in(slurp(csv_path));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        unsigned size, cases;
        double seconds;
        if (std::sscanf(line.c_str(), "%u,%u,%lf", &size, &cases, &seconds) == 3)
            cell[{size, cases}] = seconds;
    }
    c.expect(cell.size() == 9, "expected 9 grid cells, got " + std::to_string(cell.size()));

    if (cell.count({20, 10000})) {
        double t = cell[{20, 10000}];
        c.expect(t < 60.0, "20 rules x 10000 cases took " + std::to_string(t) + "s (>= 60s)");
    }

    // Doubling either dimension may at most double the runtime, within a 2x
    // tolerance; sub-10ms cells are clamped before forming ratios.
    auto clamped = [&](unsigned s, unsigned n) { return std::max(cell[{s, n}], 0.010); };
    for (unsigned n : {5000u, 10000u, 20000u}) {
        for (auto [from, to] : {std::pair{10u, 20u}, std::pair{20u, 40u}}) {
            double ratio = clamped(to, n) / clamped(from, n);
            c.expect(ratio <= 4.0, "rule-size doubling " + std::to_string(from) + "->" +
                                       std::to_string(to) + " at " + std::to_string(n) +
                                       " cases grew by x" + std::to_string(ratio));
        }
    }
    for (unsigned s : {10u, 20u, 40u}) {
        for (auto [from, to] : {std::pair{5000u, 10000u}, std::pair{10000u, 20000u}}) {
            double ratio = clamped(s, to) / clamped(s, from);
            c.expect(ratio <= 4.0, "case-count doubling " + std::to_string(from) + "->" +
                                       std::to_string(to) + " at " + std::to_string(s) +
                                       " rules grew by x" + std::to_string(ratio));
        }
    }

    c.finish();
}

void criterion_determinism() {
    Criterion c("criterion 5: byte-identical reports across permutations and workers");

    std::string rules = write_file("det_rules.txt", std::string(kStreamRules));
    std::string cases = write_file("det_cases.jsonl", std::string(kStreamCases));

    // A larger generated stream with plenty of inconsistent cases.
    std::string gen_rules = (g_dir / "gen_rules.txt").string();
    std::string gen_cases = (g_dir / "gen_cases.jsonl").string();
    int code = run_tool("generate --rules 8 --cases 300 --probability 0.4 --seed 7 --out-rules " +
                        gen_rules + " --out-cases " + gen_cases);
    c.expect(code == 0, "generate failed");

    auto permute_lines = [&](const std::string& path, const std::string& name) {
        std::istringstream in(slurp(path));
        std::vector<std::string> lines;
        std::string l;
        while (std::getline(in, l))
            if (!l.empty()) lines.push_back(l);
        std::mt19937_64 rng(99);
        std::shuffle(lines.begin(), lines.end(), rng);
        std::string joined;
        for (const std::string& s : lines) joined += s + "\n";
        return write_file(name, joined);
    };

    const std::string measure_flags = " --measures mi,cd,chash,adj-shapley-mi --output ";
    struct Input {
        std::string rules, cases, tag;
    };
    for (const Input& input : {Input{rules, cases, "worked"}, Input{gen_rules, gen_cases, "gen"}}) {
        std::string permuted = permute_lines(input.cases, input.tag + "_perm.jsonl");
        std::string out_a = (g_dir / (input.tag + "_a.json")).string();
        std::string out_b = (g_dir / (input.tag + "_b.json")).string();
        std::string out_c = (g_dir / (input.tag + "_c.json")).string();
        bool ran = run_tool("analyze --rules " + input.rules + " --cases " + input.cases +
                            measure_flags + out_a + " --workers 1") == 0 &&
                   run_tool("analyze --rules " + input.rules + " --cases " + permuted +
                            measure_flags + out_b + " --workers 1") == 0 &&
                   run_tool("analyze --rules " + input.rules + " --cases " + input.cases +
                            measure_flags + out_c + " --workers 8") == 0;
        c.expect(ran, input.tag + ": analyze run failed");
        if (!ran) continue;
        c.expect(slurp(out_a) == slurp(out_b),
                 input.tag + ": report differs under a case permutation");
        c.expect(slurp(out_a) == slurp(out_c), input.tag + ": report differs between 1 and 8 workers");
    }

    c.finish();
}

void criterion_complexity() {
    Criterion c("criterion 6: near-linear consistency checks and exact counting");

    // Chain bases with facts on alternating atoms stay consistent, so the
    // fixpoint runs to completion instead of stopping at a contradiction.
    auto chain_base = [](std::uint32_t n_rules) {
        RuleBase base;
        for (std::uint32_t i = 0; i < n_rules; ++i)
            base.add(Rule::make({L(atom_name(i))}, N(atom_name(i + 1))));
        for (std::uint32_t i = 0; i <= n_rules; i += 2) base.add_fact(L(atom_name(i)));
        return base;
    };
    auto time_consistency = [](const RuleBase& base) {
        double best = 1e9;
        for (int rep = 0; rep < 3; ++rep) {
            auto start = std::chrono::steady_clock::now();
            bool ok = is_consistent(base);
            std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
            if (!ok) return -1.0;
            best = std::min(best, dt.count());
        }
        return best;
    };

    RuleBase small = chain_base(12'500);
    RuleBase large = chain_base(100'000);
    double t_small = time_consistency(small);
    double t_large = time_consistency(large);
    c.expect(t_small >= 0 && t_large >= 0, "alternating chain bases were unexpectedly inconsistent");
    double ratio = t_large / std::max(t_small, 0.001);
    c.expect(ratio <= 20.0,
             "8x more rules grew the consistency check by x" + std::to_string(ratio) +
                 " (linear would be ~8)");

    // Participation counts equal the exhaustive per-case tally.
    std::mt19937_64 rng(90002);
    CulpabilityMeasure chash = make_culpability_measure("chash");
    int mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
        RandomCasesetConfig cfg;
        cfg.n_atoms = 4;
        cfg.max_rules = 6;
        cfg.max_cases = 5;
        cfg.fact_probability = 0.5;
        cfg.seed = rng();
        CaseSet cs = random_caseset(cfg);

        CulpabilityVector fast = culpability_vector(cs, chash);
        for (ElementId r = 0; r < cs.rule_count(); ++r) {
            Rational expected(0);
            for (const auto& entry : cs.cases) {
                MICollection mic = enumerate_mi_bruteforce(cs.classes[entry.class_index].base);
                for (const MISubset& m : mic.subsets)
                    if (std::binary_search(m.element_ids.begin(), m.element_ids.end(), r))
                        expected += 1;
            }
            if (fast.values[r] != expected) ++mismatches;
        }
    }
    c.expect(mismatches == 0, "participation counts diverged from the exhaustive tally " +
                                  std::to_string(mismatches) + " times");

    c.finish();
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <path-to-incmeter-binary>\n", argv[0]);
        return 2;
    }
    g_tool = argv[1];
    g_dir = fs::temp_directory_path() / ("incmeter_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(g_dir);

    criterion_worked_examples();
    criterion_oracle_equivalence();
    criterion_postulates();
    criterion_scaling();
    criterion_determinism();
    criterion_complexity();

    std::error_code ec;
    fs::remove_all(g_dir, ec);

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
