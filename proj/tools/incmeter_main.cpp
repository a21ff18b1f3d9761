#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "incmeter/incmeter.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-")
        std::cout << content;
    else
        write_file(path, content);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<std::uint32_t> split_u32(const std::string& s) {
    std::vector<std::uint32_t> out;
    for (const std::string& item : split_list(s)) out.push_back(std::stoul(item));
    return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

incmeter::MiBudget resolve_budget(std::optional<std::uint64_t> flag_mis,
                                  std::optional<std::uint64_t> flag_supports) {
    incmeter::MiBudget budget;
    if (const char* env = std::getenv("INCMETER_BUDGET_MIS")) {
        std::uint64_t value = 0;
        auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), value);
        if (ec == std::errc{} && *ptr == '\0') budget.max_mis = value;
    }
    if (flag_mis) budget.max_mis = *flag_mis;
    if (flag_supports) budget.max_supports_per_literal = *flag_supports;
    return budget;
}

struct AnalyzeArgs {
    std::string rules_path;
    std::string cases_path;
    std::string format;  // "", "jsonl", "csv"
    std::string measures = "mi,cd,chash";
    std::string output;
    std::string output_format;  // "", "json", "csv"
    std::optional<std::uint64_t> top_k;
    std::optional<std::uint64_t> budget_mis;
    std::optional<std::uint64_t> budget_supports;
    bool allow_contradictory_facts = false;
    unsigned workers = 1;
};

int run_analyze(const AnalyzeArgs& args) {
    incmeter::RuleProgram program = incmeter::parse_rules(read_file(args.rules_path));

    std::vector<incmeter::CaseRecord> records;
    if (!args.cases_path.empty()) {
        incmeter::CaseFormat format =
            args.format == "csv"   ? incmeter::CaseFormat::csv
            : args.format == "jsonl" ? incmeter::CaseFormat::jsonl
                                     : (ends_with(args.cases_path, ".csv") ? incmeter::CaseFormat::csv
                                                                           : incmeter::CaseFormat::jsonl);
        std::ifstream in(args.cases_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open '" + args.cases_path + "'");
        records = incmeter::parse_cases(in, format,
                                        incmeter::CaseParseOptions{args.allow_contradictory_facts});
    }

    incmeter::CaseSet caseset = incmeter::build_caseset(program, records);

    incmeter::AnalyzeOptions options;
    options.measures = split_list(args.measures);
    if (options.measures.empty()) throw std::invalid_argument("at least one measure is required");
    options.budget = resolve_budget(args.budget_mis, args.budget_supports);
    options.workers = args.workers;
    options.top_k = args.top_k;

    incmeter::AnalysisResult result = incmeter::analyze_caseset(caseset, options);

    bool csv = args.output_format == "csv" ||
               (args.output_format.empty() && ends_with(args.output, ".csv"));
    if (csv)
        emit(args.output, incmeter::report_csv(caseset, result, options.top_k));
    else
        emit(args.output, incmeter::report_json(caseset, result, options.top_k).dump(2) + "\n");
    return 0;
}

struct GenerateArgs {
    std::uint32_t n_rules = 0;
    std::uint32_t n_cases = 0;
    double probability = 0.5;
    std::uint64_t seed = 0;
    std::string shape = "chain";
    std::uint32_t atoms = 6;
    std::string out_rules;
    std::string out_cases;
};

int run_generate(const GenerateArgs& args) {
    incmeter::RuleProgram program;
    std::vector<incmeter::CaseRecord> records;
    if (args.shape == "chain") {
        program = incmeter::generate_rules(args.n_rules);
        records = incmeter::generate_case_records(
            incmeter::GenConfig{args.n_rules, args.n_cases, args.probability, args.seed});
    } else if (args.shape == "random") {
        incmeter::RandomCasesetConfig cfg;
        cfg.n_atoms = args.atoms;
        cfg.max_rules = std::max(1u, args.n_rules);
        cfg.max_cases = std::max(1u, args.n_cases);
        cfg.fact_probability = args.probability;
        cfg.seed = args.seed;
        incmeter::CaseSet cs = incmeter::random_caseset(cfg);
        program = cs.program;
        for (const auto& entry : cs.cases)
            records.push_back(
                incmeter::CaseRecord{entry.case_id, cs.classes[entry.class_index].facts});
    } else {
        throw std::invalid_argument("unknown shape '" + args.shape + "'");
    }
    emit(args.out_rules, incmeter::render(program));
    emit(args.out_cases, incmeter::render_cases_jsonl(records));
    return 0;
}

struct CheckArgs {
    std::uint64_t trials = 1000;
    std::uint64_t seed = 42;
    std::string postulate;
    std::string measure;
    bool json = false;
};

int run_check(const CheckArgs& args) {
    std::vector<std::string> measures =
        args.measure.empty() ? incmeter::table1_measures() : std::vector<std::string>{args.measure};
    std::vector<incmeter::Postulate> postulates;
    if (args.postulate.empty()) {
        postulates = incmeter::all_postulates();
    } else {
        auto p = incmeter::postulate_from_name(args.postulate);
        if (!p) throw std::invalid_argument("unknown postulate '" + args.postulate + "'");
        postulates.push_back(*p);
    }

    std::vector<incmeter::PostulateResult> results;
    for (const std::string& m : measures)
        for (incmeter::Postulate p : postulates)
            results.push_back(incmeter::check_postulate(p, m, args.trials, args.seed));

    if (args.json) {
        std::cout << incmeter::table_json(results).dump(2) << "\n";
        return 0;
    }
    std::cout << incmeter::render_table(results);
    for (const incmeter::PostulateResult& r : results) {
        if (!r.counterexample) continue;
        std::cout << "counterexample " << incmeter::postulate_name(r.postulate) << "/" << r.measure
                  << " (trial " << r.witness.at("trial").get<std::uint64_t>()
                  << "): " << r.witness.dump() << "\n";
    }
    return 0;
}

struct BenchArgs {
    std::string sizes = "10,20,40";
    std::string cases = "5000,10000,20000";
    double probability = 0.3;
    std::uint64_t seed = 1;
    std::string measures = "mi,cd,chash";
    std::string out;
    unsigned workers = 1;
};

int run_bench(const BenchArgs& args) {
    incmeter::AnalyzeOptions options;
    options.measures = split_list(args.measures);
    options.workers = args.workers;
    // Timings reflect the true per-case cost; identical fact sets are not
    // folded here, unlike analyze.
    options.fold_identical_cases = false;

    std::string csv = "size,cases,seconds\n";
    for (std::uint32_t size : split_u32(args.sizes)) {
        for (std::uint32_t n_cases : split_u32(args.cases)) {
            incmeter::GenConfig cfg{size, n_cases, args.probability,
                                    incmeter::detail::mix64(args.seed, (std::uint64_t)size << 32 | n_cases)};
            incmeter::CaseSet cs = incmeter::generate_cases(cfg);
            auto start = std::chrono::steady_clock::now();
            incmeter::AnalysisResult result = incmeter::analyze_caseset(cs, options);
            std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
            (void)result;
            char row[128];
            std::snprintf(row, sizeof(row), "%u,%u,%.6f\n", size, n_cases, elapsed.count());
            csv += row;
        }
    }
    emit(args.out, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inconsistency measurement over sequences of business rule cases"};
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    CLI::App* analyze = app.add_subcommand("analyze", "Analyze a rule set against a case stream");
    analyze->add_option("--rules", analyze_args.rules_path, "Rules file")->required();
    analyze->add_option("--cases", analyze_args.cases_path, "Cases file (JSONL or CSV)");
    analyze->add_option("--format", analyze_args.format, "Cases format: jsonl or csv")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    analyze->add_option("--measures", analyze_args.measures,
                        "Comma list of mi,cd,chash,shapley-mi,adj-shapley-mi");
    analyze->add_option("--output", analyze_args.output, "Report path (default stdout)");
    analyze->add_option("--output-format", analyze_args.output_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    analyze->add_option("--top", analyze_args.top_k, "Render only the top-k ranked rules");
    analyze->add_option("--budget-mis", analyze_args.budget_mis,
                        "Cap on minimal inconsistent subsets per case");
    analyze->add_option("--budget-supports", analyze_args.budget_supports,
                        "Cap on tracked supports per literal");
    analyze->add_flag("--allow-contradictory-facts", analyze_args.allow_contradictory_facts,
                      "Accept cases whose fact set contains both polarities of an atom");
    analyze->add_option("--workers", analyze_args.workers, "Analysis threads");

    GenerateArgs generate_args;
    CLI::App* generate = app.add_subcommand("generate", "Write a synthetic rules file and case stream");
    generate->add_option("--rules", generate_args.n_rules, "Number of rules")->required();
    generate->add_option("--cases", generate_args.n_cases, "Number of cases")->required();
    generate->add_option("--probability", generate_args.probability, "Per-atom fact probability");
    generate->add_option("--seed", generate_args.seed, "Generator seed");
    generate->add_option("--shape", generate_args.shape, "chain or random")
        ->check(CLI::IsMember({"chain", "random"}));
    generate->add_option("--atoms", generate_args.atoms, "Alphabet size (random shape)");
    generate->add_option("--out-rules", generate_args.out_rules, "Rules output path")->required();
    generate->add_option("--out-cases", generate_args.out_cases, "Cases JSONL output path")->required();

    CheckArgs check_args;
    CLI::App* check = app.add_subcommand("check", "Property-test the rationality postulates");
    check->add_option("--trials", check_args.trials, "Random streams per cell");
    check->add_option("--seed", check_args.seed, "Fuzzing seed");
    check->add_option("--postulate", check_args.postulate, "Restrict to one postulate");
    check->add_option("--measure", check_args.measure, "Restrict to one measure");
    check->add_flag("--json", check_args.json, "Emit the matrix as JSON");

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "Time the analysis over a synthetic grid");
    bench->add_option("--sizes", bench_args.sizes, "Comma list of rule-set sizes");
    bench->add_option("--cases", bench_args.cases, "Comma list of case counts");
    bench->add_option("--probability", bench_args.probability, "Per-atom fact probability");
    bench->add_option("--seed", bench_args.seed, "Generator seed");
    bench->add_option("--measures", bench_args.measures, "Measures to run per cell");
    bench->add_option("--out", bench_args.out, "CSV output path (default stdout)");
    bench->add_option("--workers", bench_args.workers, "Analysis threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*analyze) return run_analyze(analyze_args);
        if (*generate) return run_generate(generate_args);
        if (*check) return run_check(check_args);
        if (*bench) return run_bench(bench_args);
    } catch (const incmeter::BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
