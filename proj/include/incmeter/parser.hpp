#pragma once

#include <algorithm>
#include <istream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "incmeter/core.hpp"

namespace incmeter {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, int line, int col = 0)
        : std::runtime_error(col > 0 ? message + " (line " + std::to_string(line) + ", column " +
                                           std::to_string(col) + ")"
                                     : message + " (line " + std::to_string(line) + ")"),
          line_(line),
          col_(col) {}

    int line() const { return line_; }
    int column() const { return col_; }

private:
    int line_;
    int col_;
};

struct SourceSpan {
    int line = 0;
    int col = 0;
};

// An ordered, deduplicated list of proper rules. Fact inputs arrive with the
// cases, never in a rules file.
struct RuleProgram {
    std::vector<Rule> rules;        // rule id = index
    std::vector<SourceSpan> spans;  // aligned with rules

    ElementId add(Rule r, SourceSpan span = {}) {
        for (ElementId i = 0; i < rules.size(); ++i)
            if (rules[i] == r) return i;
        rules.push_back(std::move(r));
        spans.push_back(span);
        return static_cast<ElementId>(rules.size() - 1);
    }

    std::size_t size() const { return rules.size(); }

    friend bool operator==(const RuleProgram& a, const RuleProgram& b) { return a.rules == b.rules; }
};

struct CaseRecord {
    std::string case_id;
    std::vector<Literal> facts;  // sorted by key, unique
};

enum class CaseFormat { jsonl, csv };

struct CaseParseOptions {
    bool allow_contradictory_facts = false;
};

namespace detail {

// Grammar:
//   rule    := body "->" literal "."
//   body    := literal ("," literal)*
//   literal := ["-"] atom
//   atom    := [A-Za-z_][A-Za-z0-9_]*
// Whitespace is insignificant; "%" starts a line comment; "¬" is accepted
// as an alias for "-".
class RuleLexer {
public:
    enum class Tok { atom, arrow, comma, period, neg, end };

    explicit RuleLexer(std::string_view text) : text_(text) { advance(); }

    Tok token() const { return tok_; }
    const std::string& atom_text() const { return atom_; }
    int line() const { return tok_line_; }
    int col() const { return tok_col_; }

    void advance() {
        skip_trivia();
        tok_line_ = line_;
        tok_col_ = col_;
        if (pos_ >= text_.size()) {
            tok_ = Tok::end;
            return;
        }
        char c = text_[pos_];
        if (c == '-') {
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
                consume(2);
                tok_ = Tok::arrow;
            } else {
                consume(1);
                tok_ = Tok::neg;
            }
            return;
        }
        if (static_cast<unsigned char>(c) == 0xC2 && pos_ + 1 < text_.size() &&
            static_cast<unsigned char>(text_[pos_ + 1]) == 0xAC) {  // "¬"
            consume(2);
            tok_ = Tok::neg;
            return;
        }
        if (c == ',') {
            consume(1);
            tok_ = Tok::comma;
            return;
        }
        if (c == '.') {
            consume(1);
            tok_ = Tok::period;
            return;
        }
        if (c == '_' || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z')) {
            std::size_t start = pos_;
            while (pos_ < text_.size()) {
                char d = text_[pos_];
                if (d == '_' || (d >= 'A' && d <= 'Z') || (d >= 'a' && d <= 'z') ||
                    (d >= '0' && d <= '9'))
                    consume(1);
                else
                    break;
            }
            atom_ = std::string(text_.substr(start, pos_ - start));
            tok_ = Tok::atom;
            return;
        }
        throw ParseError("unexpected character '" + std::string(1, c) + "'", line_, col_);
    }

private:
    void consume(std::size_t k) {
        for (std::size_t i = 0; i < k; ++i) {
            if (text_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    void skip_trivia() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                consume(1);
            } else if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') consume(1);
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Tok tok_ = Tok::end;
    int tok_line_ = 1;
    int tok_col_ = 1;
    std::string atom_;
};

// Accepts a standalone literal such as "a" or "-b" or "¬b".
inline Literal parse_fact_literal(std::string_view raw, int line) {
    std::size_t begin = raw.find_first_not_of(" \t\r");
    std::size_t end = raw.find_last_not_of(" \t\r");
    if (begin == std::string_view::npos) throw ParseError("empty literal", line);
    std::string_view s = raw.substr(begin, end - begin + 1);
    bool neg = false;
    if (!s.empty() && s[0] == '-') {
        neg = true;
        s.remove_prefix(1);
    } else if (s.size() >= 2 && static_cast<unsigned char>(s[0]) == 0xC2 &&
               static_cast<unsigned char>(s[1]) == 0xAC) {
        neg = true;
        s.remove_prefix(2);
    }
    if (!valid_atom_name(s))
        throw ParseError("invalid literal '" + std::string(raw) + "'", line);
    return Literal{Atom::named(s), neg};
}

inline bool facts_contradictory(const std::vector<Literal>& facts, Literal* offender) {
    for (std::size_t i = 0; i + 1 < facts.size(); ++i) {
        if (facts[i].atom == facts[i + 1].atom && facts[i].negated != facts[i + 1].negated) {
            if (offender) *offender = facts[i + 1];
            return true;
        }
    }
    return false;
}

inline std::vector<Literal> normalize_facts(std::vector<Literal> facts) {
    std::sort(facts.begin(), facts.end());
    facts.erase(std::unique(facts.begin(), facts.end()), facts.end());
    return facts;
}

}  // namespace detail

inline RuleProgram parse_rules(std::string_view text) {
    detail::RuleLexer lex(text);
    RuleProgram program;
    using Tok = detail::RuleLexer::Tok;

    auto parse_literal = [&]() -> Literal {
        bool neg = false;
        if (lex.token() == Tok::neg) {
            neg = true;
            lex.advance();
        }
        if (lex.token() != Tok::atom)
            throw ParseError("expected atom", lex.line(), lex.col());
        Literal l{Atom::named(lex.atom_text()), neg};
        lex.advance();
        return l;
    };

    while (lex.token() != Tok::end) {
        SourceSpan span{lex.line(), lex.col()};
        if (lex.token() == Tok::arrow)
            throw ParseError("a rule needs a non-empty body; facts belong to the case input",
                             lex.line(), lex.col());
        std::vector<Literal> body;
        body.push_back(parse_literal());
        while (lex.token() == Tok::comma) {
            lex.advance();
            body.push_back(parse_literal());
        }
        if (lex.token() == Tok::period)
            throw ParseError("facts are not allowed in a rules file; expected '->'", lex.line(),
                             lex.col());
        if (lex.token() != Tok::arrow)
            throw ParseError("expected '->'", lex.line(), lex.col());
        lex.advance();
        Literal head = parse_literal();
        if (lex.token() != Tok::period)
            throw ParseError("expected '.'", lex.line(), lex.col());
        lex.advance();
        program.add(Rule::make(std::move(body), head), span);
    }
    return program;
}

inline std::string render(const RuleProgram& program) {
    std::string out;
    for (const Rule& r : program.rules) {
        out += rule_text(r);
        out += ".\n";
    }
    return out;
}

inline std::vector<CaseRecord> parse_cases(std::istream& in, CaseFormat format,
                                           const CaseParseOptions& options = {}) {
    std::vector<CaseRecord> records;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    int lineno = 0;

    auto finish_record = [&](std::string case_id, std::vector<Literal> facts) {
        if (!seen_ids.insert(case_id).second)
            throw ParseError("duplicate case_id '" + case_id + "'", lineno);
        facts = detail::normalize_facts(std::move(facts));
        Literal offender{};
        if (!options.allow_contradictory_facts && detail::facts_contradictory(facts, &offender))
            throw ParseError("contradictory facts in case '" + case_id + "': both polarities of '" +
                                 offender.atom.name() + "'",
                             lineno);
        records.push_back(CaseRecord{std::move(case_id), std::move(facts)});
    };

    if (format == CaseFormat::jsonl) {
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
            }
            if (!obj.is_object() || !obj.contains("case_id") || !obj["case_id"].is_string())
                throw ParseError("expected an object with a string 'case_id'", lineno);
            if (!obj.contains("facts") || !obj["facts"].is_array())
                throw ParseError("expected a 'facts' array", lineno);
            std::vector<Literal> facts;
            for (const auto& f : obj["facts"]) {
                if (!f.is_string()) throw ParseError("facts must be strings", lineno);
                facts.push_back(detail::parse_fact_literal(f.get<std::string>(), lineno));
            }
            finish_record(obj["case_id"].get<std::string>(), std::move(facts));
        }
        return records;
    }

    // CSV: header "case_id,facts"; the facts column is a ';'-separated
    // literal list. Fields are plain (no quoting).
    if (!std::getline(in, line)) throw ParseError("missing CSV header", 1);
    ++lineno;
    {
        std::string header = line;
        if (!header.empty() && header.back() == '\r') header.pop_back();
        std::string squashed;
        for (char c : header)
            if (c != ' ' && c != '\t') squashed += c;
        if (squashed != "case_id,facts")
            throw ParseError("expected CSV header 'case_id,facts'", lineno);
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("expected 'case_id,facts' row", lineno);
        std::string case_id = line.substr(0, comma);
        std::string facts_field = line.substr(comma + 1);
        if (case_id.empty()) throw ParseError("empty case_id", lineno);
        std::vector<Literal> facts;
        std::size_t pos = 0;
        while (pos <= facts_field.size() && !facts_field.empty()) {
            std::size_t next = facts_field.find(';', pos);
            std::string item = facts_field.substr(pos, next == std::string::npos ? std::string::npos
                                                                                 : next - pos);
            if (item.find_first_not_of(" \t") != std::string::npos)
                facts.push_back(detail::parse_fact_literal(item, lineno));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        finish_record(std::move(case_id), std::move(facts));
    }
    return records;
}

inline std::vector<CaseRecord> parse_cases(std::string_view text, CaseFormat format,
                                           const CaseParseOptions& options = {}) {
    std::istringstream in{std::string(text)};
    return parse_cases(in, format, options);
}

// One JSON object per line, facts in display order.
inline std::string render_cases_jsonl(std::span<const CaseRecord> records) {
    std::string out;
    for (const CaseRecord& rec : records) {
        nlohmann::ordered_json obj;
        obj["case_id"] = rec.case_id;
        std::vector<Literal> facts = rec.facts;
        std::sort(facts.begin(), facts.end(), literal_text_less);
        obj["facts"] = nlohmann::ordered_json::array();
        for (Literal f : facts) obj["facts"].push_back(f.text());
        out += obj.dump();
        out += '\n';
    }
    return out;
}

}  // namespace incmeter
