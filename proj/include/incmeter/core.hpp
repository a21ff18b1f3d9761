#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace incmeter {

using AtomId = std::uint32_t;
using ElementId = std::uint32_t;

namespace detail {

inline bool valid_atom_name(std::string_view name) {
    if (name.empty()) return false;
    auto head = [](char c) { return c == '_' || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
    auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
    if (!head(name[0])) return false;
    for (std::size_t i = 1; i < name.size(); ++i)
        if (!tail(name[i])) return false;
    return true;
}

// Process-wide atom interner: equal names share a single id.
class AtomTable {
public:
    static AtomTable& instance() {
        static AtomTable table;
        return table;
    }

    AtomId intern(std::string_view name) {
        {
            std::shared_lock lock(mu_);
            auto it = ids_.find(std::string(name));
            if (it != ids_.end()) return it->second;
        }
        std::unique_lock lock(mu_);
        auto [it, inserted] = ids_.try_emplace(std::string(name), static_cast<AtomId>(names_.size()));
        if (inserted) names_.emplace_back(it->first);
        return it->second;
    }

    const std::string& name(AtomId id) const {
        std::shared_lock lock(mu_);
        return names_.at(id);
    }

private:
    mutable std::shared_mutex mu_;
    std::unordered_map<std::string, AtomId> ids_;
    std::deque<std::string> names_;  // stable addresses
};

}  // namespace detail

struct Atom {
    AtomId id = 0;

    static Atom named(std::string_view name) {
        if (!detail::valid_atom_name(name))
            throw std::invalid_argument("invalid atom name: '" + std::string(name) + "'");
        return Atom{detail::AtomTable::instance().intern(name)};
    }

    const std::string& name() const { return detail::AtomTable::instance().name(id); }

    friend bool operator==(Atom a, Atom b) = default;
    friend auto operator<=>(Atom a, Atom b) = default;
};

struct Literal {
    Atom atom;
    bool negated = false;

    static Literal positive(std::string_view name) { return {Atom::named(name), false}; }
    static Literal negative(std::string_view name) { return {Atom::named(name), true}; }

    Literal negation() const { return {atom, !negated}; }

    // Dense per-process key; complement differs in the low bit.
    std::uint32_t key() const { return (atom.id << 1) | (negated ? 1u : 0u); }

    std::string text() const { return negated ? "-" + atom.name() : atom.name(); }

    friend bool operator==(Literal a, Literal b) { return a.key() == b.key(); }
    friend bool operator<(Literal a, Literal b) { return a.key() < b.key(); }
};

// Orders literals by display name rather than interning order, so rendered
// output does not depend on the order atoms were first seen.
inline bool literal_text_less(Literal a, Literal b) {
    const std::string& an = a.atom.name();
    const std::string& bn = b.atom.name();
    if (an != bn) return an < bn;
    return a.negated < b.negated;
}

class LiteralSet {
public:
    LiteralSet() = default;
    explicit LiteralSet(std::vector<Literal> members) : members_(std::move(members)) {
        std::sort(members_.begin(), members_.end());
        members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    }

    bool contains(Literal l) const {
        return std::binary_search(members_.begin(), members_.end(), l);
    }

    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    auto begin() const { return members_.begin(); }
    auto end() const { return members_.end(); }

    friend bool operator==(const LiteralSet&, const LiteralSet&) = default;

private:
    std::vector<Literal> members_;  // sorted by key, unique
};

inline bool literal_set_consistent(const LiteralSet& s) {
    // Sorted by key, so a complementary pair is adjacent.
    Literal prev{};
    bool first = true;
    for (Literal l : s) {
        if (!first && prev.atom == l.atom && prev.negated != l.negated) return false;
        prev = l;
        first = false;
    }
    return true;
}

struct Rule {
    std::vector<Literal> body;  // sorted by key, unique
    Literal head;

    static Rule make(std::vector<Literal> body, Literal head) {
        std::sort(body.begin(), body.end());
        body.erase(std::unique(body.begin(), body.end()), body.end());
        return Rule{std::move(body), head};
    }

    static Rule fact(Literal head) { return Rule{{}, head}; }

    bool is_fact() const { return body.empty(); }

    friend bool operator==(const Rule& a, const Rule& b) {
        return a.head == b.head && a.body == b.body;
    }
};

inline std::string rule_text(const Rule& r) {
    if (r.is_fact()) return r.head.text();
    std::vector<Literal> body = r.body;
    std::sort(body.begin(), body.end(), literal_text_less);
    std::string s;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (i) s += ", ";
        s += body[i].text();
    }
    s += " -> ";
    s += r.head.text();
    return s;
}

namespace detail {

struct RuleHash {
    std::size_t operator()(const Rule& r) const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](std::uint64_t v) {
            h ^= v;
            h *= 1099511628211ull;
        };
        mix(r.head.key());
        for (Literal l : r.body) mix(l.key());
        return static_cast<std::size_t>(h);
    }
};

}  // namespace detail

// A set of facts and rules. Elements are deduplicated structurally; the
// element id is the insertion index of the first occurrence and is stable
// for the lifetime of the base. Immutable once built; analysis functions
// never mutate it.
class RuleBase {
public:
    ElementId add(Rule r) {
        auto it = index_.find(r);
        if (it != index_.end()) return it->second;
        ElementId id = static_cast<ElementId>(elements_.size());
        index_.emplace(r, id);
        elements_.push_back(std::move(r));
        return id;
    }

    ElementId add_fact(Literal head) { return add(Rule::fact(head)); }

    std::size_t size() const { return elements_.size(); }
    bool empty() const { return elements_.empty(); }

    const Rule& element(ElementId id) const {
        if (id >= elements_.size()) throw std::out_of_range("unknown element id");
        return elements_[id];
    }

    std::span<const Rule> elements() const { return elements_; }

    std::vector<ElementId> fact_ids() const {
        std::vector<ElementId> out;
        for (ElementId i = 0; i < elements_.size(); ++i)
            if (elements_[i].is_fact()) out.push_back(i);
        return out;
    }

    std::vector<ElementId> rule_ids() const {
        std::vector<ElementId> out;
        for (ElementId i = 0; i < elements_.size(); ++i)
            if (!elements_[i].is_fact()) out.push_back(i);
        return out;
    }

    bool contains(const Rule& r) const { return index_.contains(r); }

    RuleBase with_element(Rule r) const {
        RuleBase copy = *this;
        copy.add(std::move(r));
        return copy;
    }

    // New base holding exactly the given elements; new ids follow `keep` order.
    RuleBase restrict_to(std::span<const ElementId> keep) const {
        RuleBase out;
        for (ElementId id : keep) out.add(element(id));
        return out;
    }

private:
    std::vector<Rule> elements_;
    std::unordered_map<Rule, ElementId, detail::RuleHash> index_;
};

namespace detail {

// Fixed-width bitset over element indices of one rule base.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

    std::size_t size() const { return nbits_; }

    void set(std::size_t i) { words_[i >> 6] |= (1ull << (i & 63)); }
    void reset(std::size_t i) { words_[i >> 6] &= ~(1ull << (i & 63)); }
    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
        return c;
    }

    bool any() const {
        for (auto w : words_)
            if (w) return true;
        return false;
    }

    bool subset_of(const Bitset& other) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~other.words_[i]) return false;
        return true;
    }

    Bitset& operator|=(const Bitset& other) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
        return *this;
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t wi = 0; wi < words_.size(); ++wi) {
            std::uint64_t w = words_[wi];
            while (w) {
                unsigned b = static_cast<unsigned>(__builtin_ctzll(w));
                fn(wi * 64 + b);
                w &= w - 1;
            }
        }
    }

    std::vector<ElementId> to_ids() const {
        std::vector<ElementId> out;
        for_each([&](std::size_t i) { out.push_back(static_cast<ElementId>(i)); });
        return out;
    }

    static Bitset of(std::size_t nbits, std::span<const ElementId> ids) {
        Bitset b(nbits);
        for (ElementId id : ids) b.set(id);
        return b;
    }

    friend bool operator==(const Bitset&, const Bitset&) = default;

private:
    std::size_t nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

// Preprocessed view of a rule base for repeated closure runs, optionally
// restricted to a subset mask. Reusable across calls via epoch stamps, so
// brute-force subset sweeps avoid per-run clears.
class BaseIndex {
public:
    explicit BaseIndex(const RuleBase& base) : base_(&base) {
        auto lit_idx = [&](Literal l) -> std::uint32_t {
            auto [it, inserted] = key_to_idx_.try_emplace(l.key(), static_cast<std::uint32_t>(lit_keys_.size()));
            if (inserted) lit_keys_.push_back(l.key());
            return it->second;
        };
        elems_.reserve(base.size());
        for (const Rule& r : base.elements()) {
            Elem e;
            e.head = lit_idx(r.head);
            e.body.reserve(r.body.size());
            for (Literal l : r.body) e.body.push_back(lit_idx(l));
            elems_.push_back(std::move(e));
        }
        watchers_.assign(lit_keys_.size(), {});
        for (std::uint32_t ei = 0; ei < elems_.size(); ++ei)
            for (std::uint32_t li : elems_[ei].body) watchers_[li].push_back(ei);
        comp_.assign(lit_keys_.size(), kNoLit);
        for (std::uint32_t i = 0; i < lit_keys_.size(); ++i) {
            auto it = key_to_idx_.find(lit_keys_[i] ^ 1u);
            if (it != key_to_idx_.end()) comp_[i] = it->second;
        }
        derived_stamp_.assign(lit_keys_.size(), 0);
        remaining_.assign(elems_.size(), 0);
        remaining_stamp_.assign(elems_.size(), 0);
        queue_.reserve(lit_keys_.size());
    }

    std::size_t element_count() const { return elems_.size(); }
    std::size_t literal_count() const { return lit_keys_.size(); }
    std::uint32_t head_of(std::uint32_t elem) const { return elems_[elem].head; }
    std::span<const std::uint32_t> body_of(std::uint32_t elem) const { return elems_[elem].body; }
    std::uint32_t literal_key(std::uint32_t idx) const { return lit_keys_[idx]; }
    std::uint32_t complement(std::uint32_t idx) const { return comp_[idx]; }

    // Forward closure over the elements selected by `mask` (all when null).
    // Returns false iff a complementary literal pair was derived; with
    // stop_on_contradiction the run ends at the first such pair. When
    // out_lits is given it receives the derived literal indices.
    bool closure(const Bitset* mask, bool stop_on_contradiction,
                 std::vector<std::uint32_t>* out_lits = nullptr) const {
        next_epoch();
        queue_.clear();
        if (out_lits) out_lits->clear();
        bool consistent = true;

        auto derive = [&](std::uint32_t li) {
            if (derived_stamp_[li] == epoch_) return;
            derived_stamp_[li] = epoch_;
            if (out_lits) out_lits->push_back(li);
            if (comp_[li] != kNoLit && derived_stamp_[comp_[li]] == epoch_) consistent = false;
            queue_.push_back(li);
        };

        for (std::uint32_t ei = 0; ei < elems_.size(); ++ei) {
            if (mask && !mask->test(ei)) continue;
            const Elem& e = elems_[ei];
            if (e.body.empty()) {
                derive(e.head);
                if (!consistent && stop_on_contradiction) return false;
            } else {
                remaining_[ei] = static_cast<std::uint32_t>(e.body.size());
                remaining_stamp_[ei] = epoch_;
            }
        }

        for (std::size_t qi = 0; qi < queue_.size(); ++qi) {
            std::uint32_t li = queue_[qi];
            for (std::uint32_t ei : watchers_[li]) {
                if (remaining_stamp_[ei] != epoch_) continue;  // not selected or a fact
                if (--remaining_[ei] == 0) {
                    derive(elems_[ei].head);
                    if (!consistent && stop_on_contradiction) return false;
                }
            }
        }
        return consistent;
    }

    bool subset_consistent(const Bitset& mask) const { return closure(&mask, true); }
    bool base_consistent() const { return closure(nullptr, true); }

private:
    static constexpr std::uint32_t kNoLit = 0xffffffffu;

    struct Elem {
        std::uint32_t head = 0;
        std::vector<std::uint32_t> body;
    };

    void next_epoch() const {
        if (++epoch_ == 0) {
            std::fill(derived_stamp_.begin(), derived_stamp_.end(), 0);
            std::fill(remaining_stamp_.begin(), remaining_stamp_.end(), 0);
            epoch_ = 1;
        }
    }

    const RuleBase* base_;
    std::vector<std::uint32_t> lit_keys_;
    std::unordered_map<std::uint32_t, std::uint32_t> key_to_idx_;
    std::vector<Elem> elems_;
    std::vector<std::vector<std::uint32_t>> watchers_;
    std::vector<std::uint32_t> comp_;

    mutable std::uint32_t epoch_ = 0;
    mutable std::vector<std::uint32_t> derived_stamp_;
    mutable std::vector<std::uint32_t> remaining_;
    mutable std::vector<std::uint32_t> remaining_stamp_;
    mutable std::vector<std::uint32_t> queue_;
};

}  // namespace detail

// Smallest literal set closed under every element of the base: fact heads
// seed the set, rules fire once their whole body is present. Unique and
// independent of firing order.
inline LiteralSet minimal_model(const RuleBase& base) {
    detail::BaseIndex index(base);
    std::vector<std::uint32_t> lits;
    index.closure(nullptr, false, &lits);
    std::vector<Literal> members;
    members.reserve(lits.size());
    for (std::uint32_t li : lits) {
        std::uint32_t key = index.literal_key(li);
        members.push_back(Literal{Atom{key >> 1}, (key & 1) != 0});
    }
    return LiteralSet(std::move(members));
}

inline bool is_consistent(const RuleBase& base) {
    return detail::BaseIndex(base).base_consistent();
}

}  // namespace incmeter
