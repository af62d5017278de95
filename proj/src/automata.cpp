#include "tfa/automata.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace tfa {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

void check_word(const Fsa& a, std::span<const std::size_t> word) {
    for (std::size_t i = 0; i < word.size(); ++i)
        require(word[i] < a.num_symbols(), "unknown symbol index " + std::to_string(word[i]) + " at word position " +
                                               std::to_string(i));
}

void check_state(const Fsa& a, std::size_t q) {
    require(q < a.num_states(), "unknown state index " + std::to_string(q));
}

void check_unique(const std::vector<std::string>& labels, const char* what) {
    std::set<std::string> seen;
    for (const auto& l : labels) {
        require(!l.empty(), std::string("empty ") + what + " label");
        require(seen.insert(l).second, std::string("duplicate ") + what + " '" + l + "'");
    }
}

}  // namespace

Fsa::Fsa(std::vector<std::string> alphabet, std::vector<std::string> states,
         std::vector<std::vector<std::size_t>> delta)
    : alphabet_(std::move(alphabet)), states_(std::move(states)), delta_(std::move(delta)) {
    check_unique(alphabet_, "symbol");
    check_unique(states_, "state");
    require(!states_.empty(), "automaton needs at least one state");
    require(delta_.size() == alphabet_.size(), "transition table has " + std::to_string(delta_.size()) +
                                                   " rows for " + std::to_string(alphabet_.size()) + " symbols");
    for (std::size_t s = 0; s < delta_.size(); ++s) {
        require(delta_[s].size() == states_.size(),
                "transition row for '" + alphabet_[s] + "' has " + std::to_string(delta_[s].size()) + " entries for " +
                    std::to_string(states_.size()) + " states");
        for (std::size_t q : delta_[s])
            require(q < states_.size(), "transition row for '" + alphabet_[s] + "' targets unknown state index " +
                                            std::to_string(q));
    }
}

std::size_t Fsa::step(std::size_t symbol, std::size_t state) const { return delta_[symbol][state]; }

std::size_t Fsa::symbol_index(std::string_view label) const {
    auto it = std::find(alphabet_.begin(), alphabet_.end(), label);
    require(it != alphabet_.end(), "unknown symbol '" + std::string(label) + "'");
    return static_cast<std::size_t>(it - alphabet_.begin());
}

std::size_t Fsa::state_index(std::string_view label) const {
    auto it = std::find(states_.begin(), states_.end(), label);
    require(it != states_.end(), "unknown state '" + std::string(label) + "'");
    return static_cast<std::size_t>(it - states_.begin());
}

Word Fsa::parse_word(std::string_view text) const {
    Word word;
    const bool separated = text.find_first_of(" \t,") != std::string_view::npos;
    const bool single_chars =
        std::all_of(alphabet_.begin(), alphabet_.end(), [](const std::string& s) { return s.size() == 1; });
    if (separated || !single_chars) {
        std::size_t i = 0;
        while (i < text.size()) {
            while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == ',')) ++i;
            std::size_t j = i;
            while (j < text.size() && text[j] != ' ' && text[j] != '\t' && text[j] != ',') ++j;
            if (j > i) word.push_back(symbol_index(text.substr(i, j - i)));
            i = j;
        }
    } else {
        for (char c : text) word.push_back(symbol_index(std::string_view(&c, 1)));
    }
    return word;
}

std::string Fsa::format_states(std::span<const std::size_t> seq, std::string_view sep) const {
    std::string out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i) out += sep;
        out += states_.at(seq[i]);
    }
    return out;
}

Transformation Transformation::identity(std::size_t n) {
    Transformation t;
    t.image.resize(n);
    for (std::size_t q = 0; q < n; ++q) t.image[q] = q;
    return t;
}

bool Transformation::is_identity() const {
    for (std::size_t q = 0; q < image.size(); ++q)
        if (image[q] != q) return false;
    return true;
}

bool Transformation::is_constant() const {
    return std::adjacent_find(image.begin(), image.end(), std::not_equal_to<>()) == image.end();
}

bool Transformation::is_bijection() const {
    std::vector<bool> hit(image.size(), false);
    for (std::size_t q : image) {
        if (q >= image.size() || hit[q]) return false;
        hit[q] = true;
    }
    return true;
}

Transformation then(const Transformation& first, const Transformation& second) {
    require(first.size() == second.size(), "cannot compose transformations on " + std::to_string(first.size()) +
                                               " and " + std::to_string(second.size()) + " states");
    Transformation out;
    out.image.resize(first.size());
    for (std::size_t q = 0; q < first.size(); ++q) out.image[q] = second.image[first.image[q]];
    return out;
}

std::size_t run(const Fsa& a, std::size_t q0, std::span<const std::size_t> word) {
    check_state(a, q0);
    check_word(a, word);
    std::size_t q = q0;
    for (std::size_t s : word) q = a.step(s, q);
    return q;
}

StateSeq state_sequence(const Fsa& a, std::size_t q0, std::span<const std::size_t> word) {
    check_state(a, q0);
    check_word(a, word);
    StateSeq out;
    out.reserve(word.size());
    std::size_t q = q0;
    for (std::size_t s : word) {
        q = a.step(s, q);
        out.push_back(q);
    }
    return out;
}

SymbolKind SymbolClass::kind() const {
    if (is_reset) return SymbolKind::Reset;
    if (is_permutation) return SymbolKind::Permutation;
    return SymbolKind::Mixed;
}

std::string_view to_string(SymbolKind kind) {
    switch (kind) {
        case SymbolKind::Reset: return "reset";
        case SymbolKind::Permutation: return "permutation";
        case SymbolKind::Mixed: return "mixed";
    }
    return "unknown";
}

SymbolClass classify(const Transformation& t) {
    SymbolClass c;
    c.is_identity = t.is_identity();
    c.is_reset = c.is_identity || t.is_constant();
    c.is_permutation = t.is_bijection();
    return c;
}

Transformation symbol_transformation(const Fsa& a, std::size_t symbol) {
    require(symbol < a.num_symbols(), "unknown symbol index " + std::to_string(symbol));
    return Transformation{a.table()[symbol]};
}

SymbolClass classify_symbol(const Fsa& a, std::size_t symbol) { return classify(symbol_transformation(a, symbol)); }

Transformation transformation_of(const Fsa& a, std::span<const std::size_t> word) {
    check_word(a, word);
    Transformation t = Transformation::identity(a.num_states());
    for (std::size_t s : word) t = then(t, symbol_transformation(a, s));
    return t;
}

bool Semigroup::contains(const Transformation& t) const {
    return std::find(elements.begin(), elements.end(), t) != elements.end();
}

ClosureOverflow::ClosureOverflow(std::size_t limit, std::size_t partial_size)
    : std::runtime_error("semigroup closure exceeded max size " + std::to_string(limit) + " (reached " +
                         std::to_string(partial_size) + " elements)"),
      partial_size_(partial_size) {}

Semigroup semigroup_closure(const std::vector<Transformation>& generators, std::size_t max_size,
                            std::vector<std::string> labels) {
    require(!generators.empty(), "semigroup closure needs at least one generator");
    require(max_size >= generators.size(), "max_size smaller than the generator count");
    const std::size_t n = generators.front().size();
    for (const auto& g : generators) {
        require(g.size() == n, "generators act on different state counts");
        require(std::all_of(g.image.begin(), g.image.end(), [n](std::size_t q) { return q < n; }),
                "generator maps outside its state set");
    }

    Semigroup s;
    s.generator_labels = std::move(labels);
    std::set<Transformation> seen;
    std::deque<std::size_t> frontier;
    auto admit = [&](Transformation t) {
        if (!seen.insert(t).second) return;
        if (s.elements.size() + 1 > max_size) throw ClosureOverflow(max_size, s.elements.size());
        s.elements.push_back(std::move(t));
        frontier.push_back(s.elements.size() - 1);
    };
    for (const auto& g : generators) admit(g);
    // Every product of generators is reached by right-extending a shorter one.
    while (!frontier.empty()) {
        const std::size_t i = frontier.front();
        frontier.pop_front();
        for (const auto& g : generators) admit(then(s.elements[i], g));
    }
    return s;
}

Semigroup fsa_semigroup(const Fsa& a, std::size_t max_size) {
    std::vector<Transformation> gens;
    for (std::size_t s = 0; s < a.num_symbols(); ++s) gens.push_back(symbol_transformation(a, s));
    return semigroup_closure(gens, std::max(max_size, gens.size()), a.alphabet());
}

bool is_closed(const Semigroup& s) {
    const std::set<Transformation> members(s.elements.begin(), s.elements.end());
    for (const auto& x : s.elements)
        for (const auto& y : s.elements)
            if (!members.count(then(x, y))) return false;
    return true;
}

bool is_group(const Semigroup& s) {
    if (s.elements.empty()) return false;
    const std::set<Transformation> members(s.elements.begin(), s.elements.end());
    const std::size_t n = s.elements.front().size();
    if (!members.count(Transformation::identity(n))) return false;
    for (const auto& t : s.elements) {
        if (!t.is_bijection()) return false;
        Transformation inv;
        inv.image.resize(n);
        for (std::size_t q = 0; q < n; ++q) inv.image[t.image[q]] = q;
        if (!members.count(inv)) return false;
    }
    return true;
}

ScanResult prefix_transformations(const Fsa& a, std::span<const std::size_t> word) {
    check_word(a, word);
    ScanResult r;
    r.prefixes.reserve(word.size());
    for (std::size_t s : word) r.prefixes.push_back(symbol_transformation(a, s));
    const std::size_t n = r.prefixes.size();
    for (std::size_t offset = 1; offset < n; offset *= 2) {
        std::vector<Transformation> next = r.prefixes;
        for (std::size_t i = offset; i < n; ++i) next[i] = then(r.prefixes[i - offset], r.prefixes[i]);
        r.prefixes = std::move(next);
        ++r.rounds;
    }
    return r;
}

StateSeq scan_state_sequence(const Fsa& a, std::size_t q0, std::span<const std::size_t> word) {
    check_state(a, q0);
    const ScanResult scan = prefix_transformations(a, word);
    StateSeq out;
    out.reserve(scan.prefixes.size());
    for (const auto& t : scan.prefixes) out.push_back(t(q0));
    return out;
}

Fsa reset_automaton() { return Fsa({"0", "1"}, {"A", "B"}, {{0, 0}, {1, 1}}); }

Fsa flip_flop() { return Fsa({"0", "1", "e"}, {"A", "B"}, {{0, 0}, {1, 1}, {0, 1}}); }

Fsa cyclic_counter(std::size_t n) {
    require(n >= 1, "cyclic_counter needs n >= 1");
    std::vector<std::string> states;
    std::vector<std::size_t> row(n);
    for (std::size_t q = 0; q < n; ++q) {
        states.push_back(std::to_string(q));
        row[q] = (q + 1) % n;
    }
    return Fsa({"+1"}, std::move(states), {row});
}

Fsa with_alphabet(const Fsa& a, const std::vector<std::string>& alphabet) {
    for (const auto& s : a.alphabet())
        require(std::find(alphabet.begin(), alphabet.end(), s) != alphabet.end(),
                "extended alphabet is missing symbol '" + s + "'");
    std::vector<std::vector<std::size_t>> delta;
    for (const auto& s : alphabet) {
        auto it = std::find(a.alphabet().begin(), a.alphabet().end(), s);
        delta.push_back(it == a.alphabet().end() ? Transformation::identity(a.num_states()).image
                                                 : a.table()[static_cast<std::size_t>(it - a.alphabet().begin())]);
    }
    return Fsa(alphabet, a.states(), std::move(delta));
}

Fsa direct_product(const Fsa& x, const Fsa& y) {
    require(x.alphabet() == y.alphabet(), "direct product needs identical alphabets");
    std::vector<std::string> states;
    for (const auto& qx : x.states())
        for (const auto& qy : y.states()) states.push_back("(" + qx + "," + qy + ")");
    const std::size_t ny = y.num_states();
    std::vector<std::vector<std::size_t>> delta(x.num_symbols(), std::vector<std::size_t>(states.size()));
    for (std::size_t s = 0; s < x.num_symbols(); ++s)
        for (std::size_t ix = 0; ix < x.num_states(); ++ix)
            for (std::size_t iy = 0; iy < ny; ++iy) delta[s][ix * ny + iy] = x.step(s, ix) * ny + y.step(s, iy);
    return Fsa(x.alphabet(), std::move(states), std::move(delta));
}

}  // namespace tfa
