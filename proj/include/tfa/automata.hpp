// Finite state automata (alphabet, states, total transition table), their
// state-sequence function, per-symbol transformations, transformation
// semigroups and a parallel-prefix ("shortcut") evaluation of state sequences.
//
// Symbols and states are addressed by index; labels are kept for I/O.
// Composition order is fixed throughout: then(f, g) applies f first.

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tfa {

using Word = std::vector<std::size_t>;
using StateSeq = std::vector<std::size_t>;

class Fsa {
public:
    // delta[symbol][state] = next state.
    Fsa(std::vector<std::string> alphabet, std::vector<std::string> states,
        std::vector<std::vector<std::size_t>> delta);

    std::size_t num_symbols() const { return alphabet_.size(); }
    std::size_t num_states() const { return states_.size(); }
    const std::vector<std::string>& alphabet() const { return alphabet_; }
    const std::vector<std::string>& states() const { return states_; }
    const std::vector<std::vector<std::size_t>>& table() const { return delta_; }

    std::size_t step(std::size_t symbol, std::size_t state) const;

    // Throw std::invalid_argument naming the unknown label.
    std::size_t symbol_index(std::string_view label) const;
    std::size_t state_index(std::string_view label) const;

    // Splits on whitespace/commas when present, otherwise one character per
    // symbol (when every symbol is a single character).
    Word parse_word(std::string_view text) const;
    std::string format_states(std::span<const std::size_t> seq, std::string_view sep = " ") const;

    bool operator==(const Fsa&) const = default;

private:
    std::vector<std::string> alphabet_;
    std::vector<std::string> states_;
    std::vector<std::vector<std::size_t>> delta_;
};

struct Transformation {
    std::vector<std::size_t> image;

    static Transformation identity(std::size_t n);
    std::size_t size() const { return image.size(); }
    std::size_t operator()(std::size_t q) const { return image[q]; }
    bool is_identity() const;
    bool is_constant() const;
    bool is_bijection() const;

    auto operator<=>(const Transformation&) const = default;
};

// first, then second: result(q) = second(first(q)).
Transformation then(const Transformation& first, const Transformation& second);

std::size_t run(const Fsa& a, std::size_t q0, std::span<const std::size_t> word);
StateSeq state_sequence(const Fsa& a, std::size_t q0, std::span<const std::size_t> word);

enum class SymbolKind { Reset, Permutation, Mixed };

struct SymbolClass {
    bool is_reset = false;        // constant or identity
    bool is_permutation = false;  // bijection
    bool is_identity = false;

    // Identity reports Reset; callers needing both flags read them directly.
    SymbolKind kind() const;
};

std::string_view to_string(SymbolKind kind);

SymbolClass classify(const Transformation& t);
SymbolClass classify_symbol(const Fsa& a, std::size_t symbol);

Transformation symbol_transformation(const Fsa& a, std::size_t symbol);
// Empty word gives the identity.
Transformation transformation_of(const Fsa& a, std::span<const std::size_t> word);

struct Semigroup {
    std::vector<Transformation> elements;  // insertion (breadth-first) order
    std::vector<std::string> generator_labels;

    bool contains(const Transformation& t) const;
    std::size_t size() const { return elements.size(); }
};

constexpr std::size_t kDefaultClosureLimit = 10000;

class ClosureOverflow : public std::runtime_error {
public:
    ClosureOverflow(std::size_t limit, std::size_t partial_size);
    std::size_t partial_size() const { return partial_size_; }

private:
    std::size_t partial_size_;
};

// Breadth-first closure under composition. Throws ClosureOverflow once the
// element count would exceed max_size.
Semigroup semigroup_closure(const std::vector<Transformation>& generators, std::size_t max_size = kDefaultClosureLimit,
                            std::vector<std::string> labels = {});
Semigroup fsa_semigroup(const Fsa& a, std::size_t max_size = kDefaultClosureLimit);

// Checks compose(a, b) is a member for every pair.
bool is_closed(const Semigroup& s);
bool is_group(const Semigroup& s);

// All prefix compositions t_0, t_0;t_1, ... via a Hillis-Steele inclusive
// scan: ceil(log2 n) combining rounds, each round independent per element.
struct ScanResult {
    std::vector<Transformation> prefixes;
    std::size_t rounds = 0;
};
ScanResult prefix_transformations(const Fsa& a, std::span<const std::size_t> word);

StateSeq scan_state_sequence(const Fsa& a, std::size_t q0, std::span<const std::size_t> word);

// Two-state reset automaton: symbols {0, 1}, states {A, B}; 0 resets to A,
// 1 resets to B.
Fsa reset_automaton();
// The reset automaton plus an identity symbol e: symbols {0, 1, e}.
Fsa flip_flop();
// States 0..n-1, single symbol "+1" advancing q to q+1 mod n.
Fsa cyclic_counter(std::size_t n);

// Adds identity rows for symbols of `alphabet` not in `a`; symbols keep the
// order given in `alphabet`, which must contain all of a's symbols.
Fsa with_alphabet(const Fsa& a, const std::vector<std::string>& alphabet);

// Synchronous product over a shared alphabet; states labelled "(x,y)", with
// x most significant (index = ix * |Q_y| + iy).
Fsa direct_product(const Fsa& x, const Fsa& y);

}  // namespace tfa
