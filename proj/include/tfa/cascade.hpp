// Feedforward cascades of automata and the covering relation between automata.
//
// Component k of a cascade reads the input symbol, the states of components
// 0..k-1 and its own state. All components update synchronously: each reads
// the upstream states from *before* the current symbol was consumed, which is
// the usual wreath-product semantics (q0, q1) . s = (q0 . s, q1 . (s, q0)).

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tfa/automata.hpp"

namespace tfa {

using JointState = std::vector<std::size_t>;

struct CascadeComponent {
    std::string name;
    std::vector<std::string> states;
    // next own state, indexed ((symbol * upstream_count + upstream) * |states| + own),
    // where upstream is the mixed-radix index of components 0..k-1 (component 0
    // most significant).
    std::vector<std::size_t> table;
};

class Cascade {
public:
    Cascade(std::vector<std::string> alphabet, std::vector<CascadeComponent> components);

    const std::vector<std::string>& alphabet() const { return alphabet_; }
    const std::vector<CascadeComponent>& components() const { return components_; }
    std::size_t size() const { return components_.size(); }

    // Product of the state counts of components 0..k-1.
    std::size_t upstream_count(std::size_t k) const;
    std::size_t upstream_index(std::size_t k, std::span<const std::size_t> joint) const;
    std::size_t next_state(std::size_t k, std::size_t symbol, std::size_t upstream, std::size_t own) const;

    std::size_t joint_count() const;
    std::size_t joint_index(std::span<const std::size_t> joint) const;
    JointState joint_from_index(std::size_t index) const;
    std::string joint_label(std::span<const std::size_t> joint) const;
    JointState parse_joint(std::string_view text) const;

    std::size_t symbol_index(std::string_view label) const;

private:
    std::vector<std::string> alphabet_;
    std::vector<CascadeComponent> components_;
};

// Builds a component from a function next(symbol, upstream_states, own).
template <typename Next>
CascadeComponent make_component(std::string name, std::vector<std::string> states, std::size_t num_symbols,
                                std::span<const std::size_t> upstream_sizes, Next next);

JointState cascade_step(const Cascade& c, std::span<const std::size_t> joint, std::size_t symbol);
std::vector<JointState> cascade_state_sequence(const Cascade& c, std::span<const std::size_t> q0,
                                               std::span<const std::size_t> word);

// Automaton on the product state space; state i is joint_from_index(i) and is
// labelled "(q0,q1,...)".
Fsa flatten(const Cascade& c);

// Classification of a component as a whole: Reset when every
// (symbol, upstream) row is a reset or identity, Permutation when every row is
// a bijection, Mixed otherwise.
SymbolKind component_kind(const Cascade& c, std::size_t k);

// Partial map from states of Y to states of X (nullopt = outside the domain).
struct CoveringMap {
    std::vector<std::optional<std::size_t>> image;
};

struct CoveringCounterexample {
    std::size_t symbol = 0;   // index in Y's alphabet
    std::size_t y_state = 0;
    std::string reason;
};

struct CoveringResult {
    bool covers = false;
    bool surjective = false;
    std::optional<std::size_t> missing_target;  // an X state outside the image
    std::optional<CoveringCounterexample> counterexample;
};

// Y covers X via phi when phi is onto Q_X and, for every symbol s and every
// q in the domain, delta_Y(s, q) is in the domain and
// phi(delta_Y(s, q)) == delta_X(s, phi(q)). Symbols are matched by label;
// differing alphabets are rejected with std::invalid_argument.
CoveringResult check_covering(const Fsa& y, const Fsa& x, const CoveringMap& phi);

// (second . first): Z -> Y -> X.
CoveringMap compose(const CoveringMap& first, const CoveringMap& second);
CoveringMap identity_cover(std::size_t n);
// Projections of direct_product(x, y) onto its factors.
CoveringMap product_projection_first(std::size_t nx, std::size_t ny);
CoveringMap product_projection_second(std::size_t nx, std::size_t ny);

// Resolves (Y label -> X label) pairs.
CoveringMap cover_from_labels(const Fsa& y, const Fsa& x,
                              const std::vector<std::pair<std::string, std::string>>& pairs);

std::string describe(const CoveringResult& r, const Fsa& y, const Fsa& x);

// ---------------------------------------------------------------------------

template <typename Next>
CascadeComponent make_component(std::string name, std::vector<std::string> states, std::size_t num_symbols,
                                std::span<const std::size_t> upstream_sizes, Next next) {
    std::size_t upstream_total = 1;
    for (std::size_t s : upstream_sizes) upstream_total *= s;
    CascadeComponent comp{std::move(name), std::move(states), {}};
    const std::size_t own_count = comp.states.size();
    comp.table.resize(num_symbols * upstream_total * own_count);
    JointState upstream(upstream_sizes.size(), 0);
    for (std::size_t sym = 0; sym < num_symbols; ++sym) {
        for (std::size_t u = 0; u < upstream_total; ++u) {
            std::size_t rest = u;
            for (std::size_t i = upstream_sizes.size(); i-- > 0;) {
                upstream[i] = rest % upstream_sizes[i];
                rest /= upstream_sizes[i];
            }
            for (std::size_t own = 0; own < own_count; ++own)
                comp.table[(sym * upstream_total + u) * own_count + own] =
                    next(sym, std::span<const std::size_t>(upstream), own);
        }
    }
    return comp;
}

}  // namespace tfa
