// Hand-built automata and covering witnesses shipped with the library.

#pragma once

#include <string>
#include <vector>

#include "tfa/automata.hpp"
#include "tfa/cascade.hpp"

namespace tfa {

struct CatalogAutomaton {
    std::string name;
    Fsa fsa;
    SymbolKind kind;  // Reset / Permutation when every symbol is; Mixed otherwise
};

struct CatalogCovering {
    std::string name;
    Cascade cascade;
    std::vector<SymbolKind> component_kinds;
    Fsa target;
    CoveringMap cover;  // from flatten(cascade) to target
};

// A covering that is expected to fail.
struct CatalogNegative {
    std::string name;
    Fsa cover_fsa;
    Fsa target;
    CoveringMap cover;
};

struct Catalog {
    std::vector<CatalogAutomaton> automata;
    std::vector<CatalogCovering> coverings;
    std::vector<CatalogNegative> negatives;
};

SymbolKind automaton_kind(const Fsa& a);

// Three states s0 s1 s2 over {a, b, c}: a -> [s0 s1 s0] and b -> [s0 s1 s1]
// are mixed, c swaps s0 and s1 and fixes s2.
Fsa mixed_target();
// Reset component r0/r1 (a, b reset to r0; c is the identity) feeding a
// two-state permutation component p0/p1 that flips on (b, r1) and (c, r0).
Cascade mixed_witness_cascade();
// (r0,p0) -> s0, (r0,p1) -> s1, (r1,p0) -> s2; (r1,p1) lies outside the domain.
CoveringMap mixed_witness_cover(const Fsa& flattened, const Fsa& target);

// Two flip-flop copies where component 1 copies component 0's previous state.
Cascade delay_line_cascade();

Catalog builtin_examples();

}  // namespace tfa
