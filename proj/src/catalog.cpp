#include "tfa/catalog.hpp"

namespace tfa {

SymbolKind automaton_kind(const Fsa& a) {
    bool all_reset = true, all_perm = true;
    for (std::size_t s = 0; s < a.num_symbols(); ++s) {
        const SymbolClass c = classify_symbol(a, s);
        all_reset = all_reset && c.is_reset;
        all_perm = all_perm && c.is_permutation;
    }
    if (all_reset) return SymbolKind::Reset;
    if (all_perm) return SymbolKind::Permutation;
    return SymbolKind::Mixed;
}

Fsa mixed_target() {
    return Fsa({"a", "b", "c"}, {"s0", "s1", "s2"}, {{0, 1, 0}, {0, 1, 1}, {1, 0, 2}});
}

Cascade mixed_witness_cascade() {
    const std::vector<std::string> alphabet{"a", "b", "c"};
    enum : std::size_t { a, b, c };
    const std::size_t none[] = {0};
    auto resets = make_component("reset", {"r0", "r1"}, alphabet.size(), std::span<const std::size_t>(none, 0),
                                 [](std::size_t sym, std::span<const std::size_t>, std::size_t own) -> std::size_t {
                                     return sym == c ? own : 0;
                                 });
    const std::size_t upstream[] = {2};
    auto flips = make_component("parity", {"p0", "p1"}, alphabet.size(), upstream,
                                [](std::size_t sym, std::span<const std::size_t> up, std::size_t own) -> std::size_t {
                                    const bool flip = (sym == b && up[0] == 1) || (sym == c && up[0] == 0);
                                    return flip ? 1 - own : own;
                                });
    return Cascade(alphabet, {std::move(resets), std::move(flips)});
}

CoveringMap mixed_witness_cover(const Fsa& flattened, const Fsa& target) {
    return cover_from_labels(flattened, target, {{"(r0,p0)", "s0"}, {"(r0,p1)", "s1"}, {"(r1,p0)", "s2"}});
}

Cascade delay_line_cascade() {
    const Fsa ff = reset_automaton();
    const std::size_t none[] = {0};
    auto head = make_component("input", ff.states(), ff.num_symbols(), std::span<const std::size_t>(none, 0),
                               [&](std::size_t sym, std::span<const std::size_t>, std::size_t own) {
                                   return ff.step(sym, own);
                               });
    const std::size_t upstream[] = {2};
    auto delayed = make_component("delayed", ff.states(), ff.num_symbols(), upstream,
                                  [](std::size_t, std::span<const std::size_t> up, std::size_t) { return up[0]; });
    return Cascade(ff.alphabet(), {std::move(head), std::move(delayed)});
}

Catalog builtin_examples() {
    Catalog cat;
    auto add = [&](std::string name, Fsa fsa) {
        const SymbolKind kind = automaton_kind(fsa);
        cat.automata.push_back({std::move(name), std::move(fsa), kind});
    };
    add("reset2", reset_automaton());
    add("flip_flop", flip_flop());
    for (std::size_t n = 2; n <= 5; ++n) add("counter" + std::to_string(n), cyclic_counter(n));
    add("mixed_target", mixed_target());

    {
        Cascade cascade = mixed_witness_cascade();
        const Fsa flat = flatten(cascade);
        const Fsa target = mixed_target();
        CoveringMap cover = mixed_witness_cover(flat, target);
        std::vector<SymbolKind> kinds;
        for (std::size_t k = 0; k < cascade.size(); ++k) kinds.push_back(component_kind(cascade, k));
        cat.coverings.push_back({"mixed_witness", std::move(cascade), std::move(kinds), target, std::move(cover)});
    }

    {
        // Swapping A and B does not commute with the asymmetric resets.
        const Fsa ff = flip_flop();
        CoveringMap swap{{std::size_t{1}, std::size_t{0}}};
        cat.negatives.push_back({"flip_flop_swap", ff, ff, std::move(swap)});
    }
    return cat;
}

}  // namespace tfa
