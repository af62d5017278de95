#include <doctest.h>

#include "helpers.hpp"
#include "tfa/cascade.hpp"
#include "tfa/catalog.hpp"
#include "tfa/random.hpp"

using namespace tfa;

namespace {

// Run-based oracle: phi commutes with every word up to max_len from every domain state.
bool covers_by_runs(const Fsa& y, const Fsa& x, const CoveringMap& phi, std::size_t max_len) {
    for (std::size_t q = 0; q < y.num_states(); ++q) {
        if (!phi.image[q]) continue;
        for (std::size_t len = 1; len <= max_len; ++len)
            for (const auto& w : test::all_words(y.num_symbols(), len)) {
                Word wx;
                for (std::size_t s : w) wx.push_back(x.symbol_index(y.alphabet()[s]));
                const auto end = phi.image[run(y, q, w)];
                if (!end || *end != run(x, *phi.image[q], wx)) return false;
            }
    }
    return true;
}

}  // namespace

TEST_CASE("identity covering verifies") {
    for (const Fsa& a : {reset_automaton(), flip_flop(), cyclic_counter(4), mixed_target()}) {
        const CoveringResult r = check_covering(a, a, identity_cover(a.num_states()));
        CHECK(r.covers);
        CHECK(r.surjective);
    }
}

TEST_CASE("projection from a direct product covers each factor") {
    const Fsa x = with_alphabet(reset_automaton(), {"0", "1", "e"});
    const Fsa y = flip_flop();
    const Fsa p = direct_product(x, y);
    CHECK(check_covering(p, x, product_projection_first(x.num_states(), y.num_states())).covers);
    CHECK(check_covering(p, y, product_projection_second(x.num_states(), y.num_states())).covers);

    const Fsa c2 = cyclic_counter(2), c3 = cyclic_counter(3);
    const Fsa p23 = direct_product(c2, c3);
    CHECK(check_covering(p23, c2, product_projection_first(2, 3)).covers);
    CHECK(check_covering(p23, c3, product_projection_second(2, 3)).covers);
    CHECK(covers_by_runs(p23, c3, product_projection_second(2, 3), 5));
}

TEST_CASE("swapping flip-flop states is not a covering, with counterexample") {
    const Fsa ff = flip_flop();
    CoveringMap swap;
    swap.image = {1, 0};
    const CoveringResult r = check_covering(ff, ff, swap);
    CHECK_FALSE(r.covers);
    CHECK(r.surjective);
    REQUIRE(r.counterexample.has_value());
    const auto& ce = *r.counterexample;
    // The counterexample really breaks the square.
    CHECK(*swap.image[ff.step(ce.symbol, ce.y_state)] != ff.step(ce.symbol, *swap.image[ce.y_state]));
    CHECK(describe(r, ff, ff).find("fails at symbol") == 0);
}

TEST_CASE("non-surjective maps are rejected before the commuting check") {
    const Fsa a = cyclic_counter(3);
    CoveringMap m;
    m.image = {0, 0, 0};
    const CoveringResult r = check_covering(a, a, m);
    CHECK_FALSE(r.covers);
    CHECK_FALSE(r.surjective);
    CHECK(r.missing_target.has_value());
    CHECK_FALSE(r.counterexample.has_value());
}

TEST_CASE("partial maps must keep the domain closed") {
    // Counter on 4 states covering counter on 2 via parity, but domain {0,1} only.
    const Fsa y = cyclic_counter(4), x = cyclic_counter(2);
    CoveringMap parity;
    parity.image = {0, 1, 0, 1};
    CHECK(check_covering(y, x, parity).covers);
    CoveringMap partial;
    partial.image = {0, 1, std::nullopt, std::nullopt};
    const CoveringResult r = check_covering(y, x, partial);
    CHECK_FALSE(r.covers);
    REQUIRE(r.counterexample.has_value());
    CHECK(r.counterexample->reason.find("outside the domain") != std::string::npos);
}

TEST_CASE("covering errors") {
    const Fsa a = reset_automaton(), b = cyclic_counter(2);
    CHECK_THROWS_AS(check_covering(a, b, identity_cover(2)), std::invalid_argument);
    CHECK_THROWS_AS(check_covering(a, a, identity_cover(3)), std::invalid_argument);
    CHECK_THROWS_AS(cover_from_labels(a, a, {{"A", "A"}, {"A", "B"}}), std::invalid_argument);
    CHECK_THROWS_AS(cover_from_labels(a, a, {{"C", "A"}}), std::invalid_argument);
}

TEST_CASE("checker agrees with the run-based oracle on random maps") {
    Rng rng(6);
    int agreed_covers = 0;
    for (int t = 0; t < 300; ++t) {
        const std::size_t ny = 1 + rng.below(4), nx = 1 + rng.below(ny);
        std::vector<std::string> alphabet{"a", "b"}, ys, xs;
        for (std::size_t q = 0; q < ny; ++q) ys.push_back("y" + std::to_string(q));
        for (std::size_t q = 0; q < nx; ++q) xs.push_back("x" + std::to_string(q));
        std::vector<std::vector<std::size_t>> dy(2, std::vector<std::size_t>(ny)), dx(2, std::vector<std::size_t>(nx));
        for (auto& row : dy)
            for (auto& v : row) v = rng.below(ny);
        for (auto& row : dx)
            for (auto& v : row) v = rng.below(nx);
        const Fsa y(alphabet, ys, dy), x(alphabet, xs, dx);
        CoveringMap phi;
        for (std::size_t q = 0; q < ny; ++q) phi.image.emplace_back(rng.below(nx));
        const CoveringResult r = check_covering(y, x, phi);
        if (!r.surjective) continue;
        CHECK(r.covers == covers_by_runs(y, x, phi, 3));
        agreed_covers += r.covers;
    }
    CHECK(agreed_covers > 0);
}

TEST_CASE("coverings compose") {
    const Fsa c2 = cyclic_counter(2), c4 = cyclic_counter(4);
    const Fsa p = direct_product(c4, c4);
    CoveringMap parity;
    parity.image = {0, 1, 0, 1};
    const CoveringMap first = product_projection_first(4, 4);
    REQUIRE(check_covering(p, c4, first).covers);
    REQUIRE(check_covering(c4, c2, parity).covers);
    CHECK(check_covering(p, c2, compose(first, parity)).covers);
}

TEST_CASE("mixed witness cascade covers the mixed target") {
    const Fsa target = mixed_target();
    const Cascade c = mixed_witness_cascade();
    CHECK(c.size() == 2);
    CHECK(component_kind(c, 0) == SymbolKind::Reset);
    CHECK(component_kind(c, 1) == SymbolKind::Permutation);
    const Fsa flat = flatten(c);
    const CoveringMap phi = mixed_witness_cover(flat, target);
    const CoveringResult r = check_covering(flat, target, phi);
    CHECK(r.covers);
    CHECK(covers_by_runs(flat, target, phi, 5));
    CHECK(automaton_kind(target) == SymbolKind::Mixed);
}

TEST_CASE("flatten agrees with stepping the cascade entry by entry") {
    for (const Cascade& c : {mixed_witness_cascade(), delay_line_cascade()}) {
        const Fsa flat = flatten(c);
        CHECK(flat.num_states() == c.joint_count());
        for (std::size_t i = 0; i < c.joint_count(); ++i) {
            const JointState j = c.joint_from_index(i);
            CHECK(c.joint_index(j) == i);
            CHECK(flat.states()[i] == c.joint_label(j));
            CHECK(c.parse_joint(c.joint_label(j)) == j);
            for (std::size_t s = 0; s < c.alphabet().size(); ++s) {
                // Oracle: read the next state of each component straight from its table.
                JointState expected(c.size());
                for (std::size_t k = 0; k < c.size(); ++k) {
                    std::size_t up = 0;
                    for (std::size_t u = 0; u < k; ++u) up = up * c.components()[u].states.size() + j[u];
                    const auto& comp = c.components()[k];
                    expected[k] =
                        comp.table[(s * c.upstream_count(k) + up) * comp.states.size() + j[k]];
                }
                CHECK(flat.step(s, i) == c.joint_index(expected));
            }
        }
    }
}

TEST_CASE("components read upstream states from before the step") {
    const Cascade c = delay_line_cascade();
    const Word w{1, 0, 0, 1, 1, 0};
    const auto seq = cascade_state_sequence(c, JointState{0, 0}, w);
    REQUIRE(seq.size() == w.size());
    for (std::size_t t = 0; t < w.size(); ++t) {
        CHECK(seq[t][0] == w[t]);
        CHECK(seq[t][1] == (t == 0 ? 0 : w[t - 1]));
    }
}

TEST_CASE("cascade validation and joint parsing") {
    CascadeComponent bad{"x", {"p", "q"}, {0, 1, 0}};
    CHECK_THROWS_AS(Cascade({"a", "b"}, {bad}), std::invalid_argument);
    CHECK_THROWS_AS(Cascade({"a", "a"}, {}), std::invalid_argument);
    const Cascade c = mixed_witness_cascade();
    CHECK_THROWS_AS(c.parse_joint("(r0)"), std::invalid_argument);
    CHECK_THROWS_AS(c.parse_joint("(r0,zz)"), std::invalid_argument);
    CHECK_THROWS_AS(cascade_step(c, JointState{0, 0}, 7), std::invalid_argument);
    const Cascade empty({"a"}, {});
    CHECK(flatten(empty).states() == std::vector<std::string>{"()"});
}
