#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "tfa/bridge.hpp"
#include "tfa/random.hpp"
#include "tfa/weights_io.hpp"

using namespace tfa;

namespace {

// Words that push the most recent reset as far back as possible: a block of
// one symbol, one reset, then identity symbols.
std::vector<Word> adversarial_words(std::size_t max_len) {
    std::vector<Word> words;
    for (std::size_t fill = 0; fill < 3; ++fill)
        for (std::size_t reset = 0; reset < 2; ++reset)
            for (std::size_t p = 0; p < max_len; ++p)
                for (std::size_t k = 0; p + 1 + k <= max_len; ++k) {
                    Word w(p, fill);
                    w.push_back(reset);
                    w.insert(w.end(), k, 2);
                    words.push_back(std::move(w));
                }
    return words;
}

}  // namespace

TEST_CASE("bridge model decodes every word up to length 6 exactly") {
    const BridgeSpec spec = default_bridge_spec();
    const LabeledModel m = build_reset_shortcut_model(spec);
    const Fsa fsa = bridge_fsa(spec);
    std::vector<Word> words;
    for (std::size_t len = 1; len <= 6; ++len)
        for (auto& w : test::all_words(3, len)) words.push_back(std::move(w));
    const ComparisonReport r = compare_model_to_fsa(m, fsa, spec.initial_state, words);
    CHECK(r.all_match());
    CHECK(r.accuracy() == 1.0);
}

TEST_CASE("bridge automaton has the expected table") {
    const Fsa fsa = bridge_fsa(default_bridge_spec());
    CHECK(fsa.alphabet() == std::vector<std::string>{"0", "1", "e"});
    CHECK(fsa == flip_flop());
}

TEST_CASE("bridge model shape and vocabulary") {
    const LabeledModel m = build_reset_shortcut_model(default_bridge_spec());
    CHECK(m.vocab == std::vector<std::string>{"0", "1", "e", "A", "B"});
    CHECK(m.config.d_model == 3 + 1 + 2);
    CHECK(m.config.n_layers == 1);
    CHECK(m.config.mask_mode == MaskMode::NegInfPreSoftmax);
    CHECK_FALSE(m.config.use_norm);
}

TEST_CASE("beta floor: the sweep value decodes all adversarial words, one grid step lower does not") {
    const Fsa fsa = bridge_fsa(default_bridge_spec());
    const auto words = adversarial_words(16);
    BridgeSpec at = default_bridge_spec(kBridgeBetaFloor);
    at.max_len = 16;
    CHECK(compare_model_to_fsa(build_reset_shortcut_model(at), fsa, 0, words).all_match());
    BridgeSpec below = default_bridge_spec(kBridgeBetaFloor - 0.25);
    below.max_len = 16;
    const ComparisonReport r = compare_model_to_fsa(build_reset_shortcut_model(below), fsa, 0, words);
    CHECK_FALSE(r.all_match());
}

TEST_CASE("too small beta fails and reports the first mismatch") {
    const BridgeSpec spec = default_bridge_spec(2.0);
    const LabeledModel m = build_reset_shortcut_model(spec);
    const Fsa fsa = bridge_fsa(spec);
    // 1 then many identities: the old reset loses to later positions.
    const ComparisonReport r = compare_model_to_fsa(m, fsa, 0, {Word{1, 2, 2, 2, 2, 2}});
    CHECK_FALSE(r.all_match());
    REQUIRE(r.words[0].first_mismatch.has_value());
    CHECK(*r.words[0].first_mismatch > 0);
    CHECK(r.accuracy() < 1.0);
}

TEST_CASE("doubling beta leaves every decoded output unchanged") {
    const BridgeSpec spec = default_bridge_spec();
    BridgeSpec doubled = spec;
    doubled.beta *= 2.0;
    const LabeledModel a = build_reset_shortcut_model(spec), b = build_reset_shortcut_model(doubled);
    const Fsa fsa = bridge_fsa(spec);
    Rng rng(1);
    for (int t = 0; t < 200; ++t) {
        const Word w = rng.tokens(1 + rng.below(16), 3);
        CHECK(decode_word(a, fsa, w) == decode_word(b, fsa, w));
    }
}

TEST_CASE("bridge with three states and a non-default initial state") {
    BridgeSpec spec;
    spec.symbols = {{"x", 2}, {"y", 0}, {"z", 1}, {"id", std::nullopt}};
    spec.states = {"P", "Q", "R"};
    spec.initial_state = 1;
    const LabeledModel m = build_reset_shortcut_model(spec);
    const Fsa fsa = bridge_fsa(spec);
    Rng rng(2);
    std::vector<Word> words;
    for (int t = 0; t < 300; ++t) words.push_back(rng.tokens(1 + rng.below(16), 4));
    words.push_back(Word(10, 3));  // identity only: stays in the initial state
    CHECK(compare_model_to_fsa(m, fsa, spec.initial_state, words).all_match());
}

TEST_CASE("BridgeSpec validation") {
    BridgeSpec spec = default_bridge_spec();
    spec.beta = 0.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = default_bridge_spec();
    spec.symbols.push_back({"f", std::nullopt});
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = default_bridge_spec();
    spec.symbols[1].resets_to = 0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = default_bridge_spec();
    spec.states = {"A", "e"};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("saved bridge model compares identically after reload") {
    const LabeledModel m = build_reset_shortcut_model(default_bridge_spec());
    std::stringstream s;
    save_model(s, m.config, m.weights, m.vocab);
    StoredModel stored = load_model(s);
    const LabeledModel back{stored.config, stored.weights, stored.vocab};
    const Fsa fsa = bridge_fsa(default_bridge_spec());
    const Word w{0, 2, 1, 2, 2, 0};
    CHECK(decode_word(back, fsa, w) == decode_word(m, fsa, w));
}

TEST_CASE("comparison rejects a vocabulary that lacks the automaton's labels") {
    LabeledModel m = build_reset_shortcut_model(default_bridge_spec());
    m.vocab[3] = "Z";
    CHECK_THROWS_AS(compare_model_to_fsa(m, bridge_fsa(default_bridge_spec()), 0, {Word{0}}), std::invalid_argument);
}

TEST_CASE("comparison CSV schema") {
    ComparisonReport r;
    r.words.push_back({"0 1", true, std::nullopt});
    r.words.push_back({"e", false, 0});
    std::ostringstream out;
    write_comparison_csv(out, r);
    CHECK(out.str() == "word,match,first_mismatch_pos\n0 1,1,\ne,0,0\n");
}
