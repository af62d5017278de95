// Hand-set weights for a one-block masked transformer that computes the state
// sequence of a reset automaton ("last reset wins", with an identity symbol),
// and a positionwise comparison of any labelled model against an automaton.
//
// Construction (attention only, norms and MLP contribute nothing):
//   residual channels = [one-hot token | position | one channel per state]
//   E[s]      = one-hot(s); state-token rows are zero
//   P[i]      = i in the position channel
//   query     = sum of token channels (always 1)
//   key(j)    = beta * [token j is a reset] + gamma * position(j)
//   value(j)  = one-hot of the state token j resets to (the initial state for
//               the identity symbol)
//   U         = state channel q -> vocab id |alphabet| + q
// With the causal (-inf) mask, the most recent reset at or before i carries
// most of the softmax mass once beta outweighs gamma * i, so the argmax of row
// i is that reset's state, or the initial state when no reset has been read.

#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tfa/automata.hpp"
#include "tfa/transformer.hpp"

namespace tfa {

struct BridgeSymbol {
    std::string label;
    std::optional<std::size_t> resets_to;  // nullopt for the identity symbol
};

struct BridgeSpec {
    std::vector<BridgeSymbol> symbols;
    std::vector<std::string> states;
    std::size_t initial_state = 0;
    double beta = 24.0;
    double gamma = 1.0;
    std::size_t max_len = 64;

    // Throws std::invalid_argument: beta/gamma must be positive, exactly one
    // identity symbol, resets onto distinct valid states, labels distinct.
    void validate() const;
};

// Reset automaton over {0, 1} (0 -> A, 1 -> B) plus identity symbol e,
// initial state A.
BridgeSpec default_bridge_spec(double beta = 24.0);

// Smallest beta on a 0.25 grid that decodes every word of length <= 16
// exactly with gamma = 1 on the default spec. The binding word is one reset
// followed by 15 identity symbols, which needs exp(beta) > sum_{j=1..15} e^j.
constexpr double kBridgeBetaFloor = 15.5;

// A model plus labels for its vocabulary ids.
struct LabeledModel {
    ModelConfig config;
    ModelWeights weights;
    std::vector<std::string> vocab;
};

LabeledModel build_reset_shortcut_model(const BridgeSpec& spec);

// The automaton the bridge model is meant to emulate (symbols in BridgeSpec order,
// identity symbol as an identity row).
Fsa bridge_fsa(const BridgeSpec& spec);

struct WordComparison {
    std::string word;
    bool match = false;
    std::optional<std::size_t> first_mismatch;
};

struct ComparisonReport {
    std::vector<WordComparison> words;
    std::size_t positions = 0;
    std::size_t matched_positions = 0;

    double accuracy() const;
    bool all_match() const;
};

// decode_top(forward(word)) vs state_sequence(fsa, q0, word), by label.
// Every fsa symbol and state label must appear in model.vocab.
ComparisonReport compare_model_to_fsa(const LabeledModel& model, const Fsa& fsa, std::size_t q0,
                                      const std::vector<Word>& words);

// Decoded state labels for one word given as fsa symbol indices.
std::vector<std::string> decode_word(const LabeledModel& model, const Fsa& fsa, const Word& word);

// CSV schema: word,match,first_mismatch_pos (empty when matched).
void write_comparison_csv(std::ostream& out, const ComparisonReport& report);

}  // namespace tfa
