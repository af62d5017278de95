#include "tfa/bridge.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace tfa {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

std::size_t vocab_index(const LabeledModel& model, const std::string& label) {
    auto it = std::find(model.vocab.begin(), model.vocab.end(), label);
    require(it != model.vocab.end(), "model vocabulary has no entry '" + label + "'");
    return static_cast<std::size_t>(it - model.vocab.begin());
}

}  // namespace

void BridgeSpec::validate() const {
    require(beta > 0.0, "bridge: beta must be positive");
    require(gamma > 0.0, "bridge: gamma must be positive");
    require(!states.empty(), "bridge: no states");
    require(initial_state < states.size(), "bridge: initial state out of range");
    require(max_len >= 1, "bridge: max_len must be at least 1");
    std::size_t identities = 0;
    std::set<std::size_t> targets;
    std::set<std::string> labels;
    for (const auto& s : symbols) {
        require(labels.insert(s.label).second, "bridge: duplicate label '" + s.label + "'");
        if (!s.resets_to) {
            ++identities;
            continue;
        }
        require(*s.resets_to < states.size(), "bridge: symbol '" + s.label + "' resets to an unknown state");
        require(targets.insert(*s.resets_to).second, "bridge: two symbols reset to state '" + states[*s.resets_to] + "'");
    }
    require(identities == 1, "bridge: need exactly one identity symbol, got " + std::to_string(identities));
    for (const auto& q : states) require(labels.insert(q).second, "bridge: label '" + q + "' used twice");
}

BridgeSpec default_bridge_spec(double beta) {
    BridgeSpec spec;
    spec.symbols = {{"0", 0}, {"1", 1}, {"e", std::nullopt}};
    spec.states = {"A", "B"};
    spec.initial_state = 0;
    spec.beta = beta;
    return spec;
}

LabeledModel build_reset_shortcut_model(const BridgeSpec& spec) {
    spec.validate();
    const std::size_t n_sym = spec.symbols.size();
    const std::size_t n_state = spec.states.size();
    const std::size_t pos_ch = n_sym;
    const std::size_t state_ch = n_sym + 1;
    const std::size_t d = n_sym + 1 + n_state;

    LabeledModel m;
    for (const auto& s : spec.symbols) m.vocab.push_back(s.label);
    for (const auto& q : spec.states) m.vocab.push_back(q);

    ModelConfig& cfg = m.config;
    cfg.vocab_size = m.vocab.size();
    cfg.d_model = d;
    cfg.n_layers = 1;
    cfg.d_mlp = 1;
    cfg.max_len = spec.max_len;
    cfg.mask_mode = MaskMode::NegInfPreSoftmax;
    cfg.attn_scale = 1.0;
    cfg.use_norm = false;
    cfg.use_mlp = true;  // zero weights: the branch adds exactly 0

    ModelWeights& w = m.weights;
    w.token_embedding = Matrix(cfg.vocab_size, d);
    for (std::size_t s = 0; s < n_sym; ++s) w.token_embedding(s, s) = 1.0;
    w.position_encoding = Matrix(cfg.max_len, d);
    for (std::size_t i = 0; i < cfg.max_len; ++i) w.position_encoding(i, pos_ch) = static_cast<double>(i);

    LayerWeights layer;
    layer.wq = Matrix(d, d);
    layer.wk = Matrix(d, d);
    layer.wv = Matrix(d, d);
    layer.wo = Matrix::identity(d);
    for (std::size_t s = 0; s < n_sym; ++s) {
        layer.wq(s, 0) = 1.0;
        const auto& target = spec.symbols[s].resets_to;
        if (target) layer.wk(s, 0) = spec.beta;
        layer.wv(s, state_ch + target.value_or(spec.initial_state)) = 1.0;
    }
    layer.wk(pos_ch, 0) = spec.gamma;
    layer.w1 = Matrix(d, cfg.d_mlp);
    layer.w2 = Matrix(cfg.d_mlp, d);
    layer.ln1_gain.assign(d, 1.0);
    layer.ln1_bias.assign(d, 0.0);
    layer.ln2_gain.assign(d, 1.0);
    layer.ln2_bias.assign(d, 0.0);
    w.layers.push_back(std::move(layer));
    w.final_gain.assign(d, 1.0);
    w.final_bias.assign(d, 0.0);
    w.unembedding = Matrix(d, cfg.vocab_size);
    for (std::size_t q = 0; q < n_state; ++q) w.unembedding(state_ch + q, n_sym + q) = 1.0;

    w.validate(cfg);
    return m;
}

Fsa bridge_fsa(const BridgeSpec& spec) {
    spec.validate();
    std::vector<std::string> alphabet;
    std::vector<std::vector<std::size_t>> delta;
    for (const auto& s : spec.symbols) {
        alphabet.push_back(s.label);
        std::vector<std::size_t> row(spec.states.size());
        for (std::size_t q = 0; q < row.size(); ++q) row[q] = s.resets_to.value_or(q);
        delta.push_back(std::move(row));
    }
    return Fsa(std::move(alphabet), spec.states, std::move(delta));
}

double ComparisonReport::accuracy() const {
    return positions ? static_cast<double>(matched_positions) / static_cast<double>(positions) : 1.0;
}

bool ComparisonReport::all_match() const {
    return std::all_of(words.begin(), words.end(), [](const WordComparison& w) { return w.match; });
}

std::vector<std::string> decode_word(const LabeledModel& model, const Fsa& fsa, const Word& word) {
    TokenSeq tokens;
    tokens.reserve(word.size());
    for (std::size_t s : word) {
        require(s < fsa.num_symbols(), "unknown symbol index " + std::to_string(s));
        tokens.push_back(vocab_index(model, fsa.alphabet()[s]));
    }
    const TokenSeq decoded = decode_top(forward(tokens, model.weights, model.config));
    std::vector<std::string> labels;
    labels.reserve(decoded.size());
    for (std::size_t id : decoded) labels.push_back(model.vocab.at(id));
    return labels;
}

ComparisonReport compare_model_to_fsa(const LabeledModel& model, const Fsa& fsa, std::size_t q0,
                                      const std::vector<Word>& words) {
    require(model.vocab.size() == model.config.vocab_size, "model vocabulary labels do not match vocab_size");
    for (const auto& s : fsa.alphabet()) vocab_index(model, s);
    for (const auto& q : fsa.states()) vocab_index(model, q);

    ComparisonReport report;
    for (const Word& word : words) {
        const StateSeq expected = state_sequence(fsa, q0, word);
        const std::vector<std::string> decoded = decode_word(model, fsa, word);
        WordComparison cmp;
        for (std::size_t i = 0; i < word.size(); ++i) {
            cmp.word += (i ? " " : "") + fsa.alphabet()[word[i]];
            if (decoded[i] == fsa.states()[expected[i]]) {
                ++report.matched_positions;
            } else if (!cmp.first_mismatch) {
                cmp.first_mismatch = i;
            }
        }
        report.positions += word.size();
        cmp.match = !cmp.first_mismatch;
        report.words.push_back(std::move(cmp));
    }
    return report;
}

void write_comparison_csv(std::ostream& out, const ComparisonReport& report) {
    out << "word,match,first_mismatch_pos\n";
    for (const auto& w : report.words) {
        out << w.word << ',' << (w.match ? 1 : 0) << ',';
        if (w.first_mismatch) out << *w.first_mismatch;
        out << '\n';
    }
}

}  // namespace tfa
