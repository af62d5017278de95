#include "tfa/transformer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tfa/random.hpp"

namespace tfa {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* name) {
    require(m.rows() == rows && m.cols() == cols,
            std::string(name) + " has shape " + shape_string(m) + ", expected " + std::to_string(rows) +
                "x" + std::to_string(cols));
    require(all_finite(m), std::string(name) + " has non-finite entries");
}

void require_len(const std::vector<double>& v, std::size_t n, const char* name) {
    require(v.size() == n, std::string(name) + " has length " + std::to_string(v.size()) +
                               ", expected " + std::to_string(n));
}

Matrix normed(const Matrix& x, const std::vector<double>& gain, const std::vector<double>& bias,
              const ModelConfig& cfg) {
    if (!cfg.use_norm) return x;
    return layer_norm(x, gain, bias, cfg.norm_eps);
}

Matrix attention_scores(const Matrix& x, const LayerWeights& layer, double attn_scale) {
    const Matrix q = matmul(x, layer.wq);
    const Matrix k = matmul(x, layer.wk);
    return scale(matmul(q, transpose(k)), attn_scale);
}

}  // namespace

std::string_view to_string(MaskMode mode) {
    switch (mode) {
        case MaskMode::Unmasked: return "unmasked";
        case MaskMode::NegInfPreSoftmax: return "neginf";
        case MaskMode::ZeroPreSoftmax: return "zeropre";
        case MaskMode::PostSoftmaxZero: return "postzero";
    }
    return "unknown";
}

MaskMode parse_mask_mode(std::string_view text) {
    if (text == "unmasked") return MaskMode::Unmasked;
    if (text == "neginf") return MaskMode::NegInfPreSoftmax;
    if (text == "zeropre") return MaskMode::ZeroPreSoftmax;
    if (text == "postzero") return MaskMode::PostSoftmaxZero;
    throw std::invalid_argument("unknown mask mode '" + std::string(text) +
                                "' (expected unmasked, neginf, zeropre or postzero)");
}

bool is_masked(MaskMode mode) { return mode != MaskMode::Unmasked; }

double ModelConfig::effective_attn_scale() const {
    return attn_scale ? *attn_scale : 1.0 / std::sqrt(static_cast<double>(d_model));
}

void ModelConfig::validate() const {
    require(vocab_size >= 1 && d_model >= 1 && d_mlp >= 1 && max_len >= 1,
            "model config: vocab_size, d_model, d_mlp and max_len must be at least 1");
    require(!attn_scale || (*attn_scale > 0.0 && std::isfinite(*attn_scale)),
            "model config: attn_scale must be positive");
    require(norm_eps > 0.0, "model config: norm_eps must be positive");
}

void ModelWeights::validate(const ModelConfig& cfg) const {
    cfg.validate();
    const std::size_t d = cfg.d_model;
    require_shape(token_embedding, cfg.vocab_size, d, "token_embedding");
    require_shape(position_encoding, cfg.max_len, d, "position_encoding");
    require(layers.size() == cfg.n_layers, "weights have " + std::to_string(layers.size()) +
                                               " layers, config has " + std::to_string(cfg.n_layers));
    for (const auto& l : layers) {
        require_shape(l.wq, d, d, "wq");
        require_shape(l.wk, d, d, "wk");
        require_shape(l.wv, d, d, "wv");
        require_shape(l.wo, d, d, "wo");
        require_shape(l.w1, d, cfg.d_mlp, "w1");
        require_shape(l.w2, cfg.d_mlp, d, "w2");
        require_len(l.ln1_gain, d, "ln1_gain");
        require_len(l.ln1_bias, d, "ln1_bias");
        require_len(l.ln2_gain, d, "ln2_gain");
        require_len(l.ln2_bias, d, "ln2_bias");
    }
    require_len(final_gain, d, "final_gain");
    require_len(final_bias, d, "final_bias");
    require_shape(unembedding, d, cfg.vocab_size, "unembedding");
}

Matrix sinusoidal_positions(std::size_t max_len, std::size_t d_model) {
    require(d_model % 2 == 0, "sinusoidal_positions: d_model must be even, got " + std::to_string(d_model));
    Matrix p(max_len, d_model);
    for (std::size_t pos = 0; pos < max_len; ++pos) {
        for (std::size_t i = 0; i < d_model / 2; ++i) {
            const double freq = std::pow(10000.0, -static_cast<double>(2 * i) / static_cast<double>(d_model));
            const double angle = static_cast<double>(pos) * freq;
            p(pos, 2 * i) = std::sin(angle);
            p(pos, 2 * i + 1) = std::cos(angle);
        }
    }
    return p;
}

ModelWeights init_weights(const ModelConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const std::size_t d = cfg.d_model;
    constexpr double lo = -0.1, hi = 0.1;

    ModelWeights w;
    w.token_embedding = rng.matrix(cfg.vocab_size, d, lo, hi);
    w.position_encoding = sinusoidal_positions(cfg.max_len, d);
    w.layers.reserve(cfg.n_layers);
    for (std::size_t i = 0; i < cfg.n_layers; ++i) {
        LayerWeights l;
        l.wq = rng.matrix(d, d, lo, hi);
        l.wk = rng.matrix(d, d, lo, hi);
        l.wv = rng.matrix(d, d, lo, hi);
        l.wo = rng.matrix(d, d, lo, hi);
        l.w1 = rng.matrix(d, cfg.d_mlp, lo, hi);
        l.w2 = rng.matrix(cfg.d_mlp, d, lo, hi);
        l.ln1_gain.assign(d, 1.0);
        l.ln1_bias.assign(d, 0.0);
        l.ln2_gain.assign(d, 1.0);
        l.ln2_bias.assign(d, 0.0);
        w.layers.push_back(std::move(l));
    }
    w.final_gain.assign(d, 1.0);
    w.final_bias.assign(d, 0.0);
    w.unembedding = rng.matrix(d, cfg.vocab_size, lo, hi);
    return w;
}

Matrix embed(std::span<const std::size_t> tokens, const ModelWeights& w) {
    const Matrix& e = w.token_embedding;
    const Matrix& p = w.position_encoding;
    require(tokens.size() <= p.rows(), "embed: sequence length " + std::to_string(tokens.size()) +
                                           " exceeds max_len " + std::to_string(p.rows()));
    Matrix x(tokens.size(), e.cols());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        require(tokens[i] < e.rows(), "embed: token id " + std::to_string(tokens[i]) + " at position " +
                                          std::to_string(i) + " is outside vocab of " +
                                          std::to_string(e.rows()));
        auto out = x.row(i);
        auto er = e.row(tokens[i]);
        auto pr = p.row(i);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = er[j] + pr[j];
    }
    return x;
}

Matrix attention_pattern(const Matrix& x, const LayerWeights& layer, MaskMode mode, double attn_scale) {
    require(x.cols() == layer.wq.rows(),
            "attention_block: input " + shape_string(x) + " vs wq " + shape_string(layer.wq));
    Matrix scores = attention_scores(x, layer, attn_scale);
    const std::size_t n = scores.rows();
    switch (mode) {
        case MaskMode::Unmasked:
            return row_softmax(scores);
        case MaskMode::NegInfPreSoftmax:
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) scores(i, j) = -std::numeric_limits<double>::infinity();
            return row_softmax(scores);
        case MaskMode::ZeroPreSoftmax:
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) scores(i, j) = 0.0;
            return row_softmax(scores);
        case MaskMode::PostSoftmaxZero: {
            Matrix weights = row_softmax(scores);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) weights(i, j) = 0.0;
            return weights;
        }
    }
    throw std::logic_error("unhandled mask mode");
}

Matrix attention_block(const Matrix& x, const LayerWeights& layer, MaskMode mode, double attn_scale) {
    const Matrix weights = attention_pattern(x, layer, mode, attn_scale);
    const Matrix mixed = matmul(weights, matmul(x, layer.wv));
    return matmul(mixed, layer.wo);
}

Matrix mlp_block(const Matrix& x, const LayerWeights& layer) {
    require(x.cols() == layer.w1.rows() && layer.w1.cols() == layer.w2.rows(),
            "mlp_block: input " + shape_string(x) + " vs w1 " + shape_string(layer.w1) + ", w2 " +
                shape_string(layer.w2));
    return matmul(gelu(matmul(x, layer.w1)), layer.w2);
}

ResidualTrace forward_embedded(const Matrix& x, const ModelWeights& w, const ModelConfig& cfg) {
    require(x.cols() == cfg.d_model,
            "forward: embedded input " + shape_string(x) + " does not have d_model columns");
    const double s = cfg.effective_attn_scale();
    ResidualTrace trace;
    trace.snapshots.reserve(w.layers.size() + 1);
    trace.snapshots.push_back(x);
    Matrix r = x;
    for (const auto& layer : w.layers) {
        if (r.rows() > 0) {
            r = add(r, attention_block(normed(r, layer.ln1_gain, layer.ln1_bias, cfg), layer, cfg.mask_mode, s));
            if (cfg.use_mlp) r = add(r, mlp_block(normed(r, layer.ln2_gain, layer.ln2_bias, cfg), layer));
        }
        trace.snapshots.push_back(r);
    }
    trace.logits = matmul(normed(r, w.final_gain, w.final_bias, cfg), w.unembedding);
    return trace;
}

ResidualTrace forward(std::span<const std::size_t> tokens, const ModelWeights& w, const ModelConfig& cfg) {
    return forward_embedded(embed(tokens, w), w, cfg);
}

TokenSeq decode_top(const ResidualTrace& trace) {
    TokenSeq out(trace.logits.rows(), 0);
    for (std::size_t i = 0; i < trace.logits.rows(); ++i) {
        auto row = trace.logits.row(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < row.size(); ++j)
            if (row[j] > row[best]) best = j;
        out[i] = best;
    }
    return out;
}

}  // namespace tfa
