// Minimal encoder-only transformer: single-head attention, GELU MLP, pre-norm
// residual blocks and a per-block residual-stream trace.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tfa/linalg.hpp"

namespace tfa {

enum class MaskMode {
    Unmasked,
    NegInfPreSoftmax,   // future scores set to -inf before softmax
    ZeroPreSoftmax,     // future scores set to 0 before softmax
    PostSoftmaxZero,    // softmax over the full row, then future weights zeroed (no renormalization)
};

std::string_view to_string(MaskMode mode);
// Accepts the CLI spellings: unmasked, neginf, zeropre, postzero.
MaskMode parse_mask_mode(std::string_view text);
bool is_masked(MaskMode mode);

struct ModelConfig {
    std::size_t vocab_size = 32;
    std::size_t d_model = 16;
    std::size_t n_layers = 2;
    std::size_t d_mlp = 32;
    std::size_t max_len = 64;
    MaskMode mask_mode = MaskMode::Unmasked;
    std::uint64_t seed = 0;
    // Multiplies raw attention scores; unset means 1/sqrt(d_model).
    std::optional<double> attn_scale;
    // Layer norms are the identity when false (hand-built models use this).
    bool use_norm = true;
    // MLP branch is skipped entirely when false.
    bool use_mlp = true;
    double norm_eps = 1e-5;

    double effective_attn_scale() const;
    // Throws std::invalid_argument on a zero count or a non-positive scale/eps.
    void validate() const;
};

struct LayerWeights {
    Matrix wq, wk, wv, wo;   // d_model x d_model
    Matrix w1;               // d_model x d_mlp
    Matrix w2;               // d_mlp x d_model
    std::vector<double> ln1_gain, ln1_bias;
    std::vector<double> ln2_gain, ln2_bias;
};

struct ModelWeights {
    Matrix token_embedding;      // vocab_size x d_model
    Matrix position_encoding;    // max_len x d_model
    std::vector<LayerWeights> layers;
    std::vector<double> final_gain, final_bias;
    Matrix unembedding;          // d_model x vocab_size

    // Throws if any shape disagrees with cfg or any entry is non-finite.
    void validate(const ModelConfig& cfg) const;
};

struct ResidualTrace {
    // snapshots[0] is the embedded input; snapshots[m] follows block m.
    std::vector<Matrix> snapshots;
    Matrix logits;  // seq_len x vocab_size

    std::size_t seq_len() const { return snapshots.empty() ? 0 : snapshots.front().rows(); }
};

using TokenSeq = std::vector<std::size_t>;

// Weights i.i.d. uniform in [-0.1, 0.1] from Rng(cfg.seed), drawn in a fixed
// order (E, then per layer Wq Wk Wv Wo W1 W2, then U). Norm gains 1, biases 0.
// The position matrix is sinusoidal (needs an even d_model).
ModelWeights init_weights(const ModelConfig& cfg);

Matrix sinusoidal_positions(std::size_t max_len, std::size_t d_model);

Matrix embed(std::span<const std::size_t> tokens, const ModelWeights& w);

Matrix attention_block(const Matrix& x, const LayerWeights& layer, MaskMode mode, double attn_scale);

// Attention weights only (post-mask, post-softmax); exposed for inspection.
Matrix attention_pattern(const Matrix& x, const LayerWeights& layer, MaskMode mode, double attn_scale);

Matrix mlp_block(const Matrix& x, const LayerWeights& layer);

ResidualTrace forward(std::span<const std::size_t> tokens, const ModelWeights& w,
                      const ModelConfig& cfg);

// Runs the blocks on an already embedded input (seq_len x d_model).
ResidualTrace forward_embedded(const Matrix& x, const ModelWeights& w, const ModelConfig& cfg);

// Row-wise argmax of the logits; ties go to the lowest id.
TokenSeq decode_top(const ResidualTrace& trace);

}  // namespace tfa
