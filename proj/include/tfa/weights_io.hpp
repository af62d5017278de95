// Text container for a model config plus its named weight matrices.
//
//   tfa-weights 1
//   config <key> <value> ...          (one line, keys listed in save order)
//   matrix <name> <rows> <cols>
//   <one line per row, values separated by single spaces>
//   vector <name> <length>
//   <values on one line>
//   vocab <n>                         (optional: labels for the vocab ids)
//   <labels separated by single spaces>
//   end
//
// Names: token_embedding, position_encoding, unembedding, final_gain,
// final_bias and layer.<i>.{wq,wk,wv,wo,w1,w2,ln1_gain,ln1_bias,ln2_gain,ln2_bias}.
// Values are written in shortest round-trip decimal form, so a load after a
// save reproduces every double bit for bit.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tfa/transformer.hpp"

namespace tfa {

struct StoredModel {
    ModelConfig config;
    ModelWeights weights;
    std::vector<std::string> vocab;  // empty when the file has no labels
};

void save_model(std::ostream& out, const ModelConfig& cfg, const ModelWeights& w,
                const std::vector<std::string>& vocab = {});
StoredModel load_model(std::istream& in);

void save_model_file(const std::string& path, const ModelConfig& cfg, const ModelWeights& w,
                     const std::vector<std::string>& vocab = {});
StoredModel load_model_file(const std::string& path);

// Shortest decimal form that parses back to the same double.
std::string format_exact(double v);

}  // namespace tfa
