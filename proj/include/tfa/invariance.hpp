// Executable checks of the architectural invariants of the transformer kernel:
// permutation invariance of unmasked models, substring invariance of masked
// models, prefix-permutation behaviour of a single masked attention layer and
// properties of the sinusoidal position matrix.

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tfa/linalg.hpp"
#include "tfa/transformer.hpp"

namespace tfa {

struct DeviationReport {
    std::string scenario;
    // Max-abs deviation per residual snapshot (index = block).
    std::vector<double> block_deviations;
    std::optional<double> logit_deviation;
    double tolerance = 0.0;
    bool pass = false;
    // Measured but not part of the pass decision (e.g. earlier rows in the
    // prefix-permutation check).
    std::optional<double> unasserted_deviation;

    double max_deviation() const;
};

// pass <=> every asserted deviation <= tolerance.
void finalize(DeviationReport& report);

constexpr double kModelTolerance = 1e-9;
constexpr double kLemmaTolerance = 1e-12;

// Unmasked only. Compares forward(P X) against P forward(X) at every snapshot
// and at the logits, where X is the embedded input.
DeviationReport check_permutation_invariance(const ModelConfig& cfg, std::uint64_t seed, const TokenSeq& tokens,
                                             const Permutation& perm, double tolerance = kModelTolerance);

// max |softmax(P A P^T) - P softmax(A) P^T| for a random n x n matrix A.
double check_softmax_lemma(std::size_t n, std::uint64_t seed, const Permutation& perm);

// Masked only. One report per prefix length n = 1..len. Approximate mode
// (ZeroPreSoftmax) reports its deviations with pass forced true, since no
// exactness is claimed for it.
std::vector<DeviationReport> check_substring_invariance(const ModelConfig& cfg, std::uint64_t seed,
                                                        const TokenSeq& tokens,
                                                        double tolerance = kModelTolerance);

struct CurvePoint {
    std::size_t length = 0;
    double median_deviation = 0.0;
};

// For each n: max-abs change of rows 0..n-1 of the last snapshot when token n
// is appended, median over seeds. cfg.max_len must exceed max(lengths).
std::vector<CurvePoint> substring_deviation_curve(const ModelConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                                  const std::vector<std::size_t>& lengths);

// Single attention layer. Permutes the embedded rows 0..n-2 (perm must fix the
// last index) and compares the last row of the attention-block output.
DeviationReport check_prefix_permutation(const ModelConfig& cfg, std::uint64_t seed, const TokenSeq& tokens,
                                         const Permutation& perm, double tolerance = kModelTolerance);

struct ProbeCell {
    std::size_t position = 0;
    double similarity = 0.0;
};

struct ProbeTable {
    std::size_t rows = 0;    // residual positions
    std::size_t blocks = 0;  // snapshots
    std::vector<ProbeCell> cells;  // row-major: cells[row * blocks + block]

    const ProbeCell& at(std::size_t row, std::size_t block) const { return cells[row * blocks + block]; }
};

// For each snapshot row, the index j < probe_count maximizing cosine
// similarity with position_encoding row j (ties to the lowest j).
ProbeTable position_probe(const ResidualTrace& trace, const ModelWeights& w, std::size_t probe_count);

struct CollisionStats {
    std::size_t trials = 0;
    std::size_t collisions = 0;
    double rate() const { return trials ? static_cast<double>(collisions) / static_cast<double>(trials) : 0.0; }
};

// Samples distinct (token, position) pairs and counts those whose summed
// vectors E[t] + P[p] have cosine similarity >= 1 - threshold.
CollisionStats collision_scan(const ModelWeights& w, std::size_t trials, double threshold, std::uint64_t seed);

struct PositionalCheck {
    std::size_t samples = 0;
    double max_translation_error = 0.0;   // max |<p_a,p_b> - <p_a+k,p_b+k>|
    bool self_similarity_maximal = true;  // <p_a,p_a> >= <p_a,p_b> for every sampled a and all b
    std::size_t self_similarity_violations = 0;
};

PositionalCheck check_positional_encoding(const Matrix& positions, std::size_t samples, std::uint64_t seed);

// CSV schema: scenario,block,deviation,tolerance,pass (block "logits" for the
// logit row). The header is always written.
void write_deviation_csv(std::ostream& out, const std::vector<DeviationReport>& reports);
std::string format_number(double v);

}  // namespace tfa
