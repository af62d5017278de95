#include "tfa/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "tfa/random.hpp"

namespace tfa {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

ModelConfig with_seed(ModelConfig cfg, std::uint64_t seed) {
    cfg.seed = seed;
    return cfg;
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string perm_label(const Permutation& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "-" : "") + std::to_string(p[i]);
    return s;
}

}  // namespace

double DeviationReport::max_deviation() const {
    double worst = logit_deviation.value_or(0.0);
    for (double d : block_deviations) worst = std::max(worst, d);
    return worst;
}

void finalize(DeviationReport& report) { report.pass = report.max_deviation() <= report.tolerance; }

DeviationReport check_permutation_invariance(const ModelConfig& cfg, std::uint64_t seed, const TokenSeq& tokens,
                                             const Permutation& perm, double tolerance) {
    require(cfg.mask_mode == MaskMode::Unmasked,
            "permutation invariance applies to unmasked models only (mask is " + std::string(to_string(cfg.mask_mode)) +
                ")");
    require(perm.size() == tokens.size(), "permutation size " + std::to_string(perm.size()) +
                                              " does not match sequence length " + std::to_string(tokens.size()));
    const ModelConfig c = with_seed(cfg, seed);
    const ModelWeights w = init_weights(c);
    const Matrix x = embed(tokens, w);
    const ResidualTrace base = forward_embedded(x, w, c);
    const ResidualTrace moved = forward_embedded(permute_rows(x, perm), w, c);

    DeviationReport r;
    r.scenario = "perm/seed=" + std::to_string(seed) + "/d=" + std::to_string(c.d_model) + "/L=" +
                 std::to_string(c.n_layers) + "/n=" + std::to_string(tokens.size()) + "/pi=" + perm_label(perm);
    r.tolerance = tolerance;
    for (std::size_t m = 0; m < base.snapshots.size(); ++m)
        r.block_deviations.push_back(max_abs_diff(moved.snapshots[m], permute_rows(base.snapshots[m], perm)));
    r.logit_deviation = max_abs_diff(moved.logits, permute_rows(base.logits, perm));
    finalize(r);
    return r;
}

double check_softmax_lemma(std::size_t n, std::uint64_t seed, const Permutation& perm) {
    require(n >= 1, "softmax lemma needs n >= 1");
    require(perm.size() == n, "permutation size does not match n");
    Rng rng(seed);
    const Matrix a = rng.matrix(n, n, -3.0, 3.0);
    const Matrix p = permutation_matrix(perm);
    const Matrix pt = transpose(p);
    const Matrix lhs = row_softmax(matmul(matmul(p, a), pt));
    const Matrix rhs = matmul(matmul(p, row_softmax(a)), pt);
    return max_abs_diff(lhs, rhs);
}

std::vector<DeviationReport> check_substring_invariance(const ModelConfig& cfg, std::uint64_t seed,
                                                        const TokenSeq& tokens, double tolerance) {
    require(is_masked(cfg.mask_mode), "substring invariance applies to masked models only");
    const ModelConfig c = with_seed(cfg, seed);
    const ModelWeights w = init_weights(c);
    const ResidualTrace full = forward(tokens, w, c);
    const bool asserted = c.mask_mode != MaskMode::ZeroPreSoftmax;

    std::vector<DeviationReport> reports;
    for (std::size_t n = 1; n <= tokens.size(); ++n) {
        const TokenSeq prefix(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(n));
        const ResidualTrace part = forward(prefix, w, c);
        DeviationReport r;
        r.scenario = "substring/" + std::string(to_string(c.mask_mode)) + "/seed=" + std::to_string(seed) + "/d=" +
                     std::to_string(c.d_model) + "/L=" + std::to_string(c.n_layers) + "/n=" + std::to_string(n) +
                     "of" + std::to_string(tokens.size());
        r.tolerance = tolerance;
        for (std::size_t m = 0; m < full.snapshots.size(); ++m)
            r.block_deviations.push_back(max_abs_diff(part.snapshots[m], full.snapshots[m].top_rows(n)));
        r.logit_deviation = max_abs_diff(part.logits, full.logits.top_rows(n));
        finalize(r);
        if (!asserted) r.pass = true;
        reports.push_back(std::move(r));
    }
    return reports;
}

std::vector<CurvePoint> substring_deviation_curve(const ModelConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                                  const std::vector<std::size_t>& lengths) {
    if (lengths.empty()) return {};
    const std::size_t longest = *std::max_element(lengths.begin(), lengths.end());
    require(longest + 1 <= cfg.max_len, "curve: max_len " + std::to_string(cfg.max_len) +
                                            " too small for length " + std::to_string(longest) + " plus one");
    std::vector<std::vector<double>> per_length(lengths.size());
    for (std::uint64_t seed : seeds) {
        const ModelConfig c = with_seed(cfg, seed);
        const ModelWeights w = init_weights(c);
        // Token stream drawn from a generator separate from the weights.
        Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
        const TokenSeq tokens = rng.tokens(longest + 1, c.vocab_size);
        for (std::size_t li = 0; li < lengths.size(); ++li) {
            const std::size_t n = lengths[li];
            const TokenSeq shorter(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(n));
            const TokenSeq longer(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(n + 1));
            const Matrix a = forward(shorter, w, c).snapshots.back();
            const Matrix b = forward(longer, w, c).snapshots.back().top_rows(n);
            per_length[li].push_back(max_abs_diff(a, b));
        }
    }
    std::vector<CurvePoint> curve;
    for (std::size_t li = 0; li < lengths.size(); ++li) curve.push_back({lengths[li], median(per_length[li])});
    return curve;
}

DeviationReport check_prefix_permutation(const ModelConfig& cfg, std::uint64_t seed, const TokenSeq& tokens,
                                         const Permutation& perm, double tolerance) {
    require(cfg.n_layers == 1, "prefix permutation check needs exactly one attention layer");
    require(!tokens.empty(), "prefix permutation check needs a nonempty sequence");
    require(perm.size() == tokens.size(), "permutation size does not match sequence length");
    const std::size_t last = tokens.size() - 1;
    require(perm[last] == last, "permutation must fix the last position");

    const ModelConfig c = with_seed(cfg, seed);
    const ModelWeights w = init_weights(c);
    const LayerWeights& layer = w.layers.front();
    auto branch = [&](const Matrix& x) {
        const Matrix h = c.use_norm ? layer_norm(x, layer.ln1_gain, layer.ln1_bias, c.norm_eps) : x;
        return attention_block(h, layer, c.mask_mode, c.effective_attn_scale());
    };
    const Matrix x = embed(tokens, w);
    const Matrix base = branch(x);
    const Matrix moved = branch(permute_rows(x, perm));

    DeviationReport r;
    r.scenario = "prefix-perm/" + std::string(to_string(c.mask_mode)) + "/seed=" + std::to_string(seed) +
                 "/n=" + std::to_string(tokens.size()) + "/pi=" + perm_label(perm);
    r.tolerance = tolerance;
    double final_row = 0.0;
    for (std::size_t j = 0; j < base.cols(); ++j)
        final_row = std::max(final_row, std::abs(base(last, j) - moved(last, j)));
    r.block_deviations.push_back(final_row);
    double earlier = 0.0;
    for (std::size_t i = 0; i < last; ++i)
        for (std::size_t j = 0; j < base.cols(); ++j)
            earlier = std::max(earlier, std::abs(moved(i, j) - base(perm[i], j)));
    r.unasserted_deviation = earlier;
    finalize(r);
    return r;
}

ProbeTable position_probe(const ResidualTrace& trace, const ModelWeights& w, std::size_t probe_count) {
    const Matrix& p = w.position_encoding;
    require(probe_count >= 1 && probe_count <= p.rows(), "position_probe: probe_count " + std::to_string(probe_count) +
                                                             " outside 1.." + std::to_string(p.rows()));
    require(!trace.snapshots.empty(), "position_probe: empty trace");
    ProbeTable table;
    table.rows = trace.seq_len();
    table.blocks = trace.snapshots.size();
    table.cells.resize(table.rows * table.blocks);
    for (std::size_t b = 0; b < table.blocks; ++b) {
        const Matrix& snap = trace.snapshots[b];
        for (std::size_t r = 0; r < table.rows; ++r) {
            ProbeCell best{0, cosine_similarity(snap.row(r), p.row(0))};
            for (std::size_t j = 1; j < probe_count; ++j) {
                const double s = cosine_similarity(snap.row(r), p.row(j));
                if (s > best.similarity) best = {j, s};
            }
            table.cells[r * table.blocks + b] = best;
        }
    }
    return table;
}

CollisionStats collision_scan(const ModelWeights& w, std::size_t trials, double threshold, std::uint64_t seed) {
    require(trials >= 1, "collision_scan: trials must be at least 1");
    require(threshold > 0.0 && threshold <= 1.0, "collision_scan: threshold must be in (0, 1]");
    const Matrix& e = w.token_embedding;
    const Matrix& p = w.position_encoding;
    require(e.rows() * p.rows() >= 2, "collision_scan: need at least two distinct (token, position) pairs");
    Rng rng(seed);
    std::vector<double> u(e.cols()), v(e.cols());
    CollisionStats stats;
    stats.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        std::size_t t1, p1, t2, p2;
        do {
            t1 = rng.below(e.rows());
            p1 = rng.below(p.rows());
            t2 = rng.below(e.rows());
            p2 = rng.below(p.rows());
        } while (t1 == t2 && p1 == p2);
        for (std::size_t j = 0; j < u.size(); ++j) {
            u[j] = e(t1, j) + p(p1, j);
            v[j] = e(t2, j) + p(p2, j);
        }
        if (cosine_similarity(u, v) >= 1.0 - threshold) ++stats.collisions;
    }
    return stats;
}

PositionalCheck check_positional_encoding(const Matrix& positions, std::size_t samples, std::uint64_t seed) {
    require(positions.rows() >= 1, "positional check needs at least one position");
    Rng rng(seed);
    const std::size_t n = positions.rows();
    PositionalCheck check;
    check.samples = samples;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t k = rng.below(n);
        const std::size_t a = rng.below(n - k);
        const std::size_t b = rng.below(n - k);
        const double d0 = dot(positions.row(a), positions.row(b));
        const double d1 = dot(positions.row(a + k), positions.row(b + k));
        check.max_translation_error = std::max(check.max_translation_error, std::abs(d0 - d1));

        const double self = dot(positions.row(a), positions.row(a));
        for (std::size_t other = 0; other < n; ++other) {
            if (other != a && dot(positions.row(a), positions.row(other)) > self) ++check.self_similarity_violations;
        }
    }
    check.self_similarity_maximal = check.self_similarity_violations == 0;
    return check;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

void write_deviation_csv(std::ostream& out, const std::vector<DeviationReport>& reports) {
    out << "scenario,block,deviation,tolerance,pass\n";
    for (const auto& r : reports) {
        const std::string tol = format_number(r.tolerance);
        // Reports that pass despite exceeding the tolerance are advisory: every row passes.
        const bool advisory = r.pass && r.max_deviation() > r.tolerance;
        auto row = [&](const std::string& block, double dev) {
            const bool ok = advisory || dev <= r.tolerance;
            out << r.scenario << ',' << block << ',' << format_number(dev) << ',' << tol << ',' << (ok ? 1 : 0)
                << '\n';
        };
        for (std::size_t b = 0; b < r.block_deviations.size(); ++b) row(std::to_string(b), r.block_deviations[b]);
        if (r.logit_deviation) row("logits", *r.logit_deviation);
    }
}

}  // namespace tfa
