#include "tfa/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "tfa/bridge.hpp"
#include "tfa/catalog.hpp"
#include "tfa/formats.hpp"
#include "tfa/invariance.hpp"
#include "tfa/random.hpp"
#include "tfa/weights_io.hpp"

namespace tfa::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::uint64_t seed = 0;
    std::size_t d_model = 16;
    std::size_t layers = 2;
    std::size_t len = 8;
    std::size_t vocab = 32;
    std::size_t max_len = 64;
    std::size_t d_mlp = 0;  // 0 = 2 * d_model
    std::string mask;
    std::string out_dir;
    std::optional<double> attn_scale;

    // invariance curve / prefix-perm / probes / pe
    std::size_t seeds = 20;
    std::vector<std::size_t> lengths{4, 8, 16, 32};
    std::size_t trials = 100;
    std::size_t probe_count = 9;
    double threshold = 1e-3;
    std::size_t samples = 1000;

    // automata
    std::string fsa_path;
    std::string cascade_path;
    std::string cover_fsa_path;
    std::string q0;
    std::string word;
    std::string symbol;
    std::size_t max_size = kDefaultClosureLimit;

    // bridge
    double beta = 24.0;
    double gamma = 1.0;
    std::string resets = "0=A,1=B";
    std::string identity = "e";
    std::string states = "A,B";
    std::string initial = "A";
    std::string model_path;
    std::size_t words = 500;
    std::size_t max_word_len = 16;
    std::size_t exhaustive = 0;
};

// key=value lines written next to every output set.
class Manifest {
public:
    void set(const std::string& key, const std::string& value) {
        for (auto& [k, v] : entries_)
            if (k == key) {
                v = value;
                return;
            }
        entries_.emplace_back(key, value);
    }
    void output(const std::string& name) { outputs_.push_back(name); }

    std::string text() const {
        std::string s;
        for (const auto& [k, v] : entries_) s += k + "=" + v + "\n";
        std::string outs;
        for (std::size_t i = 0; i < outputs_.size(); ++i) outs += (i ? "," : "") + outputs_[i];
        s += "outputs=" + outs + "\n";
        return s;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::vector<std::string> outputs_;
};

struct Context {
    const Options& opt;
    std::ostream& out;
    std::ostream& err;
    Manifest manifest;

    // Writes `content` to --out/<name> when --out is given, else to stdout.
    void emit(const std::string& name, const std::string& content) {
        if (opt.out_dir.empty()) {
            out << content;
            return;
        }
        fs::create_directories(opt.out_dir);
        std::ofstream f(fs::path(opt.out_dir) / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (fs::path(opt.out_dir) / name).string());
        f << content;
        manifest.output(name);
    }

    void finish() {
        if (opt.out_dir.empty()) return;
        fs::create_directories(opt.out_dir);
        std::ofstream f(fs::path(opt.out_dir) / "manifest.txt", std::ios::binary);
        f << manifest.text();
    }
};

std::string num(double v) { return format_number(v); }

std::string csv_field(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string q = "\"";
    for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            if (!cur.empty()) parts.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

ModelConfig model_config(const Options& o, MaskMode mode) {
    ModelConfig cfg;
    cfg.vocab_size = o.vocab;
    cfg.d_model = o.d_model;
    cfg.n_layers = o.layers;
    cfg.d_mlp = o.d_mlp ? o.d_mlp : 2 * o.d_model;
    cfg.max_len = std::max(o.max_len, o.len);
    cfg.mask_mode = mode;
    cfg.seed = o.seed;
    cfg.attn_scale = o.attn_scale;
    cfg.validate();
    return cfg;
}

void echo_config(Manifest& m, const ModelConfig& cfg) {
    m.set("vocab_size", std::to_string(cfg.vocab_size));
    m.set("d_model", std::to_string(cfg.d_model));
    m.set("n_layers", std::to_string(cfg.n_layers));
    m.set("d_mlp", std::to_string(cfg.d_mlp));
    m.set("max_len", std::to_string(cfg.max_len));
    m.set("mask", std::string(to_string(cfg.mask_mode)));
    m.set("attn_scale", format_number(cfg.effective_attn_scale()));
    m.set("use_mlp", cfg.use_mlp ? "1" : "0");
}

MaskMode mask_or(const Options& o, MaskMode fallback) {
    return o.mask.empty() ? fallback : parse_mask_mode(o.mask);
}

std::string csv_of(const std::vector<DeviationReport>& reports) {
    std::ostringstream s;
    write_deviation_csv(s, reports);
    return s.str();
}

bool all_pass(const std::vector<DeviationReport>& reports) {
    return std::all_of(reports.begin(), reports.end(), [](const DeviationReport& r) { return r.pass; });
}

// ---- invariance --------------------------------------------------------

int run_invariance_perm(Context& ctx) {
    const Options& o = ctx.opt;
    const ModelConfig cfg = model_config(o, mask_or(o, MaskMode::Unmasked));
    Rng rng(o.seed);
    const TokenSeq tokens = rng.tokens(o.len, cfg.vocab_size);
    const Permutation perm = rng.permutation(o.len);
    std::vector<DeviationReport> reports{check_permutation_invariance(cfg, o.seed, tokens, perm),
                                         check_permutation_invariance(cfg, o.seed, tokens, perm.inverse())};
    echo_config(ctx.manifest, cfg);
    ctx.emit("perm.csv", csv_of(reports));
    return all_pass(reports) ? kExitOk : kExitCheckFailed;
}

int run_invariance_substring(Context& ctx) {
    const Options& o = ctx.opt;
    const ModelConfig cfg = model_config(o, mask_or(o, MaskMode::NegInfPreSoftmax));
    Rng rng(o.seed);
    const TokenSeq tokens = rng.tokens(o.len, cfg.vocab_size);
    const auto reports = check_substring_invariance(cfg, o.seed, tokens);
    echo_config(ctx.manifest, cfg);
    ctx.emit("substring.csv", csv_of(reports));
    return all_pass(reports) ? kExitOk : kExitCheckFailed;
}

int run_invariance_curve(Context& ctx) {
    const Options& o = ctx.opt;
    ModelConfig cfg = model_config(o, mask_or(o, MaskMode::ZeroPreSoftmax));
    if (o.lengths.empty()) throw UsageError("--lengths must list at least one length");
    const std::size_t longest = *std::max_element(o.lengths.begin(), o.lengths.end());
    cfg.max_len = std::max(cfg.max_len, longest + 1);
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < o.seeds; ++i) seeds.push_back(o.seed + i);
    const auto curve = substring_deviation_curve(cfg, seeds, o.lengths);

    std::ostringstream csv;
    csv << "length,median_deviation\n";
    for (const auto& p : curve) csv << p.length << ',' << num(p.median_deviation) << '\n';
    echo_config(ctx.manifest, cfg);
    ctx.manifest.set("seeds", std::to_string(o.seeds));
    ctx.emit("curve.csv", csv.str());

    if (curve.empty()) return kExitOk;
    switch (cfg.mask_mode) {
        case MaskMode::ZeroPreSoftmax:
            // Appending a token matters less the longer the input already is.
            return curve.back().median_deviation < curve.front().median_deviation || curve.size() == 1
                       ? kExitOk
                       : kExitCheckFailed;
        case MaskMode::NegInfPreSoftmax:
            for (const auto& p : curve)
                if (p.median_deviation > kModelTolerance) return kExitCheckFailed;
            return kExitOk;
        default:
            return kExitOk;
    }
}

int run_invariance_prefix_perm(Context& ctx) {
    const Options& o = ctx.opt;
    ModelConfig cfg = model_config(o, mask_or(o, MaskMode::NegInfPreSoftmax));
    cfg.n_layers = 1;
    cfg.use_mlp = false;
    if (o.len < 1) throw UsageError("--len must be at least 1");
    Rng rng(o.seed);
    const TokenSeq tokens = rng.tokens(o.len, cfg.vocab_size);
    std::vector<DeviationReport> reports;
    for (std::size_t t = 0; t < o.trials; ++t) {
        const Permutation head = rng.permutation(o.len - 1);
        std::vector<std::size_t> mapping = head.mapping();
        mapping.push_back(o.len - 1);
        reports.push_back(check_prefix_permutation(cfg, o.seed, tokens, Permutation(mapping)));
    }
    echo_config(ctx.manifest, cfg);
    ctx.manifest.set("trials", std::to_string(o.trials));
    ctx.emit("prefix_perm.csv", csv_of(reports));
    return all_pass(reports) ? kExitOk : kExitCheckFailed;
}

// ---- probes ------------------------------------------------------------

int run_probe_position(Context& ctx) {
    const Options& o = ctx.opt;
    const ModelConfig cfg = model_config(o, mask_or(o, MaskMode::NegInfPreSoftmax));
    const ModelWeights w = init_weights(cfg);
    Rng rng(o.seed);
    const TokenSeq tokens = rng.tokens(o.len, cfg.vocab_size);
    const ProbeTable table = position_probe(forward(tokens, w, cfg), w, std::min(o.probe_count, cfg.max_len));
    std::ostringstream csv;
    csv << "row,block,position,similarity\n";
    for (std::size_t r = 0; r < table.rows; ++r)
        for (std::size_t b = 0; b < table.blocks; ++b)
            csv << r << ',' << b << ',' << table.at(r, b).position << ',' << num(table.at(r, b).similarity) << '\n';
    echo_config(ctx.manifest, cfg);
    ctx.manifest.set("probe_count", std::to_string(o.probe_count));
    ctx.emit("position_probe.csv", csv.str());
    return kExitOk;
}

int run_probe_collisions(Context& ctx) {
    const Options& o = ctx.opt;
    const ModelConfig cfg = model_config(o, MaskMode::Unmasked);
    const ModelWeights w = init_weights(cfg);
    const CollisionStats stats = collision_scan(w, o.trials, o.threshold, o.seed);
    std::ostringstream csv;
    csv << "trials,threshold,collisions,rate\n"
        << stats.trials << ',' << num(o.threshold) << ',' << stats.collisions << ',' << num(stats.rate()) << '\n';
    echo_config(ctx.manifest, cfg);
    ctx.manifest.set("trials", std::to_string(o.trials));
    ctx.manifest.set("threshold", num(o.threshold));
    ctx.emit("collisions.csv", csv.str());
    return kExitOk;
}

int run_pe_check(Context& ctx) {
    const Options& o = ctx.opt;
    const Matrix p = sinusoidal_positions(o.max_len, o.d_model);
    const PositionalCheck c = check_positional_encoding(p, o.samples, o.seed);
    constexpr double tol = 1e-6;
    const bool pass = c.max_translation_error <= tol && c.self_similarity_maximal;
    std::ostringstream csv;
    csv << "samples,max_translation_error,tolerance,self_similarity_violations,pass\n"
        << c.samples << ',' << num(c.max_translation_error) << ',' << num(tol) << ','
        << c.self_similarity_violations << ',' << (pass ? 1 : 0) << '\n';
    ctx.manifest.set("max_len", std::to_string(o.max_len));
    ctx.manifest.set("d_model", std::to_string(o.d_model));
    ctx.manifest.set("samples", std::to_string(o.samples));
    ctx.emit("pe_check.csv", csv.str());
    return pass ? kExitOk : kExitCheckFailed;
}

// ---- automata ----------------------------------------------------------

FsaDocument load_fsa_document(const std::string& path) {
    if (path.empty()) throw UsageError("--fsa is required");
    if (path.rfind("builtin:", 0) == 0) {
        const std::string name = path.substr(8);
        const Catalog cat = builtin_examples();
        for (const auto& a : cat.automata)
            if (a.name == name) return {a.fsa, {}};
        throw UsageError("no builtin automaton named '" + name + "'");
    }
    return parse_fsa(read_text_file(path));
}

CascadeDocument load_cascade_document(const std::string& path) {
    if (path.empty()) throw UsageError("--cascade is required");
    if (path == "builtin:mixed_witness") {
        const Catalog cat = builtin_examples();
        const auto& w = cat.coverings.front();
        const Fsa flat = flatten(w.cascade);
        CoverPairs pairs;
        for (std::size_t q = 0; q < w.cover.image.size(); ++q)
            if (w.cover.image[q]) pairs.emplace_back(flat.states()[q], w.target.states()[*w.cover.image[q]]);
        return {w.cascade, pairs};
    }
    if (path == "builtin:delay_line") return {delay_line_cascade(), {}};
    return parse_cascade(read_text_file(path));
}

std::size_t initial_state(const Fsa& a, const std::string& label) {
    return label.empty() ? 0 : a.state_index(label);
}

std::string transformation_label(const Fsa& a, const Transformation& t) {
    std::string s = "[";
    for (std::size_t q = 0; q < t.size(); ++q) s += (q ? " " : "") + a.states()[t(q)];
    return s + "]";
}

int run_fsa(Context& ctx, const std::string& action) {
    const Options& o = ctx.opt;
    const FsaDocument doc = load_fsa_document(o.fsa_path);
    const Fsa& a = doc.fsa;
    ctx.manifest.set("fsa", o.fsa_path);
    if (action == "run" || action == "seq" || action == "scan") {
        const std::size_t q0 = initial_state(a, o.q0);
        const Word word = a.parse_word(o.word);
        ctx.manifest.set("q0", a.states()[q0]);
        ctx.manifest.set("word", o.word);
        std::string text;
        if (action == "run") {
            text = a.states()[run(a, q0, word)];
        } else {
            const StateSeq seq = action == "seq" ? state_sequence(a, q0, word) : scan_state_sequence(a, q0, word);
            text = a.format_states(seq);
        }
        ctx.emit(action + ".txt", text + "\n");
        return kExitOk;
    }
    if (action == "classify") {
        std::ostringstream csv;
        csv << "symbol,class,is_reset,is_permutation,is_identity\n";
        for (std::size_t s = 0; s < a.num_symbols(); ++s) {
            if (!o.symbol.empty() && a.alphabet()[s] != o.symbol) continue;
            const SymbolClass c = classify_symbol(a, s);
            csv << a.alphabet()[s] << ',' << to_string(c.kind()) << ',' << c.is_reset << ',' << c.is_permutation << ','
                << c.is_identity << '\n';
        }
        if (!o.symbol.empty()) a.symbol_index(o.symbol);
        ctx.emit("classify.csv", csv.str());
        return kExitOk;
    }
    // semigroup
    const Semigroup s = fsa_semigroup(a, o.max_size);
    std::ostringstream text;
    text << "size=" << s.size() << "\ngroup=" << (is_group(s) ? 1 : 0) << "\nclosed=" << (is_closed(s) ? 1 : 0)
         << '\n';
    for (const auto& t : s.elements) text << transformation_label(a, t) << '\n';
    ctx.manifest.set("max_size", std::to_string(o.max_size));
    ctx.emit("semigroup.txt", text.str());
    return kExitOk;
}

int run_cover_check(Context& ctx) {
    const Options& o = ctx.opt;
    const Fsa target = load_fsa_document(o.fsa_path).fsa;
    Fsa cover_fsa = target;
    CoverPairs pairs;
    if (!o.cascade_path.empty()) {
        const CascadeDocument doc = load_cascade_document(o.cascade_path);
        cover_fsa = flatten(doc.cascade);
        pairs = doc.cover;
        ctx.manifest.set("cascade", o.cascade_path);
    } else if (!o.cover_fsa_path.empty()) {
        FsaDocument doc = load_fsa_document(o.cover_fsa_path);
        cover_fsa = std::move(doc.fsa);
        pairs = doc.cover;
        ctx.manifest.set("cover_fsa", o.cover_fsa_path);
    } else {
        throw UsageError("cover check needs --cascade or --cover-fsa");
    }
    ctx.manifest.set("fsa", o.fsa_path);
    if (pairs.empty()) throw UsageError("no 'cover:' lines found");
    const CoveringMap phi = cover_from_labels(cover_fsa, target, pairs);
    const CoveringResult r = check_covering(cover_fsa, target, phi);
    std::ostringstream csv;
    csv << "covers,surjective,symbol,state,detail\n" << (r.covers ? 1 : 0) << ',' << (r.surjective ? 1 : 0) << ',';
    if (r.counterexample)
        csv << cover_fsa.alphabet()[r.counterexample->symbol] << ',' << cover_fsa.states()[r.counterexample->y_state];
    else
        csv << ',';
    csv << ',' << csv_field(describe(r, cover_fsa, target)) << '\n';
    ctx.emit("cover.csv", csv.str());
    return r.covers ? kExitOk : kExitCheckFailed;
}

int run_cascade(Context& ctx) {
    const Options& o = ctx.opt;
    const CascadeDocument doc = load_cascade_document(o.cascade_path);
    const Cascade& c = doc.cascade;
    const JointState q0 = o.q0.empty() ? JointState(c.size(), 0) : c.parse_joint(o.q0);
    const Fsa flat = flatten(c);
    const Word word = flat.parse_word(o.word);
    const auto seq = cascade_state_sequence(c, q0, word);
    std::string text;
    for (std::size_t i = 0; i < seq.size(); ++i) text += (i ? " " : "") + c.joint_label(seq[i]);
    ctx.manifest.set("cascade", o.cascade_path);
    ctx.manifest.set("q0", c.joint_label(q0));
    ctx.manifest.set("word", o.word);
    ctx.emit("cascade.txt", text + "\n");
    return kExitOk;
}

// ---- bridge ------------------------------------------------------------

BridgeSpec bridge_spec(const Options& o) {
    BridgeSpec spec;
    spec.states = split(o.states, ',');
    for (const auto& entry : split(o.resets, ',')) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) throw UsageError("--resets entries look like symbol=state, got '" + entry + "'");
        const std::string state = entry.substr(eq + 1);
        auto it = std::find(spec.states.begin(), spec.states.end(), state);
        if (it == spec.states.end()) throw UsageError("--resets names unknown state '" + state + "'");
        spec.symbols.push_back({entry.substr(0, eq), static_cast<std::size_t>(it - spec.states.begin())});
    }
    spec.symbols.push_back({o.identity, std::nullopt});
    auto init = std::find(spec.states.begin(), spec.states.end(), o.initial);
    if (init == spec.states.end()) throw UsageError("--initial names unknown state '" + o.initial + "'");
    spec.initial_state = static_cast<std::size_t>(init - spec.states.begin());
    spec.beta = o.beta;
    spec.gamma = o.gamma;
    spec.max_len = std::max<std::size_t>({o.max_len, o.max_word_len, o.exhaustive, 1});
    spec.validate();
    return spec;
}

void echo_bridge(Manifest& m, const Options& o) {
    m.set("beta", format_exact(o.beta));
    m.set("gamma", format_exact(o.gamma));
    m.set("resets", o.resets);
    m.set("identity", o.identity);
    m.set("states", o.states);
    m.set("initial", o.initial);
}

int run_bridge_build(Context& ctx) {
    const Options& o = ctx.opt;
    const BridgeSpec spec = bridge_spec(o);
    const LabeledModel m = build_reset_shortcut_model(spec);
    std::ostringstream s;
    save_model(s, m.config, m.weights, m.vocab);
    echo_bridge(ctx.manifest, o);
    ctx.emit("bridge_model.tfaw", s.str());
    return kExitOk;
}

int run_bridge_compare(Context& ctx) {
    const Options& o = ctx.opt;
    const BridgeSpec spec = bridge_spec(o);
    const Fsa fsa = bridge_fsa(spec);
    LabeledModel model;
    if (o.model_path.empty()) {
        model = build_reset_shortcut_model(spec);
    } else {
        StoredModel stored = load_model_file(o.model_path);
        if (stored.vocab.empty()) throw UsageError("model file has no vocab labels");
        model = {stored.config, std::move(stored.weights), std::move(stored.vocab)};
        ctx.manifest.set("model", o.model_path);
    }

    std::vector<Word> words;
    for (std::size_t len = 0; len <= o.exhaustive; ++len) {
        if (o.exhaustive == 0) break;
        std::size_t total = 1;
        for (std::size_t i = 0; i < len; ++i) total *= fsa.num_symbols();
        for (std::size_t code = 0; code < total; ++code) {
            Word w(len);
            std::size_t rest = code;
            for (std::size_t i = len; i-- > 0;) {
                w[i] = rest % fsa.num_symbols();
                rest /= fsa.num_symbols();
            }
            if (!w.empty()) words.push_back(std::move(w));
        }
    }
    Rng rng(o.seed);
    for (std::size_t i = 0; i < o.words; ++i) words.push_back(rng.tokens(1 + rng.below(o.max_word_len), fsa.num_symbols()));

    const ComparisonReport report = compare_model_to_fsa(model, fsa, spec.initial_state, words);
    std::ostringstream csv;
    write_comparison_csv(csv, report);
    echo_bridge(ctx.manifest, o);
    ctx.manifest.set("seed", std::to_string(o.seed));
    ctx.manifest.set("words", std::to_string(o.words));
    ctx.manifest.set("max_word_len", std::to_string(o.max_word_len));
    ctx.manifest.set("exhaustive", std::to_string(o.exhaustive));
    ctx.manifest.set("accuracy", num(report.accuracy()));
    ctx.emit("bridge_report.csv", csv.str());
    if (!o.out_dir.empty())
        ctx.out << "words=" << report.words.size() << " accuracy=" << num(report.accuracy()) << '\n';
    return report.all_match() ? kExitOk : kExitCheckFailed;
}

// ---- catalog -----------------------------------------------------------

int run_catalog(Context& ctx) {
    const Catalog cat = builtin_examples();
    std::ostringstream list;
    list << "name,type,states,symbols,kind\n";
    for (const auto& a : cat.automata) {
        list << a.name << ",fsa," << a.fsa.num_states() << ',' << a.fsa.num_symbols() << ',' << to_string(a.kind)
             << '\n';
        if (!ctx.opt.out_dir.empty()) ctx.emit(a.name + ".fsa", write_fsa(a.fsa));
    }
    for (const auto& c : cat.coverings) {
        const Fsa flat = flatten(c.cascade);
        std::string kinds;
        for (std::size_t k = 0; k < c.component_kinds.size(); ++k)
            kinds += (k ? "+" : "") + std::string(to_string(c.component_kinds[k]));
        const bool ok = check_covering(flat, c.target, c.cover).covers;
        list << c.name << ",cascade," << flat.num_states() << ',' << c.cascade.alphabet().size() << ',' << kinds
             << (ok ? " (covers target)" : " (DOES NOT COVER)") << '\n';
        if (!ctx.opt.out_dir.empty()) {
            CoverPairs pairs;
            for (std::size_t q = 0; q < c.cover.image.size(); ++q)
                if (c.cover.image[q]) pairs.emplace_back(flat.states()[q], c.target.states()[*c.cover.image[q]]);
            ctx.emit(c.name + ".cascade", write_cascade(c.cascade, pairs));
        }
    }
    for (const auto& n : cat.negatives) {
        list << n.name << ",negative," << n.cover_fsa.num_states() << ',' << n.cover_fsa.num_symbols()
             << ",expected failure\n";
        if (!ctx.opt.out_dir.empty()) {
            CoverPairs pairs;
            for (std::size_t q = 0; q < n.cover.image.size(); ++q)
                if (n.cover.image[q]) pairs.emplace_back(n.cover_fsa.states()[q], n.target.states()[*n.cover.image[q]]);
            ctx.emit(n.name + ".fsa", write_fsa(n.cover_fsa, pairs));
        }
    }
    if (!ctx.opt.out_dir.empty()) ctx.out << list.str();
    ctx.emit("catalog.csv", list.str());
    return kExitOk;
}

// ---- wiring ------------------------------------------------------------

void add_model_flags(CLI::App* sub, Options& o, bool with_mask) {
    sub->add_option("--seed", o.seed, "Seed for weights and inputs")->capture_default_str();
    sub->add_option("--d-model", o.d_model, "Residual width")->capture_default_str();
    sub->add_option("--layers", o.layers, "Number of blocks")->capture_default_str();
    sub->add_option("--len", o.len, "Input sequence length")->capture_default_str();
    sub->add_option("--vocab", o.vocab, "Vocabulary size")->capture_default_str();
    sub->add_option("--max-len", o.max_len, "Rows of the position matrix")->capture_default_str();
    sub->add_option("--d-mlp", o.d_mlp, "MLP width (0 = 2 * d-model)")->capture_default_str();
    sub->add_option("--attn-scale", o.attn_scale, "Attention score scale (default 1/sqrt(d-model))");
    if (with_mask)
        sub->add_option("--mask", o.mask, "Mask mode")
            ->check(CLI::IsMember({"unmasked", "neginf", "zeropre", "postzero"}));
}

void add_out(CLI::App* sub, Options& o) {
    sub->add_option("--out", o.out_dir, "Output directory (CSV files plus manifest.txt); stdout when omitted");
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Transformer invariance checks and algebraic automata tools", "tfa"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::string chosen;
    std::function<int(Context&)> handler;
    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help,
                    std::function<int(Context&)> fn) {
        CLI::App* sub = parent->add_subcommand(name, help);
        sub->callback([&chosen, &handler, sub, parent, fn]() {
            chosen = parent->get_name() + (parent->get_name().empty() ? "" : " ") + sub->get_name();
            handler = fn;
        });
        return sub;
    };

    CLI::App* inv = app.add_subcommand("invariance", "Architectural invariants of the transformer kernel");
    inv->require_subcommand(1);
    {
        auto* s = leaf(inv, "perm",
                       "Permutation invariance: for an unmasked model, permuting the embedded input rows permutes "
                       "every residual snapshot and the logits identically",
                       run_invariance_perm);
        add_model_flags(s, o, true);
        add_out(s, o);
        s = leaf(inv, "substring",
                 "Substring invariance: a masked model run on a prefix reproduces the prefix rows of the full run at "
                 "every block (approximate under zeropre, where deviations are only reported)",
                 run_invariance_substring);
        add_model_flags(s, o, true);
        add_out(s, o);
        s = leaf(inv, "curve",
                 "Marginal effect of appending one token under pre-softmax zero masking, median over seeds per length",
                 run_invariance_curve);
        add_model_flags(s, o, true);
        s->add_option("--seeds", o.seeds, "Number of consecutive seeds starting at --seed")->capture_default_str();
        s->add_option("--lengths", o.lengths, "Prefix lengths")->delimiter(',')->capture_default_str();
        add_out(s, o);
        s = leaf(inv, "prefix-perm",
                 "Single masked attention layer: the last row is unchanged when earlier rows are permuted among "
                 "themselves",
                 run_invariance_prefix_perm);
        add_model_flags(s, o, true);
        s->add_option("--trials", o.trials, "Random prefix permutations")->capture_default_str();
        add_out(s, o);
    }

    CLI::App* probe = app.add_subcommand("probe", "Position information in the residual stream");
    probe->require_subcommand(1);
    {
        auto* s = leaf(probe, "position",
                       "Cosine-similarity probe of each residual row against the position matrix, per block",
                       run_probe_position);
        add_model_flags(s, o, true);
        s->add_option("--probe-count", o.probe_count, "Positions probed")->capture_default_str();
        add_out(s, o);
        s = leaf(probe, "collisions",
                 "Counts near-collisions E[t]+P[a] ~ E[v]+P[b] between distinct (token, position) pairs",
                 run_probe_collisions);
        add_model_flags(s, o, false);
        s->add_option("--trials", o.trials, "Sampled pairs")->capture_default_str();
        s->add_option("--threshold", o.threshold, "Collision when cosine >= 1 - threshold")->capture_default_str();
        add_out(s, o);
    }

    CLI::App* pe = app.add_subcommand("pe", "Sinusoidal position encoding");
    pe->require_subcommand(1);
    {
        auto* s = leaf(pe, "check",
                       "Translation invariance of position dot products and maximal self-similarity", run_pe_check);
        s->add_option("--seed", o.seed, "Sampling seed")->capture_default_str();
        s->add_option("--d-model", o.d_model, "Encoding width (even)")->capture_default_str();
        s->add_option("--max-len", o.max_len, "Positions")->capture_default_str();
        s->add_option("--samples", o.samples, "Sampled (a, b, k) triples")->capture_default_str();
        add_out(s, o);
    }

    CLI::App* fsa = app.add_subcommand("fsa", "Finite state automata");
    fsa->require_subcommand(1);
    {
        const std::vector<std::pair<std::string, std::string>> actions{
            {"run", "Final state after reading a word"},
            {"seq", "State-sequence function: the state after each symbol of the word"},
            {"scan", "The same state sequence computed by a parallel prefix scan over transformations"},
            {"classify", "Classify symbols as reset, permutation or mixed"},
            {"semigroup", "Transformation semigroup generated by the symbols"}};
        for (const auto& [name, help] : actions) {
            const std::string action = name;
            auto* s = leaf(fsa, name, help, [action](Context& ctx) { return run_fsa(ctx, action); });
            s->add_option("--fsa", o.fsa_path, "Automaton file, or builtin:<name>")->required();
            s->add_option("--q0", o.q0, "Initial state label (default: first state)");
            s->add_option("--word", o.word, "Input word");
            s->add_option("--symbol", o.symbol, "Restrict classify to one symbol");
            s->add_option("--max-size", o.max_size, "Closure size limit")->capture_default_str();
            add_out(s, o);
        }
    }

    CLI::App* cover = app.add_subcommand("cover", "Covering relation between automata");
    cover->require_subcommand(1);
    {
        auto* s = leaf(cover, "check",
                       "Verify that a cascade (or automaton) covers a target under the supplied state map",
                       run_cover_check);
        s->add_option("--fsa", o.fsa_path, "Target automaton file, or builtin:<name>")->required();
        s->add_option("--cascade", o.cascade_path, "Covering cascade file with cover: lines");
        s->add_option("--cover-fsa", o.cover_fsa_path, "Covering automaton file with cover: lines");
        add_out(s, o);
    }

    CLI::App* cascade = app.add_subcommand("cascade", "Feedforward cascades");
    cascade->require_subcommand(1);
    {
        auto* s = leaf(cascade, "run", "Joint state sequence of a cascade on a word", run_cascade);
        s->add_option("--cascade", o.cascade_path, "Cascade file, or builtin:mixed_witness / builtin:delay_line")
            ->required();
        s->add_option("--q0", o.q0, "Initial joint state, e.g. (r0,p0)");
        s->add_option("--word", o.word, "Input word");
        add_out(s, o);
    }

    CLI::App* bridge = app.add_subcommand("bridge", "Hand-built one-block transformer emulating a reset automaton");
    bridge->require_subcommand(1);
    {
        auto add_spec = [&](CLI::App* s) {
            s->add_option("--beta", o.beta, "Reset bonus in the attention scores")->capture_default_str();
            s->add_option("--gamma", o.gamma, "Position slope in the attention scores")->capture_default_str();
            s->add_option("--resets", o.resets, "Reset symbols, symbol=state,...")->capture_default_str();
            s->add_option("--identity", o.identity, "Identity symbol")->capture_default_str();
            s->add_option("--states", o.states, "State labels, comma separated")->capture_default_str();
            s->add_option("--initial", o.initial, "Initial state")->capture_default_str();
            s->add_option("--max-len", o.max_len, "Longest supported input")->capture_default_str();
            add_out(s, o);
        };
        auto* s = leaf(bridge, "build", "Write the hand-set weights of the reset-automaton model", run_bridge_build);
        add_spec(s);
        s = leaf(bridge, "compare",
                 "Compare the model's decoded output positionwise with the automaton's state sequence",
                 run_bridge_compare);
        add_spec(s);
        s->add_option("--seed", o.seed, "Seed for random words")->capture_default_str();
        s->add_option("--words", o.words, "Random words")->capture_default_str();
        s->add_option("--max-word-len", o.max_word_len, "Longest random word")->capture_default_str();
        s->add_option("--exhaustive", o.exhaustive, "Also test every word up to this length")->capture_default_str();
        s->add_option("--model", o.model_path, "Compare a saved model instead of building one");
    }

    CLI::App* catalog = app.add_subcommand("catalog", "Shipped automata and covering witnesses");
    catalog->require_subcommand(1);
    {
        auto* s = leaf(catalog, "list", "List the catalog; with --out also write each entry as a file", run_catalog);
        add_out(s, o);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }
    if (!handler) {
        err << "no command given\n";
        return kExitUsage;
    }

    Context ctx{o, out, err, {}};
    ctx.manifest.set("tool", "tfa");
    ctx.manifest.set("version", kToolVersion);
    ctx.manifest.set("subcommand", chosen);
    ctx.manifest.set("seed", std::to_string(o.seed));
    try {
        const int code = handler(ctx);
        ctx.manifest.set("exit", std::to_string(code));
        ctx.finish();
        return code;
    } catch (const ClosureOverflow& e) {
        err << "error: " << e.what() << '\n';
        return kExitCheckFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace tfa::cli
