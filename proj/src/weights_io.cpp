#include "tfa/weights_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tfa {

namespace {

constexpr const char* kMagic = "tfa-weights";
constexpr int kVersion = 1;

[[noreturn]] void fail(const std::string& message) {
    throw std::runtime_error("weights file: " + message);
}

double parse_double(const std::string& token) {
    double v = 0.0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail("bad number '" + token + "'");
    return v;
}

std::size_t parse_count(const std::string& token) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) fail("bad count '" + token + "'");
    return v;
}

void write_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
    out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? " " : "") << format_exact(row[c]);
        out << '\n';
    }
}

void write_vector(std::ostream& out, const std::string& name, const std::vector<double>& v) {
    out << "vector " << name << ' ' << v.size() << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << format_exact(v[i]);
    out << '\n';
}

std::vector<double> read_values(std::istream& in, std::size_t count, const std::string& name) {
    std::string line;
    if (!std::getline(in, line)) fail("truncated data for " + name);
    std::istringstream ls(line);
    std::vector<double> values;
    std::string tok;
    while (ls >> tok) values.push_back(parse_double(tok));
    if (values.size() != count)
        fail(name + ": expected " + std::to_string(count) + " values on line, got " + std::to_string(values.size()));
    return values;
}

ModelConfig parse_config(const std::string& line) {
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head != "config") fail("expected config line");
    std::map<std::string, std::string> kv;
    std::string k, v;
    while (ls >> k >> v) kv[k] = v;
    auto get = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) fail(std::string("config missing ") + key);
        return it->second;
    };
    ModelConfig cfg;
    cfg.vocab_size = parse_count(get("vocab_size"));
    cfg.d_model = parse_count(get("d_model"));
    cfg.n_layers = parse_count(get("n_layers"));
    cfg.d_mlp = parse_count(get("d_mlp"));
    cfg.max_len = parse_count(get("max_len"));
    cfg.mask_mode = parse_mask_mode(get("mask"));
    cfg.seed = parse_count(get("seed"));
    const std::string& scale = get("attn_scale");
    if (scale != "default") cfg.attn_scale = parse_double(scale);
    cfg.use_norm = get("use_norm") == "1";
    cfg.use_mlp = get("use_mlp") == "1";
    cfg.norm_eps = parse_double(get("norm_eps"));
    return cfg;
}

}  // namespace

std::string format_exact(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("format_exact: conversion failed");
    return std::string(buf, ptr);
}

void save_model(std::ostream& out, const ModelConfig& cfg, const ModelWeights& w,
                const std::vector<std::string>& vocab) {
    w.validate(cfg);
    if (!vocab.empty() && vocab.size() != cfg.vocab_size)
        throw std::invalid_argument("vocab labels do not match vocab_size");
    for (const auto& label : vocab)
        if (label.empty() || label.find_first_of(" \t\n") != std::string::npos)
            throw std::invalid_argument("vocab label '" + label + "' is empty or contains whitespace");
    out << kMagic << ' ' << kVersion << '\n';
    out << "config vocab_size " << cfg.vocab_size << " d_model " << cfg.d_model << " n_layers " << cfg.n_layers
        << " d_mlp " << cfg.d_mlp << " max_len " << cfg.max_len << " mask " << to_string(cfg.mask_mode)
        << " seed " << cfg.seed << " attn_scale " << (cfg.attn_scale ? format_exact(*cfg.attn_scale) : "default")
        << " use_norm " << (cfg.use_norm ? 1 : 0) << " use_mlp " << (cfg.use_mlp ? 1 : 0) << " norm_eps "
        << format_exact(cfg.norm_eps) << '\n';
    write_matrix(out, "token_embedding", w.token_embedding);
    write_matrix(out, "position_encoding", w.position_encoding);
    for (std::size_t i = 0; i < w.layers.size(); ++i) {
        const auto& l = w.layers[i];
        const std::string p = "layer." + std::to_string(i) + ".";
        write_matrix(out, p + "wq", l.wq);
        write_matrix(out, p + "wk", l.wk);
        write_matrix(out, p + "wv", l.wv);
        write_matrix(out, p + "wo", l.wo);
        write_matrix(out, p + "w1", l.w1);
        write_matrix(out, p + "w2", l.w2);
        write_vector(out, p + "ln1_gain", l.ln1_gain);
        write_vector(out, p + "ln1_bias", l.ln1_bias);
        write_vector(out, p + "ln2_gain", l.ln2_gain);
        write_vector(out, p + "ln2_bias", l.ln2_bias);
    }
    write_vector(out, "final_gain", w.final_gain);
    write_vector(out, "final_bias", w.final_bias);
    write_matrix(out, "unembedding", w.unembedding);
    if (!vocab.empty()) {
        out << "vocab " << vocab.size() << '\n';
        for (std::size_t i = 0; i < vocab.size(); ++i) out << (i ? " " : "") << vocab[i];
        out << '\n';
    }
    out << "end\n";
}

StoredModel load_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail("empty input");
    {
        std::istringstream ls(line);
        std::string magic;
        int version = 0;
        ls >> magic >> version;
        if (magic != kMagic || version != kVersion) fail("unrecognised header '" + line + "'");
    }
    if (!std::getline(in, line)) fail("missing config line");
    StoredModel model;
    model.config = parse_config(line);

    std::map<std::string, Matrix> matrices;
    std::map<std::string, std::vector<double>> vectors;
    bool ended = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string kind, name;
        ls >> kind;
        if (kind == "end") {
            ended = true;
            break;
        }
        ls >> name;
        if (kind == "vocab") {
            const std::size_t n = parse_count(name);
            if (!std::getline(in, line)) fail("truncated vocab");
            std::istringstream vs(line);
            std::string label;
            while (vs >> label) model.vocab.push_back(label);
            if (model.vocab.size() != n) fail("vocab count mismatch");
            continue;
        }
        if (kind == "matrix") {
            std::string r, c;
            ls >> r >> c;
            const std::size_t rows = parse_count(r), cols = parse_count(c);
            Matrix m(rows, cols);
            for (std::size_t i = 0; i < rows; ++i) {
                auto vals = read_values(in, cols, name);
                std::copy(vals.begin(), vals.end(), m.row(i).begin());
            }
            matrices[name] = std::move(m);
        } else if (kind == "vector") {
            std::string n;
            ls >> n;
            vectors[name] = read_values(in, parse_count(n), name);
        } else {
            fail("unexpected record '" + kind + "'");
        }
    }
    if (!ended) fail("missing end marker");

    auto take_matrix = [&](const std::string& name) {
        auto it = matrices.find(name);
        if (it == matrices.end()) fail("missing matrix " + name);
        return std::move(it->second);
    };
    auto take_vector = [&](const std::string& name) {
        auto it = vectors.find(name);
        if (it == vectors.end()) fail("missing vector " + name);
        return std::move(it->second);
    };

    ModelWeights& w = model.weights;
    w.token_embedding = take_matrix("token_embedding");
    w.position_encoding = take_matrix("position_encoding");
    for (std::size_t i = 0; i < model.config.n_layers; ++i) {
        const std::string p = "layer." + std::to_string(i) + ".";
        LayerWeights l;
        l.wq = take_matrix(p + "wq");
        l.wk = take_matrix(p + "wk");
        l.wv = take_matrix(p + "wv");
        l.wo = take_matrix(p + "wo");
        l.w1 = take_matrix(p + "w1");
        l.w2 = take_matrix(p + "w2");
        l.ln1_gain = take_vector(p + "ln1_gain");
        l.ln1_bias = take_vector(p + "ln1_bias");
        l.ln2_gain = take_vector(p + "ln2_gain");
        l.ln2_bias = take_vector(p + "ln2_bias");
        w.layers.push_back(std::move(l));
    }
    w.final_gain = take_vector("final_gain");
    w.final_bias = take_vector("final_bias");
    w.unembedding = take_matrix("unembedding");
    if (!model.vocab.empty() && model.vocab.size() != model.config.vocab_size) fail("vocab labels do not match vocab_size");
    try {
        w.validate(model.config);
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    return model;
}

void save_model_file(const std::string& path, const ModelConfig& cfg, const ModelWeights& w,
                     const std::vector<std::string>& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    save_model(out, cfg, w, vocab);
}

StoredModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_model(in);
}

}  // namespace tfa
