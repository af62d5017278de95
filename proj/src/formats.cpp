#include "tfa/formats.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace tfa {

namespace {

struct Line {
    std::size_t number;
    std::string key;   // text before the first ':'
    std::string rest;  // text after it
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

std::vector<Line> split_lines(const std::string& text) {
    std::vector<Line> lines;
    std::istringstream in(text);
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        raw = trim(raw);
        if (raw.empty()) continue;
        const auto colon = raw.find(':');
        if (colon == std::string::npos) throw FormatError(number, "expected 'key: values'");
        lines.push_back({number, trim(raw.substr(0, colon)), trim(raw.substr(colon + 1))});
    }
    return lines;
}

std::pair<std::string, std::string> parse_cover(const Line& line) {
    const auto arrow = line.rest.find("->");
    if (arrow == std::string::npos) throw FormatError(line.number, "cover line needs 'from -> to'");
    std::string from = trim(line.rest.substr(0, arrow));
    std::string to = trim(line.rest.substr(arrow + 2));
    from.erase(std::remove(from.begin(), from.end(), ' '), from.end());
    if (from.empty() || to.empty()) throw FormatError(line.number, "cover line has an empty side");
    return {from, to};
}

std::size_t index_of(const std::vector<std::string>& labels, const std::string& label, std::size_t line,
                     const char* what) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw FormatError(line, std::string("unknown ") + what + " '" + label + "'");
    return static_cast<std::size_t>(it - labels.begin());
}

void check_unique(const std::vector<std::string>& labels, std::size_t line, const char* what) {
    std::vector<std::string> sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw FormatError(line, std::string("duplicate ") + what);
    if (labels.empty()) throw FormatError(line, std::string("empty ") + what + " list");
}

std::string join(const std::vector<std::string>& parts) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? " " : "") + parts[i];
    return s;
}

}  // namespace

FormatError::FormatError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

FsaDocument parse_fsa(const std::string& text) {
    std::optional<std::vector<std::string>> states, alphabet;
    std::vector<Line> rows;
    CoverPairs cover;
    std::size_t last_line = 0;
    for (const Line& line : split_lines(text)) {
        last_line = line.number;
        if (line.key == "states") {
            if (states) throw FormatError(line.number, "states given twice");
            states = words(line.rest);
            check_unique(*states, line.number, "states");
        } else if (line.key == "alphabet") {
            if (alphabet) throw FormatError(line.number, "alphabet given twice");
            alphabet = words(line.rest);
            check_unique(*alphabet, line.number, "alphabet symbols");
        } else if (line.key == "cover") {
            cover.push_back(parse_cover(line));
        } else {
            rows.push_back(line);
        }
    }
    if (!states) throw FormatError(last_line, "missing 'states:' line");
    if (!alphabet) throw FormatError(last_line, "missing 'alphabet:' line");

    std::vector<std::optional<std::vector<std::size_t>>> delta(alphabet->size());
    for (const Line& row : rows) {
        const std::size_t sym = index_of(*alphabet, row.key, row.number, "symbol");
        if (delta[sym]) throw FormatError(row.number, "duplicate row for symbol '" + row.key + "'");
        const auto targets = words(row.rest);
        if (targets.size() != states->size())
            throw FormatError(row.number, "row for '" + row.key + "' has " + std::to_string(targets.size()) +
                                              " entries, expected " + std::to_string(states->size()));
        std::vector<std::size_t> r;
        for (const auto& t : targets) r.push_back(index_of(*states, t, row.number, "state"));
        delta[sym] = std::move(r);
    }
    std::vector<std::vector<std::size_t>> table;
    for (std::size_t s = 0; s < delta.size(); ++s) {
        if (!delta[s]) throw FormatError(last_line, "incomplete table: no row for symbol '" + (*alphabet)[s] + "'");
        table.push_back(std::move(*delta[s]));
    }
    return {Fsa(std::move(*alphabet), std::move(*states), std::move(table)), std::move(cover)};
}

std::string write_fsa(const Fsa& a, const CoverPairs& cover) {
    std::ostringstream out;
    out << "states: " << join(a.states()) << '\n';
    out << "alphabet: " << join(a.alphabet()) << '\n';
    for (std::size_t s = 0; s < a.num_symbols(); ++s) {
        out << a.alphabet()[s] << ':';
        for (std::size_t q = 0; q < a.num_states(); ++q) out << ' ' << a.states()[a.step(s, q)];
        out << '\n';
    }
    for (const auto& [from, to] : cover) out << "cover: " << from << " -> " << to << '\n';
    return out.str();
}

CascadeDocument parse_cascade(const std::string& text) {
    struct Section {
        std::size_t header_line;
        std::string name;
        std::optional<std::vector<std::string>> states;
        std::vector<Line> rows;
    };
    std::optional<std::vector<std::string>> alphabet;
    std::vector<Section> sections;
    CoverPairs cover;
    for (const Line& line : split_lines(text)) {
        const auto key_words = words(line.key);
        if (line.key == "alphabet") {
            if (alphabet) throw FormatError(line.number, "alphabet given twice");
            alphabet = words(line.rest);
            check_unique(*alphabet, line.number, "alphabet symbols");
        } else if (line.key == "cover") {
            cover.push_back(parse_cover(line));
        } else if (!key_words.empty() && key_words[0] == "component") {
            if (key_words.size() < 2 || key_words[1] != std::to_string(sections.size()))
                throw FormatError(line.number, "expected 'component " + std::to_string(sections.size()) + "'");
            std::string name = key_words.size() > 2 ? key_words[2] : "c" + key_words[1];
            sections.push_back({line.number, std::move(name), std::nullopt, {}});
        } else if (line.key == "states") {
            if (sections.empty()) throw FormatError(line.number, "states line outside a component section");
            if (sections.back().states) throw FormatError(line.number, "states given twice for component");
            sections.back().states = words(line.rest);
            check_unique(*sections.back().states, line.number, "states");
        } else {
            if (sections.empty()) throw FormatError(line.number, "transition row outside a component section");
            sections.back().rows.push_back(line);
        }
    }
    if (!alphabet) throw FormatError(0, "missing 'alphabet:' line");

    std::vector<CascadeComponent> components;
    std::vector<std::size_t> upstream_sizes;
    for (std::size_t k = 0; k < sections.size(); ++k) {
        Section& sec = sections[k];
        if (!sec.states) throw FormatError(sec.header_line, "component " + std::to_string(k) + " has no states line");
        const auto& own = *sec.states;
        std::size_t upstream_total = 1;
        for (std::size_t s : upstream_sizes) upstream_total *= s;
        const std::size_t width = own.size();
        std::vector<std::optional<std::size_t>> table(alphabet->size() * upstream_total * width);

        for (const Line& row : sec.rows) {
            const auto cols = words(row.key);
            if (cols.size() != k + 1)
                throw FormatError(row.number, "row key needs a symbol and " + std::to_string(k) + " upstream states");
            const std::size_t sym = index_of(*alphabet, cols[0], row.number, "symbol");
            std::size_t up = 0;
            for (std::size_t i = 0; i < k; ++i)
                up = up * upstream_sizes[i] + index_of(*sections[i].states, cols[i + 1], row.number, "upstream state");
            const auto targets = words(row.rest);
            if (targets.size() != width)
                throw FormatError(row.number, "row has " + std::to_string(targets.size()) + " entries, expected " +
                                                  std::to_string(width));
            const std::size_t base = (sym * upstream_total + up) * width;
            if (table[base]) throw FormatError(row.number, "duplicate row '" + row.key + "'");
            for (std::size_t q = 0; q < width; ++q) table[base + q] = index_of(own, targets[q], row.number, "state");
        }
        CascadeComponent comp{sec.name, own, {}};
        for (std::size_t i = 0; i < table.size(); ++i) {
            if (!table[i]) {
                const std::size_t combo = i / width;
                throw FormatError(sec.header_line, "component " + std::to_string(k) + " is missing a row for symbol '" +
                                                       (*alphabet)[combo / upstream_total] + "' (upstream combination " +
                                                       std::to_string(combo % upstream_total) + ")");
            }
            comp.table.push_back(*table[i]);
        }
        components.push_back(std::move(comp));
        upstream_sizes.push_back(width);
    }
    return {Cascade(std::move(*alphabet), std::move(components)), std::move(cover)};
}

std::string write_cascade(const Cascade& c, const CoverPairs& cover) {
    std::ostringstream out;
    out << "alphabet: " << join(c.alphabet()) << '\n';
    for (std::size_t k = 0; k < c.size(); ++k) {
        const auto& comp = c.components()[k];
        out << "component " << k << ' ' << comp.name << ":\n";
        out << "states: " << join(comp.states) << '\n';
        const std::size_t ups = c.upstream_count(k);
        for (std::size_t s = 0; s < c.alphabet().size(); ++s) {
            for (std::size_t u = 0; u < ups; ++u) {
                out << c.alphabet()[s];
                // decode upstream combination, component 0 most significant
                std::vector<std::size_t> up(k);
                std::size_t rest = u;
                for (std::size_t i = k; i-- > 0;) {
                    up[i] = rest % c.components()[i].states.size();
                    rest /= c.components()[i].states.size();
                }
                for (std::size_t i = 0; i < k; ++i) out << ' ' << c.components()[i].states[up[i]];
                out << ':';
                for (std::size_t q = 0; q < comp.states.size(); ++q)
                    out << ' ' << comp.states[c.next_state(k, s, u, q)];
                out << '\n';
            }
        }
    }
    for (const auto& [from, to] : cover) out << "cover: " << from << " -> " << to << '\n';
    return out.str();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace tfa
