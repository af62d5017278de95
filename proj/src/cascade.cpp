#include "tfa/cascade.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace tfa {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

Cascade::Cascade(std::vector<std::string> alphabet, std::vector<CascadeComponent> components)
    : alphabet_(std::move(alphabet)), components_(std::move(components)) {
    std::set<std::string> seen(alphabet_.begin(), alphabet_.end());
    require(seen.size() == alphabet_.size(), "cascade alphabet has duplicate symbols");
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const auto& comp = components_[k];
        const std::string where = "cascade component " + std::to_string(k);
        require(!comp.states.empty(), where + " has no states");
        std::set<std::string> labels(comp.states.begin(), comp.states.end());
        require(labels.size() == comp.states.size(), where + " has duplicate state labels");
        const std::size_t expected = alphabet_.size() * upstream_count(k) * comp.states.size();
        require(comp.table.size() == expected, where + " table has " + std::to_string(comp.table.size()) +
                                                   " entries, expected " + std::to_string(expected));
        for (std::size_t q : comp.table) require(q < comp.states.size(), where + " table targets unknown state");
    }
}

std::size_t Cascade::upstream_count(std::size_t k) const {
    std::size_t n = 1;
    for (std::size_t i = 0; i < k; ++i) n *= components_[i].states.size();
    return n;
}

std::size_t Cascade::upstream_index(std::size_t k, std::span<const std::size_t> joint) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < k; ++i) idx = idx * components_[i].states.size() + joint[i];
    return idx;
}

std::size_t Cascade::next_state(std::size_t k, std::size_t symbol, std::size_t upstream, std::size_t own) const {
    const auto& comp = components_[k];
    return comp.table[(symbol * upstream_count(k) + upstream) * comp.states.size() + own];
}

std::size_t Cascade::joint_count() const { return upstream_count(components_.size()); }

std::size_t Cascade::joint_index(std::span<const std::size_t> joint) const {
    return upstream_index(components_.size(), joint);
}

JointState Cascade::joint_from_index(std::size_t index) const {
    JointState joint(components_.size());
    for (std::size_t i = components_.size(); i-- > 0;) {
        joint[i] = index % components_[i].states.size();
        index /= components_[i].states.size();
    }
    return joint;
}

std::string Cascade::joint_label(std::span<const std::size_t> joint) const {
    std::string s = "(";
    for (std::size_t i = 0; i < joint.size(); ++i) s += (i ? "," : "") + components_[i].states.at(joint[i]);
    return s + ")";
}

JointState Cascade::parse_joint(std::string_view text) const {
    std::string body(text);
    if (!body.empty() && body.front() == '(') body.erase(0, 1);
    if (!body.empty() && body.back() == ')') body.pop_back();
    std::vector<std::string> parts;
    std::size_t start = 0;
    if (!body.empty()) {
        while (true) {
            const std::size_t comma = body.find(',', start);
            parts.push_back(body.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    require(parts.size() == components_.size(), "joint state '" + std::string(text) + "' has " +
                                                    std::to_string(parts.size()) + " parts for " +
                                                    std::to_string(components_.size()) + " components");
    JointState joint(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& st = components_[i].states;
        auto it = std::find(st.begin(), st.end(), parts[i]);
        require(it != st.end(), "unknown state '" + parts[i] + "' for component " + std::to_string(i));
        joint[i] = static_cast<std::size_t>(it - st.begin());
    }
    return joint;
}

std::size_t Cascade::symbol_index(std::string_view label) const {
    auto it = std::find(alphabet_.begin(), alphabet_.end(), label);
    require(it != alphabet_.end(), "unknown symbol '" + std::string(label) + "'");
    return static_cast<std::size_t>(it - alphabet_.begin());
}

JointState cascade_step(const Cascade& c, std::span<const std::size_t> joint, std::size_t symbol) {
    require(joint.size() == c.size(), "joint state has " + std::to_string(joint.size()) + " entries for " +
                                          std::to_string(c.size()) + " components");
    for (std::size_t k = 0; k < c.size(); ++k)
        require(joint[k] < c.components()[k].states.size(),
                "joint state entry " + std::to_string(k) + " is not a state of that component");
    require(symbol < c.alphabet().size(), "unknown symbol index " + std::to_string(symbol));
    JointState next(c.size());
    for (std::size_t k = 0; k < c.size(); ++k)
        next[k] = c.next_state(k, symbol, c.upstream_index(k, joint), joint[k]);
    return next;
}

std::vector<JointState> cascade_state_sequence(const Cascade& c, std::span<const std::size_t> q0,
                                               std::span<const std::size_t> word) {
    std::vector<JointState> out;
    out.reserve(word.size());
    JointState q(q0.begin(), q0.end());
    for (std::size_t s : word) {
        q = cascade_step(c, q, s);
        out.push_back(q);
    }
    return out;
}

Fsa flatten(const Cascade& c) {
    const std::size_t n = c.joint_count();
    std::vector<std::string> states;
    states.reserve(n);
    for (std::size_t i = 0; i < n; ++i) states.push_back(c.joint_label(c.joint_from_index(i)));
    std::vector<std::vector<std::size_t>> delta(c.alphabet().size(), std::vector<std::size_t>(n));
    for (std::size_t s = 0; s < c.alphabet().size(); ++s)
        for (std::size_t i = 0; i < n; ++i) delta[s][i] = c.joint_index(cascade_step(c, c.joint_from_index(i), s));
    return Fsa(c.alphabet(), std::move(states), std::move(delta));
}

SymbolKind component_kind(const Cascade& c, std::size_t k) {
    require(k < c.size(), "no component " + std::to_string(k));
    const std::size_t own = c.components()[k].states.size();
    bool all_reset = true, all_perm = true;
    for (std::size_t s = 0; s < c.alphabet().size(); ++s) {
        for (std::size_t u = 0; u < c.upstream_count(k); ++u) {
            Transformation t;
            for (std::size_t q = 0; q < own; ++q) t.image.push_back(c.next_state(k, s, u, q));
            const SymbolClass cls = classify(t);
            all_reset = all_reset && cls.is_reset;
            all_perm = all_perm && cls.is_permutation;
        }
    }
    if (all_reset) return SymbolKind::Reset;
    if (all_perm) return SymbolKind::Permutation;
    return SymbolKind::Mixed;
}

CoveringResult check_covering(const Fsa& y, const Fsa& x, const CoveringMap& phi) {
    {
        std::set<std::string> ys(y.alphabet().begin(), y.alphabet().end());
        std::set<std::string> xs(x.alphabet().begin(), x.alphabet().end());
        require(ys == xs, "covering needs identical alphabets");
    }
    require(phi.image.size() == y.num_states(), "covering map has " + std::to_string(phi.image.size()) +
                                                    " entries for " + std::to_string(y.num_states()) + " states");
    for (const auto& v : phi.image)
        require(!v || *v < x.num_states(), "covering map targets an unknown state");

    CoveringResult r;
    std::vector<bool> hit(x.num_states(), false);
    for (const auto& v : phi.image)
        if (v) hit[*v] = true;
    for (std::size_t q = 0; q < hit.size(); ++q) {
        if (!hit[q]) {
            r.missing_target = q;
            return r;
        }
    }
    r.surjective = true;

    for (std::size_t sy = 0; sy < y.num_symbols(); ++sy) {
        const std::size_t sx = x.symbol_index(y.alphabet()[sy]);
        for (std::size_t q = 0; q < y.num_states(); ++q) {
            if (!phi.image[q]) continue;
            const std::size_t moved = y.step(sy, q);
            if (!phi.image[moved]) {
                r.counterexample = CoveringCounterexample{sy, q, "successor " + y.states()[moved] + " is outside the domain"};
                return r;
            }
            const std::size_t lhs = *phi.image[moved];
            const std::size_t rhs = x.step(sx, *phi.image[q]);
            if (lhs != rhs) {
                r.counterexample = CoveringCounterexample{
                    sy, q, "phi(delta_Y) = " + x.states()[lhs] + " but delta_X(phi) = " + x.states()[rhs]};
                return r;
            }
        }
    }
    r.covers = true;
    return r;
}

CoveringMap compose(const CoveringMap& first, const CoveringMap& second) {
    CoveringMap out;
    out.image.reserve(first.image.size());
    for (const auto& v : first.image) {
        if (v) require(*v < second.image.size(), "covering maps do not chain");
        out.image.push_back(v ? second.image[*v] : std::nullopt);
    }
    return out;
}

CoveringMap identity_cover(std::size_t n) {
    CoveringMap m;
    for (std::size_t q = 0; q < n; ++q) m.image.emplace_back(q);
    return m;
}

CoveringMap product_projection_first(std::size_t nx, std::size_t ny) {
    CoveringMap m;
    for (std::size_t i = 0; i < nx * ny; ++i) m.image.emplace_back(i / ny);
    return m;
}

CoveringMap product_projection_second(std::size_t nx, std::size_t ny) {
    CoveringMap m;
    for (std::size_t i = 0; i < nx * ny; ++i) m.image.emplace_back(i % ny);
    return m;
}

CoveringMap cover_from_labels(const Fsa& y, const Fsa& x, const std::vector<std::pair<std::string, std::string>>& pairs) {
    CoveringMap m;
    m.image.assign(y.num_states(), std::nullopt);
    for (const auto& [from, to] : pairs) {
        const std::size_t q = y.state_index(from);
        require(!m.image[q], "covering map assigns state '" + from + "' twice");
        m.image[q] = x.state_index(to);
    }
    return m;
}

std::string describe(const CoveringResult& r, const Fsa& y, const Fsa& x) {
    if (r.covers) return "covers";
    if (!r.surjective) return "not surjective: no state maps to " + x.states()[*r.missing_target];
    const auto& ce = *r.counterexample;
    return "fails at symbol " + y.alphabet()[ce.symbol] + ", state " + y.states()[ce.y_state] + ": " + ce.reason;
}

}  // namespace tfa
