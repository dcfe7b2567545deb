#include "gtrw/gtrs.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace gtrw {

Gtrs::Gtrs(RankedAlphabet alphabet, std::set<std::string> actions,
           std::vector<Rule> rules)
    : alphabet_(std::move(alphabet)), actions_(std::move(actions)),
      rules_(std::move(rules)) {
    alphabet_.validate();
    for (const Rule& rule : rules_) {
        if (!actions_.count(rule.action))
            throw InputError("rule action '" + rule.action + "' not declared");
        for (const Tree* t : {&rule.lhs, &rule.rhs}) {
            std::function<void(const Tree&)> check = [&](const Tree& node) {
                if (!alphabet_.contains(node.symbol()) ||
                    alphabet_.rank(node.symbol()) != node.children().size())
                    throw InputError("rule tree not valid over the alphabet: " +
                                     to_string(*t));
                for (const Tree& c : node.children()) check(c);
            };
            check(*t);
        }
    }
}

std::size_t Gtrs::max_rule_size() const {
    std::size_t r = 0;
    for (const Rule& rule : rules_)
        r = std::max({r, rule.lhs.size(), rule.rhs.size()});
    return r;
}

void Gtrs::require_action(const std::string& a) const {
    if (!actions_.count(a)) throw InputError("unknown action '" + a + "'");
}

namespace {

void dedup_sort(std::vector<Tree>& v) {
    std::sort(v.begin(), v.end(), TreeLess{});
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Apply the replacement at every node where the subtree equals the pattern.
void scan_redexes(const Tree& t, const Tree& pattern, const Tree& replacement,
                  std::vector<Tree>& out) {
    std::function<void(const Tree&, NodePath&)> go = [&](const Tree& node,
                                                         NodePath& path) {
        if (node == pattern) out.push_back(replace(t, path, replacement));
        for (unsigned i = 1; i <= node.children().size(); ++i) {
            path.push_back(i);
            go(node.children()[i - 1], path);
            path.pop_back();
        }
    };
    NodePath path;
    go(t, path);
}

}  // namespace

std::vector<Tree> successors(const Gtrs& r, const Tree& t, const std::string& a) {
    r.require_action(a);
    std::vector<Tree> out;
    for (const Rule& rule : r.rules())
        if (rule.action == a) scan_redexes(t, rule.lhs, rule.rhs, out);
    dedup_sort(out);
    return out;
}

std::vector<Tree> predecessors(const Gtrs& r, const Tree& t, const std::string& a) {
    r.require_action(a);
    std::vector<Tree> out;
    for (const Rule& rule : r.rules())
        if (rule.action == a) scan_redexes(t, rule.rhs, rule.lhs, out);
    dedup_sort(out);
    return out;
}

bool has_edge(const Gtrs& r, const Tree& from, const std::string& a, const Tree& to) {
    r.require_action(a);
    if (from.size() + r.max_rule_size() < to.size() ||
        to.size() + r.max_rule_size() < from.size())
        return false;
    for (const Rule& rule : r.rules()) {
        if (rule.action != a) continue;
        bool found = false;
        std::function<void(const Tree&, NodePath&)> go = [&](const Tree& node,
                                                             NodePath& path) {
            if (found) return;
            if (node == rule.lhs && replace(from, path, rule.rhs) == to) {
                found = true;
                return;
            }
            for (unsigned i = 1; i <= node.children().size(); ++i) {
                path.push_back(i);
                go(node.children()[i - 1], path);
                path.pop_back();
            }
        };
        NodePath path;
        go(from, path);
        if (found) return true;
    }
    return false;
}

namespace {

void dedup_sort_strings(std::vector<TreeString>& out) {
    std::sort(out.begin(), out.end(), [](const TreeString& x, const TreeString& y) {
        return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end(),
                                            TreeLess{});
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

}  // namespace

std::vector<TreeString> step_word(const Gtrs& r, const TreeString& w,
                                  const std::string& a) {
    if (w.empty()) throw InputError("tree strings are non-empty");
    std::vector<TreeString> out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (const Tree& t : successors(r, w[i], a)) {
            TreeString next = w;
            next[i] = t;
            out.push_back(std::move(next));
        }
    }
    dedup_sort_strings(out);
    return out;
}

std::vector<TreeString> step_word_pred(const Gtrs& r, const TreeString& w,
                                       const std::string& a) {
    if (w.empty()) throw InputError("tree strings are non-empty");
    std::vector<TreeString> out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (const Tree& t : predecessors(r, w[i], a)) {
            TreeString next = w;
            next[i] = t;
            out.push_back(std::move(next));
        }
    }
    dedup_sort_strings(out);
    return out;
}

// ── Sphere construction ─────────────────────────────────────────────────────

namespace {

template <typename State, typename Hash, typename Render, typename Succ,
          typename Pred>
SphereStructure bfs_sphere(const Gtrs& r, const std::vector<State>& centers,
                           unsigned n, std::uint64_t node_budget, Hash hash,
                           Render render, Succ succ, Pred pred) {
    SphereStructure s;
    s.actions = r.actions();
    std::unordered_map<State, unsigned, Hash> index(16, hash);
    std::vector<State> states;
    std::deque<unsigned> queue;
    auto add = [&](const State& st, unsigned d) -> unsigned {
        auto it = index.find(st);
        if (it != index.end()) return it->second;
        if (states.size() >= node_budget)
            throw CapExceeded("sphere node budget exhausted", states.size());
        unsigned id = static_cast<unsigned>(states.size());
        index.emplace(st, id);
        states.push_back(st);
        s.node_names.push_back(render(st));
        s.dist.push_back(d);
        queue.push_back(id);
        return id;
    };
    for (const State& c : centers) s.centers.push_back(add(c, 0));
    while (!queue.empty()) {
        unsigned id = queue.front();
        queue.pop_front();
        unsigned d = s.dist[id];
        if (d == n) continue;
        State st = states[id];
        for (const std::string& a : r.actions()) {
            for (const State& nb : succ(st, a)) add(nb, d + 1);
            for (const State& nb : pred(st, a)) add(nb, d + 1);
        }
    }
    // Induced edges, discovered from the source side.
    for (unsigned id = 0; id < states.size(); ++id) {
        for (const std::string& a : r.actions()) {
            for (const State& nb : succ(states[id], a)) {
                auto it = index.find(nb);
                if (it != index.end()) s.edges.emplace_back(id, a, it->second);
            }
        }
    }
    return s;
}

struct TreeStringHash {
    std::size_t operator()(const TreeString& w) const {
        std::size_t h = 0x9e3779b97f4a7c15ULL;
        for (const Tree& t : w) h ^= t.hash() + 0x9e3779b9 + (h << 6) + (h >> 2);
        return h;
    }
};

}  // namespace

SphereStructure sphere(const Gtrs& r, const std::vector<Tree>& centers, unsigned n,
                       std::uint64_t node_budget) {
    if (centers.empty()) throw InputError("sphere needs at least one center");
    return bfs_sphere<Tree>(
        r, centers, n, node_budget, TreeHash{},
        [](const Tree& t) { return to_string(t); },
        [&](const Tree& t, const std::string& a) { return successors(r, t, a); },
        [&](const Tree& t, const std::string& a) { return predecessors(r, t, a); });
}

SphereStructure sphere_word(const Gtrs& r, const std::vector<TreeString>& centers,
                            unsigned n, std::uint64_t node_budget) {
    if (centers.empty()) throw InputError("sphere needs at least one center");
    return bfs_sphere<TreeString>(
        r, centers, n, node_budget, TreeStringHash{},
        [](const TreeString& w) { return to_string(w); },
        [&](const TreeString& w, const std::string& a) { return step_word(r, w, a); },
        [&](const TreeString& w, const std::string& a) {
            return step_word_pred(r, w, a);
        });
}

std::optional<unsigned> distance(const Gtrs& r, const Tree& s, const Tree& t,
                                 unsigned cap, std::uint64_t node_budget) {
    if (s == t) return 0;
    std::unordered_map<Tree, unsigned, TreeHash> dist;
    std::deque<Tree> queue;
    dist.emplace(s, 0);
    queue.push_back(s);
    while (!queue.empty()) {
        Tree cur = queue.front();
        queue.pop_front();
        unsigned d = dist.at(cur);
        if (d == cap) continue;
        for (const std::string& a : r.actions()) {
            for (auto dir : {0, 1}) {
                for (const Tree& nb :
                     dir == 0 ? successors(r, cur, a) : predecessors(r, cur, a)) {
                    if (dist.count(nb)) continue;
                    if (nb == t) return d + 1;
                    if (dist.size() >= node_budget)
                        throw CapExceeded("distance search budget exhausted",
                                          dist.size());
                    dist.emplace(nb, d + 1);
                    queue.push_back(nb);
                }
            }
        }
    }
    return std::nullopt;
}

// ── Sphere isomorphism ──────────────────────────────────────────────────────

namespace {

struct AdjEntry {
    std::vector<std::vector<unsigned>> out;  // per action
    std::vector<std::vector<unsigned>> in;
};

std::vector<AdjEntry> build_adj(const SphereStructure& s,
                                const std::vector<std::string>& actions) {
    std::unordered_map<std::string, std::size_t> aidx;
    for (std::size_t i = 0; i < actions.size(); ++i) aidx[actions[i]] = i;
    std::vector<AdjEntry> adj(s.node_count());
    for (auto& e : adj) {
        e.out.resize(actions.size());
        e.in.resize(actions.size());
    }
    for (const auto& [u, a, v] : s.edges) {
        std::size_t ai = aidx.at(a);
        adj[u].out[ai].push_back(v);
        adj[v].in[ai].push_back(u);
    }
    return adj;
}

}  // namespace

namespace {

// Joint color refinement (1-dimensional Weisfeiler-Leman): nodes of both
// spheres are recolored by their distance annotation and the multisets of
// neighbor colors per action and direction, until stable. Nodes that can
// correspond under an isomorphism always share a color, and the classes
// shrink the backtracking space to genuine symmetries.
std::vector<std::vector<std::uint64_t>> refine_colors(
    const SphereStructure& s1, const std::vector<AdjEntry>& adj1,
    const SphereStructure& s2, const std::vector<AdjEntry>& adj2,
    std::vector<std::uint64_t>& out1, std::vector<std::uint64_t>& out2) {
    std::size_t n1 = s1.node_count(), n2 = s2.node_count();
    out1.assign(n1, 0);
    out2.assign(n2, 0);
    for (std::size_t i = 0; i < n1; ++i) out1[i] = s1.dist[i];
    for (std::size_t i = 0; i < n2; ++i) out2[i] = s2.dist[i];
    // Centers are pinned: give center slot i a unique reserved color.
    for (std::size_t i = 0; i < s1.centers.size(); ++i) {
        out1[s1.centers[i]] = (1ULL << 32) + i;
        out2[s2.centers[i]] = (1ULL << 32) + i;
    }
    std::size_t colors = 0;
    for (std::size_t round = 0; round < n1 + 1; ++round) {
        std::map<std::vector<std::uint64_t>, std::uint64_t> palette;
        auto signature = [&](const std::vector<AdjEntry>& adj,
                             const std::vector<std::uint64_t>& col, unsigned v) {
            std::vector<std::uint64_t> sig{col[v]};
            for (std::size_t a = 0; a < adj[v].out.size(); ++a) {
                std::vector<std::uint64_t> outs, ins;
                for (unsigned w : adj[v].out[a]) outs.push_back(col[w]);
                for (unsigned w : adj[v].in[a]) ins.push_back(col[w]);
                std::sort(outs.begin(), outs.end());
                std::sort(ins.begin(), ins.end());
                sig.push_back(outs.size());
                sig.insert(sig.end(), outs.begin(), outs.end());
                sig.push_back(ins.size());
                sig.insert(sig.end(), ins.begin(), ins.end());
            }
            return sig;
        };
        std::vector<std::uint64_t> next1(n1), next2(n2);
        for (unsigned v = 0; v < n1; ++v) {
            auto sig = signature(adj1, out1, v);
            auto it = palette.find(sig);
            if (it == palette.end()) it = palette.emplace(sig, palette.size()).first;
            next1[v] = it->second;
        }
        for (unsigned v = 0; v < n2; ++v) {
            auto sig = signature(adj2, out2, v);
            auto it = palette.find(sig);
            if (it == palette.end()) it = palette.emplace(sig, palette.size()).first;
            next2[v] = it->second;
        }
        out1 = std::move(next1);
        out2 = std::move(next2);
        if (palette.size() == colors) break;
        colors = palette.size();
    }
    return {};
}

}  // namespace

std::optional<std::vector<unsigned>> find_iso(const SphereStructure& s1,
                                              const SphereStructure& s2) {
    if (s1.actions != s2.actions) return std::nullopt;
    if (s1.node_count() != s2.node_count()) return std::nullopt;
    if (s1.centers.size() != s2.centers.size()) return std::nullopt;
    if (s1.edges.size() != s2.edges.size()) return std::nullopt;

    std::vector<std::string> actions(s1.actions.begin(), s1.actions.end());
    std::vector<AdjEntry> adj1 = build_adj(s1, actions);
    std::vector<AdjEntry> adj2 = build_adj(s2, actions);
    std::size_t n = s1.node_count();
    std::vector<std::uint64_t> color1, color2;
    refine_colors(s1, adj1, s2, adj2, color1, color2);
    // Color class sizes must match.
    {
        std::map<std::uint64_t, int> c1, c2;
        for (auto c : color1) ++c1[c];
        for (auto c : color2) ++c2[c];
        if (c1 != c2) return std::nullopt;
    }
    std::vector<std::vector<std::uint64_t>> fp1(n), fp2(n);
    for (unsigned i = 0; i < n; ++i) {
        fp1[i] = {color1[i]};
        fp2[i] = {color2[i]};
    }

    constexpr unsigned kUnassigned = static_cast<unsigned>(-1);
    std::vector<unsigned> map1(n, kUnassigned), map2(n, kUnassigned);

    auto consistent = [&](unsigned u, unsigned v) -> bool {
        if (fp1[u] != fp2[v]) return false;
        for (std::size_t a = 0; a < actions.size(); ++a) {
            for (unsigned w : adj1[u].out[a]) {
                if (map1[w] == kUnassigned) continue;
                const auto& t = adj2[v].out[a];
                if (std::find(t.begin(), t.end(), map1[w]) == t.end()) return false;
            }
            for (unsigned w : adj1[u].in[a]) {
                if (map1[w] == kUnassigned) continue;
                const auto& t = adj2[v].in[a];
                if (std::find(t.begin(), t.end(), map1[w]) == t.end()) return false;
            }
            for (unsigned w : adj2[v].out[a]) {
                if (map2[w] == kUnassigned) continue;
                const auto& t = adj1[u].out[a];
                if (std::find(t.begin(), t.end(), map2[w]) == t.end()) return false;
            }
            for (unsigned w : adj2[v].in[a]) {
                if (map2[w] == kUnassigned) continue;
                const auto& t = adj1[u].in[a];
                if (std::find(t.begin(), t.end(), map2[w]) == t.end()) return false;
            }
        }
        return true;
    };

    auto assign = [&](unsigned u, unsigned v) {
        map1[u] = v;
        map2[v] = u;
    };
    auto unassign = [&](unsigned u, unsigned v) {
        map1[u] = kUnassigned;
        map2[v] = kUnassigned;
    };

    for (std::size_t i = 0; i < s1.centers.size(); ++i) {
        unsigned u = s1.centers[i], v = s2.centers[i];
        if (map1[u] != kUnassigned) {
            if (map1[u] != v) return std::nullopt;
            continue;
        }
        if (map2[v] != kUnassigned) return std::nullopt;
        if (!consistent(u, v)) return std::nullopt;
        assign(u, v);
    }

    // Assign along an undirected BFS from the centers, so every new node is
    // constrained by already-mapped neighbors; detached leftovers follow.
    std::vector<unsigned> order;
    {
        std::vector<char> seen(n, 0);
        std::deque<unsigned> queue;
        for (unsigned c : s1.centers)
            if (!seen[c]) {
                seen[c] = 1;
                queue.push_back(c);
            }
        while (!queue.empty()) {
            unsigned u = queue.front();
            queue.pop_front();
            if (map1[u] == kUnassigned) order.push_back(u);
            for (std::size_t a = 0; a < actions.size(); ++a) {
                for (unsigned w : adj1[u].out[a])
                    if (!seen[w]) {
                        seen[w] = 1;
                        queue.push_back(w);
                    }
                for (unsigned w : adj1[u].in[a])
                    if (!seen[w]) {
                        seen[w] = 1;
                        queue.push_back(w);
                    }
            }
        }
        for (unsigned u = 0; u < n; ++u)
            if (!seen[u] && map1[u] == kUnassigned) order.push_back(u);
    }

    std::function<bool(std::size_t)> solve = [&](std::size_t k) -> bool {
        if (k == order.size()) return true;
        unsigned u = order[k];
        for (unsigned v = 0; v < n; ++v) {
            if (map2[v] != kUnassigned) continue;
            if (!consistent(u, v)) continue;
            assign(u, v);
            if (solve(k + 1)) return true;
            unassign(u, v);
        }
        return false;
    };
    if (!solve(0)) return std::nullopt;
    return map1;
}

// ── Text formats ────────────────────────────────────────────────────────────

std::string SphereStructure::dump() const {
    std::ostringstream out;
    out << "nodes: " << node_count() << "\n";
    for (std::size_t i = 0; i < centers.size(); ++i)
        out << "center " << i << ": node " << centers[i] << "\n";
    for (std::size_t i = 0; i < node_count(); ++i)
        out << i << " dist=" << dist[i] << " " << node_names[i] << "\n";
    for (const auto& [u, a, v] : edges)
        out << u << " -" << a << "-> " << v << "\n";
    return out.str();
}

Gtrs parse_gtrs(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::set<std::string> actions;
    RankedAlphabet alphabet;
    std::vector<Rule> rules;
    bool saw_actions = false;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
        while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' ' ||
                                    trimmed.back() == '\t'))
            trimmed.pop_back();
        if (trimmed.empty()) continue;
        if (trimmed.rfind("actions:", 0) == 0) {
            std::istringstream ls(trimmed.substr(8));
            std::string a;
            while (ls >> a) actions.insert(a);
            saw_actions = true;
            continue;
        }
        if (trimmed.rfind("alphabet:", 0) == 0) {
            std::istringstream ls(trimmed.substr(9));
            std::string entry;
            while (ls >> entry) {
                auto slash = entry.find('/');
                if (slash == std::string::npos || slash == 0 ||
                    slash + 1 >= entry.size())
                    throw InputError("alphabet entry '" + entry + "' is not name/rank");
                alphabet.add(entry.substr(0, slash),
                             static_cast<unsigned>(std::stoul(entry.substr(slash + 1))));
            }
            continue;
        }
        auto arrow_start = trimmed.find(" -");
        auto arrow_end = trimmed.find("-> ", arrow_start);
        if (arrow_start == std::string::npos || arrow_end == std::string::npos)
            throw InputError("rule line without 'lhs -a-> rhs': " + line);
        std::string lhs_text = trimmed.substr(0, arrow_start);
        std::string action = trimmed.substr(arrow_start + 2, arrow_end - arrow_start - 2);
        std::string rhs_text = trimmed.substr(arrow_end + 3);
        action.erase(0, action.find_first_not_of(" \t"));
        action.erase(action.find_last_not_of(" \t") + 1);
        if (action.empty()) throw InputError("empty action in rule: " + line);
        Rule rule{parse_term(lhs_text), action, parse_term(rhs_text)};
        infer_alphabet(rule.lhs, alphabet);
        infer_alphabet(rule.rhs, alphabet);
        rules.push_back(std::move(rule));
    }
    if (!saw_actions) throw InputError("missing 'actions:' header");
    return Gtrs(std::move(alphabet), std::move(actions), std::move(rules));
}

std::string to_string(const Gtrs& r) {
    std::ostringstream out;
    out << "actions:";
    for (const std::string& a : r.actions()) out << ' ' << a;
    out << "\nalphabet:";
    for (const auto& [name, rank] : r.alphabet().arity())
        out << ' ' << name << '/' << rank;
    out << '\n';
    for (const Rule& rule : r.rules())
        out << to_string(rule.lhs) << " -" << rule.action << "-> "
            << to_string(rule.rhs) << '\n';
    return out.str();
}

}  // namespace gtrw
