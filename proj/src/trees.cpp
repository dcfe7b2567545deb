#include "gtrw/trees.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace gtrw {

// ── RankedAlphabet ──────────────────────────────────────────────────────────

RankedAlphabet::RankedAlphabet(std::map<std::string, unsigned> arity)
    : arity_(std::move(arity)) {}

void RankedAlphabet::add(const std::string& symbol, unsigned rank) {
    auto it = arity_.find(symbol);
    if (it != arity_.end() && it->second != rank)
        throw InputError("symbol '" + symbol + "' declared with ranks " +
                         std::to_string(it->second) + " and " + std::to_string(rank));
    arity_[symbol] = rank;
}

bool RankedAlphabet::contains(const std::string& symbol) const {
    return arity_.count(symbol) != 0;
}

unsigned RankedAlphabet::rank(const std::string& symbol) const {
    auto it = arity_.find(symbol);
    if (it == arity_.end()) throw InputError("unknown symbol '" + symbol + "'");
    return it->second;
}

std::vector<std::string> RankedAlphabet::symbols_of_rank(unsigned r) const {
    std::vector<std::string> out;
    for (const auto& [name, rank] : arity_)
        if (rank == r) out.push_back(name);
    return out;
}

std::set<unsigned> RankedAlphabet::ranks() const {
    std::set<unsigned> out;
    for (const auto& [name, rank] : arity_)
        if (rank >= 1) out.insert(rank);
    return out;
}

unsigned RankedAlphabet::max_rank() const {
    unsigned p = 0;
    for (const auto& [name, rank] : arity_) p = std::max(p, rank);
    return p;
}

bool RankedAlphabet::has_rank(unsigned r) const {
    for (const auto& [name, rank] : arity_)
        if (rank == r) return true;
    return false;
}

void RankedAlphabet::validate() const {
    if (!has_rank(0)) throw InputError("ranked alphabet needs a symbol of rank 0");
}

// ── Tree ────────────────────────────────────────────────────────────────────

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

}  // namespace

Tree Tree::make(std::string symbol, std::vector<Tree> children) {
    auto node = std::make_shared<TreeNode>();
    node->symbol = std::move(symbol);
    node->children = std::move(children);
    std::size_t count = 1;
    std::size_t h = std::hash<std::string>{}(node->symbol);
    for (const Tree& c : node->children) {
        if (!c.valid()) throw InputError("null child tree");
        count += c.size();
        h = mix(h, c.hash());
    }
    node->node_count = count;
    node->hash = h;
    Tree t;
    t.node_ = std::move(node);
    return t;
}

bool operator==(const Tree& a, const Tree& b) {
    if (a.node_ == b.node_) return true;
    if (!a.node_ || !b.node_) return false;
    if (a.hash() != b.hash() || a.size() != b.size()) return false;
    if (a.symbol() != b.symbol()) return false;
    const auto& ca = a.children();
    const auto& cb = b.children();
    if (ca.size() != cb.size()) return false;
    for (std::size_t i = 0; i < ca.size(); ++i)
        if (!(ca[i] == cb[i])) return false;
    return true;
}

int compare(const Tree& a, const Tree& b) {
    if (a == b) return 0;
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    if (int c = a.symbol().compare(b.symbol()); c != 0) return c < 0 ? -1 : 1;
    const auto& ca = a.children();
    const auto& cb = b.children();
    if (ca.size() != cb.size()) return ca.size() < cb.size() ? -1 : 1;
    for (std::size_t i = 0; i < ca.size(); ++i)
        if (int c = compare(ca[i], cb[i]); c != 0) return c;
    return 0;
}

std::string path_to_string(const NodePath& p) {
    if (p.empty()) return "eps";
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) out += '.';
        out += std::to_string(p[i]);
    }
    return out;
}

bool path_lex_less(const NodePath& a, const NodePath& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::size_t norm(const TreeString& w) {
    std::size_t s = 0;
    for (const Tree& t : w) s += t.size();
    return s;
}

std::string to_string(const Tree& t) {
    std::string out = t.symbol();
    if (!t.children().empty()) {
        out += '(';
        for (std::size_t i = 0; i < t.children().size(); ++i) {
            if (i) out += ',';
            out += to_string(t.children()[i]);
        }
        out += ')';
    }
    return out;
}

std::string to_string(const TreeString& w) {
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out += ' ';
        out += to_string(w[i]);
    }
    return out;
}

// ── Structural operations ───────────────────────────────────────────────────

std::size_t tree_size(const Tree& t) { return t.size(); }

std::size_t leaf_count(const Tree& t) {
    if (t.children().empty()) return 1;
    std::size_t n = 0;
    for (const Tree& c : t.children()) n += leaf_count(c);
    return n;
}

Tree subtree(const Tree& t, const NodePath& x) {
    Tree cur = t;
    for (unsigned i : x) {
        if (i == 0 || i > cur.children().size())
            throw InputError("node " + path_to_string(x) + " not in domain");
        cur = cur.children()[i - 1];
    }
    return cur;
}

Tree replace(const Tree& t, const NodePath& x, const Tree& s) {
    std::function<Tree(const Tree&, std::size_t)> go = [&](const Tree& cur,
                                                           std::size_t depth) -> Tree {
        if (depth == x.size()) return s;
        unsigned i = x[depth];
        if (i == 0 || i > cur.children().size())
            throw InputError("node " + path_to_string(x) + " not in domain");
        std::vector<Tree> kids = cur.children();
        kids[i - 1] = go(kids[i - 1], depth + 1);
        return Tree::make(cur.symbol(), std::move(kids));
    };
    return go(t, 0);
}

std::size_t diff(const Tree& s, const Tree& t) {
    // Nodes of s whose address is missing from D_t.
    std::function<std::size_t(const Tree&, const Tree&)> go =
        [&](const Tree& a, const Tree& b) -> std::size_t {
        std::size_t d = 0;
        const auto& ca = a.children();
        const auto& cb = b.children();
        for (std::size_t i = 0; i < ca.size(); ++i) {
            if (i < cb.size())
                d += go(ca[i], cb[i]);
            else
                d += ca[i].size();
        }
        return d;
    };
    return go(s, t);
}

namespace {

void collect_domain(const Tree& t, NodePath& cur, std::vector<NodePath>& out) {
    out.push_back(cur);
    for (unsigned i = 1; i <= t.children().size(); ++i) {
        cur.push_back(i);
        collect_domain(t.children()[i - 1], cur, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<NodePath> domain(const Tree& t) {
    std::vector<NodePath> out;
    NodePath cur;
    collect_domain(t, cur, out);
    std::sort(out.begin(), out.end(), path_lex_less);
    return out;
}

std::vector<NodePath> up(const Tree& t, std::size_t n) {
    std::vector<NodePath> out;
    NodePath cur;
    std::function<void(const Tree&)> go = [&](const Tree& node) {
        if (node.size() <= n) return;  // children are smaller still
        out.push_back(cur);
        for (unsigned i = 1; i <= node.children().size(); ++i) {
            cur.push_back(i);
            go(node.children()[i - 1]);
            cur.pop_back();
        }
    };
    go(t);
    std::sort(out.begin(), out.end(), path_lex_less);
    return out;
}

TreeString cut(const Tree& t, const std::vector<NodePath>& c) {
    if (c.empty()) return {t};
    std::set<NodePath> cs(c.begin(), c.end());
    // Validate: prefix-closed and inside the domain.
    for (const NodePath& p : cs) {
        try {
            (void)subtree(t, p);
        } catch (const InputError&) {
            throw InputError("cut set contains node " + path_to_string(p) +
                             " outside the domain");
        }
        if (!p.empty()) {
            NodePath parent(p.begin(), p.end() - 1);
            if (!cs.count(parent))
                throw InputError("cut set not prefix-closed at " + path_to_string(p));
        }
    }
    TreeString out;
    NodePath cur;
    std::function<void(const Tree&)> go = [&](const Tree& node) {
        if (!cs.count(cur)) {
            out.push_back(node);  // maximal remaining subtree, in DFS = lex order
            return;
        }
        for (unsigned i = 1; i <= node.children().size(); ++i) {
            cur.push_back(i);
            go(node.children()[i - 1]);
            cur.pop_back();
        }
    };
    go(t);
    return out;
}

bool is_chain(const Tree& t) {
    if (t.children().empty()) return false;
    std::function<bool(const Tree&)> go = [&](const Tree& node) -> bool {
        std::size_t internal_kids = 0;
        for (const Tree& c : node.children()) {
            if (!c.children().empty()) {
                ++internal_kids;
                if (!go(c)) return false;
            }
        }
        return internal_kids <= 1;
    };
    return go(t);
}

// ── Leaf-count arithmetic ───────────────────────────────────────────────────

namespace {

// Smallest multiset {d_m} with n - 1 = sum d_m (m - 1); empty result for
// n = 1. Returns nullopt when n is not in M.
std::optional<std::map<unsigned, std::uint64_t>> leaf_decomposition(
    const RankedAlphabet& a, std::uint64_t n) {
    if (n == 0) return std::nullopt;
    std::vector<unsigned> coins;  // m - 1 for each rank m >= 2
    for (unsigned m : a.ranks())
        if (m >= 2) coins.push_back(m - 1);
    std::uint64_t target = n - 1;
    if (target == 0) return std::map<unsigned, std::uint64_t>{};
    if (coins.empty()) return std::nullopt;
    // Coin DP, reconstructing one witness.
    std::vector<int> used(target + 1, -1);
    used[0] = 0;
    for (std::uint64_t v = 1; v <= target; ++v)
        for (unsigned c : coins)
            if (c <= v && used[v - c] >= 0) {
                used[v] = static_cast<int>(c);
                break;
            }
    if (used[target] < 0) return std::nullopt;
    std::map<unsigned, std::uint64_t> counts;
    std::uint64_t v = target;
    while (v > 0) {
        unsigned c = static_cast<unsigned>(used[v]);
        ++counts[c + 1];
        v -= c;
    }
    return counts;
}

}  // namespace

bool leaf_count_feasible(const RankedAlphabet& a, std::uint64_t n) {
    if (n == 0) throw InputError("leaf counts start at 1");
    return leaf_decomposition(a, n).has_value();
}

Tree make_chain(const RankedAlphabet& a, std::uint64_t n) {
    a.validate();
    auto decomp = leaf_decomposition(a, n);
    if (!decomp) throw InputError("no tree with " + std::to_string(n) + " leaves exists");
    const std::string leaf_sym = a.symbols_of_rank(0).front();
    Tree leaf = Tree::leaf(leaf_sym);
    if (n == 1) return leaf;  // documented deviation: not a chain
    // Internal nodes stacked along the first child; d_m nodes of rank m.
    std::vector<unsigned> sequence;
    for (const auto& [m, d] : *decomp)
        for (std::uint64_t i = 0; i < d; ++i) sequence.push_back(m);
    Tree cur;
    for (auto it = sequence.rbegin(); it != sequence.rend(); ++it) {
        unsigned m = *it;
        const std::string sym = a.symbols_of_rank(m).front();
        std::vector<Tree> kids(m, leaf);
        if (cur.valid()) kids[0] = cur;
        cur = Tree::make(sym, std::move(kids));
    }
    return cur;
}

IntOrInf int_max(const RankedAlphabet& a, std::uint64_t m) {
    if (!leaf_count_feasible(a, m))
        throw InputError("m = " + std::to_string(m) + " is not a feasible leaf count");
    if (a.has_rank(1)) return IntOrInf::infinity();
    // Chains attain the maximum; strip the deepest internal node (rank q,
    // all children leaves) to recurse on m - q + 1 leaves.
    std::vector<std::optional<std::uint64_t>> best(m + 1);
    best[1] = 0;
    for (std::uint64_t leaves = 2; leaves <= m; ++leaves) {
        std::optional<std::uint64_t> b;
        for (unsigned q : a.ranks()) {
            if (q < 2 || q > leaves) continue;
            std::uint64_t rest = leaves - q + 1;
            if (rest >= 1 && rest <= m && best[rest])
                b = std::max(b.value_or(0), *best[rest] + 1);
        }
        best[leaves] = b;
    }
    if (!best[m]) throw InputError("internal: feasible m without decomposition");
    return IntOrInf::finite(*best[m]);
}

std::vector<Tree> enumerate_trees(const RankedAlphabet& a, std::size_t nmax,
                                  std::uint64_t cap) {
    a.validate();
    if (nmax == 0) throw InputError("nmax must be at least 1");
    std::vector<std::vector<Tree>> by_size(nmax + 1);
    std::uint64_t total = 0;
    auto emit = [&](std::vector<Tree>& bucket, Tree t) {
        if (total >= cap)
            throw CapExceeded("tree enumeration cap hit", total);
        bucket.push_back(std::move(t));
        ++total;
    };
    for (std::size_t s = 1; s <= nmax; ++s) {
        for (const auto& [sym, rank] : a.arity()) {
            if (rank == 0) {
                if (s == 1) emit(by_size[s], Tree::leaf(sym));
                continue;
            }
            if (s < 1 + static_cast<std::size_t>(rank)) continue;
            // Compose children sizes summing to s - 1, each >= 1.
            std::vector<Tree> kids(rank);
            std::function<void(unsigned, std::size_t)> choose = [&](unsigned idx,
                                                                    std::size_t left) {
                if (idx == rank) {
                    if (left == 0) emit(by_size[s], Tree::make(sym, kids));
                    return;
                }
                std::size_t remaining_kids = rank - idx - 1;
                for (std::size_t sz = 1; sz + remaining_kids <= left; ++sz) {
                    for (const Tree& t : by_size[sz]) {
                        kids[idx] = t;
                        choose(idx + 1, left - sz);
                    }
                }
            };
            choose(0, s - 1);
        }
    }
    std::vector<Tree> out;
    out.reserve(total);
    for (auto& bucket : by_size)
        for (Tree& t : bucket) out.push_back(std::move(t));
    return out;
}

// ── Term parsing ────────────────────────────────────────────────────────────

namespace {

// Fold the unicode symbol characters to their ASCII names.
std::string fold_unicode(const std::string& in) {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"\xE2\x99\xA5", "heart"},   // U+2665
        {"\xE2\x99\xA6", "diamond"}, // U+2666
        {"\xE2\x80\xA0", "dag"},     // U+2020
        {"\xE2\x80\xA1", "ddag"},    // U+2021
        {"\xE2\x80\xA2", "bullet"},  // U+2022
    };
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        bool matched = false;
        for (const auto& [seq, repl] : table) {
            if (in.compare(i, seq.size(), seq) == 0) {
                out += repl;
                i += seq.size();
                matched = true;
                break;
            }
        }
        if (!matched) out += in[i++];
    }
    return out;
}

struct TermParser {
    const std::string& s;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool name_char(char c) const {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    }
    std::string name() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && name_char(s[pos])) ++pos;
        if (pos == start)
            throw InputError("expected symbol name at offset " + std::to_string(start) +
                             " in term '" + s + "'");
        return s.substr(start, pos - start);
    }
    Tree term() {
        std::string sym = name();
        skip_ws();
        std::vector<Tree> kids;
        if (pos < s.size() && s[pos] == '(') {
            ++pos;
            skip_ws();
            if (pos < s.size() && s[pos] == ')') {
                ++pos;
            } else {
                while (true) {
                    kids.push_back(term());
                    skip_ws();
                    if (pos < s.size() && s[pos] == ',') {
                        ++pos;
                        continue;
                    }
                    if (pos < s.size() && s[pos] == ')') {
                        ++pos;
                        break;
                    }
                    throw InputError("expected ',' or ')' in term '" + s + "'");
                }
            }
        }
        return Tree::make(std::move(sym), std::move(kids));
    }
};

}  // namespace

Tree parse_term(const std::string& text) {
    std::string folded = fold_unicode(text);
    TermParser p{folded};
    Tree t = p.term();
    p.skip_ws();
    if (p.pos != folded.size())
        throw InputError("trailing characters after term: '" + text + "'");
    return t;
}

Tree parse_term(const std::string& text, const RankedAlphabet& a) {
    Tree t = parse_term(text);
    std::function<void(const Tree&)> check = [&](const Tree& node) {
        if (!a.contains(node.symbol()))
            throw InputError("symbol '" + node.symbol() + "' not in alphabet");
        if (a.rank(node.symbol()) != node.children().size())
            throw InputError("symbol '" + node.symbol() + "' used with arity " +
                             std::to_string(node.children().size()) + ", declared " +
                             std::to_string(a.rank(node.symbol())));
        for (const Tree& c : node.children()) check(c);
    };
    check(t);
    return t;
}

RankedAlphabet parse_alphabet(const std::string& text) {
    RankedAlphabet a;
    std::istringstream in(fold_unicode(text));
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string entry;
        while (ls >> entry) {
            auto slash = entry.find('/');
            if (slash == std::string::npos || slash == 0 || slash + 1 >= entry.size())
                throw InputError("alphabet entry '" + entry + "' is not name/rank");
            a.add(entry.substr(0, slash),
                  static_cast<unsigned>(std::stoul(entry.substr(slash + 1))));
        }
    }
    a.validate();
    return a;
}

void infer_alphabet(const Tree& t, RankedAlphabet& a) {
    a.add(t.symbol(), static_cast<unsigned>(t.children().size()));
    for (const Tree& c : t.children()) infer_alphabet(c, a);
}

}  // namespace gtrw
