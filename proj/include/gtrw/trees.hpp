#ifndef GTRW_TREES_HPP
#define GTRW_TREES_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gtrw/error.hpp"

namespace gtrw {

// ── Ranked alphabet ─────────────────────────────────────────────────────────
//
// A finite set of symbols, each with a fixed rank (arity). At least one
// symbol of rank 0 must exist. Symbols are plain strings; the map is kept
// sorted so every derived enumeration is deterministic.

class RankedAlphabet {
  public:
    RankedAlphabet() = default;
    explicit RankedAlphabet(std::map<std::string, unsigned> arity);

    void add(const std::string& symbol, unsigned rank);
    bool contains(const std::string& symbol) const;
    unsigned rank(const std::string& symbol) const;
    std::size_t symbol_count() const { return arity_.size(); }
    const std::map<std::string, unsigned>& arity() const { return arity_; }

    // Symbols of a given rank, in name order.
    std::vector<std::string> symbols_of_rank(unsigned r) const;
    // ranks = { m >= 1 | some symbol has rank m }.
    std::set<unsigned> ranks() const;
    // p = max(ranks); 0 when only constants exist.
    unsigned max_rank() const;
    bool has_rank(unsigned r) const;

    // Throws InputError unless a rank-0 symbol exists.
    void validate() const;

  private:
    std::map<std::string, unsigned> arity_;
};

// ── Ranked trees ────────────────────────────────────────────────────────────
//
// Immutable, structurally shared, with node count and a structural hash
// cached at construction. Node addresses are 1-based child-index paths.

class Tree;

struct TreeNode {
    std::string symbol;
    std::vector<Tree> children;
    std::size_t node_count = 0;
    std::size_t hash = 0;
};

class Tree {
  public:
    Tree() = default;  // null tree; invalid until assigned
    static Tree make(std::string symbol, std::vector<Tree> children = {});
    static Tree leaf(std::string symbol) { return make(std::move(symbol)); }

    bool valid() const { return static_cast<bool>(node_); }
    const std::string& symbol() const { return node_->symbol; }
    const std::vector<Tree>& children() const { return node_->children; }
    std::size_t size() const { return node_->node_count; }
    std::size_t hash() const { return node_->hash; }

    friend bool operator==(const Tree& a, const Tree& b);
    friend bool operator!=(const Tree& a, const Tree& b) { return !(a == b); }

  private:
    std::shared_ptr<const TreeNode> node_;
};

struct TreeHash {
    std::size_t operator()(const Tree& t) const { return t.hash(); }
};

// Deterministic total order: size, then root symbol, then children.
int compare(const Tree& a, const Tree& b);
struct TreeLess {
    bool operator()(const Tree& a, const Tree& b) const { return compare(a, b) < 0; }
};

// A node address: child indices starting at 1. The empty path is the root.
using NodePath = std::vector<unsigned>;

std::string path_to_string(const NodePath& p);
// Numeric index-by-index lexicographic order (prefixes first).
bool path_lex_less(const NodePath& a, const NodePath& b);

// Non-empty string of trees; the universe of the word-lifted graph.
using TreeString = std::vector<Tree>;

// norm ||w|| = sum of item sizes.
std::size_t norm(const TreeString& w);

std::string to_string(const Tree& t);
std::string to_string(const TreeString& w);

// ── Structural operations ───────────────────────────────────────────────────

std::size_t tree_size(const Tree& t);
std::size_t leaf_count(const Tree& t);

// Throws InputError when x is not in the domain.
Tree subtree(const Tree& t, const NodePath& x);
Tree replace(const Tree& t, const NodePath& x, const Tree& s);

// |D_s \ D_t|
std::size_t diff(const Tree& s, const Tree& t);

// All domain nodes in lexicographic order.
std::vector<NodePath> domain(const Tree& t);

// up(t,n) = { v in D_t | size(t|v) > n }, lexicographically sorted.
std::vector<NodePath> up(const Tree& t, std::size_t n);

// t \ C for prefix-closed C subseteq D_t. C = {} yields the singleton (t).
TreeString cut(const Tree& t, const std::vector<NodePath>& c);

// Every internal node has at most one internal child (and the tree has at
// least one internal node).
bool is_chain(const Tree& t);

// Membership in M = { 1 + sum d_m (m-1) | d_m >= 0 }.
bool leaf_count_feasible(const RankedAlphabet& a, std::uint64_t n);

// A tree with exactly n leaves; a chain for n >= 2, a bare leaf for n = 1
// (the chain definition excludes single-node trees, so n = 1 cannot yield
// one; returning a leaf is a documented deviation).
Tree make_chain(const RankedAlphabet& a, std::uint64_t n);

// Maximal number of internal nodes of a tree with exactly m leaves.
struct IntOrInf {
    bool is_infinite = false;
    std::uint64_t value = 0;

    static IntOrInf infinity() { return {true, 0}; }
    static IntOrInf finite(std::uint64_t v) { return {false, v}; }
    bool operator==(const IntOrInf& o) const {
        return is_infinite == o.is_infinite && (is_infinite || value == o.value);
    }
};

IntOrInf int_max(const RankedAlphabet& a, std::uint64_t m);

// All trees of size <= nmax, ordered by (size, symbol, children). Throws
// CapExceeded carrying the count produced so far once `cap` trees exist.
std::vector<Tree> enumerate_trees(const RankedAlphabet& a, std::size_t nmax,
                                  std::uint64_t cap = 1'000'000);

// ── Text formats ────────────────────────────────────────────────────────────
//
// Term syntax: name(child1,...,childk), constants bare, whitespace free.
// Unicode characters in names are folded to ASCII during lexing:
// heart <- U+2665, diamond <- U+2666, dag <- U+2020, ddag <- U+2021,
// bullet <- U+2022.

Tree parse_term(const std::string& text);
// Parse and check arities against `a` (throws InputError on mismatch).
Tree parse_term(const std::string& text, const RankedAlphabet& a);

// Alphabet file: one `name/rank` per line; '#' comments allowed.
RankedAlphabet parse_alphabet(const std::string& text);

// Infer symbol arities from a term, merging into `a`; conflicting rank is
// an InputError.
void infer_alphabet(const Tree& t, RankedAlphabet& a);

}  // namespace gtrw

#endif
