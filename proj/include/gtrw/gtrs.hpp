#ifndef GTRW_GTRS_HPP
#define GTRW_GTRS_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gtrw/trees.hpp"

namespace gtrw {

// ── Ground tree rewrite systems ─────────────────────────────────────────────
//
// Finite sets of ground rules lhs -a-> rhs over a ranked alphabet. The
// induced graph has all ranked trees as nodes and one a-labelled edge per
// redex occurrence. The word lifting rewrites one item of a tree string.

struct Rule {
    Tree lhs;
    std::string action;
    Tree rhs;
};

class Gtrs {
  public:
    Gtrs() = default;
    Gtrs(RankedAlphabet alphabet, std::set<std::string> actions, std::vector<Rule> rules);

    const RankedAlphabet& alphabet() const { return alphabet_; }
    const std::set<std::string>& actions() const { return actions_; }
    const std::vector<Rule>& rules() const { return rules_; }

    // r = maximal size of a tree appearing in a rule (0 when no rules).
    std::size_t max_rule_size() const;

    void require_action(const std::string& a) const;

  private:
    RankedAlphabet alphabet_;
    std::set<std::string> actions_;
    std::vector<Rule> rules_;
};

// All t' with t -a-> t', deduplicated, in canonical tree order.
std::vector<Tree> successors(const Gtrs& r, const Tree& t, const std::string& a);

// All t' with t' -a-> t.
std::vector<Tree> predecessors(const Gtrs& r, const Tree& t, const std::string& a);

// Direct membership tests (cheaper than materializing the sets).
bool has_edge(const Gtrs& r, const Tree& from, const std::string& a, const Tree& to);

// One item of the string rewritten; string length is preserved.
std::vector<TreeString> step_word(const Gtrs& r, const TreeString& w,
                                  const std::string& a);
std::vector<TreeString> step_word_pred(const Gtrs& r, const TreeString& w,
                                       const std::string& a);

// ── Spheres ─────────────────────────────────────────────────────────────────
//
// Finite induced substructure of radius n around the centers, with the
// centers as constants and every node annotated with its distance to the
// nearest center. Nodes are indices; node_names render the underlying
// universe elements.

struct SphereStructure {
    std::vector<std::string> node_names;
    std::vector<unsigned> centers;  // node indices, in center order
    std::vector<unsigned> dist;     // per node
    std::set<std::string> actions;
    std::vector<std::tuple<unsigned, std::string, unsigned>> edges;

    std::size_t node_count() const { return node_names.size(); }
    std::string dump() const;  // adjacency-list text with centers and distances
};

inline constexpr std::uint64_t kDefaultNodeBudget = 1'000'000;

SphereStructure sphere(const Gtrs& r, const std::vector<Tree>& centers, unsigned n,
                       std::uint64_t node_budget = kDefaultNodeBudget);

SphereStructure sphere_word(const Gtrs& r, const std::vector<TreeString>& centers,
                            unsigned n, std::uint64_t node_budget = kDefaultNodeBudget);

// Exact undirected distance if <= cap, std::nullopt beyond.
std::optional<unsigned> distance(const Gtrs& r, const Tree& s, const Tree& t,
                                 unsigned cap,
                                 std::uint64_t node_budget = kDefaultNodeBudget);

// Center-preserving, label-preserving isomorphism s1 -> s2, or nullopt.
std::optional<std::vector<unsigned>> find_iso(const SphereStructure& s1,
                                              const SphereStructure& s2);

// ── File format ─────────────────────────────────────────────────────────────
//
// Header `actions: a b c`, optional `alphabet: name/rank ...` lines, then
// one rule per line: `lhs -a-> rhs`. '#' starts a comment.
Gtrs parse_gtrs(const std::string& text);
std::string to_string(const Gtrs& r);

}  // namespace gtrw

#endif
