#ifndef GTRW_FOLOGIC_HPP
#define GTRW_FOLOGIC_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "gtrw/error.hpp"
#include "gtrw/labelled_graph.hpp"

namespace gtrw {

// ── First-order formulas over labelled graphs ───────────────────────────────
//
// Atoms are x = y and a(x,y) for an action a, plus path atoms
// [G1^j1 ... Gk^jk](x,y) that assert a directed path whose label sequence
// matches the block pattern. Path atoms expand to plain first-order syntax
// on demand (Fischer-Rabin), so every consumer can fall back to the pure
// fragment. Quantifiers may carry a domain tag, an opaque name resolved by
// whichever module evaluates the formula.

enum class FKind {
    True,
    False,
    Eq,       // var1 = var2
    Edge,     // action(var1, var2)
    Path,     // [blocks](var1, var2)
    Not,      // kids[0]
    And,      // kids...
    Or,       // kids...
    Implies,  // kids[0] -> kids[1]
    Iff,      // kids[0] <-> kids[1]
    Exists,   // var1, optional domain tag, kids[0]
    Forall,
};

struct PathBlock {
    std::set<std::string> actions;
    std::uint64_t count = 0;
};

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
    FKind kind;
    std::string action;             // Edge
    std::string var1, var2;         // atom vars / quantified var in var1
    std::string domain;             // quantifier domain tag ("" = none)
    std::vector<PathBlock> blocks;  // Path
    std::vector<Formula> kids;
};

Formula f_true();
Formula f_false();
Formula f_eq(std::string x, std::string y);
Formula f_edge(std::string action, std::string x, std::string y);
Formula f_path(std::vector<PathBlock> blocks, std::string x, std::string y);
Formula f_not(Formula a);
Formula f_and(std::vector<Formula> kids);   // empty -> true
Formula f_or(std::vector<Formula> kids);    // empty -> false
Formula f_implies(Formula a, Formula b);
Formula f_iff(Formula a, Formula b);
Formula f_exists(std::string var, Formula body);
Formula f_forall(std::string var, Formula body);
Formula f_exists_in(std::string domain, std::string var, Formula body);
Formula f_forall_in(std::string domain, std::string var, Formula body);

// Maximal number of nested quantifiers.
unsigned qr(const Formula& f);
std::set<std::string> free_vars(const Formula& f);
bool is_closed(const Formula& f);
bool has_domain_tags(const Formula& f);

// Capture-avoiding substitution of free occurrences of `var` by `repl`.
Formula substitute_var(const Formula& f, const std::string& var,
                       const std::string& repl);

// Structural size (number of AST nodes, path atoms unexpanded).
std::size_t formula_size(const Formula& f);

// ── Prenex form ─────────────────────────────────────────────────────────────

struct PrenexFormula {
    std::vector<std::pair<bool, std::string>> prefix;  // (is_forall, var)
    Formula matrix;                                    // quantifier-free
    Formula to_formula() const;
};

// Rejects domain-tagged input. Bound variables are renamed to x0, x1, ...
// in extraction order. Iff duplicates its operands first, so quantifier
// count may grow.
PrenexFormula prenex(const Formula& f);

// ── Generators ──────────────────────────────────────────────────────────────

// Fischer-Rabin: a formula that holds iff there is a directed path of
// length exactly j from x to y in the graph {(s,t) | theta(s,t)}, where
// theta has free variables tx, ty. j = 0 yields x = y by convention.
// Size O(ones(j) * log j + ones(j) * |theta|), rank 3*floor(log2 j) +
// qr(theta) + ones(j) + 1.
Formula fischer_rabin(const Formula& theta, const std::string& tx,
                      const std::string& ty, std::uint64_t j, std::string x,
                      std::string y);

// Undirected distance <= d via the reflexive-symmetric step formula.
Formula dist_leq(const std::set<std::string>& actions, std::uint64_t d,
                 std::string x, std::string y);

// Path atom for [G1^j1 ... Gk^jk](x,y).
Formula seq_formula(std::vector<PathBlock> blocks, std::string x, std::string y);

// Fischer-Rabin expansion of a path atom (or of any formula containing
// path atoms) into the pure fragment.
Formula expand_paths(const Formula& f);

// Count constraint |x|_Omega >= k over marker-edge graphs: k pairwise
// distinct Omega-successors.
Formula count_atleast(const std::set<std::string>& omega, unsigned k, std::string x);

// Membership x in Omega^*: no marker edge outside Omega.
Formula membership(const std::set<std::string>& omega,
                   const std::set<std::string>& full, std::string x);

// ── Evaluation over finite graphs ───────────────────────────────────────────
//
// Plain FO semantics with the graph's nodes as the universe. Memoized per
// (subformula, relevant assignment); handles path atoms natively.
bool eval_finite(const FiniteLabelledGraph& g, const Formula& f,
                 const std::map<std::string, int>& env = {});

// Reusable variant: the memo tables persist across calls, which pays off
// when the same formulas run under many assignments.
class FiniteEvaluator {
  public:
    explicit FiniteEvaluator(const FiniteLabelledGraph& g);
    ~FiniteEvaluator();
    FiniteEvaluator(const FiniteEvaluator&) = delete;
    FiniteEvaluator& operator=(const FiniteEvaluator&) = delete;
    bool eval(const Formula& f, const std::map<std::string, int>& env = {});

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// ── Text format (s-expressions) ─────────────────────────────────────────────
//
//   (= x y)  (edge a x y)  (path x y ((a b) 3) ((c) 1))
//   (not f) (and f...) (or f...) (implies f g) (iff f g)
//   (exists x f) (forall x f) (exists-in L0 x f) (forall-in L0 x f)
//   (true) (false)
Formula parse_formula(const std::string& text);
std::string to_string(const Formula& f);

}  // namespace gtrw

#endif
