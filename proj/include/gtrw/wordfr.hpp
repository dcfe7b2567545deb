#ifndef GTRW_WORDFR_HPP
#define GTRW_WORDFR_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gtrw/fologic.hpp"
#include "gtrw/labelled_graph.hpp"

namespace gtrw {

// ── Words over a finite labelled graph ──────────────────────────────────────
//
// The lifted structure G+ has all non-empty words over the node set as its
// universe; an a-edge rewrites exactly one letter via an a-edge of G.

using Word = std::vector<int>;        // node ids, non-empty
using Tuple = std::vector<int>;       // one convolution column
using TupleWord = std::vector<Tuple>; // word over a tuple alphabet

TupleWord to_tuple_word(const Word& u);
Word tuple_track(const TupleWord& u, std::size_t track);

// Positionwise pairing; nested convolutions flatten into wider tuples.
TupleWord convolution(const TupleWord& u, const TupleWord& v);
TupleWord convolution(const Word& u, const Word& v);

// u ==_d v : every letter count agrees exactly or both reach d.
bool equiv_d(const TupleWord& u, const TupleWord& v, std::uint64_t d);
bool equiv_d(const Word& u, const Word& v, std::uint64_t d);

// Count-distribution witness: given |u| = |u'|, u ==_{alpha*n} v and
// |v| >= alpha * n * |letters|, returns v' over [0, n_letters) with
// |v'| = |v| and u (x) u' ==_alpha v (x) v'.
Word solve_counts(const TupleWord& u, const Word& uprime, const TupleWord& v,
                  std::uint64_t alpha, int n_letters);

// ==_{k,l} on k-tuples of words; n is the number of graph nodes.
bool equiv_kl(const std::vector<Word>& us, const std::vector<Word>& vs, unsigned ell,
              int n);

// Witness extension: given us ==_{k,l} vs (l > 0), produce v_{k+1} with
// |v_{k+1}| <= n^{k+l+1} + k and (us,u_{k+1}) ==_{k+1,l-1} (vs,v_{k+1}).
Word extend_witness(const std::vector<Word>& us, const std::vector<Word>& vs,
                    const Word& next, unsigned ell, int n);

// n^e + add, saturating well below overflow.
std::uint64_t fr_bound(int n, unsigned exponent, std::uint64_t add);

// ── Quantifier-free evaluation over G+ ──────────────────────────────────────

bool qf_eval(const FiniteLabelledGraph& g, const Formula& f,
             const std::map<std::string, Word>& env);

// Single rewrite step test: v obtained from u by one a-edge of g.
bool word_edge(const FiniteLabelledGraph& g, const Word& u, int action,
               const Word& v);

// ── The bounded evaluator ───────────────────────────────────────────────────
//
// Decides G+ |= phi. Each quantifier at depth i with remaining rank l is
// relativized to words of length <= n^{i+l+1} + i (the proven exponent of
// the witness-extension lemma; n is padded to 2 in the bound arithmetic
// when the graph has a single node).
//
// Engines:
//   Symbolic    - composes synchronous automata over padded convolutions.
//                 Length bounds are enforced exactly via counter products
//                 whenever they fit under counter_cap; larger bounds are
//                 non-binding (the relativization theorem makes the bounded
//                 and unbounded answers equal), so the unbounded automaton
//                 is used directly.
//   Enumerative - streams words per quantifier in length-then-lexicographic
//                 order with early exit, charging each word against
//                 max_words. Exhaustive refutations beyond the budget
//                 raise CapExceeded.

enum class FrEngine { Auto, Symbolic, Enumerative };

struct FrOptions {
    FrEngine engine = FrEngine::Auto;
    std::uint64_t max_words = 10'000'000;  // enumerative word budget
    std::uint64_t max_states = 1'000'000;  // symbolic automaton state budget
    std::uint64_t counter_cap = 512;       // enforce length bounds up to here
    std::uint64_t bound_bump = 0;          // added to every bound (stability tests)
};

struct FrQuantBound {
    std::string var;
    std::uint64_t bound;
    bool enforced;  // counter product applied
};

struct FrResult {
    bool value = false;
    FrEngine engine_used = FrEngine::Symbolic;
    std::vector<FrQuantBound> bounds;
    std::uint64_t words_enumerated = 0;
    std::uint64_t states_created = 0;
};

FrResult fr_evaluate(const FiniteLabelledGraph& g, const Formula& f,
                     const FrOptions& opts = {});

// The normal form with one label per node pair: every edge (u,a,v) becomes
// (u, "p_u_v", v).
FiniteLabelledGraph canonicalize_labels(const FiniteLabelledGraph& g);

}  // namespace gtrw

#endif
