#ifndef GTRW_GUARDED_HPP
#define GTRW_GUARDED_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gtrw/fologic.hpp"
#include "gtrw/gtrs.hpp"

namespace gtrw {

// ── Guarded evaluation over the infinite graph G(R) ─────────────────────────
//
// Quantifiers must be linked to an already-bound variable by a guard: an
// equality pin, an edge atom, or a path atom starting at a bound variable.
// Existential bodies carry the guard as a conjunct; universal bodies are
// implications whose hypothesis carries it. Every guard yields a finite,
// effectively computable candidate set, so evaluation terminates.

// A hook may supply the candidate set for a path-guarded quantifier
// directly (the tiling module uses one to enumerate canonical marking
// endpoints instead of walking the exponential m-dagger lattice). Sibling
// conjuncts of the guard are passed for pattern matching. Returning
// nullopt falls back to plain path search.
using CandidateHook = std::function<std::optional<std::vector<Tree>>(
    const Gtrs& r, const Tree& src, const std::vector<PathBlock>& blocks,
    const std::vector<Formula>& siblings, const std::string& var)>;

struct GuardedOptions {
    std::uint64_t step_budget = 10'000'000;
    std::vector<CandidateHook> hooks;
};

bool is_guarded(const Formula& f);

bool eval_guarded(const Gtrs& r, const Formula& f,
                  const std::map<std::string, Tree>& env,
                  const GuardedOptions& opts = {});

// Endpoints of [G1^j1 ... Gk^jk] paths from src, deduplicated and sorted.
std::vector<Tree> path_endpoints(const Gtrs& r, const Tree& src,
                                 const std::vector<PathBlock>& blocks,
                                 std::uint64_t step_budget = 10'000'000);

// Conservative locality radius: how far evaluation can explore from the
// free variables (used by the sphere cross-check).
std::uint64_t exploration_radius(const Formula& f);

}  // namespace gtrw

#endif
