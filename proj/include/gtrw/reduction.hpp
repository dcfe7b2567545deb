#ifndef GTRW_REDUCTION_HPP
#define GTRW_REDUCTION_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gtrw/fologic.hpp"
#include "gtrw/gtrs.hpp"
#include "gtrw/wordfr.hpp"

namespace gtrw {

using BigInt = boost::multiprecision::cpp_int;

// ── Bounds (no enumeration involved) ────────────────────────────────────────

// sigma(i) = ell * r * 7 * 4^i * ((p-1) * r * 4^i + 1) + p * r * 4^i
BigInt sigma(unsigned i, unsigned ell, std::uint64_t r, std::uint64_t p);

// gamma = ceil(sigma(ell) / p) + (p-1)^2 * r * 4^ell. The ceiling keeps
// "|w| <= gamma" sound for integer lengths.
BigInt gamma_bound(unsigned ell, std::uint64_t r, std::uint64_t p);

struct ReductionBounds {
    unsigned ell = 0;
    std::uint64_t r = 0, p = 0, alphabet_size = 0;
    std::vector<BigInt> sigma_values;  // sigma(0..ell)
    BigInt gamma;
    BigInt u_size_limit;      // sigma(ell) + r*p*4^ell, also log_|A| of the U bound
    BigInt u2_count_log;      // gamma * (sigma(ell) + p*r*4^ell), log_{|A|+1} of |U''|
    std::string to_text() const;
};

ReductionBounds report_bounds(unsigned ell, std::uint64_t r, std::uint64_t p,
                              std::uint64_t alphabet_size);
ReductionBounds report_bounds(const Gtrs& r, const Formula& phi);

// ── Tree alphabets of the reduction ─────────────────────────────────────────

struct TreeAlphabets {
    unsigned ell = 0;
    std::uint64_t r = 0, p = 0;
    std::vector<std::uint64_t> sigma_values;
    std::vector<Tree> u;                  // all trees of size <= u_size_limit
    std::vector<std::vector<Tree>> u_i;   // size <= sigma(i)
    std::vector<std::vector<Tree>> v_i;   // size <= r*4^i
    std::vector<std::vector<Tree>> w_i;   // one-layer trees over V_i, minus V_i
    RankedAlphabet alphabet;
    bool has_unary = false;

    // w in V_i^* W_i V_i^* with |w| in M and ||w|| + int(|w|) > sigma(i).
    bool z_i_member(const TreeString& w, unsigned i) const;
};

struct ReductionCaps {
    std::uint64_t max_alphabet = 200'000;  // enumerated symbols (U and U'')
    std::uint64_t max_tree_size = 64;      // refuse larger size limits outright
    std::uint64_t max_word_len = 16;       // refuse larger gamma outright
    std::uint64_t max_states = 4'000'000;  // symbolic evaluator budget
    std::uint64_t max_words = 10'000'000;  // enumerative evaluator budget
    FrEngine engine = FrEngine::Auto;
};

TreeAlphabets build_alphabets(const Gtrs& r, unsigned ell,
                              const ReductionCaps& caps = {});

// ── Relativization and compilation ──────────────────────────────────────────

// Tags the j-th prenex quantifier (outermost first) with domain L_{ell-j}.
Formula relativize(const Formula& phi_prenex, unsigned ell);

struct CompiledInstance {
    unsigned ell = 0;
    ReductionBounds bounds;
    TreeAlphabets alphabets;
    // Symbol table of the finite graph T: words over U (via exp), $ and #.
    std::vector<TreeString> symbol_words;  // provenance, empty for $ and #
    std::vector<std::string> symbol_names;
    int dollar_id = -1, hash_id = -1;
    FiniteLabelledGraph graph;  // T, actions Sigma + one marker per symbol
    // Sub-alphabets as action-name sets (for the membership formulas).
    std::set<std::string> u_hat;                  // single-tree words from U
    std::vector<std::set<std::string>> u_i_hat;   // from U_i
    std::vector<std::set<std::string>> v_p_hat;   // V'_i
    std::vector<std::set<std::string>> w_p_hat;   // W'_i
    Formula phi1;  // relativized prenex sentence (domain tags)
    Formula phi4;  // compiled sentence over the signature of T+
};

CompiledInstance compile(const Gtrs& r, const Formula& phi,
                         const ReductionCaps& caps = {});

// ── Decision procedure ──────────────────────────────────────────────────────

enum class Verdict { True, False, Cap };

struct DecideResult {
    Verdict verdict = Verdict::Cap;
    ReductionBounds bounds;
    std::string cap_reason;
    FrResult fr;  // valid when verdict != Cap
};

DecideResult decide(const Gtrs& r, const Formula& phi,
                    const ReductionCaps& caps = {});

}  // namespace gtrw

#endif
