#ifndef GTRW_TILING_HPP
#define GTRW_TILING_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gtrw/fologic.hpp"
#include "gtrw/gtrs.hpp"
#include "gtrw/guarded.hpp"

namespace gtrw {

// ── Tiling systems ──────────────────────────────────────────────────────────

struct TilingSystem {
    std::vector<std::string> tiles;
    std::set<std::pair<int, int>> horiz;  // (left, right) allowed
    std::set<std::pair<int, int>> vert;   // (below, above) allowed

    int tile_id(const std::string& name) const;
    void validate() const;
};

// File format: `tiles: a b c`, then `H: a b` / `V: a b` lines.
TilingSystem parse_tiling(const std::string& text);
std::string to_string(const TilingSystem& s);

// Presets: the two-tile checkerboard and a three-tile staircase.
TilingSystem checkerboard_system();
TilingSystem staircase_system();

struct Solution {
    int k = 0;
    std::vector<int> grid;  // row-major: cell (x,y) at y*k+x

    int at(int x, int y) const { return grid[y * k + x]; }
    bool valid(const TilingSystem& s) const;
};

// All k-solutions whose first row starts with w; k <= 4.
std::vector<Solution> brute_solutions(const TilingSystem& s, int k,
                                      const std::vector<int>& w);

// Solutions extending `base` vertically: row 0 equals base's top row.
std::vector<Solution> brute_solutions_ext(const TilingSystem& s,
                                          const Solution& base);

// ── The fixed rewrite system R0 and its tree encodings ──────────────────────
//
// Constants: heart, one, zero and their dag/ddag variants; tiles are unary
// symbols; bullet is the binary branch. Actions: l, r, h, u, mdag, mddag
// plus one action per tile and per constant.

Gtrs r0_gtrs(const TilingSystem& s);

// Side length 2^{2^n}; grids materialize only for n <= 1.
std::uint64_t grid_side(unsigned n);
// D = 2^{n+1} - (n + 2), the number of u-collapses of a tile tree.
std::uint64_t collapse_count(unsigned n);

// Tile tree: tile-labelled root over a complete bullet-tree of leaf depth
// n+1; left leaves carry the bits of m, right leaves the bits of nn.
// n <= 3.
Tree build_tile_tree(unsigned n, const std::string& tile, std::uint64_t m,
                     std::uint64_t nn, bool marked);

// lex-th leaf (0-based) from dag to ddag state.
Tree select_leaf(const Tree& t, std::uint64_t lex);

// Balanced bullet-spine over all k*k cells of the solution, row-major;
// n <= 1.
Tree build_grid_tree(const TilingSystem& s, unsigned n, const Solution& sol);

// Paths of the maximal tile-rooted subtrees, in cell order.
std::vector<NodePath> tile_subtree_paths(const TilingSystem& s, const Tree& grid);

// Grid tree with the cell-th tile subtree fully dag-marked.
Tree mark_cell(const TilingSystem& s, const Tree& grid, std::size_t cell);

// ── Formula generators (section-4 family) ───────────────────────────────────

struct TilingFormulas {
    TilingSystem system;
    unsigned n = 0;
    Formula marked;                        // free x
    Formula grid;                          // free x
    std::vector<Formula> bit;              // bit[i-1] for i in [1, n+1], free x
    Formula less, equal;                   // free x, y (selected grid trees)
    std::map<std::string, Formula> label;  // phi_theta, free x
    Formula left, right;                   // free x (selected grid trees)
    Formula inc_m, same_m, inc_n, same_n;  // free x, y (marked grid trees)
    Formula sol;                           // free x
    Formula ext;                           // free x, y (solution grid trees)
};

TilingFormulas gen_formulas(const TilingSystem& s, unsigned n);

// phi_w: the first row starts with w (|w| = n), free x.
Formula gen_word_formula(const TilingFormulas& f, const std::vector<int>& w);

// The closed sentence: exists x (sol(x) and phi_w(x)).
Formula gen_sentence(const TilingFormulas& f, const std::vector<int>& w);

// The alternating sentence of the linearly alternating tiling problem;
// |w| must be odd.
Formula gen_alternating(const TilingSystem& s, const std::vector<int>& w);

// Candidate hook for mdag-power path guards filtered by marked(.): yields
// the complete single-tile markings instead of walking the full marking
// lattice. Justified by the separately tested marked-semantics.
CandidateHook tiling_hook(const TilingSystem& s);

}  // namespace gtrw

#endif
