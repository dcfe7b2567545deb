#include "gtrw/tiling.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace gtrw {

// ── Tiling systems ──────────────────────────────────────────────────────────

int TilingSystem::tile_id(const std::string& name) const {
    for (std::size_t i = 0; i < tiles.size(); ++i)
        if (tiles[i] == name) return static_cast<int>(i);
    return -1;
}

void TilingSystem::validate() const {
    if (tiles.empty()) throw InputError("tiling system needs at least one tile");
    std::set<std::string> seen(tiles.begin(), tiles.end());
    if (seen.size() != tiles.size()) throw InputError("duplicate tile names");
    static const std::set<std::string> reserved{
        "l",   "r",    "h",      "u",       "mdag",    "mddag",   "heart",
        "one", "zero", "onedag", "oneddag", "zerodag", "zeroddag", "bullet"};
    for (const std::string& t : tiles)
        if (reserved.count(t))
            throw InputError("tile name '" + t + "' collides with the fixed symbols");
    int k = static_cast<int>(tiles.size());
    for (const auto& [a, b] : horiz)
        if (a < 0 || b < 0 || a >= k || b >= k)
            throw InputError("horizontal pair out of range");
    for (const auto& [a, b] : vert)
        if (a < 0 || b < 0 || a >= k || b >= k)
            throw InputError("vertical pair out of range");
}

TilingSystem parse_tiling(const std::string& text) {
    TilingSystem s;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head)) continue;
        if (head == "tiles:") {
            std::string t;
            while (ls >> t) s.tiles.push_back(t);
        } else if (head == "H:" || head == "V:") {
            std::string a, b;
            if (!(ls >> a >> b)) throw InputError("pair line needs two tiles");
            int ia = s.tile_id(a), ib = s.tile_id(b);
            if (ia < 0 || ib < 0) throw InputError("unknown tile in pair: " + line);
            (head == "H:" ? s.horiz : s.vert).emplace(ia, ib);
        } else {
            throw InputError("unknown tiling line: " + line);
        }
    }
    s.validate();
    return s;
}

std::string to_string(const TilingSystem& s) {
    std::ostringstream out;
    out << "tiles:";
    for (const std::string& t : s.tiles) out << ' ' << t;
    out << '\n';
    for (const auto& [a, b] : s.horiz)
        out << "H: " << s.tiles[a] << ' ' << s.tiles[b] << '\n';
    for (const auto& [a, b] : s.vert)
        out << "V: " << s.tiles[a] << ' ' << s.tiles[b] << '\n';
    return out.str();
}

TilingSystem checkerboard_system() {
    TilingSystem s;
    s.tiles = {"t0", "t1"};
    s.horiz = {{0, 1}, {1, 0}};
    s.vert = {{0, 1}, {1, 0}};
    return s;
}

TilingSystem staircase_system() {
    TilingSystem s;
    s.tiles = {"s0", "s1", "s2"};
    s.horiz = {{0, 1}, {1, 2}, {2, 0}};
    s.vert = {{0, 2}, {1, 0}, {2, 1}};
    return s;
}

bool Solution::valid(const TilingSystem& s) const {
    for (int y = 0; y < k; ++y)
        for (int x = 0; x < k; ++x) {
            if (x + 1 < k && !s.horiz.count({at(x, y), at(x + 1, y)})) return false;
            if (y + 1 < k && !s.vert.count({at(x, y), at(x, y + 1)})) return false;
        }
    return true;
}

namespace {

std::vector<Solution> backtrack_solutions(
    const TilingSystem& s, int k,
    const std::function<int(int, int)>& pinned) {
    if (k > 4) throw InputError("brute-force tiling capped at k <= 4");
    std::vector<Solution> out;
    Solution cur;
    cur.k = k;
    cur.grid.assign(static_cast<std::size_t>(k) * k, -1);
    int tiles = static_cast<int>(s.tiles.size());
    std::function<void(int)> go = [&](int cell) {
        if (cell == k * k) {
            out.push_back(cur);
            return;
        }
        int x = cell % k, y = cell / k;
        int pin = pinned(x, y);
        for (int t = 0; t < tiles; ++t) {
            if (pin >= 0 && t != pin) continue;
            if (x > 0 && !s.horiz.count({cur.at(x - 1, y), t})) continue;
            if (y > 0 && !s.vert.count({cur.at(x, y - 1), t})) continue;
            cur.grid[cell] = t;
            go(cell + 1);
            cur.grid[cell] = -1;
        }
    };
    go(0);
    return out;
}

}  // namespace

std::vector<Solution> brute_solutions(const TilingSystem& s, int k,
                                      const std::vector<int>& w) {
    if (static_cast<int>(w.size()) > k)
        throw InputError("first-row word longer than the side");
    for (int t : w)
        if (t < 0 || t >= static_cast<int>(s.tiles.size()))
            throw InputError("word tile out of range");
    return backtrack_solutions(s, k, [&](int x, int y) {
        return y == 0 && x < static_cast<int>(w.size()) ? w[x] : -1;
    });
}

std::vector<Solution> brute_solutions_ext(const TilingSystem& s,
                                          const Solution& base) {
    return backtrack_solutions(s, base.k, [&](int x, int y) {
        return y == 0 ? base.at(x, base.k - 1) : -1;
    });
}

// ── R0 ──────────────────────────────────────────────────────────────────────

namespace {

const std::vector<std::string> kConstants{"heart", "one",     "onedag", "oneddag",
                                          "zero",  "zerodag", "zeroddag"};

Tree leaf(const std::string& s) { return Tree::leaf(s); }

}  // namespace

Gtrs r0_gtrs(const TilingSystem& s) {
    s.validate();
    RankedAlphabet a;
    for (const std::string& c : kConstants) a.add(c, 0);
    for (const std::string& t : s.tiles) a.add(t, 1);
    a.add("bullet", 2);

    std::set<std::string> actions{"l", "r", "h", "u", "mdag", "mddag"};
    for (const std::string& t : s.tiles) actions.insert(t);
    for (const std::string& c : kConstants) actions.insert(c);

    std::vector<Rule> rules;
    // (1) constant self-loops, labelled by the constant itself.
    for (const std::string& c : kConstants) rules.push_back({leaf(c), c, leaf(c)});
    // (2) marking, (3) selecting, (4) erasing a mark to heart.
    for (const std::string& base : {std::string("one"), std::string("zero")}) {
        rules.push_back({leaf(base), "mdag", leaf(base + "dag")});
        rules.push_back({leaf(base + "dag"), "mddag", leaf(base + "ddag")});
        rules.push_back({leaf(base + "dag"), "h", leaf("heart")});
    }
    // (5) collapsing a finished pair.
    rules.push_back(
        {Tree::make("bullet", {leaf("heart"), leaf("heart")}), "u", leaf("heart")});
    // (6) tile label self-loops on collapsed tiles.
    for (const std::string& t : s.tiles)
        for (const std::string& sel : {std::string("oneddag"), std::string("zeroddag")}) {
            Tree collapsed = Tree::make(t, {leaf(sel)});
            rules.push_back({collapsed, t, collapsed});
        }
    // (7)/(8) walking the selected leaf upward.
    for (const std::string& sel : {std::string("oneddag"), std::string("zeroddag")}) {
        rules.push_back(
            {Tree::make("bullet", {leaf("heart"), leaf(sel)}), "r", leaf(sel)});
        rules.push_back(
            {Tree::make("bullet", {leaf(sel), leaf("heart")}), "l", leaf(sel)});
    }
    return Gtrs(std::move(a), std::move(actions), std::move(rules));
}

std::uint64_t grid_side(unsigned n) {
    if (n > 3) throw InputError("grid side materializes only for n <= 3");
    return 1ULL << (1ULL << n);
}

std::uint64_t collapse_count(unsigned n) {
    return (1ULL << (n + 1)) - (n + 2);
}

// ── Tree builders ───────────────────────────────────────────────────────────

Tree build_tile_tree(unsigned n, const std::string& tile, std::uint64_t m,
                     std::uint64_t nn, bool marked) {
    if (n > 3) throw InputError("tile trees materialize only for n <= 3");
    std::uint64_t side = grid_side(n);
    if (m >= side || nn >= side)
        throw InputError("grid coordinates out of range for n");
    std::string one_sym = marked ? "onedag" : "one";
    std::string zero_sym = marked ? "zerodag" : "zero";
    // Leaves in lex order: even positions are left children carrying bits
    // of m, odd positions right children carrying bits of nn.
    std::function<Tree(unsigned, std::uint64_t)> build =
        [&](unsigned depth, std::uint64_t first_leaf) -> Tree {
        if (depth == 0) {
            std::uint64_t bit_index = first_leaf / 2;
            bool is_left = first_leaf % 2 == 0;
            std::uint64_t value = is_left ? m : nn;
            bool bit = (value >> bit_index) & 1;
            return leaf(bit ? one_sym : zero_sym);
        }
        std::uint64_t half = 1ULL << (depth - 1);
        return Tree::make("bullet",
                          {build(depth - 1, first_leaf),
                           build(depth - 1, first_leaf + half)});
    };
    return Tree::make(tile, {build(n + 1, 0)});
}

Tree select_leaf(const Tree& t, std::uint64_t lex) {
    std::uint64_t counter = 0;
    NodePath found;
    std::function<bool(const Tree&, NodePath&)> go = [&](const Tree& node,
                                                         NodePath& path) -> bool {
        if (node.children().empty()) {
            if (counter++ == lex) {
                found = path;
                return true;
            }
            return false;
        }
        for (unsigned i = 1; i <= node.children().size(); ++i) {
            path.push_back(i);
            if (go(node.children()[i - 1], path)) return true;
            path.pop_back();
        }
        return false;
    };
    NodePath path;
    if (!go(t, path)) throw InputError("leaf index out of range");
    const std::string& sym = subtree(t, found).symbol();
    if (sym == "onedag") return replace(t, found, leaf("oneddag"));
    if (sym == "zerodag") return replace(t, found, leaf("zeroddag"));
    throw InputError("leaf " + std::to_string(lex) + " is not marked");
}

Tree build_grid_tree(const TilingSystem& s, unsigned n, const Solution& sol) {
    if (n > 1) throw InputError("grid trees materialize only for n <= 1");
    std::uint64_t side = grid_side(n);
    if (sol.k != static_cast<int>(side))
        throw InputError("solution side must be 2^(2^n)");
    std::vector<Tree> cells;
    for (std::uint64_t y = 0; y < side; ++y)
        for (std::uint64_t x = 0; x < side; ++x)
            cells.push_back(build_tile_tree(
                n, s.tiles[sol.at(static_cast<int>(x), static_cast<int>(y))], x, y,
                false));
    while (cells.size() > 1) {
        std::vector<Tree> next;
        for (std::size_t i = 0; i + 1 < cells.size(); i += 2)
            next.push_back(Tree::make("bullet", {cells[i], cells[i + 1]}));
        if (cells.size() % 2) next.push_back(cells.back());
        cells = std::move(next);
    }
    return cells.front();
}

std::vector<NodePath> tile_subtree_paths(const TilingSystem& s, const Tree& grid) {
    std::vector<NodePath> out;
    NodePath path;
    std::function<void(const Tree&)> go = [&](const Tree& node) {
        if (s.tile_id(node.symbol()) >= 0) {
            out.push_back(path);
            return;
        }
        for (unsigned i = 1; i <= node.children().size(); ++i) {
            path.push_back(i);
            go(node.children()[i - 1]);
            path.pop_back();
        }
    };
    go(grid);
    return out;
}

namespace {

Tree mark_tile(const Tree& t) {
    if (t.children().empty()) {
        if (t.symbol() == "one") return leaf("onedag");
        if (t.symbol() == "zero") return leaf("zerodag");
        if (t.symbol() == "onedag" || t.symbol() == "zerodag") return t;
        throw InputError("tile subtree has a non-plain leaf: " + t.symbol());
    }
    std::vector<Tree> kids;
    for (const Tree& c : t.children()) kids.push_back(mark_tile(c));
    return Tree::make(t.symbol(), std::move(kids));
}

}  // namespace

Tree mark_cell(const TilingSystem& s, const Tree& grid, std::size_t cell) {
    auto paths = tile_subtree_paths(s, grid);
    if (cell >= paths.size()) throw InputError("cell index out of range");
    return replace(grid, paths[cell], mark_tile(subtree(grid, paths[cell])));
}

// ── Formula generators ──────────────────────────────────────────────────────

namespace {

// Shared substitution that keeps untouched subtrees pointer-identical, so
// evaluator memo tables stay effective across embeddings.
Formula subst(const Formula& f, const std::string& from, const std::string& to) {
    if (!free_vars(f).count(from)) return f;
    return substitute_var(f, from, to);
}

}  // namespace

TilingFormulas gen_formulas(const TilingSystem& s, unsigned n) {
    s.validate();
    TilingFormulas f;
    f.system = s;
    f.n = n;
    std::uint64_t two_n1 = 1ULL << (n + 1);
    std::uint64_t d = collapse_count(n);
    std::set<std::string> tile_actions(s.tiles.begin(), s.tiles.end());

    // marked(x) = forall y (mddag(x,y) ->
    //   exists z [h^(2^(n+1)-1) u^D {l,r}^(n+1) Theta](y,z))
    {
        std::vector<PathBlock> blocks{{{"h"}, two_n1 - 1},
                                      {{"u"}, d},
                                      {{"l", "r"}, n + 1},
                                      {tile_actions, 1}};
        Formula inner = f_exists("_mz", f_path(blocks, "_my", "_mz"));
        f.marked =
            f_forall("_my", f_implies(f_edge("mddag", "x", "_my"), inner));
    }

    // grid(x): plain leaves only, and every single mark completes to a
    // marked tile.
    {
        std::vector<Formula> conj;
        for (const char* c :
             {"heart", "onedag", "oneddag", "zerodag", "zeroddag"})
            conj.push_back(f_not(f_edge(c, "x", "x")));
        Formula complete = f_exists(
            "_gz", f_and({f_path({{{"mdag"}, two_n1 - 1}}, "_gy", "_gz"),
                          subst(f.marked, "x", "_gz")}));
        conj.push_back(
            f_forall("_gy", f_implies(f_edge("mdag", "x", "_gy"), complete)));
        f.grid = f_and(conj);
    }

    // bit_i(x) over selected grid trees.
    for (unsigned i = 1; i <= n + 1; ++i) {
        std::vector<PathBlock> blocks{{{"h"}, two_n1 - 1},
                                      {{"u"}, d},
                                      {{"l", "r"}, i - 1},
                                      {{"r"}, 1}};
        f.bit.push_back(f_exists("_bz", f_path(blocks, "x", "_bz")));
    }

    // Lexicographic comparison of selected positions.
    {
        std::vector<Formula> eq_parts, lt_parts;
        for (unsigned i = 1; i <= n + 1; ++i) {
            Formula bx = f.bit[i - 1];
            Formula by = subst(bx, "x", "y");
            eq_parts.push_back(f_iff(bx, by));
        }
        f.equal = f_and(eq_parts);
        // Strictly below at the highest differing bit: agree above j,
        // x reads zero and y reads one at j.
        for (unsigned j = 1; j <= n + 1; ++j) {
            std::vector<Formula> conj{
                f_and({f_not(f.bit[j - 1]), subst(f.bit[j - 1], "x", "y")})};
            for (unsigned i = j + 1; i <= n + 1; ++i)
                conj.push_back(f_iff(f.bit[i - 1], subst(f.bit[i - 1], "x", "y")));
            lt_parts.push_back(f_and(conj));
        }
        f.less = f_or(lt_parts);
    }

    // phi_theta(x) over marked grid trees.
    for (const std::string& t : s.tiles) {
        std::vector<PathBlock> blocks{{{"mddag"}, 1},
                                      {{"h"}, two_n1 - 1},
                                      {{"u"}, d},
                                      {{"l", "r"}, n + 1},
                                      {{t}, 1}};
        f.label[t] = f_exists("_tz", f_path(blocks, "x", "_tz"));
    }

    // left / right: the selected leaf is a left (right) child.
    f.left = f_exists(
        "_lz", f_and({f_edge("h", "x", "_lz"),
                      f_exists("_lw", f_edge("l", "_lz", "_lw"))}));
    f.right = f_exists(
        "_rz", f_and({f_edge("h", "x", "_rz"),
                      f_exists("_rw", f_edge("r", "_rz", "_rw"))}));

    // Column/row arithmetic between marked grid trees. `side` picks the
    // child-side whose bits encode the coordinate.
    auto coordinate_formulas = [&](const Formula& side) {
        // same: all side-positions carry equal bits.
        Formula same = f_forall(
            "_cu",
            f_implies(
                f_edge("mddag", "x", "_cu"),
                f_forall(
                    "_cv",
                    f_implies(
                        f_and({f_edge("mddag", "y", "_cv"),
                               subst(subst(f.equal, "x", "_cu"), "y", "_cv"),
                               subst(side, "x", "_cu")}),
                        f_iff(f_edge("oneddag", "_cu", "_cu"),
                              f_edge("oneddag", "_cv", "_cv"))))));
        // inc: pick the lowest zero side-position of x, require one there
        // in y, ones below it in x, zeros below in y, agreement above.
        Formula psi1a = f_forall(
            "_cz", f_implies(f_and({f_edge("mddag", "x", "_cz"),
                                    subst(subst(f.less, "x", "_cz"), "y", "_cp"),
                                    subst(side, "x", "_cz")}),
                             f_edge("oneddag", "_cz", "_cz")));
        Formula psi1b = f_forall(
            "_cz", f_implies(f_and({f_edge("mddag", "y", "_cz"),
                                    subst(subst(f.less, "x", "_cz"), "y", "_cq"),
                                    subst(side, "x", "_cz")}),
                             f_edge("zeroddag", "_cz", "_cz")));
        Formula psi2 = f_forall(
            "_cu",
            f_implies(
                f_edge("mddag", "x", "_cu"),
                f_forall(
                    "_cv",
                    f_implies(
                        f_and({f_edge("mddag", "y", "_cv"),
                               subst(subst(f.equal, "x", "_cu"), "y", "_cv"),
                               subst(subst(f.less, "x", "_cp"), "y", "_cu"),
                               subst(side, "x", "_cu")}),
                        f_iff(f_edge("oneddag", "_cu", "_cu"),
                              f_edge("oneddag", "_cv", "_cv"))))));
        Formula inc = f_exists(
            "_cp",
            f_and({f_edge("mddag", "x", "_cp"),
                   f_exists("_cq",
                            f_and({f_edge("mddag", "y", "_cq"),
                                   subst(subst(f.equal, "x", "_cp"), "y", "_cq"),
                                   f_edge("zeroddag", "_cp", "_cp"),
                                   f_edge("oneddag", "_cq", "_cq"),
                                   subst(side, "x", "_cp"), psi1a, psi1b,
                                   psi2}))}));
        return std::make_pair(inc, same);
    };
    std::tie(f.inc_m, f.same_m) = coordinate_formulas(f.left);
    std::tie(f.inc_n, f.same_n) = coordinate_formulas(f.right);

    // mark(src, var): mdag^(2^(n+1)) path landing on a marked tile.
    auto mark_of = [&](const std::string& src, const std::string& var) {
        return f_and({f_path({{{"mdag"}, two_n1}}, src, var),
                      subst(f.marked, "x", var)});
    };

    // sol(x): grid, unique labels per cell, horizontal and vertical
    // matching successors.
    {
        std::vector<Formula> label_agree;
        for (const std::string& t : s.tiles)
            label_agree.push_back(f_iff(subst(f.label.at(t), "x", "_sy"),
                                        subst(f.label.at(t), "x", "_sz")));
        Formula uniq = f_forall(
            "_sy",
            f_implies(mark_of("x", "_sy"),
                      f_forall("_sz", f_implies(
                                          f_and({mark_of("x", "_sz"),
                                                 subst(subst(f.same_m, "x", "_sy"),
                                                       "y", "_sz"),
                                                 subst(subst(f.same_n, "x", "_sy"),
                                                       "y", "_sz")}),
                                          f_and(label_agree)))));
        auto successor_clause = [&](const Formula& inc, const Formula& same,
                                    const Formula& edge_side,
                                    const std::set<std::pair<int, int>>& pairs) {
            // Guard: some selected side-position carries a zero, i.e. the
            // coordinate is below its maximum.
            Formula can_grow = f_exists(
                "_sw", f_and({f_edge("mddag", "_sy", "_sw"),
                              f_edge("zeroddag", "_sw", "_sw"),
                              subst(edge_side, "x", "_sw")}));
            std::vector<Formula> pair_alts;
            for (const auto& [t1, t2] : pairs)
                pair_alts.push_back(
                    f_and({subst(f.label.at(f.system.tiles[t1]), "x", "_sy"),
                           subst(f.label.at(f.system.tiles[t2]), "x", "_sp")}));
            Formula next = f_exists(
                "_sp", f_and({mark_of("x", "_sp"),
                              subst(subst(inc, "x", "_sy"), "y", "_sp"),
                              subst(subst(same, "x", "_sy"), "y", "_sp"),
                              f_or(pair_alts)}));
            return f_forall(
                "_sy", f_implies(f_and({mark_of("x", "_sy"), can_grow}), next));
        };
        Formula horiz =
            successor_clause(f.inc_m, f.same_n, f.left, f.system.horiz);
        Formula vert = successor_clause(f.inc_n, f.same_m, f.right, f.system.vert);
        f.sol = f_and({f.grid, uniq, horiz, vert});
    }

    // ext(x, y): y's bottom row repeats x's top row.
    {
        Formula toprow = f_forall(
            "_ez", f_implies(f_and({f_edge("mddag", "_eu", "_ez"),
                                    subst(f.right, "x", "_ez")}),
                             f_edge("oneddag", "_ez", "_ez")));
        Formula bottomrow = f_forall(
            "_ez", f_implies(f_and({f_edge("mddag", "_ev", "_ez"),
                                    subst(f.right, "x", "_ez")}),
                             f_edge("zeroddag", "_ez", "_ez")));
        std::vector<Formula> label_agree;
        for (const std::string& t : s.tiles)
            label_agree.push_back(f_iff(subst(f.label.at(t), "x", "_eu"),
                                        subst(f.label.at(t), "x", "_ev")));
        f.ext = f_forall(
            "_eu",
            f_implies(
                f_and({mark_of("x", "_eu"), toprow}),
                f_forall("_ev",
                         f_implies(f_and({mark_of("y", "_ev"), bottomrow,
                                          subst(subst(f.same_m, "x", "_eu"), "y",
                                                "_ev")}),
                                   f_and(label_agree)))));
    }
    return f;
}

Formula gen_word_formula(const TilingFormulas& f, const std::vector<int>& w) {
    if (w.size() != f.n)
        throw InputError("word length must equal n");
    std::uint64_t two_n1 = 1ULL << (f.n + 1);
    auto mark_of = [&](const std::string& src, const std::string& var) {
        return f_and({f_path({{{"mdag"}, two_n1}}, src, var),
                      subst(f.marked, "x", var)});
    };
    auto yvar = [&](std::size_t j) { return "_wy" + std::to_string(j); };
    // Innermost first: y_{n-1} ... y_0 nested existentials.
    Formula body = f_true();
    for (std::size_t j = w.size(); j-- > 0;) {
        std::vector<Formula> conj{
            mark_of("x", yvar(j)),
            subst(f.label.at(f.system.tiles[w[j]]), "x", yvar(j))};
        if (j == 0) {
            // Cell (0,0): every selected position reads zero.
            conj.push_back(f_forall(
                "_wz", f_implies(f_edge("mddag", yvar(0), "_wz"),
                                 f_edge("zeroddag", "_wz", "_wz"))));
        } else {
            conj.push_back(
                subst(subst(f.inc_m, "x", yvar(j - 1)), "y", yvar(j)));
            conj.push_back(
                subst(subst(f.same_n, "x", yvar(j - 1)), "y", yvar(j)));
        }
        if (body->kind != FKind::True) conj.push_back(body);
        body = f_exists(yvar(j), f_and(conj));
    }
    return body;
}

Formula gen_sentence(const TilingFormulas& f, const std::vector<int>& w) {
    return f_exists("x", f_and({f.sol, gen_word_formula(f, w)}));
}

Formula gen_alternating(const TilingSystem& s, const std::vector<int>& w) {
    if (w.size() % 2 == 0) throw InputError("alternating instances need odd n");
    TilingFormulas f = gen_formulas(s, static_cast<unsigned>(w.size()));
    auto xvar = [&](std::size_t j) { return "_ax" + std::to_string(j); };
    std::size_t n = w.size();
    Formula tail = f_true();
    for (std::size_t j = n; j-- > 1;) {
        Formula sol_j = subst(f.sol, "x", xvar(j));
        Formula ext_j =
            subst(subst(f.ext, "x", xvar(j - 1)), "y", xvar(j));
        bool existential = (j % 2) == 0;  // x_1, x_3, ... are existential
        if (existential) {
            std::vector<Formula> conj{sol_j, ext_j};
            if (tail->kind != FKind::True) conj.push_back(tail);
            tail = f_exists(xvar(j), f_and(conj));
        } else {
            tail = f_forall(xvar(j), f_implies(f_and({sol_j, ext_j}), tail));
        }
    }
    std::vector<Formula> top{subst(f.sol, "x", xvar(0)),
                             subst(gen_word_formula(f, w), "x", xvar(0))};
    if (tail->kind != FKind::True) top.push_back(tail);
    return f_exists(xvar(0), f_and(top));
}

// ── The marking-lattice hook ────────────────────────────────────────────────

CandidateHook tiling_hook(const TilingSystem& s) {
    return [s](const Gtrs&, const Tree& src, const std::vector<PathBlock>& blocks,
               const std::vector<Formula>& siblings,
               const std::string& var) -> std::optional<std::vector<Tree>> {
        // Pattern: a single mdag-power block of at least 2 steps, filtered
        // by a marked(.)-shaped sibling (a forall whose hypothesis selects
        // the quantified variable via mddag).
        if (blocks.size() != 1 || blocks[0].count < 2) return std::nullopt;
        if (blocks[0].actions != std::set<std::string>{"mdag"}) return std::nullopt;
        bool has_marked_filter = false;
        std::function<bool(const Formula&)> mentions_mddag_from_var =
            [&](const Formula& g) {
                if (g->kind == FKind::Edge && g->action == "mddag" &&
                    g->var1 == var)
                    return true;
                for (const Formula& k : g->kids)
                    if (mentions_mddag_from_var(k)) return true;
                return false;
            };
        for (const Formula& sib : siblings)
            if (sib->kind == FKind::Forall && mentions_mddag_from_var(sib))
                has_marked_filter = true;
        if (!has_marked_filter) return std::nullopt;

        // Complete one tile subtree: src's stray marks doom marked(.)
        // anyway, so only tiles that absorb every existing mark count.
        std::uint64_t steps = blocks[0].count;
        std::size_t total_marks = 0;
        std::function<void(const Tree&)> count_marks = [&](const Tree& t) {
            if (t.children().empty()) {
                if (t.symbol() == "onedag" || t.symbol() == "zerodag")
                    ++total_marks;
                return;
            }
            for (const Tree& c : t.children()) count_marks(c);
        };
        count_marks(src);

        std::vector<Tree> out;
        for (const NodePath& path : tile_subtree_paths(s, src)) {
            Tree tile = subtree(src, path);
            std::size_t unmarked = 0, marked_here = 0;
            bool clean = true;
            std::function<void(const Tree&)> scan = [&](const Tree& t) {
                if (t.children().empty()) {
                    if (t.symbol() == "one" || t.symbol() == "zero")
                        ++unmarked;
                    else if (t.symbol() == "onedag" || t.symbol() == "zerodag")
                        ++marked_here;
                    else
                        clean = false;
                    return;
                }
                for (const Tree& c : t.children()) scan(c);
            };
            scan(tile);
            if (!clean) continue;
            if (marked_here != total_marks) continue;  // stray marks elsewhere
            if (unmarked != steps) continue;
            out.push_back(replace(src, path, mark_tile(tile)));
        }
        return out;
    };
}

}  // namespace gtrw
