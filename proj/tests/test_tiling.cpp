#include "doctest.h"

#include <functional>

#include "gtrw/tiling.hpp"
#include "test_support.hpp"

using namespace gtrw;

namespace {

bool teval(const Gtrs& r0, const TilingSystem& s, const Formula& f,
           const std::map<std::string, Tree>& env,
           std::uint64_t budget = 50'000'000) {
    GuardedOptions opts;
    opts.step_budget = budget;
    opts.hooks.push_back(tiling_hook(s));
    return eval_guarded(r0, f, env, opts);
}

// Mark the lex-th leaf (one/zero -> dag variants) anywhere in a tree.
Tree mark_leaf(const Tree& t, std::uint64_t lex) {
    std::uint64_t counter = 0;
    NodePath found;
    bool ok = false;
    std::function<void(const Tree&, NodePath&)> go = [&](const Tree& node,
                                                         NodePath& path) {
        if (ok) return;
        if (node.children().empty()) {
            if (counter++ == lex) {
                found = path;
                ok = true;
            }
            return;
        }
        for (unsigned i = 1; i <= node.children().size(); ++i) {
            path.push_back(i);
            go(node.children()[i - 1], path);
            path.pop_back();
        }
    };
    NodePath path;
    go(t, path);
    REQUIRE(ok);
    const std::string& sym = subtree(t, found).symbol();
    REQUIRE((sym == "one" || sym == "zero"));
    return replace(t, found, Tree::leaf(sym + "dag"));
}

}  // namespace

TEST_CASE("tiling systems and brute solutions") {
    TilingSystem cb = checkerboard_system();
    CHECK(brute_solutions(cb, 2, {}).size() == 2);
    CHECK(brute_solutions(cb, 2, {0}).size() == 1);

    TilingSystem empty;
    empty.tiles = {"a", "b"};
    CHECK(brute_solutions(empty, 2, {}).empty());

    for (const Solution& sol : brute_solutions(cb, 3, {}))
        CHECK(sol.valid(cb));

    CHECK_THROWS_AS(brute_solutions(cb, 5, {}), InputError);
    CHECK_THROWS_AS(brute_solutions(cb, 2, {0, 1, 0}), InputError);

    TilingSystem parsed = parse_tiling(to_string(cb));
    CHECK(parsed.tiles == cb.tiles);
    CHECK(parsed.horiz == cb.horiz);

    TilingSystem bad;
    bad.tiles = {"heart"};
    CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("r0 rules") {
    TilingSystem cb = checkerboard_system();
    Gtrs r0 = r0_gtrs(cb);
    // 7 constant loops + 2 mark + 2 select + 2 erase + 1 collapse +
    // 2*|tiles| label loops + 2 right + 2 left.
    CHECK(r0.rules().size() == 7 + 6 + 1 + 2 * cb.tiles.size() + 4);
    CHECK(r0.actions().count("mdag"));
    CHECK(r0.actions().count("t0"));
    CHECK(r0.actions().count("oneddag"));
    CHECK(r0.max_rule_size() == 3);

    // Rule (1): the constant loop marks containment of that constant.
    Tree zero = parse_term("zero");
    CHECK(has_edge(r0, zero, "zero", zero));
    Tree t = parse_term("bullet(one,zero)");
    CHECK(has_edge(r0, t, "one", t));
    CHECK_FALSE(has_edge(r0, t, "heart", t));
}

TEST_CASE("tile trees") {
    CHECK(build_tile_tree(1, "t0", 0, 0, false) ==
          parse_term("t0(bullet(bullet(zero,zero),bullet(zero,zero)))"));
    // M = 1: bit 0 of M sits at the leftmost pair's left child.
    CHECK(build_tile_tree(1, "t0", 1, 0, false) ==
          parse_term("t0(bullet(bullet(one,zero),bullet(zero,zero)))"));
    CHECK(build_tile_tree(1, "t0", 0, 2, false) ==
          parse_term("t0(bullet(bullet(zero,zero),bullet(zero,one)))"));
    for (unsigned n = 0; n <= 2; ++n)
        CHECK(leaf_count(build_tile_tree(n, "t0", 0, 0, false)) == (1u << (n + 1)));

    Tree marked = build_tile_tree(1, "t0", 2, 1, true);
    CHECK(marked == parse_term(
                        "t0(bullet(bullet(zerodag,onedag),bullet(onedag,zerodag)))"));
    Tree sel = select_leaf(marked, 2);
    CHECK(sel ==
          parse_term("t0(bullet(bullet(zerodag,onedag),bullet(oneddag,zerodag)))"));
    CHECK_THROWS_AS(select_leaf(build_tile_tree(1, "t0", 0, 0, false), 0),
                    InputError);
    CHECK_THROWS_AS(build_tile_tree(1, "t0", 4, 0, false), InputError);
    CHECK_THROWS_AS(build_tile_tree(9, "t0", 0, 0, false), InputError);
}

TEST_CASE("grid trees") {
    TilingSystem cb = checkerboard_system();
    Solution sol = brute_solutions(cb, 4, {})[0];
    Tree grid = build_grid_tree(cb, 1, sol);
    auto paths = tile_subtree_paths(cb, grid);
    CHECK(paths.size() == 16);
    // Every leaf sits inside a tile subtree labelled one/zero.
    std::function<void(const Tree&)> scan = [&](const Tree& t) {
        if (t.children().empty())
            CHECK((t.symbol() == "one" || t.symbol() == "zero"));
        for (const Tree& c : t.children()) scan(c);
    };
    scan(grid);

    Tree marked = mark_cell(cb, grid, 3);
    CHECK(subtree(marked, paths[3]).symbol() == cb.tiles[sol.grid[3]]);
    CHECK_THROWS_AS(mark_cell(cb, grid, 99), InputError);
    CHECK_THROWS_AS(build_grid_tree(cb, 2, sol), InputError);
}

TEST_CASE("marked formula at n = 1") {
    TilingSystem cb = checkerboard_system();
    Gtrs r0 = r0_gtrs(cb);
    TilingFormulas f = gen_formulas(cb, 1);
    CHECK(is_guarded(f.marked));

    // A fully marked tile tree satisfies marked.
    Tree good = build_tile_tree(1, "t0", 2, 1, true);
    CHECK(teval(r0, cb, f.marked, {{"x", good}}));

    // Four marks spread over two tile subtrees of a grid tree do not.
    Solution sol = brute_solutions(cb, 4, {})[0];
    Tree grid = build_grid_tree(cb, 1, sol);
    Tree scattered = mark_leaf(mark_leaf(mark_leaf(mark_leaf(grid, 0), 1), 4), 5);
    CHECK_FALSE(teval(r0, cb, f.marked, {{"x", scattered}}));

    // Hook agrees with the raw marking-lattice search at tile-tree scale.
    GuardedOptions plain;
    plain.step_budget = 50'000'000;
    Tree half = mark_leaf(mark_leaf(build_tile_tree(1, "t0", 1, 3, false), 0), 2);
    Formula complete = f_exists(
        "z", f_and({f_path({{{"mdag"}, 2}}, "x", "z"),
                    substitute_var(f.marked, "x", "z")}));
    bool with_hook = teval(r0, cb, complete, {{"x", half}});
    bool without = eval_guarded(r0, complete, {{"x", half}}, plain);
    CHECK(with_hook == without);
    CHECK(with_hook);
}

TEST_CASE("grid formula") {
    TilingSystem cb = checkerboard_system();
    Gtrs r0 = r0_gtrs(cb);
    TilingFormulas f = gen_formulas(cb, 1);
    CHECK(is_guarded(f.grid));

    // A single tile tree is a grid tree.
    CHECK(teval(r0, cb, f.grid, {{"x", build_tile_tree(1, "t0", 2, 3, false)}}));
    // A bare pair without a tile root is not.
    CHECK_FALSE(teval(r0, cb, f.grid, {{"x", parse_term("bullet(one,zero)")}}));
    // Pre-marked leaves disqualify via the constant self-loop clause.
    CHECK_FALSE(teval(r0, cb, f.grid,
                      {{"x", mark_leaf(build_tile_tree(1, "t0", 0, 0, false), 1)}}));
}

TEST_CASE("bit formulas read the selected lex position") {
    TilingSystem cb = checkerboard_system();
    Gtrs r0 = r0_gtrs(cb);
    TilingFormulas f = gen_formulas(cb, 1);
    Tree marked = build_tile_tree(1, "t0", 1, 2, true);
    for (std::uint64_t q = 0; q < 4; ++q) {
        Tree sel = select_leaf(marked, q);
        CHECK(teval(r0, cb, f.bit[0], {{"x", sel}}) == ((q >> 0) & 1));
        CHECK(teval(r0, cb, f.bit[1], {{"x", sel}}) == ((q >> 1) & 1));
    }
}

TEST_CASE("left and right") {
    TilingSystem cb = checkerboard_system();
    Gtrs r0 = r0_gtrs(cb);
    TilingFormulas f = gen_formulas(cb, 1);
    Tree marked = build_tile_tree(1, "t0", 3, 3, true);
    for (std::uint64_t q = 0; q < 4; ++q) {
        Tree sel = select_leaf(marked, q);
        CHECK(teval(r0, cb, f.left, {{"x", sel}}) == (q % 2 == 0));
        CHECK(teval(r0, cb, f.right, {{"x", sel}}) == (q % 2 == 1));
    }
}

TEST_CASE("comparison formulas over all selected pairs") {
    TilingSystem cb = checkerboard_system();
    Gtrs r0 = r0_gtrs(cb);
    TilingFormulas f = gen_formulas(cb, 1);
    Tree m1 = build_tile_tree(1, "t0", 1, 2, true);
    Tree m2 = build_tile_tree(1, "t1", 3, 0, true);
    for (std::uint64_t a = 0; a < 4; ++a)
        for (std::uint64_t b = 0; b < 4; ++b) {
            Tree sa = select_leaf(m1, a);
            Tree sb = select_leaf(m2, b);
            CHECK(teval(r0, cb, f.less, {{"x", sa}, {"y", sb}}) == (a < b));
            CHECK(teval(r0, cb, f.equal, {{"x", sa}, {"y", sb}}) == (a == b));
        }
}

TEST_CASE("tile label formulas") {
    TilingSystem cb = checkerboard_system();
    Gtrs r0 = r0_gtrs(cb);
    TilingFormulas f = gen_formulas(cb, 1);
    Tree t0 = build_tile_tree(1, "t0", 2, 2, true);
    Tree t1 = build_tile_tree(1, "t1", 2, 2, true);
    CHECK(teval(r0, cb, f.label.at("t0"), {{"x", t0}}));
    CHECK_FALSE(teval(r0, cb, f.label.at("t1"), {{"x", t0}}));
    CHECK(teval(r0, cb, f.label.at("t1"), {{"x", t1}}));
}

TEST_CASE("column increment table") {
    // phi_{1,M} truth over all 16 (M, M') pairs with N = N'.
    TilingSystem cb = checkerboard_system();
    Gtrs r0 = r0_gtrs(cb);
    TilingFormulas f = gen_formulas(cb, 1);
    for (std::uint64_t m1 = 0; m1 < 4; ++m1)
        for (std::uint64_t m2 = 0; m2 < 4; ++m2) {
            Tree a = build_tile_tree(1, "t0", m1, 2, true);
            Tree b = build_tile_tree(1, "t1", m2, 2, true);
            CHECK(teval(r0, cb, f.inc_m, {{"x", a}, {"y", b}}) == (m1 + 1 == m2));
            CHECK(teval(r0, cb, f.same_m, {{"x", a}, {"y", b}}) == (m1 == m2));
        }
    // Row variants mirror with N.
    Tree a = build_tile_tree(1, "t0", 1, 1, true);
    Tree b = build_tile_tree(1, "t0", 1, 2, true);
    CHECK(teval(r0, cb, f.inc_n, {{"x", a}, {"y", b}}));
    CHECK_FALSE(teval(r0, cb, f.inc_n, {{"x", b}, {"y", a}}));
    CHECK(teval(r0, cb, f.same_n, {{"x", a}, {"y", a}}));
}

TEST_CASE("alternating sentence shapes") {
    TilingSystem cb = checkerboard_system();
    Formula a1 = gen_alternating(cb, {0});
    CHECK(a1->kind == FKind::Exists);
    CHECK(is_closed(a1));

    Formula a3 = gen_alternating(cb, {0, 1, 0});
    // Quantifier pattern over the solution variables: exists, forall, exists.
    Formula cur = a3;
    CHECK(cur->kind == FKind::Exists);
    std::function<const FormulaNode*(const Formula&, const std::string&)> find_q =
        [&](const Formula& g, const std::string& var) -> const FormulaNode* {
        if ((g->kind == FKind::Exists || g->kind == FKind::Forall) &&
            g->var1 == var)
            return g.get();
        for (const Formula& k : g->kids)
            if (const FormulaNode* hit = find_q(k, var)) return hit;
        return nullptr;
    };
    const FormulaNode* q2 = find_q(a3, "_ax1");
    const FormulaNode* q3 = find_q(a3, "_ax2");
    REQUIRE(q2);
    REQUIRE(q3);
    CHECK(q2->kind == FKind::Forall);
    CHECK(q3->kind == FKind::Exists);

    CHECK_THROWS_AS(gen_alternating(cb, {0, 1}), InputError);

    // Size stays in hand as n grows (linear tail over shared bodies).
    CHECK(formula_size(a3) < 40 * formula_size(a1));
}

TEST_CASE("word formula pins the origin cell") {
    TilingSystem cb = checkerboard_system();
    TilingFormulas f = gen_formulas(cb, 1);
    Formula w0 = gen_word_formula(f, {1});
    CHECK(free_vars(w0) == std::set<std::string>{"x"});
    CHECK(is_guarded(w0));
    Formula sent = gen_sentence(f, {0});
    CHECK(is_closed(sent));
    CHECK_THROWS_AS(gen_word_formula(f, {0, 1}), InputError);
}

TEST_CASE("the whole family is guarded except the outermost sentence") {
    TilingSystem cb = checkerboard_system();
    TilingFormulas f = gen_formulas(cb, 1);
    for (const Formula& g : {f.marked, f.grid, f.less, f.equal, f.left, f.right,
                             f.inc_m, f.same_m, f.inc_n, f.same_n, f.sol, f.ext})
        CHECK(is_guarded(g));
    for (const Formula& b : f.bit) CHECK(is_guarded(b));
    for (const auto& [name, g] : f.label) CHECK(is_guarded(g));
    // The closed sentence starts with an unguarded existential.
    CHECK_FALSE(is_guarded(gen_sentence(f, {0})));
    CHECK_FALSE(is_guarded(gen_alternating(cb, {0})));
}
