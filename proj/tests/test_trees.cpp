#include "doctest.h"

#include <algorithm>
#include <random>

#include "gtrw/trees.hpp"

using namespace gtrw;

namespace {

RankedAlphabet binary_alphabet() {
    RankedAlphabet a;
    a.add("a", 0);
    a.add("b", 0);
    a.add("bullet", 2);
    return a;
}

Tree T(const std::string& s) { return parse_term(s); }

// Independent oracle: fixpoint over buildable leaf counts. A count is
// reachable iff it is 1 or the sum of q reachable counts for a rank q.
bool exists_tree_with_n_leaves(const RankedAlphabet& a, std::size_t n,
                               std::size_t limit) {
    std::set<std::size_t> reach{1};
    bool grew = true;
    while (grew) {
        grew = false;
        std::set<std::size_t> snapshot = reach;
        for (unsigned q : a.ranks()) {
            std::function<void(unsigned, std::size_t)> go = [&](unsigned idx,
                                                                std::size_t sum) {
                if (sum > limit) return;
                if (idx == q) {
                    if (!reach.count(sum)) {
                        reach.insert(sum);
                        grew = true;
                    }
                    return;
                }
                for (std::size_t v : snapshot) go(idx + 1, sum + v);
            };
            go(0, 0);
        }
    }
    return reach.count(n) != 0;
}

}  // namespace

TEST_CASE("size counts domain nodes") {
    CHECK(tree_size(T("a")) == 1);
    CHECK(tree_size(T("bullet(a,bullet(a,a))")) == 5);
    CHECK(tree_size(T("bullet(bullet(a,a),bullet(a,a))")) == 7);
}

TEST_CASE("subtree extraction") {
    CHECK(subtree(T("bullet(a,b)"), {2}) == T("b"));
    CHECK(subtree(T("bullet(a,bullet(a,a))"), {2}) == T("bullet(a,a)"));
    Tree t = T("bullet(a,bullet(a,a))");
    CHECK(subtree(t, {}) == t);
    CHECK_THROWS_AS(subtree(T("a"), {1}), InputError);
}

TEST_CASE("replace") {
    CHECK(replace(T("bullet(a,b)"), {1}, T("b")) == T("bullet(b,b)"));
    CHECK(replace(T("a"), {}, T("bullet(a,a)")) == T("bullet(a,a)"));
    CHECK(replace(T("bullet(a,bullet(a,a))"), {2}, T("b")) == T("bullet(a,b)"));
    CHECK_THROWS_AS(replace(T("a"), {3}, T("a")), InputError);
}

TEST_CASE("diff = |D_s \\ D_t|") {
    CHECK(diff(T("bullet(a,a)"), T("a")) == 2);
    Tree t = T("bullet(a,bullet(b,a))");
    CHECK(diff(t, t) == 0);
    CHECK(diff(T("bullet(a,bullet(a,a))"), T("bullet(bullet(a,a),a)")) == 2);
}

TEST_CASE("up") {
    auto u = up(T("bullet(a,bullet(a,a))"), 2);
    CHECK(u == std::vector<NodePath>{{}, {2}});
    Tree t = T("bullet(bullet(a,a),a)");
    CHECK(up(t, tree_size(t)).empty());
    CHECK(up(T("a"), 0) == std::vector<NodePath>{{}});
}

TEST_CASE("cut") {
    TreeString w = cut(T("bullet(a,bullet(a,b))"), {{}, {2}});
    REQUIRE(w.size() == 3);
    CHECK(w[0] == T("a"));
    CHECK(w[1] == T("a"));
    CHECK(w[2] == T("b"));

    Tree t = T("bullet(a,bullet(a,a))");
    TreeString whole = cut(t, {});
    REQUIRE(whole.size() == 1);
    CHECK(whole[0] == t);

    TreeString both = cut(T("bullet(a,a)"), {{}});
    CHECK(both == TreeString{T("a"), T("a")});

    CHECK_THROWS_AS(cut(T("bullet(a,a)"), {{1}}), InputError);        // not prefix-closed
    CHECK_THROWS_AS(cut(T("a"), {{}, {1}}), InputError);              // outside domain
}

TEST_CASE("up is prefix-closed and cut lists each boundary subtree once") {
    std::mt19937_64 rng(19);
    RankedAlphabet a = binary_alphabet();
    auto trees = enumerate_trees(a, 9);
    std::uniform_int_distribution<std::size_t> pick(0, trees.size() - 1);
    for (int iter = 0; iter < 150; ++iter) {
        Tree t = trees[pick(rng)];
        std::uniform_int_distribution<std::size_t> thr(0, tree_size(t));
        auto u = up(t, thr(rng));
        std::set<NodePath> uset(u.begin(), u.end());
        for (const NodePath& p : u)
            if (!p.empty())
                CHECK(uset.count(NodePath(p.begin(), p.end() - 1)));
        // Boundary nodes (not in up, parent in up or root) appear exactly
        // once as cut roots.
        std::size_t boundary = 0;
        for (const NodePath& p : domain(t)) {
            if (uset.count(p)) continue;
            bool parent_in = p.empty() ? uset.count({}) != 0
                                       : uset.count(NodePath(p.begin(), p.end() - 1));
            if (p.empty() || parent_in) ++boundary;
        }
        TreeString w = cut(t, u);
        if (uset.empty())
            CHECK(w.size() == 1);
        else
            CHECK(w.size() == boundary);
    }
}

TEST_CASE("norm of cut plus cut-set size equals tree size") {
    std::mt19937_64 rng(7);
    RankedAlphabet a = binary_alphabet();
    auto trees = enumerate_trees(a, 7);
    std::uniform_int_distribution<std::size_t> pick(0, trees.size() - 1);
    for (int iter = 0; iter < 200; ++iter) {
        Tree t = trees[pick(rng)];
        // Random prefix-closed subset: random threshold through up().
        std::uniform_int_distribution<std::size_t> thr(0, tree_size(t));
        auto c = up(t, thr(rng));
        TreeString w = cut(t, c);
        CHECK(norm(w) + c.size() == tree_size(t));
    }
}

TEST_CASE("leaf_count_feasible matches M") {
    RankedAlphabet tern;
    tern.add("a", 0);
    tern.add("f", 3);
    CHECK(leaf_count_feasible(tern, 1));
    CHECK_FALSE(leaf_count_feasible(tern, 4));  // M = odd numbers
    CHECK(leaf_count_feasible(tern, 5));

    RankedAlphabet bin = binary_alphabet();
    CHECK(leaf_count_feasible(bin, 1));
    CHECK(leaf_count_feasible(bin, 5));
    CHECK_THROWS_AS(leaf_count_feasible(bin, 0), InputError);
}

TEST_CASE("make_chain") {
    RankedAlphabet bin = binary_alphabet();
    Tree c3 = make_chain(bin, 3);
    CHECK(leaf_count(c3) == 3);
    CHECK(is_chain(c3));

    Tree single = make_chain(bin, 1);
    CHECK(tree_size(single) == 1);

    RankedAlphabet mix;
    mix.add("a", 0);
    mix.add("f", 2);
    mix.add("g", 3);
    Tree c4 = make_chain(mix, 4);  // 1 + 1*1 + 1*2 = 4
    CHECK(leaf_count(c4) == 4);
    CHECK(is_chain(c4));

    RankedAlphabet tern;
    tern.add("a", 0);
    tern.add("f", 3);
    CHECK_THROWS_AS(make_chain(tern, 4), InputError);
}

TEST_CASE("number-leaves equivalence on small alphabets") {
    // feasible(n) <=> enumeration finds a tree with n leaves <=> make_chain works.
    std::vector<RankedAlphabet> alphabets;
    {
        RankedAlphabet a;
        a.add("c", 0);
        a.add("f", 2);
        alphabets.push_back(a);
    }
    {
        RankedAlphabet a;
        a.add("c", 0);
        a.add("g", 3);
        alphabets.push_back(a);
    }
    {
        RankedAlphabet a;
        a.add("c", 0);
        a.add("d", 0);
        a.add("g", 3);
        a.add("h", 4);
        alphabets.push_back(a);
    }
    for (const auto& a : alphabets) {
        for (std::uint64_t n = 1; n <= 12; ++n) {
            bool feasible = leaf_count_feasible(a, n);
            bool found = exists_tree_with_n_leaves(a, n, 12);
            CHECK(feasible == found);
            if (feasible) {
                Tree t = make_chain(a, n);
                CHECK(leaf_count(t) == n);
                CHECK((n == 1 || is_chain(t)));
            } else {
                CHECK_THROWS_AS(make_chain(a, n), InputError);
            }
        }
    }
}

TEST_CASE("cut length lies in M") {
    std::mt19937_64 rng(11);
    RankedAlphabet a;
    a.add("c", 0);
    a.add("g", 3);
    auto trees = enumerate_trees(a, 10);
    std::uniform_int_distribution<std::size_t> pick(0, trees.size() - 1);
    for (int iter = 0; iter < 200; ++iter) {
        Tree t = trees[pick(rng)];
        // Threshold >= 1 keeps the leaves, so the cut string is non-empty
        // (C = D_t would give the empty string, whose length 0 is not in M).
        std::uniform_int_distribution<std::size_t> thr(1, tree_size(t));
        auto c = up(t, thr(rng));
        CHECK(leaf_count_feasible(a, cut(t, c).size()));
    }
}

TEST_CASE("int_max") {
    RankedAlphabet bin = binary_alphabet();
    CHECK(int_max(bin, 4) == IntOrInf::finite(3));

    RankedAlphabet unary;
    unary.add("a", 0);
    unary.add("s", 1);
    unary.add("f", 2);
    CHECK(int_max(unary, 3).is_infinite);

    RankedAlphabet mix;
    mix.add("a", 0);
    mix.add("f", 2);
    mix.add("g", 3);
    CHECK(int_max(mix, 3) == IntOrInf::finite(2));

    CHECK_THROWS_AS(int_max(RankedAlphabet{{{"a", 0u}, {"g", 3u}}}, 4), InputError);
}

TEST_CASE("int_max agrees with enumeration") {
    // Brute-force oracle over all trees with m leaves.
    std::vector<RankedAlphabet> alphabets;
    {
        RankedAlphabet a;
        a.add("c", 0);
        a.add("f", 2);
        alphabets.push_back(a);
    }
    {
        RankedAlphabet a;
        a.add("c", 0);
        a.add("f", 2);
        a.add("g", 3);
        alphabets.push_back(a);
    }
    for (const auto& a : alphabets) {
        for (std::uint64_t m = 1; m <= 6; ++m) {
            if (!leaf_count_feasible(a, m)) continue;
            std::uint64_t best = 0;
            for (const Tree& t : enumerate_trees(a, 2 * m + 1, 5'000'000))
                if (leaf_count(t) == m)
                    best = std::max<std::uint64_t>(best, tree_size(t) - leaf_count(t));
            CHECK(int_max(a, m) == IntOrInf::finite(best));
        }
    }
}

TEST_CASE("int_max lower bound and binary exactness") {
    RankedAlphabet mix;
    mix.add("c", 0);
    mix.add("f", 2);
    mix.add("g", 3);
    unsigned p = mix.max_rank();
    for (std::uint64_t m = 1; m <= 8; ++m) {
        if (!leaf_count_feasible(mix, m)) continue;
        IntOrInf im = int_max(mix, m);
        REQUIRE_FALSE(im.is_infinite);
        CHECK(im.value >= (m - 1 + p - 2) / (p - 1));
    }
    RankedAlphabet bin = binary_alphabet();
    for (std::uint64_t m = 1; m <= 8; ++m)
        CHECK(int_max(bin, m) == IntOrInf::finite(m - 1));
}

TEST_CASE("enumerate_trees") {
    RankedAlphabet only_const;
    only_const.add("a", 0);
    CHECK(enumerate_trees(only_const, 3).size() == 1);

    RankedAlphabet ab;
    ab.add("a", 0);
    ab.add("b", 0);
    CHECK(enumerate_trees(ab, 1).size() == 2);

    RankedAlphabet small;
    small.add("a", 0);
    small.add("bullet", 2);
    auto ts = enumerate_trees(small, 3);
    REQUIRE(ts.size() == 2);
    CHECK(ts[0] == T("a"));
    CHECK(ts[1] == T("bullet(a,a)"));

    // |A|^n bound and the cap error.
    RankedAlphabet bin = binary_alphabet();
    auto all5 = enumerate_trees(bin, 5);
    CHECK(all5.size() <= 243);  // 3^5
    CHECK_THROWS_AS(enumerate_trees(bin, 9, 10), CapExceeded);
}

TEST_CASE("replace/subtree round trips") {
    std::mt19937_64 rng(3);
    RankedAlphabet a = binary_alphabet();
    auto trees = enumerate_trees(a, 7);
    std::uniform_int_distribution<std::size_t> pick(0, trees.size() - 1);
    for (int iter = 0; iter < 100; ++iter) {
        Tree t = trees[pick(rng)];
        auto dom = domain(t);
        std::uniform_int_distribution<std::size_t> node(0, dom.size() - 1);
        NodePath x = dom[node(rng)];
        CHECK(replace(t, x, subtree(t, x)) == t);
        Tree s = trees[pick(rng)];
        CHECK(subtree(replace(t, x, s), x) == s);
    }
}

TEST_CASE("term parsing and unicode folding") {
    CHECK(parse_term("\xE2\x80\xA2(a, b)") == T("bullet(a,b)"));
    CHECK(parse_term("\xE2\x99\xA5") == T("heart"));
    CHECK(to_string(T("bullet(a,bullet(a,b))")) == "bullet(a,bullet(a,b))");
    CHECK_THROWS_AS(parse_term("f(a"), InputError);
    CHECK_THROWS_AS(parse_term(""), InputError);

    RankedAlphabet a = binary_alphabet();
    CHECK_THROWS_AS(parse_term("bullet(a)", a), InputError);
    CHECK_THROWS_AS(parse_term("c", a), InputError);
}

TEST_CASE("alphabet file parsing") {
    RankedAlphabet a = parse_alphabet("a/0 b/0\nbullet/2  # binary\n");
    CHECK(a.rank("bullet") == 2);
    CHECK(a.symbols_of_rank(0).size() == 2);
    CHECK_THROWS_AS(parse_alphabet("f/2"), InputError);  // no constant
    CHECK_THROWS_AS(parse_alphabet("x"), InputError);
}
