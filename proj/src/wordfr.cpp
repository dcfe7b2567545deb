#include "gtrw/wordfr.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <variant>

namespace gtrw {

// ── Words and convolutions ──────────────────────────────────────────────────

TupleWord to_tuple_word(const Word& u) {
    TupleWord out;
    out.reserve(u.size());
    for (int a : u) out.push_back({a});
    return out;
}

Word tuple_track(const TupleWord& u, std::size_t track) {
    Word out;
    out.reserve(u.size());
    for (const Tuple& t : u) {
        if (track >= t.size()) throw InputError("tuple track out of range");
        out.push_back(t[track]);
    }
    return out;
}

TupleWord convolution(const TupleWord& u, const TupleWord& v) {
    if (u.size() != v.size())
        throw InputError("convolution needs words of equal length");
    TupleWord out;
    out.reserve(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        Tuple t = u[i];
        t.insert(t.end(), v[i].begin(), v[i].end());
        out.push_back(std::move(t));
    }
    return out;
}

TupleWord convolution(const Word& u, const Word& v) {
    return convolution(to_tuple_word(u), to_tuple_word(v));
}

bool equiv_d(const TupleWord& u, const TupleWord& v, std::uint64_t d) {
    if (d == 0) throw InputError("equiv_d needs d >= 1");
    std::map<Tuple, std::uint64_t> cu, cv;
    for (const Tuple& t : u) ++cu[t];
    for (const Tuple& t : v) ++cv[t];
    auto check = [&](const std::map<Tuple, std::uint64_t>& a,
                     const std::map<Tuple, std::uint64_t>& b) {
        for (const auto& [t, ca] : a) {
            auto it = b.find(t);
            std::uint64_t cb = it == b.end() ? 0 : it->second;
            if (ca != cb && !(ca >= d && cb >= d)) return false;
        }
        return true;
    };
    return check(cu, cv) && check(cv, cu);
}

bool equiv_d(const Word& u, const Word& v, std::uint64_t d) {
    return equiv_d(to_tuple_word(u), to_tuple_word(v), d);
}

std::uint64_t fr_bound(int n, unsigned exponent, std::uint64_t add) {
    const std::uint64_t cap = 1ULL << 62;
    std::uint64_t out = 1;
    for (unsigned i = 0; i < exponent; ++i) {
        if (out > cap / static_cast<std::uint64_t>(n)) return cap;
        out *= static_cast<std::uint64_t>(n);
    }
    return out > cap - add ? cap : out + add;
}

// ── Count-distribution witness (the combinatorial lemma) ────────────────────

Word solve_counts(const TupleWord& u, const Word& uprime, const TupleWord& v,
                  std::uint64_t alpha, int n_letters) {
    if (alpha == 0 || n_letters <= 0) throw InputError("solve_counts parameters");
    if (u.size() != uprime.size())
        throw InputError("solve_counts: |u| must equal |u'|");
    std::uint64_t an = alpha * static_cast<std::uint64_t>(n_letters);
    if (!equiv_d(u, v, an))
        throw InputError("solve_counts: u and v are not equiv_{alpha*n}");
    std::set<Tuple> letters;
    for (const Tuple& t : u) letters.insert(t);
    for (const Tuple& t : v) letters.insert(t);
    if (v.size() < an * letters.size())
        throw InputError("solve_counts: v shorter than alpha*n*|Gamma|");

    std::map<Tuple, std::map<int, std::uint64_t>> m;
    for (std::size_t i = 0; i < u.size(); ++i) ++m[u[i]][uprime[i]];
    std::map<Tuple, std::uint64_t> nv;
    for (const Tuple& t : v) ++nv[t];

    std::map<Tuple, std::map<int, std::uint64_t>> target;
    for (const Tuple& a : letters) {
        std::uint64_t msum = 0;
        for (const auto& [b, c] : m[a]) msum += c;
        std::uint64_t na = nv.count(a) ? nv[a] : 0;
        if (msum == na) {
            target[a] = m[a];
            continue;
        }
        if (msum < an || na < an)
            throw InputError("solve_counts: count mismatch outside the lemma cases");
        // Keep small counts exact, give every big letter alpha, then dump
        // the slack on the smallest big letter.
        std::map<int, std::uint64_t> ta;
        std::vector<int> bigs;
        std::uint64_t assigned = 0;
        for (const auto& [b, c] : m[a]) {
            if (c < alpha) {
                ta[b] = c;
                assigned += c;
            } else {
                bigs.push_back(b);
            }
        }
        if (bigs.empty()) throw InputError("solve_counts: no letter reaches alpha");
        if (na < assigned + alpha * bigs.size())
            throw InputError("solve_counts: target count too small");
        for (int b : bigs) ta[b] = alpha;
        ta[bigs.front()] += na - assigned - alpha * bigs.size();
        target[a] = std::move(ta);
    }

    std::map<Tuple, std::deque<int>> queues;
    for (const auto& [a, counts] : target) {
        std::deque<int>& q = queues[a];
        for (const auto& [b, c] : counts)
            for (std::uint64_t i = 0; i < c; ++i) q.push_back(b);
    }
    Word out;
    out.reserve(v.size());
    for (const Tuple& a : v) {
        std::deque<int>& q = queues[a];
        if (q.empty()) throw Error("solve_counts: internal queue exhausted");
        out.push_back(q.front());
        q.pop_front();
    }
    return out;
}

// ── The ==_{k,l} machinery ──────────────────────────────────────────────────

namespace {

// Indices grouped by equal length, in order of first occurrence.
std::vector<std::vector<std::size_t>> length_groups(const std::vector<Word>& ws) {
    std::vector<std::vector<std::size_t>> groups;
    std::map<std::size_t, std::size_t> seen;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        auto it = seen.find(ws[i].size());
        if (it == seen.end()) {
            seen[ws[i].size()] = groups.size();
            groups.push_back({i});
        } else {
            groups[it->second].push_back(i);
        }
    }
    return groups;
}

TupleWord convolve_group(const std::vector<Word>& ws,
                         const std::vector<std::size_t>& idx) {
    TupleWord out = to_tuple_word(ws[idx[0]]);
    for (std::size_t j = 1; j < idx.size(); ++j)
        out = convolution(out, to_tuple_word(ws[idx[j]]));
    return out;
}

}  // namespace

bool equiv_kl(const std::vector<Word>& us, const std::vector<Word>& vs, unsigned ell,
              int n) {
    if (us.size() != vs.size()) throw InputError("equiv_kl: tuple sizes differ");
    unsigned k = static_cast<unsigned>(us.size());
    if (k == 0) return true;
    std::uint64_t big = fr_bound(std::max(n, 2), k + ell + 1, 0);
    std::uint64_t alpha = fr_bound(std::max(n, 2), ell + 1, 0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if ((us[i].size() == us[j].size()) != (vs[i].size() == vs[j].size()))
                return false;
    for (std::size_t i = 0; i < k; ++i)
        if (us[i] != vs[i] && !(us[i].size() >= big && vs[i].size() >= big))
            return false;
    for (const auto& group : length_groups(us)) {
        // Condition (a) makes the vs-side convolution well defined; the
        // two sides may still have different lengths.
        TupleWord cu = convolve_group(us, group);
        TupleWord cv = convolve_group(vs, group);
        if (!equiv_d(cu, cv, alpha)) return false;
    }
    return true;
}

Word extend_witness(const std::vector<Word>& us, const std::vector<Word>& vs,
                    const Word& next, unsigned ell, int n) {
    if (ell == 0) throw InputError("extend_witness needs ell > 0");
    if (!equiv_kl(us, vs, ell, n))
        throw InputError("extend_witness: premise equiv_kl fails");
    unsigned k = static_cast<unsigned>(us.size());
    int n_eff = std::max(n, 2);
    std::uint64_t big = fr_bound(n_eff, k + ell + 1, 0);
    std::uint64_t alpha_small = fr_bound(n_eff, ell, 0);  // n^ell

    std::vector<std::size_t> group;
    for (std::size_t i = 0; i < k; ++i)
        if (us[i].size() == next.size()) group.push_back(i);

    if (group.empty()) {
        if (next.size() < big) return next;  // Case 1.1
        // Case 1.2: build a word of a fresh length lambda in [big, big+k].
        std::uint64_t lambda = big;
        for (; lambda <= big + k; ++lambda) {
            bool clash = false;
            for (const Word& v : vs) clash |= v.size() == lambda;
            if (!clash) break;
        }
        Word out = next;
        auto counts = [&]() {
            std::map<int, std::uint64_t> c;
            for (int a : out) ++c[a];
            return c;
        };
        if (lambda >= out.size()) {
            auto c = counts();
            int best = c.begin()->first;
            for (const auto& [a, cnt] : c)
                if (cnt > c[best]) best = a;
            while (out.size() < lambda) out.push_back(best);
        } else {
            while (out.size() > lambda) {
                auto c = counts();
                int pick = -1;
                for (const auto& [a, cnt] : c)
                    if (cnt > alpha_small && (pick < 0 || cnt > c[pick])) pick = a;
                if (pick < 0) throw Error("extend_witness: no removable letter");
                auto it = std::find(out.rbegin(), out.rend(), pick);
                out.erase(std::next(it).base());
            }
        }
        return out;
    }

    if (next.size() < big) return next;  // Case 2.1: group words are identical

    // Case 2.2: distribute counts against the group convolution.
    TupleWord cu = convolve_group(us, group);
    TupleWord cv = convolve_group(vs, group);
    return solve_counts(cu, next, cv, alpha_small, n);
}

// ── Quantifier-free evaluation over G+ ──────────────────────────────────────

bool word_edge(const FiniteLabelledGraph& g, const Word& u, int action,
               const Word& v) {
    if (u.size() != v.size()) return false;
    int mismatch = -1;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] != v[i]) {
            if (mismatch >= 0) return false;
            mismatch = static_cast<int>(i);
        }
    }
    if (mismatch >= 0) return g.has_edge(u[mismatch], action, v[mismatch]);
    // Equal words: one position rewritten through a self-loop.
    for (int a : u)
        if (g.has_edge(a, action, a)) return true;
    return false;
}

namespace {

const Word& env_word(const std::map<std::string, Word>& env, const std::string& v) {
    auto it = env.find(v);
    if (it == env.end()) throw InputError("unbound variable '" + v + "'");
    if (it->second.empty()) throw InputError("empty word bound to '" + v + "'");
    return it->second;
}

}  // namespace

bool qf_eval(const FiniteLabelledGraph& g, const Formula& f,
             const std::map<std::string, Word>& env) {
    switch (f->kind) {
        case FKind::True:
            return true;
        case FKind::False:
            return false;
        case FKind::Eq:
            return env_word(env, f->var1) == env_word(env, f->var2);
        case FKind::Edge: {
            int a = g.action_id(f->action);
            if (a < 0) return false;
            return word_edge(g, env_word(env, f->var1), a, env_word(env, f->var2));
        }
        case FKind::Path:
            return qf_eval(g, expand_paths(f), env);
        case FKind::Not:
            return !qf_eval(g, f->kids[0], env);
        case FKind::And:
            for (const Formula& k : f->kids)
                if (!qf_eval(g, k, env)) return false;
            return true;
        case FKind::Or:
            for (const Formula& k : f->kids)
                if (qf_eval(g, k, env)) return true;
            return false;
        case FKind::Implies:
            return !qf_eval(g, f->kids[0], env) || qf_eval(g, f->kids[1], env);
        case FKind::Iff:
            return qf_eval(g, f->kids[0], env) == qf_eval(g, f->kids[1], env);
        default:
            throw InputError("qf_eval: formula is not quantifier-free");
    }
}

// ── Symbolic engine ─────────────────────────────────────────────────────────
//
// Relations over k tracks are NFAs on padded convolution columns. A column
// assigns each track a letter digit or the pad digit n; valid words pad
// only at the end, start fully unpadded, and keep every track non-empty.

namespace {

using ColKey = std::uint64_t;

struct Rel {
    std::vector<std::string> vars;  // sorted
    int base = 0;                   // n + 1, pad digit = n
    std::vector<char> accepting;
    std::vector<std::map<ColKey, std::vector<int>>> trans;
    std::vector<int> initial;

    int add_state(bool acc) {
        accepting.push_back(acc ? 1 : 0);
        trans.emplace_back();
        return static_cast<int>(accepting.size()) - 1;
    }
    std::size_t states() const { return accepting.size(); }
};

struct SymbolicCtx {
    int n = 0;  // letters
    std::uint64_t max_states = 0;
    std::uint64_t created = 0;
    std::vector<FrQuantBound> bounds;

    void charge(std::size_t count) {
        created += count;
        if (created > max_states)
            throw CapExceeded("symbolic evaluator state budget", created);
    }
};

ColKey encode(const std::vector<int>& digits, int base) {
    ColKey key = 0;
    for (std::size_t i = digits.size(); i-- > 0;)
        key = key * static_cast<ColKey>(base) + static_cast<ColKey>(digits[i]);
    return key;
}

// Drop states that are unreachable or cannot reach acceptance. Keeping
// automata trimmed is what stops conjunction folds from blowing up: every
// doomed product state collapses away instead of multiplying.
Rel trim(const Rel& in) {
    std::size_t n = in.states();
    std::vector<char> fwd(n, 0);
    std::deque<int> queue;
    for (int s : in.initial)
        if (!fwd[s]) {
            fwd[s] = 1;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (const auto& [col, targets] : in.trans[s])
            for (int t : targets)
                if (!fwd[t]) {
                    fwd[t] = 1;
                    queue.push_back(t);
                }
    }
    // Backward from accepting states.
    std::vector<std::vector<int>> preds(n);
    for (std::size_t s = 0; s < n; ++s)
        for (const auto& [col, targets] : in.trans[s])
            for (int t : targets) preds[t].push_back(static_cast<int>(s));
    std::vector<char> bwd(n, 0);
    for (std::size_t s = 0; s < n; ++s)
        if (in.accepting[s]) {
            bwd[s] = 1;
            queue.push_back(static_cast<int>(s));
        }
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (int p : preds[s])
            if (!bwd[p]) {
                bwd[p] = 1;
                queue.push_back(p);
            }
    }
    std::vector<int> remap(n, -1);
    Rel out;
    out.vars = in.vars;
    out.base = in.base;
    for (std::size_t s = 0; s < n; ++s)
        if (fwd[s] && bwd[s]) remap[s] = out.add_state(in.accepting[s]);
    for (std::size_t s = 0; s < n; ++s) {
        if (remap[s] < 0) continue;
        for (const auto& [col, targets] : in.trans[s]) {
            std::vector<int>* slot = nullptr;
            for (int t : targets) {
                if (remap[t] < 0) continue;
                if (!slot) slot = &out.trans[remap[s]][col];
                slot->push_back(remap[t]);
            }
        }
    }
    for (int s : in.initial)
        if (remap[s] >= 0) out.initial.push_back(remap[s]);
    return out;
}

std::vector<int> decode(ColKey key, int base, std::size_t k) {
    std::vector<int> digits(k);
    for (std::size_t i = 0; i < k; ++i) {
        digits[i] = static_cast<int>(key % static_cast<ColKey>(base));
        key /= static_cast<ColKey>(base);
    }
    return digits;
}

Rel rel_eq(SymbolicCtx& ctx, const std::string& x, const std::string& y) {
    Rel r;
    r.vars = {x, y};
    std::sort(r.vars.begin(), r.vars.end());
    r.base = ctx.n + 1;
    int s0 = r.add_state(false);
    int s1 = r.add_state(true);
    ctx.charge(2);
    for (int c = 0; c < ctx.n; ++c) {
        ColKey col = encode({c, c}, r.base);
        r.trans[s0][col].push_back(s1);
        r.trans[s1][col].push_back(s1);
    }
    r.initial = {s0};
    return r;
}

Rel rel_edge(SymbolicCtx& ctx, const FiniteLabelledGraph& g, int action,
             const std::string& x, const std::string& y) {
    Rel r;
    r.base = ctx.n + 1;
    if (x == y) {
        // a(x,x): some position carries a self-loop.
        r.vars = {x};
        int pre = r.add_state(false);
        int post = r.add_state(true);
        ctx.charge(2);
        for (int c = 0; c < ctx.n; ++c) {
            ColKey col = encode({c}, r.base);
            r.trans[pre][col].push_back(pre);
            r.trans[post][col].push_back(post);
            if (g.has_edge(c, action, c)) r.trans[pre][col].push_back(post);
        }
        r.initial = {pre};
        return r;
    }
    r.vars = {x, y};
    std::sort(r.vars.begin(), r.vars.end());
    bool x_first = r.vars[0] == x;
    int pre = r.add_state(false);
    int post = r.add_state(true);
    ctx.charge(2);
    auto col_of = [&](int cx, int cy) {
        return encode(x_first ? std::vector<int>{cx, cy} : std::vector<int>{cy, cx},
                      r.base);
    };
    for (int c = 0; c < ctx.n; ++c) {
        r.trans[pre][col_of(c, c)].push_back(pre);
        r.trans[post][col_of(c, c)].push_back(post);
    }
    for (const auto& [s, a, d] : g.edges())
        if (a == action) r.trans[pre][col_of(s, d)].push_back(post);
    r.initial = {pre};
    return r;
}

// Restrict to the padding discipline: first column fully unpadded, padded
// tracks stay padded, no all-pad column; acceptance needs >= 1 column.
Rel valid_product(SymbolicCtx& ctx, const Rel& in) {
    Rel r;
    r.vars = in.vars;
    r.base = in.base;
    std::size_t k = in.vars.size();
    int pad = in.base - 1;
    unsigned full = (1u << k) - 1;
    // vstate: 0 = before the first column, else 1 + alive mask.
    std::map<std::pair<int, unsigned>, int> index;
    std::deque<std::pair<int, unsigned>> queue;
    auto intern = [&](int s, unsigned vs) {
        auto key = std::make_pair(s, vs);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = r.add_state(in.accepting[s] && vs != 0);
        ctx.charge(1);
        index[key] = id;
        queue.push_back(key);
        return id;
    };
    for (int s : in.initial) r.initial.push_back(intern(s, 0));
    while (!queue.empty()) {
        auto [s, vs] = queue.front();
        queue.pop_front();
        int id = index[{s, vs}];
        for (const auto& [col, targets] : in.trans[s]) {
            std::vector<int> digits = decode(col, in.base, k);
            unsigned mask = 0;
            for (std::size_t i = 0; i < k; ++i)
                if (digits[i] != pad) mask |= 1u << i;
            unsigned next_vs;
            if (vs == 0) {
                if (mask != full) continue;  // first column must be unpadded
                next_vs = 1 + full;
            } else {
                unsigned alive = vs - 1;
                if (mask == 0 || (mask & ~alive)) continue;  // no resurrection
                next_vs = 1 + mask;
            }
            for (int t : targets) r.trans[id][col].push_back(intern(t, next_vs));
        }
    }
    return trim(r);
}

// Extend to a larger track set: new tracks become unconstrained words.
Rel expand(SymbolicCtx& ctx, const Rel& in, const std::vector<std::string>& vars) {
    if (in.vars == vars) return in;
    Rel r;
    r.vars = vars;
    r.base = in.base;
    std::size_t k_new = vars.size();
    std::size_t k_old = in.vars.size();
    int pad = in.base - 1;
    int n = in.base - 1;
    std::vector<int> old_pos;
    for (const std::string& v : in.vars) {
        auto it = std::find(vars.begin(), vars.end(), v);
        if (it == vars.end()) throw Error("expand: target lacks a track");
        old_pos.push_back(static_cast<int>(it - vars.begin()));
    }
    std::vector<int> new_pos;
    for (std::size_t i = 0; i < k_new; ++i)
        if (std::find(old_pos.begin(), old_pos.end(), static_cast<int>(i)) ==
            old_pos.end())
            new_pos.push_back(static_cast<int>(i));

    for (std::size_t s = 0; s < in.states(); ++s) r.add_state(in.accepting[s]);
    int done = r.add_state(true);  // old tracks finished, new tracks running
    ctx.charge(in.states() + 1);
    r.initial = in.initial;

    // Every combination of digits (including pad) for the new tracks.
    std::vector<std::vector<int>> combos;
    if (new_pos.empty()) {
        combos = {{}};
    } else {
        std::vector<int> cur(new_pos.size(), 0);
        while (true) {
            combos.push_back(cur);
            std::size_t i = 0;
            for (; i < cur.size(); ++i) {
                if (cur[i] < n) {
                    ++cur[i];
                    break;
                }
                cur[i] = 0;
            }
            if (i == cur.size()) break;
        }
    }

    auto build_col = [&](const std::vector<int>& old_digits,
                         const std::vector<int>& new_digits) {
        std::vector<int> digits(k_new, pad);
        for (std::size_t i = 0; i < k_old; ++i) digits[old_pos[i]] = old_digits[i];
        for (std::size_t i = 0; i < new_pos.size(); ++i)
            digits[new_pos[i]] = new_digits[i];
        return encode(digits, r.base);
    };

    for (std::size_t s = 0; s < in.states(); ++s) {
        for (const auto& [col, targets] : in.trans[s]) {
            std::vector<int> old_digits = decode(col, in.base, k_old);
            for (const auto& combo : combos) {
                ColKey c = build_col(old_digits, combo);
                auto& slot = r.trans[s][c];
                for (int t : targets) slot.push_back(t);
            }
        }
        if (in.accepting[s] && !new_pos.empty()) {
            std::vector<int> old_pads(k_old, pad);
            for (const auto& combo : combos) {
                bool all_pad = std::all_of(combo.begin(), combo.end(),
                                           [&](int d) { return d == pad; });
                if (all_pad) continue;
                r.trans[s][build_col(old_pads, combo)].push_back(done);
            }
        }
    }
    if (!new_pos.empty()) {
        std::vector<int> old_pads(k_old, pad);
        for (const auto& combo : combos) {
            bool all_pad = std::all_of(combo.begin(), combo.end(),
                                       [&](int d) { return d == pad; });
            if (all_pad) continue;
            r.trans[done][build_col(old_pads, combo)].push_back(done);
        }
    }
    return valid_product(ctx, r);
}

Rel intersect(SymbolicCtx& ctx, const Rel& a, const Rel& b) {
    if (a.vars != b.vars || a.base != b.base)
        throw Error("intersect: mismatched track sets");
    Rel r;
    r.vars = a.vars;
    r.base = a.base;
    std::map<std::pair<int, int>, int> index;
    std::deque<std::pair<int, int>> queue;
    auto intern = [&](int sa, int sb) {
        auto key = std::make_pair(sa, sb);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = r.add_state(a.accepting[sa] && b.accepting[sb]);
        ctx.charge(1);
        index[key] = id;
        queue.push_back(key);
        return id;
    };
    for (int sa : a.initial)
        for (int sb : b.initial) r.initial.push_back(intern(sa, sb));
    while (!queue.empty()) {
        auto [sa, sb] = queue.front();
        queue.pop_front();
        int id = index[{sa, sb}];
        const auto& ta = a.trans[sa];
        const auto& tb = b.trans[sb];
        for (const auto& [col, da] : ta) {
            auto it = tb.find(col);
            if (it == tb.end()) continue;
            for (int x : da)
                for (int y : it->second) r.trans[id][col].push_back(intern(x, y));
        }
    }
    return trim(r);
}

Rel union_rel(SymbolicCtx& ctx, const Rel& a, const Rel& b) {
    if (a.vars != b.vars || a.base != b.base)
        throw Error("union: mismatched track sets");
    Rel r = a;
    int offset = static_cast<int>(a.states());
    ctx.charge(b.states());
    for (std::size_t s = 0; s < b.states(); ++s) r.add_state(b.accepting[s]);
    for (std::size_t s = 0; s < b.states(); ++s)
        for (const auto& [col, targets] : b.trans[s])
            for (int t : targets)
                r.trans[s + offset][col].push_back(t + offset);
    for (int i : b.initial) r.initial.push_back(i + offset);
    return trim(r);
}

bool rel_nonempty(const Rel& r) {
    std::vector<char> seen(r.states(), 0);
    std::deque<int> queue;
    for (int s : r.initial)
        if (!seen[s]) {
            seen[s] = 1;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        if (r.accepting[s]) return true;
        for (const auto& [col, targets] : r.trans[s])
            for (int t : targets)
                if (!seen[t]) {
                    seen[t] = 1;
                    queue.push_back(t);
                }
    }
    return false;
}

// All columns over k tracks except the all-pad one (which is invalid).
std::vector<ColKey> all_columns(int base, std::size_t k) {
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < k; ++i) {
        total *= static_cast<std::uint64_t>(base);
        if (total > 200'000)
            throw CapExceeded("complement alphabet too large", total);
    }
    std::vector<ColKey> out;
    out.reserve(total - 1);
    for (ColKey c = 0; c + 1 < total; ++c) out.push_back(c);
    return out;
}

Rel complement(SymbolicCtx& ctx, const Rel& in) {
    std::vector<ColKey> columns = all_columns(in.base, in.vars.size());
    std::map<std::vector<int>, int> index;
    std::vector<std::vector<int>> subsets;
    std::deque<int> queue;
    Rel det;
    det.vars = in.vars;
    det.base = in.base;
    auto intern = [&](std::vector<int> subset) {
        std::sort(subset.begin(), subset.end());
        subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
        auto it = index.find(subset);
        if (it != index.end()) return it->second;
        bool acc = false;
        for (int s : subset) acc |= in.accepting[s] != 0;
        int id = det.add_state(!acc);  // flipped acceptance
        ctx.charge(1);
        index[subset] = id;
        subsets.push_back(subset);
        queue.push_back(id);
        return id;
    };
    det.initial = {intern(in.initial)};
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        std::vector<int> subset = subsets[id];
        std::map<ColKey, std::vector<int>> merged;
        for (int s : subset)
            for (const auto& [col, targets] : in.trans[s]) {
                auto& slot = merged[col];
                slot.insert(slot.end(), targets.begin(), targets.end());
            }
        for (ColKey col : columns) {
            auto it = merged.find(col);
            std::vector<int> target =
                it == merged.end() ? std::vector<int>{} : it->second;
            det.trans[id][col].push_back(intern(std::move(target)));
        }
    }
    return valid_product(ctx, det);
}

// Counter product limiting the length of one track.
Rel length_restrict(SymbolicCtx& ctx, const Rel& in, const std::string& var,
                    std::uint64_t bound) {
    auto vit = std::find(in.vars.begin(), in.vars.end(), var);
    if (vit == in.vars.end()) return in;
    std::size_t vpos = static_cast<std::size_t>(vit - in.vars.begin());
    int pad = in.base - 1;
    Rel r;
    r.vars = in.vars;
    r.base = in.base;
    std::map<std::pair<int, std::uint64_t>, int> index;
    std::deque<std::pair<int, std::uint64_t>> queue;
    auto intern = [&](int s, std::uint64_t cnt) {
        auto key = std::make_pair(s, cnt);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = r.add_state(in.accepting[s]);
        ctx.charge(1);
        index[key] = id;
        queue.push_back(key);
        return id;
    };
    for (int s : in.initial) r.initial.push_back(intern(s, 0));
    while (!queue.empty()) {
        auto [s, cnt] = queue.front();
        queue.pop_front();
        int id = index[{s, cnt}];
        for (const auto& [col, targets] : in.trans[s]) {
            std::vector<int> digits = decode(col, in.base, in.vars.size());
            std::uint64_t next = cnt + (digits[vpos] != pad ? 1 : 0);
            if (next > bound) continue;
            for (int t : targets) r.trans[id][col].push_back(intern(t, next));
        }
    }
    return trim(r);
}

// Existential projection; assumes |vars| >= 2. Suffix columns where every
// remaining track is padded become invisible, handled by acceptance closure.
Rel project(SymbolicCtx& ctx, const Rel& in, const std::string& var) {
    auto vit = std::find(in.vars.begin(), in.vars.end(), var);
    if (vit == in.vars.end()) return in;
    std::size_t vpos = static_cast<std::size_t>(vit - in.vars.begin());
    std::size_t k = in.vars.size();
    int pad = in.base - 1;
    Rel r;
    r.vars = in.vars;
    r.vars.erase(r.vars.begin() + static_cast<std::ptrdiff_t>(vpos));
    r.base = in.base;
    for (std::size_t s = 0; s < in.states(); ++s) r.add_state(in.accepting[s]);
    ctx.charge(in.states());
    r.initial = in.initial;
    std::vector<std::vector<int>> tail(in.states());
    for (std::size_t s = 0; s < in.states(); ++s) {
        for (const auto& [col, targets] : in.trans[s]) {
            std::vector<int> digits = decode(col, in.base, k);
            bool others_pad = true;
            for (std::size_t i = 0; i < k; ++i)
                if (i != vpos && digits[i] != pad) others_pad = false;
            if (others_pad) {
                for (int t : targets) tail[s].push_back(t);
                continue;
            }
            digits.erase(digits.begin() + static_cast<std::ptrdiff_t>(vpos));
            ColKey c = encode(digits, r.base);
            for (int t : targets) r.trans[s][c].push_back(t);
        }
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t s = 0; s < in.states(); ++s) {
            if (r.accepting[s]) continue;
            for (int t : tail[s])
                if (r.accepting[t]) {
                    r.accepting[s] = 1;
                    changed = true;
                    break;
                }
        }
    }
    return trim(r);
}

using EvalValue = std::variant<bool, Rel>;

struct SymbolicEval {
    const FiniteLabelledGraph& g;
    SymbolicCtx& ctx;
    const FrOptions& opts;
    int n_eff;

    EvalValue val_not(EvalValue v) {
        if (std::holds_alternative<bool>(v)) return !std::get<bool>(v);
        return complement(ctx, std::get<Rel>(v));
    }

    EvalValue val_binary(EvalValue a, EvalValue b, bool conj) {
        if (std::holds_alternative<bool>(a)) {
            bool ba = std::get<bool>(a);
            if (conj) return ba ? b : EvalValue(false);
            return ba ? EvalValue(true) : b;
        }
        if (std::holds_alternative<bool>(b))
            return val_binary(std::move(b), std::move(a), conj);
        Rel ra = std::get<Rel>(std::move(a));
        Rel rb = std::get<Rel>(std::move(b));
        std::vector<std::string> vars;
        std::set_union(ra.vars.begin(), ra.vars.end(), rb.vars.begin(),
                       rb.vars.end(), std::back_inserter(vars));
        Rel ea = expand(ctx, ra, vars);
        Rel eb = expand(ctx, rb, vars);
        return conj ? intersect(ctx, ea, eb) : union_rel(ctx, ea, eb);
    }

    EvalValue quantify(bool is_forall, const std::string& var, EvalValue body,
                       std::uint64_t bound) {
        bool enforced = bound <= opts.counter_cap;
        ctx.bounds.push_back({var, bound, enforced});
        if (std::holds_alternative<bool>(body)) return body;  // universe non-empty
        Rel r = std::get<Rel>(std::move(body));
        if (std::find(r.vars.begin(), r.vars.end(), var) == r.vars.end())
            return r;  // vacuous quantifier
        if (is_forall) {
            Rel neg = complement(ctx, r);
            if (enforced) neg = length_restrict(ctx, neg, var, bound);
            if (neg.vars.size() == 1) return !rel_nonempty(neg);
            return complement(ctx, project(ctx, neg, var));
        }
        if (enforced) r = length_restrict(ctx, r, var, bound);
        if (r.vars.size() == 1) return rel_nonempty(r);
        return project(ctx, r, var);
    }

    EvalValue eval(const Formula& f, unsigned depth) {
        switch (f->kind) {
            case FKind::True:
                return true;
            case FKind::False:
                return false;
            case FKind::Eq:
                if (f->var1 == f->var2) return true;
                return rel_eq(ctx, f->var1, f->var2);
            case FKind::Edge: {
                int a = g.action_id(f->action);
                if (a < 0) return false;
                return rel_edge(ctx, g, a, f->var1, f->var2);
            }
            case FKind::Path:
                throw Error("paths must be expanded before symbolic evaluation");
            case FKind::Not:
                return val_not(eval(f->kids[0], depth));
            case FKind::And:
            case FKind::Or: {
                bool conj = f->kind == FKind::And;
                EvalValue acc(conj);
                for (const Formula& k : f->kids) {
                    if (std::holds_alternative<bool>(acc) &&
                        std::get<bool>(acc) != conj)
                        return acc;  // dominated
                    acc = val_binary(std::move(acc), eval(k, depth), conj);
                }
                return acc;
            }
            case FKind::Implies:
                return val_binary(val_not(eval(f->kids[0], depth)),
                                  eval(f->kids[1], depth), false);
            case FKind::Iff: {
                EvalValue a = eval(f->kids[0], depth);
                EvalValue b = eval(f->kids[1], depth);
                EvalValue both = val_binary(a, b, true);
                EvalValue neither = val_binary(val_not(a), val_not(b), true);
                return val_binary(std::move(both), std::move(neither), false);
            }
            case FKind::Exists:
            case FKind::Forall: {
                std::uint64_t bound =
                    fr_bound(n_eff, depth + qr(f->kids[0]) + 1, depth) +
                    opts.bound_bump;
                EvalValue body = eval(f->kids[0], depth + 1);
                return quantify(f->kind == FKind::Forall, f->var1, std::move(body),
                                bound);
            }
        }
        throw Error("unreachable");
    }
};

// ── Enumerative engine ──────────────────────────────────────────────────────

struct EnumEval {
    const FiniteLabelledGraph& g;
    const FrOptions& opts;
    int n_eff;
    std::uint64_t words = 0;
    std::vector<FrQuantBound> bounds;

    bool eval(const Formula& f, std::map<std::string, Word>& env, unsigned depth) {
        switch (f->kind) {
            case FKind::Not:
                return !eval(f->kids[0], env, depth);
            case FKind::And:
                for (const Formula& k : f->kids)
                    if (!eval(k, env, depth)) return false;
                return true;
            case FKind::Or:
                for (const Formula& k : f->kids)
                    if (eval(k, env, depth)) return true;
                return false;
            case FKind::Implies:
                return !eval(f->kids[0], env, depth) || eval(f->kids[1], env, depth);
            case FKind::Iff:
                return eval(f->kids[0], env, depth) == eval(f->kids[1], env, depth);
            case FKind::Exists:
            case FKind::Forall: {
                bool is_forall = f->kind == FKind::Forall;
                std::uint64_t bound =
                    fr_bound(n_eff, depth + qr(f->kids[0]) + 1, depth) +
                    opts.bound_bump;
                bounds.push_back({f->var1, bound, true});
                int n = g.node_count();
                auto prev = env.find(f->var1);
                std::optional<Word> saved;
                if (prev != env.end()) saved = prev->second;
                bool result = is_forall;
                Word w;
                for (std::uint64_t len = 1; len <= bound && result == is_forall;
                     ++len) {
                    w.assign(len, 0);
                    while (true) {
                        if (++words > opts.max_words)
                            throw CapExceeded("enumerative word budget", words);
                        env[f->var1] = w;
                        bool b = eval(f->kids[0], env, depth + 1);
                        if (b != is_forall) {
                            result = b;
                            break;
                        }
                        std::size_t i = len;  // odometer step
                        while (i > 0) {
                            if (++w[i - 1] < n) break;
                            w[i - 1] = 0;
                            --i;
                        }
                        if (i == 0) break;
                    }
                }
                if (saved)
                    env[f->var1] = *saved;
                else
                    env.erase(f->var1);
                return result;
            }
            default:
                return qf_eval(g, f, env);
        }
    }
};

}  // namespace

FrResult fr_evaluate(const FiniteLabelledGraph& g, const Formula& f,
                     const FrOptions& opts) {
    if (g.node_count() == 0) throw InputError("fr_evaluate: empty graph");
    if (!is_closed(f)) throw InputError("fr_evaluate: formula must be closed");
    if (has_domain_tags(f))
        throw InputError("fr_evaluate: domain tags must be compiled away first");
    Formula body = expand_paths(f);
    FrResult res;
    // The witness lemma assumes n >= 2; single-node graphs keep their
    // universe but get n = 2 in the bound arithmetic.
    int n_eff = std::max(g.node_count(), 2);
    FrEngine engine =
        opts.engine == FrEngine::Auto ? FrEngine::Symbolic : opts.engine;
    if (engine == FrEngine::Symbolic) {
        SymbolicCtx ctx{g.node_count(), opts.max_states, 0, {}};
        SymbolicEval ev{g, ctx, opts, n_eff};
        EvalValue v = ev.eval(body, 0);
        if (!std::holds_alternative<bool>(v))
            throw Error("fr_evaluate: open evaluation result");
        res.value = std::get<bool>(v);
        res.engine_used = FrEngine::Symbolic;
        res.bounds = ctx.bounds;
        res.states_created = ctx.created;
    } else {
        EnumEval ev{g, opts, n_eff, 0, {}};
        std::map<std::string, Word> env;
        res.value = ev.eval(body, env, 0);
        res.engine_used = FrEngine::Enumerative;
        res.bounds = ev.bounds;
        res.words_enumerated = ev.words;
    }
    return res;
}

FiniteLabelledGraph canonicalize_labels(const FiniteLabelledGraph& g) {
    FiniteLabelledGraph out;
    for (const std::string& n : g.node_names()) out.add_node(n);
    for (const auto& [s, a, d] : g.edges()) {
        std::string label = "p" + std::to_string(s) + "_" + std::to_string(d);
        out.add_edge(s, out.add_action(label), d);
    }
    return out;
}

}  // namespace gtrw
