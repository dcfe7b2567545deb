#include "gtrw/guarded.hpp"

#include <algorithm>
#include <set>

namespace gtrw {

namespace {

std::vector<Formula> flatten_and(const Formula& f) {
    if (f->kind != FKind::And) return {f};
    std::vector<Formula> out;
    for (const Formula& k : f->kids) {
        auto part = flatten_and(k);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

// A conjunct that pins `var` to something already bound.
bool is_guard_for(const Formula& c, const std::string& var,
                  const std::set<std::string>& bound) {
    switch (c->kind) {
        case FKind::Eq:
            return (c->var1 == var && c->var2 != var && bound.count(c->var2)) ||
                   (c->var2 == var && c->var1 != var && bound.count(c->var1));
        case FKind::Edge:
            return (c->var2 == var && c->var1 != var && bound.count(c->var1)) ||
                   (c->var1 == var && c->var2 != var && bound.count(c->var2));
        case FKind::Path:
            // Paths generate forward only.
            return c->var2 == var && c->var1 != var && bound.count(c->var1);
        default:
            return false;
    }
}

bool guarded_rec(const Formula& f, std::set<std::string>& bound) {
    switch (f->kind) {
        case FKind::True:
        case FKind::False:
        case FKind::Eq:
        case FKind::Edge:
        case FKind::Path:
            return true;
        case FKind::Exists: {
            bool ok = false;
            for (const Formula& c : flatten_and(f->kids[0]))
                ok |= is_guard_for(c, f->var1, bound);
            if (!ok) return false;
            bool was = bound.count(f->var1) != 0;
            bound.insert(f->var1);
            bool inner = guarded_rec(f->kids[0], bound);
            if (!was) bound.erase(f->var1);
            return inner;
        }
        case FKind::Forall: {
            if (f->kids[0]->kind != FKind::Implies) return false;
            bool ok = false;
            for (const Formula& c : flatten_and(f->kids[0]->kids[0]))
                ok |= is_guard_for(c, f->var1, bound);
            if (!ok) return false;
            bool was = bound.count(f->var1) != 0;
            bound.insert(f->var1);
            bool inner = guarded_rec(f->kids[0], bound);
            if (!was) bound.erase(f->var1);
            return inner;
        }
        default:
            for (const Formula& k : f->kids) {
                if (!guarded_rec(k, bound)) return false;
            }
            return true;
    }
}

}  // namespace

bool is_guarded(const Formula& f) {
    std::set<std::string> bound = free_vars(f);  // parameters count as bound
    return guarded_rec(f, bound);
}

namespace {

// Fast path for blocks whose rules all rewrite one constant leaf into
// another: the walk decomposes per leaf position, with per-block step
// counts adding up across positions. Returns nullopt when a block has a
// structural rule.
std::optional<bool> constant_path_eval(const Gtrs& r, const Tree& src,
                                       const std::vector<PathBlock>& blocks,
                                       const Tree& dst) {
    for (const PathBlock& b : blocks)
        for (const Rule& rule : r.rules())
            if (b.actions.count(rule.action) &&
                (rule.lhs.size() != 1 || rule.rhs.size() != 1))
                return std::nullopt;
    // Align shapes; collect per-position letter pairs.
    std::vector<std::pair<std::string, std::string>> leaves;
    std::function<bool(const Tree&, const Tree&)> align = [&](const Tree& a,
                                                              const Tree& b) {
        if (a.children().empty() != b.children().empty()) return false;
        if (a.children().empty()) {
            leaves.emplace_back(a.symbol(), b.symbol());
            return true;
        }
        if (a.symbol() != b.symbol() || a.children().size() != b.children().size())
            return false;
        for (std::size_t i = 0; i < a.children().size(); ++i)
            if (!align(a.children()[i], b.children()[i])) return false;
        return true;
    };
    if (!align(src, dst)) return false;

    // Per position: achievable step-count vectors across the block chain.
    std::size_t nb = blocks.size();
    auto position_vectors = [&](const std::string& from, const std::string& to) {
        std::set<std::pair<std::vector<std::uint64_t>, std::string>> states;
        states.insert({std::vector<std::uint64_t>(nb, 0), from});
        for (std::size_t bi = 0; bi < nb; ++bi) {
            const PathBlock& b = blocks[bi];
            std::set<std::pair<std::vector<std::uint64_t>, std::string>> frontier =
                states;
            for (std::uint64_t step = 1; step <= b.count; ++step) {
                std::set<std::pair<std::vector<std::uint64_t>, std::string>> next;
                for (const auto& [vec, letter] : frontier) {
                    for (const Rule& rule : r.rules()) {
                        if (!b.actions.count(rule.action)) continue;
                        if (rule.lhs.symbol() != letter) continue;
                        auto v2 = vec;
                        v2[bi] = step;
                        next.insert({std::move(v2), rule.rhs.symbol()});
                    }
                }
                if (next.empty()) break;
                states.insert(next.begin(), next.end());
                frontier = std::move(next);
            }
        }
        std::set<std::vector<std::uint64_t>> out;
        for (const auto& [vec, letter] : states)
            if (letter == to) out.insert(vec);
        return out;
    };
    std::map<std::pair<std::string, std::string>,
             std::set<std::vector<std::uint64_t>>>
        vec_cache;
    std::set<std::vector<std::uint64_t>> sums{std::vector<std::uint64_t>(nb, 0)};
    std::vector<std::uint64_t> goal;
    for (const PathBlock& b : blocks) goal.push_back(b.count);
    for (const auto& pair : leaves) {
        auto it = vec_cache.find(pair);
        if (it == vec_cache.end())
            it = vec_cache.emplace(pair, position_vectors(pair.first, pair.second))
                     .first;
        if (it->second.empty()) return false;
        std::set<std::vector<std::uint64_t>> next;
        for (const auto& base : sums)
            for (const auto& add : it->second) {
                std::vector<std::uint64_t> s(nb);
                bool ok = true;
                for (std::size_t i = 0; i < nb; ++i) {
                    s[i] = base[i] + add[i];
                    if (s[i] > goal[i]) ok = false;
                }
                if (ok) next.insert(std::move(s));
            }
        if (next.empty()) return false;
        sums = std::move(next);
    }
    return sums.count(goal) != 0;
}

}  // namespace

std::vector<Tree> path_endpoints(const Gtrs& r, const Tree& src,
                                 const std::vector<PathBlock>& blocks,
                                 std::uint64_t step_budget) {
    std::set<Tree, TreeLess> frontier{src};
    std::uint64_t steps = 0;
    for (const PathBlock& b : blocks) {
        for (std::uint64_t step = 0; step < b.count; ++step) {
            std::set<Tree, TreeLess> next;
            for (const Tree& t : frontier) {
                for (const std::string& a : b.actions) {
                    if (++steps > step_budget)
                        throw CapExceeded("guarded path search step budget", steps);
                    for (const Tree& s : successors(r, t, a)) next.insert(s);
                }
            }
            frontier = std::move(next);
            if (frontier.empty()) return {};
        }
    }
    return std::vector<Tree>(frontier.begin(), frontier.end());
}

std::uint64_t exploration_radius(const Formula& f) {
    switch (f->kind) {
        case FKind::True:
        case FKind::False:
        case FKind::Eq:
            return 0;
        case FKind::Edge:
            return 1;
        case FKind::Path: {
            std::uint64_t sum = 0;
            for (const PathBlock& b : f->blocks) sum += b.count;
            return sum;
        }
        case FKind::Exists:
        case FKind::Forall: {
            // Guards walk from a bound element, then the body explores on.
            std::uint64_t guard = 0, body = 0;
            for (const Formula& c : flatten_and(
                     f->kids[0]->kind == FKind::Implies ? f->kids[0]->kids[0]
                                                        : f->kids[0]))
                guard = std::max(guard, exploration_radius(c));
            body = exploration_radius(f->kids[0]);
            return guard + body;
        }
        default: {
            std::uint64_t m = 0;
            for (const Formula& k : f->kids) m = std::max(m, exploration_radius(k));
            return m;
        }
    }
}

namespace {

struct VecTreeLess {
    bool operator()(const std::vector<Tree>& a, const std::vector<Tree>& b) const {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                            TreeLess{});
    }
};

struct GuardedEval {
    const Gtrs& r;
    const GuardedOptions& opts;
    std::uint64_t steps = 0;
    std::map<const FormulaNode*, std::vector<std::string>> fv_cache;
    std::map<const FormulaNode*, std::map<std::vector<Tree>, bool, VecTreeLess>> memo;

    void charge() {
        if (++steps > opts.step_budget)
            throw CapExceeded("guarded evaluation step budget", steps);
    }

    const std::vector<std::string>& fv(const Formula& f) {
        auto it = fv_cache.find(f.get());
        if (it != fv_cache.end()) return it->second;
        auto s = free_vars(f);
        return fv_cache
            .emplace(f.get(), std::vector<std::string>(s.begin(), s.end()))
            .first->second;
    }

    const Tree& lookup(const std::map<std::string, Tree>& env,
                       const std::string& v) {
        auto it = env.find(v);
        if (it == env.end()) throw InputError("unbound variable '" + v + "'");
        return it->second;
    }

    bool edge_atom(const Formula& f, const std::map<std::string, Tree>& env) {
        if (!r.actions().count(f->action)) return false;
        return has_edge(r, lookup(env, f->var1), f->action, lookup(env, f->var2));
    }

    bool path_atom(const Formula& f, const std::map<std::string, Tree>& env) {
        const Tree& src = lookup(env, f->var1);
        Tree dst = lookup(env, f->var2);
        if (auto fast = constant_path_eval(r, src, f->blocks, dst)) return *fast;
        auto ends = path_endpoints(r, src, f->blocks,
                                   opts.step_budget - std::min(steps, opts.step_budget));
        return std::binary_search(ends.begin(), ends.end(), dst, TreeLess{});
    }

    std::vector<Tree> candidates(const Formula& quant,
                                 const std::map<std::string, Tree>& env) {
        const std::string& var = quant->var1;
        Formula scope = quant->kids[0]->kind == FKind::Implies && quant->kind == FKind::Forall
                            ? quant->kids[0]->kids[0]
                            : quant->kids[0];
        std::vector<Formula> conjuncts = flatten_and(scope);
        std::set<std::string> bound;
        for (const auto& [name, tree] : env) bound.insert(name);
        for (const Formula& c : conjuncts) {
            if (!is_guard_for(c, var, bound)) continue;
            switch (c->kind) {
                case FKind::Eq:
                    return {lookup(env, c->var1 == var ? c->var2 : c->var1)};
                case FKind::Edge: {
                    if (!r.actions().count(c->action)) return {};
                    if (c->var2 == var)
                        return successors(r, lookup(env, c->var1), c->action);
                    return predecessors(r, lookup(env, c->var2), c->action);
                }
                case FKind::Path: {
                    const Tree& src = lookup(env, c->var1);
                    for (const CandidateHook& hook : opts.hooks) {
                        auto out = hook(r, src, c->blocks, conjuncts, var);
                        if (out) return *out;
                    }
                    return path_endpoints(
                        r, src, c->blocks,
                        opts.step_budget - std::min(steps, opts.step_budget));
                }
                default:
                    break;
            }
        }
        throw InputError("quantifier over '" + var + "' has no usable guard");
    }

    bool eval(const Formula& f, std::map<std::string, Tree>& env) {
        charge();
        switch (f->kind) {
            case FKind::True:
                return true;
            case FKind::False:
                return false;
            case FKind::Eq:
                return lookup(env, f->var1) == lookup(env, f->var2);
            case FKind::Edge:
                return edge_atom(f, env);
            case FKind::Path:
                return path_atom(f, env);
            case FKind::Not:
                return !eval(f->kids[0], env);
            case FKind::And:
                for (const Formula& k : f->kids)
                    if (!eval(k, env)) return false;
                return true;
            case FKind::Or:
                for (const Formula& k : f->kids)
                    if (eval(k, env)) return true;
                return false;
            case FKind::Implies:
                return !eval(f->kids[0], env) || eval(f->kids[1], env);
            case FKind::Iff:
                return eval(f->kids[0], env) == eval(f->kids[1], env);
            case FKind::Exists:
            case FKind::Forall: {
                std::vector<Tree> key;
                for (const std::string& v : fv(f)) key.push_back(lookup(env, v));
                auto& table = memo[f.get()];
                auto hit = table.find(key);
                if (hit != table.end()) return hit->second;
                bool is_forall = f->kind == FKind::Forall;
                bool result = is_forall;  // vacuously true over empty candidates
                auto prev = env.find(f->var1);
                std::optional<Tree> saved;
                if (prev != env.end()) saved = prev->second;
                for (const Tree& cand : candidates(f, env)) {
                    env[f->var1] = cand;
                    bool b = eval(f->kids[0], env);
                    if (b != is_forall) {
                        result = b;
                        break;
                    }
                }
                if (saved)
                    env[f->var1] = *saved;
                else
                    env.erase(f->var1);
                table[key] = result;
                return result;
            }
        }
        throw Error("unreachable");
    }
};

}  // namespace

bool eval_guarded(const Gtrs& r, const Formula& f,
                  const std::map<std::string, Tree>& env,
                  const GuardedOptions& opts) {
    if (!is_guarded(f)) throw InputError("formula is not guarded");
    GuardedEval ev{r, opts, 0, {}, {}};
    std::map<std::string, Tree> e = env;
    return ev.eval(f, e);
}

}  // namespace gtrw
