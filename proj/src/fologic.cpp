#include "gtrw/fologic.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace gtrw {

// ── FiniteLabelledGraph ─────────────────────────────────────────────────────

int FiniteLabelledGraph::add_node(const std::string& name) {
    auto it = node_index_.find(name);
    if (it != node_index_.end()) return it->second;
    int id = static_cast<int>(node_names_.size());
    node_names_.push_back(name);
    node_index_[name] = id;
    out_.emplace_back();
    in_.emplace_back();
    return id;
}

int FiniteLabelledGraph::add_action(const std::string& name) {
    auto it = action_index_.find(name);
    if (it != action_index_.end()) return it->second;
    int id = static_cast<int>(action_names_.size());
    action_names_.push_back(name);
    action_index_[name] = id;
    return id;
}

void FiniteLabelledGraph::add_edge(int src, int action, int dst) {
    if (src < 0 || src >= node_count() || dst < 0 || dst >= node_count() ||
        action < 0 || action >= action_count())
        throw InputError("edge endpoint out of range");
    if (edges_.emplace(src, action, dst).second) {
        out_[src].emplace_back(action, dst);
        in_[dst].emplace_back(action, src);
    }
}

void FiniteLabelledGraph::add_edge(const std::string& src, const std::string& action,
                                   const std::string& dst) {
    int s = add_node(src);
    int a = add_action(action);
    int d = add_node(dst);
    add_edge(s, a, d);
}

int FiniteLabelledGraph::node_id(const std::string& name) const {
    auto it = node_index_.find(name);
    return it == node_index_.end() ? -1 : it->second;
}

int FiniteLabelledGraph::action_id(const std::string& name) const {
    auto it = action_index_.find(name);
    return it == action_index_.end() ? -1 : it->second;
}

bool FiniteLabelledGraph::has_edge(int src, int action, int dst) const {
    return edges_.count({src, action, dst}) != 0;
}

std::vector<int> FiniteLabelledGraph::successors(int src, int action) const {
    std::vector<int> out;
    for (const auto& [a, dst] : out_[src])
        if (a == action) out.push_back(dst);
    return out;
}

std::vector<int> FiniteLabelledGraph::predecessors(int dst, int action) const {
    std::vector<int> out;
    for (const auto& [a, src] : in_[dst])
        if (a == action) out.push_back(src);
    return out;
}

FiniteLabelledGraph parse_graph(const std::string& text) {
    FiniteLabelledGraph g;
    std::istringstream in(text);
    std::string line;
    bool saw_nodes = false;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
        while (!trimmed.empty() &&
               std::isspace(static_cast<unsigned char>(trimmed.back())))
            trimmed.pop_back();
        if (trimmed.empty()) continue;
        if (trimmed.rfind("nodes:", 0) == 0) {
            std::istringstream ls(trimmed.substr(6));
            std::string n;
            while (ls >> n) g.add_node(n);
            saw_nodes = true;
            continue;
        }
        auto arrow_start = trimmed.find(" -");
        auto arrow_end = trimmed.find("-> ", arrow_start);
        if (arrow_start == std::string::npos || arrow_end == std::string::npos)
            throw InputError("graph line without 'a -e-> b': " + line);
        std::string src = trimmed.substr(0, arrow_start);
        std::string action = trimmed.substr(arrow_start + 2, arrow_end - arrow_start - 2);
        std::string dst = trimmed.substr(arrow_end + 3);
        auto strip = [](std::string& s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t") + 1);
        };
        strip(src);
        strip(action);
        strip(dst);
        if (src.empty() || action.empty() || dst.empty())
            throw InputError("bad edge line: " + line);
        g.add_edge(src, action, dst);
    }
    if (!saw_nodes) throw InputError("missing 'nodes:' header");
    return g;
}

std::string to_string(const FiniteLabelledGraph& g) {
    std::ostringstream out;
    out << "nodes:";
    for (const std::string& n : g.node_names()) out << ' ' << n;
    out << '\n';
    for (const auto& [s, a, d] : g.edges())
        out << g.node_names()[s] << " -" << g.action_names()[a] << "-> "
            << g.node_names()[d] << '\n';
    return out.str();
}

// ── Builders ────────────────────────────────────────────────────────────────

namespace {

Formula node(FKind kind) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = kind;
    return n;
}

Formula quantifier(FKind kind, std::string domain, std::string var, Formula body) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = kind;
    n->var1 = std::move(var);
    n->domain = std::move(domain);
    n->kids = {std::move(body)};
    return n;
}

}  // namespace

Formula f_true() { return node(FKind::True); }
Formula f_false() { return node(FKind::False); }

Formula f_eq(std::string x, std::string y) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = FKind::Eq;
    n->var1 = std::move(x);
    n->var2 = std::move(y);
    return n;
}

Formula f_edge(std::string action, std::string x, std::string y) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = FKind::Edge;
    n->action = std::move(action);
    n->var1 = std::move(x);
    n->var2 = std::move(y);
    return n;
}

Formula f_path(std::vector<PathBlock> blocks, std::string x, std::string y) {
    for (const PathBlock& b : blocks)
        if (b.actions.empty() && b.count > 0)
            throw InputError("path block with positive count needs actions");
    auto n = std::make_shared<FormulaNode>();
    n->kind = FKind::Path;
    n->blocks = std::move(blocks);
    n->var1 = std::move(x);
    n->var2 = std::move(y);
    return n;
}

Formula f_not(Formula a) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = FKind::Not;
    n->kids = {std::move(a)};
    return n;
}

Formula f_and(std::vector<Formula> kids) {
    if (kids.empty()) return f_true();
    if (kids.size() == 1) return kids[0];
    auto n = std::make_shared<FormulaNode>();
    n->kind = FKind::And;
    n->kids = std::move(kids);
    return n;
}

Formula f_or(std::vector<Formula> kids) {
    if (kids.empty()) return f_false();
    if (kids.size() == 1) return kids[0];
    auto n = std::make_shared<FormulaNode>();
    n->kind = FKind::Or;
    n->kids = std::move(kids);
    return n;
}

Formula f_implies(Formula a, Formula b) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = FKind::Implies;
    n->kids = {std::move(a), std::move(b)};
    return n;
}

Formula f_iff(Formula a, Formula b) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = FKind::Iff;
    n->kids = {std::move(a), std::move(b)};
    return n;
}

Formula f_exists(std::string var, Formula body) {
    return quantifier(FKind::Exists, "", std::move(var), std::move(body));
}
Formula f_forall(std::string var, Formula body) {
    return quantifier(FKind::Forall, "", std::move(var), std::move(body));
}
Formula f_exists_in(std::string domain, std::string var, Formula body) {
    return quantifier(FKind::Exists, std::move(domain), std::move(var),
                      std::move(body));
}
Formula f_forall_in(std::string domain, std::string var, Formula body) {
    return quantifier(FKind::Forall, std::move(domain), std::move(var),
                      std::move(body));
}

// ── Inspection ──────────────────────────────────────────────────────────────

unsigned qr(const Formula& f) {
    switch (f->kind) {
        case FKind::True:
        case FKind::False:
        case FKind::Eq:
        case FKind::Edge:
        case FKind::Path:
            return 0;
        case FKind::Exists:
        case FKind::Forall:
            return 1 + qr(f->kids[0]);
        default: {
            unsigned m = 0;
            for (const Formula& k : f->kids) m = std::max(m, qr(k));
            return m;
        }
    }
}

namespace {

void collect_free(const Formula& f, std::set<std::string>& bound,
                  std::set<std::string>& out) {
    switch (f->kind) {
        case FKind::True:
        case FKind::False:
            return;
        case FKind::Eq:
        case FKind::Edge:
        case FKind::Path:
            if (!bound.count(f->var1)) out.insert(f->var1);
            if (!bound.count(f->var2)) out.insert(f->var2);
            return;
        case FKind::Exists:
        case FKind::Forall: {
            bool was_bound = bound.count(f->var1) != 0;
            bound.insert(f->var1);
            collect_free(f->kids[0], bound, out);
            if (!was_bound) bound.erase(f->var1);
            return;
        }
        default:
            for (const Formula& k : f->kids) collect_free(k, bound, out);
    }
}

}  // namespace

std::set<std::string> free_vars(const Formula& f) {
    std::set<std::string> bound, out;
    collect_free(f, bound, out);
    return out;
}

bool is_closed(const Formula& f) { return free_vars(f).empty(); }

bool has_domain_tags(const Formula& f) {
    if ((f->kind == FKind::Exists || f->kind == FKind::Forall) && !f->domain.empty())
        return true;
    for (const Formula& k : f->kids)
        if (has_domain_tags(k)) return true;
    return false;
}

std::size_t formula_size(const Formula& f) {
    std::size_t s = 1;
    for (const Formula& k : f->kids) s += formula_size(k);
    return s;
}

namespace {

Formula substitute_map(const Formula& f,
                       const std::map<std::string, std::string>& repl) {
    if (repl.empty()) return f;
    auto map_var = [&](const std::string& v) {
        auto it = repl.find(v);
        return it == repl.end() ? v : it->second;
    };
    switch (f->kind) {
        case FKind::True:
        case FKind::False:
            return f;
        case FKind::Eq:
            return f_eq(map_var(f->var1), map_var(f->var2));
        case FKind::Edge:
            return f_edge(f->action, map_var(f->var1), map_var(f->var2));
        case FKind::Path:
            return f_path(f->blocks, map_var(f->var1), map_var(f->var2));
        case FKind::Exists:
        case FKind::Forall: {
            std::map<std::string, std::string> inner = repl;
            inner.erase(f->var1);  // shadowed
            for (const auto& [from, to] : inner)
                if (to == f->var1)
                    throw InputError("substitution would capture '" + to + "'");
            if (inner.empty()) return f;
            return quantifier(f->kind, f->domain, f->var1,
                              substitute_map(f->kids[0], inner));
        }
        default: {
            auto n = std::make_shared<FormulaNode>();
            n->kind = f->kind;
            for (const Formula& k : f->kids)
                n->kids.push_back(substitute_map(k, repl));
            return n;
        }
    }
}

}  // namespace

Formula substitute_var(const Formula& f, const std::string& var,
                       const std::string& repl) {
    return substitute_map(f, {{var, repl}});
}

// ── Prenex conversion ───────────────────────────────────────────────────────

namespace {

struct PrenexState {
    unsigned counter = 0;
    std::string fresh() { return "x" + std::to_string(counter++); }
};

// All pulled binders get globally fresh names, so concatenating prefixes of
// sibling subformulas is sound.
PrenexFormula pull(const Formula& f, PrenexState& st) {
    switch (f->kind) {
        case FKind::True:
        case FKind::False:
        case FKind::Eq:
        case FKind::Edge:
        case FKind::Path:
            return {{}, f};
        case FKind::Not: {
            PrenexFormula inner = pull(f->kids[0], st);
            for (auto& [is_forall, var] : inner.prefix) is_forall = !is_forall;
            inner.matrix = f_not(inner.matrix);
            return inner;
        }
        case FKind::And:
        case FKind::Or: {
            PrenexFormula out;
            std::vector<Formula> matrices;
            for (const Formula& k : f->kids) {
                PrenexFormula part = pull(k, st);
                out.prefix.insert(out.prefix.end(), part.prefix.begin(),
                                  part.prefix.end());
                matrices.push_back(part.matrix);
            }
            out.matrix = f->kind == FKind::And ? f_and(matrices) : f_or(matrices);
            return out;
        }
        case FKind::Implies:
            return pull(f_or({f_not(f->kids[0]), f->kids[1]}), st);
        case FKind::Iff:
            return pull(f_and({f_implies(f->kids[0], f->kids[1]),
                               f_implies(f->kids[1], f->kids[0])}),
                        st);
        case FKind::Exists:
        case FKind::Forall: {
            std::string fresh = st.fresh();
            Formula body = substitute_var(f->kids[0], f->var1, fresh);
            PrenexFormula inner = pull(body, st);
            inner.prefix.insert(inner.prefix.begin(),
                                {f->kind == FKind::Forall, fresh});
            return inner;
        }
    }
    throw Error("unreachable");
}

}  // namespace

Formula PrenexFormula::to_formula() const {
    Formula out = matrix;
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
        out = it->first ? f_forall(it->second, out) : f_exists(it->second, out);
    return out;
}

PrenexFormula prenex(const Formula& f) {
    if (has_domain_tags(f)) throw InputError("prenex rejects domain-tagged formulas");
    PrenexState st;
    return pull(f, st);
}

// ── Fischer-Rabin ───────────────────────────────────────────────────────────

namespace {

struct FreshNames {
    std::string prefix;
    unsigned counter = 0;
    std::string next(const char* role) {
        return prefix + role + std::to_string(counter++);
    }
};

// psi_k(a,b): path of length 2^k in the theta-graph.
Formula fr_power(const Formula& theta, const std::string& tx, const std::string& ty,
                 unsigned k, const std::string& a, const std::string& b,
                 FreshNames& names) {
    if (k == 0) return substitute_map(theta, {{tx, a}, {ty, b}});
    std::string z = names.next("z");
    std::string u = names.next("u");
    std::string v = names.next("v");
    Formula pin =
        f_or({f_and({f_eq(u, a), f_eq(v, z)}), f_and({f_eq(u, z), f_eq(v, b)})});
    Formula body = f_implies(pin, fr_power(theta, tx, ty, k - 1, u, v, names));
    return f_exists(z, f_forall(u, f_forall(v, body)));
}

}  // namespace

Formula fischer_rabin(const Formula& theta, const std::string& tx,
                      const std::string& ty, std::uint64_t j, std::string x,
                      std::string y) {
    if (j == 0) return f_eq(x, y);
    std::vector<unsigned> ones;  // 1-bit positions of j, ascending
    for (unsigned bit = 0; bit < 64; ++bit)
        if (j & (1ULL << bit)) ones.push_back(bit);
    std::size_t m = ones.size();
    FreshNames names{"_fr", 0};
    std::vector<std::string> hops;  // x_1 ... x_{m+1}
    for (std::size_t i = 0; i < m + 1; ++i) hops.push_back(names.next("x"));
    std::vector<Formula> conj;
    conj.push_back(f_eq(hops[0], x));
    conj.push_back(f_eq(hops[m], y));
    for (std::size_t i = 0; i < m; ++i)
        conj.push_back(fr_power(theta, tx, ty, ones[i], hops[i], hops[i + 1], names));
    Formula body = f_and(conj);
    for (auto it = hops.rbegin(); it != hops.rend(); ++it) body = f_exists(*it, body);
    return body;
}

Formula dist_leq(const std::set<std::string>& actions, std::uint64_t d,
                 std::string x, std::string y) {
    if (d == 0) return f_eq(x, y);
    const std::string tx = "_dx", ty = "_dy";
    std::vector<Formula> step{f_eq(tx, ty)};
    for (const std::string& a : actions) {
        step.push_back(f_edge(a, tx, ty));
        step.push_back(f_edge(a, ty, tx));
    }
    return fischer_rabin(f_or(step), tx, ty, d, std::move(x), std::move(y));
}

Formula seq_formula(std::vector<PathBlock> blocks, std::string x, std::string y) {
    return f_path(std::move(blocks), std::move(x), std::move(y));
}

namespace {

Formula expand_path_atom(const FormulaNode& path, unsigned& counter) {
    const std::string& x = path.var1;
    const std::string& y = path.var2;
    if (path.blocks.empty()) return f_eq(x, y);
    std::vector<std::string> hops;
    hops.push_back(x);
    for (std::size_t i = 1; i < path.blocks.size(); ++i)
        hops.push_back("_p" + std::to_string(counter++));
    hops.push_back(y);
    std::vector<Formula> conj;
    for (std::size_t i = 0; i < path.blocks.size(); ++i) {
        const PathBlock& b = path.blocks[i];
        const std::string tx = "_pa", ty = "_pb";
        std::vector<Formula> step;
        for (const std::string& a : b.actions) step.push_back(f_edge(a, tx, ty));
        conj.push_back(fischer_rabin(f_or(step), tx, ty, b.count, hops[i], hops[i + 1]));
    }
    Formula body = f_and(conj);
    for (std::size_t i = path.blocks.size() - 1; i >= 1; --i)
        body = f_exists(hops[i], body);
    return body;
}

}  // namespace

Formula expand_paths(const Formula& f) {
    unsigned counter = 0;
    std::function<Formula(const Formula&)> go = [&](const Formula& n) -> Formula {
        switch (n->kind) {
            case FKind::Path:
                return expand_path_atom(*n, counter);
            case FKind::Exists:
            case FKind::Forall:
                return quantifier(n->kind, n->domain, n->var1, go(n->kids[0]));
            case FKind::True:
            case FKind::False:
            case FKind::Eq:
            case FKind::Edge:
                return n;
            default: {
                auto copy = std::make_shared<FormulaNode>();
                copy->kind = n->kind;
                for (const Formula& k : n->kids) copy->kids.push_back(go(k));
                return copy;
            }
        }
    };
    return go(f);
}

Formula count_atleast(const std::set<std::string>& omega, unsigned k,
                      std::string x) {
    if (k == 0) return f_true();
    if (omega.empty()) return f_false();
    std::vector<std::string> ys;
    for (unsigned i = 1; i <= k; ++i) ys.push_back("_y" + std::to_string(i));
    std::vector<Formula> conj;
    for (unsigned i = 0; i < k; ++i)
        for (unsigned j = i + 1; j < k; ++j) conj.push_back(f_not(f_eq(ys[i], ys[j])));
    for (unsigned i = 0; i < k; ++i) {
        std::vector<Formula> alts;
        for (const std::string& a : omega) alts.push_back(f_edge(a, x, ys[i]));
        conj.push_back(f_or(alts));
    }
    Formula body = f_and(conj);
    for (auto it = ys.rbegin(); it != ys.rend(); ++it) body = f_exists(*it, body);
    return body;
}

Formula membership(const std::set<std::string>& omega,
                   const std::set<std::string>& full, std::string x) {
    std::vector<Formula> conj;
    const std::string y = "_my";
    for (const std::string& a : full)
        if (!omega.count(a)) conj.push_back(f_not(f_exists(y, f_edge(a, x, y))));
    return f_and(conj);
}

// ── Finite-graph evaluation ─────────────────────────────────────────────────

namespace {

struct FiniteEval {
    const FiniteLabelledGraph& g;
    std::unordered_map<const FormulaNode*, std::vector<std::string>> fv_cache;
    std::unordered_map<const FormulaNode*, std::map<std::vector<int>, bool>> memo;

    const std::vector<std::string>& fv(const Formula& f) {
        auto it = fv_cache.find(f.get());
        if (it != fv_cache.end()) return it->second;
        auto s = free_vars(f);
        return fv_cache.emplace(f.get(), std::vector<std::string>(s.begin(), s.end()))
            .first->second;
    }

    int lookup(const std::map<std::string, int>& env, const std::string& v) {
        auto it = env.find(v);
        if (it == env.end()) throw InputError("unbound variable '" + v + "'");
        return it->second;
    }

    bool eval_path(const FormulaNode& f, const std::map<std::string, int>& env) {
        int src = lookup(env, f.var1);
        int dst = lookup(env, f.var2);
        std::set<int> frontier{src};
        for (const PathBlock& b : f.blocks) {
            std::vector<int> aids;
            for (const std::string& a : b.actions) {
                int id = g.action_id(a);
                if (id >= 0) aids.push_back(id);
            }
            if (b.count > 1'000'000)
                throw CapExceeded("path evaluation step budget", b.count);
            for (std::uint64_t step = 0; step < b.count; ++step) {
                std::set<int> next;
                for (int n : frontier)
                    for (const auto& [a, d] : g.out(n))
                        if (std::find(aids.begin(), aids.end(), a) != aids.end())
                            next.insert(d);
                frontier = std::move(next);
                if (frontier.empty()) return false;
            }
        }
        return frontier.count(dst) != 0;
    }

    bool eval(const Formula& f, std::map<std::string, int>& env) {
        switch (f->kind) {
            case FKind::True:
                return true;
            case FKind::False:
                return false;
            case FKind::Eq:
                return lookup(env, f->var1) == lookup(env, f->var2);
            case FKind::Edge: {
                int a = g.action_id(f->action);
                if (a < 0) return false;
                return g.has_edge(lookup(env, f->var1), a, lookup(env, f->var2));
            }
            case FKind::Path:
                return eval_path(*f, env);
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
                std::vector<int> key;
                for (const std::string& v : fv(f)) key.push_back(lookup(env, v));
                auto& table = memo[f.get()];
                auto hit = table.find(key);
                if (hit != table.end()) return hit->second;
                bool result = f->kind == FKind::Forall;
                auto it = env.find(f->var1);
                bool had = it != env.end();
                int saved = had ? it->second : -1;
                for (int n = 0; n < g.node_count(); ++n) {
                    env[f->var1] = n;
                    bool b = eval(f->kids[0], env);
                    if (f->kind == FKind::Exists && b) {
                        result = true;
                        break;
                    }
                    if (f->kind == FKind::Forall && !b) {
                        result = false;
                        break;
                    }
                }
                if (had)
                    env[f->var1] = saved;
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

bool eval_finite(const FiniteLabelledGraph& g, const Formula& f,
                 const std::map<std::string, int>& env) {
    if (g.node_count() == 0) throw InputError("empty universe");
    FiniteEval ev{g, {}, {}};
    std::map<std::string, int> e = env;
    return ev.eval(f, e);
}

struct FiniteEvaluator::Impl {
    FiniteEval ev;
};

FiniteEvaluator::FiniteEvaluator(const FiniteLabelledGraph& g)
    : impl_(new Impl{FiniteEval{g, {}, {}}}) {
    if (g.node_count() == 0) throw InputError("empty universe");
}

FiniteEvaluator::~FiniteEvaluator() = default;

bool FiniteEvaluator::eval(const Formula& f, const std::map<std::string, int>& env) {
    std::map<std::string, int> e = env;
    return impl_->ev.eval(f, e);
}

// ── S-expression format ─────────────────────────────────────────────────────

namespace {

struct SExprParser {
    const std::string& s;
    std::size_t pos = 0;

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    char peek() {
        skip();
        if (pos >= s.size()) throw InputError("unexpected end of formula");
        return s[pos];
    }
    void expect(char c) {
        if (peek() != c)
            throw InputError(std::string("expected '") + c + "' at offset " +
                             std::to_string(pos));
        ++pos;
    }
    std::string token() {
        skip();
        std::size_t start = pos;
        while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) &&
               s[pos] != '(' && s[pos] != ')')
            ++pos;
        if (pos == start)
            throw InputError("expected token at offset " + std::to_string(pos));
        return s.substr(start, pos - start);
    }

    PathBlock block() {
        expect('(');
        PathBlock b;
        if (peek() == '(') {
            expect('(');
            while (peek() != ')') b.actions.insert(token());
            expect(')');
        } else {
            b.actions.insert(token());
        }
        b.count = std::stoull(token());
        expect(')');
        return b;
    }

    Formula formula() {
        expect('(');
        std::string head = token();
        Formula out;
        if (head == "true") {
            out = f_true();
        } else if (head == "false") {
            out = f_false();
        } else if (head == "=") {
            std::string x = token(), y = token();
            out = f_eq(x, y);
        } else if (head == "edge") {
            std::string a = token(), x = token(), y = token();
            out = f_edge(a, x, y);
        } else if (head == "path") {
            std::string x = token(), y = token();
            std::vector<PathBlock> blocks;
            while (peek() != ')') blocks.push_back(block());
            out = f_path(std::move(blocks), x, y);
        } else if (head == "not") {
            out = f_not(formula());
        } else if (head == "and" || head == "or") {
            std::vector<Formula> kids;
            while (peek() != ')') kids.push_back(formula());
            out = head == "and" ? f_and(kids) : f_or(kids);
        } else if (head == "implies") {
            Formula a = formula(), b = formula();
            out = f_implies(a, b);
        } else if (head == "iff") {
            Formula a = formula(), b = formula();
            out = f_iff(a, b);
        } else if (head == "exists" || head == "forall") {
            std::string v = token();
            Formula body = formula();
            out = head == "exists" ? f_exists(v, body) : f_forall(v, body);
        } else if (head == "exists-in" || head == "forall-in") {
            std::string dom = token();
            std::string v = token();
            Formula body = formula();
            out = head == "exists-in" ? f_exists_in(dom, v, body)
                                      : f_forall_in(dom, v, body);
        } else {
            throw InputError("unknown formula head '" + head + "'");
        }
        expect(')');
        return out;
    }
};

void print(const Formula& f, std::ostringstream& out) {
    switch (f->kind) {
        case FKind::True:
            out << "(true)";
            return;
        case FKind::False:
            out << "(false)";
            return;
        case FKind::Eq:
            out << "(= " << f->var1 << ' ' << f->var2 << ')';
            return;
        case FKind::Edge:
            out << "(edge " << f->action << ' ' << f->var1 << ' ' << f->var2 << ')';
            return;
        case FKind::Path: {
            out << "(path " << f->var1 << ' ' << f->var2;
            for (const PathBlock& b : f->blocks) {
                out << " ((";
                bool first = true;
                for (const std::string& a : b.actions) {
                    if (!first) out << ' ';
                    out << a;
                    first = false;
                }
                out << ") " << b.count << ')';
            }
            out << ')';
            return;
        }
        case FKind::Not:
            out << "(not ";
            print(f->kids[0], out);
            out << ')';
            return;
        case FKind::And:
        case FKind::Or:
            out << (f->kind == FKind::And ? "(and" : "(or");
            for (const Formula& k : f->kids) {
                out << ' ';
                print(k, out);
            }
            out << ')';
            return;
        case FKind::Implies:
        case FKind::Iff:
            out << (f->kind == FKind::Implies ? "(implies " : "(iff ");
            print(f->kids[0], out);
            out << ' ';
            print(f->kids[1], out);
            out << ')';
            return;
        case FKind::Exists:
        case FKind::Forall: {
            bool ex = f->kind == FKind::Exists;
            if (f->domain.empty())
                out << (ex ? "(exists " : "(forall ");
            else
                out << (ex ? "(exists-in " : "(forall-in ") << f->domain << ' ';
            out << f->var1 << ' ';
            print(f->kids[0], out);
            out << ')';
            return;
        }
    }
}

}  // namespace

Formula parse_formula(const std::string& text) {
    SExprParser p{text};
    Formula f = p.formula();
    p.skip();
    if (p.pos != text.size()) throw InputError("trailing characters after formula");
    return f;
}

std::string to_string(const Formula& f) {
    std::ostringstream out;
    print(f, out);
    return out.str();
}

}  // namespace gtrw
