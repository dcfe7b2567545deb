#include "gtrw/reduction.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace gtrw {

// ── Bounds ──────────────────────────────────────────────────────────────────

BigInt sigma(unsigned i, unsigned ell, std::uint64_t r, std::uint64_t p) {
    BigInt four_i = BigInt(1) << (2 * i);  // 4^i
    return BigInt(ell) * r * 7 * four_i * ((BigInt(p) - 1) * r * four_i + 1) +
           BigInt(p) * r * four_i;
}

BigInt gamma_bound(unsigned ell, std::uint64_t r, std::uint64_t p) {
    BigInt s = sigma(ell, ell, r, p);
    BigInt four_ell = BigInt(1) << (2 * ell);
    return (s + p - 1) / p + (BigInt(p) - 1) * (BigInt(p) - 1) * r * four_ell;
}

ReductionBounds report_bounds(unsigned ell, std::uint64_t r, std::uint64_t p,
                              std::uint64_t alphabet_size) {
    if (r == 0 || p < 2) throw InputError("bounds need r >= 1 and p >= 2");
    ReductionBounds b;
    b.ell = ell;
    b.r = r;
    b.p = p;
    b.alphabet_size = alphabet_size;
    for (unsigned i = 0; i <= ell; ++i) b.sigma_values.push_back(sigma(i, ell, r, p));
    b.gamma = gamma_bound(ell, r, p);
    BigInt four_ell = BigInt(1) << (2 * ell);
    b.u_size_limit = b.sigma_values.back() + BigInt(r) * p * four_ell;
    b.u2_count_log = b.gamma * (b.sigma_values.back() + BigInt(p) * r * four_ell);
    return b;
}

ReductionBounds report_bounds(const Gtrs& r, const Formula& phi) {
    PrenexFormula p = prenex(phi);
    unsigned ell = p.prefix.empty() ? 0 : static_cast<unsigned>(p.prefix.size()) - 1;
    std::uint64_t rr = std::max<std::uint64_t>(r.max_rule_size(), 1);
    std::uint64_t pp = r.alphabet().max_rank();
    if (pp < 2) throw InputError("reduction needs a symbol of rank >= 2");
    return report_bounds(ell, rr, pp, r.alphabet().symbol_count());
}

std::string ReductionBounds::to_text() const {
    std::ostringstream out;
    out << "ell = " << ell << ", r = " << r << ", p = " << p
        << ", |A| = " << alphabet_size << "\n";
    for (unsigned i = 0; i < sigma_values.size(); ++i)
        out << "sigma(" << i << ") = " << sigma_values[i] << "\n";
    out << "gamma = " << gamma << "\n";
    out << "U size limit = " << u_size_limit << "  (|U| <= |A|^"
        << u_size_limit << ")\n";
    out << "log_{|A|+1} |U''| <= " << u2_count_log << "\n";
    return out.str();
}

// ── Tree alphabets ──────────────────────────────────────────────────────────

namespace {

std::uint64_t to_u64_or_cap(const BigInt& v, std::uint64_t limit,
                            const char* what) {
    if (v > limit)
        throw CapExceeded(std::string(what) + " bound " + v.str() +
                              " exceeds the configured cap " +
                              std::to_string(limit),
                          0);
    return v.convert_to<std::uint64_t>();
}

}  // namespace

bool TreeAlphabets::z_i_member(const TreeString& w, unsigned i) const {
    if (w.empty() || i >= v_i.size()) return false;
    auto in_set = [](const std::vector<Tree>& set, const Tree& t) {
        return std::find(set.begin(), set.end(), t) != set.end();
    };
    // Exactly one item from W_i, the rest from V_i.
    std::size_t w_hits = 0;
    for (const Tree& t : w) {
        if (in_set(w_i[i], t)) {
            ++w_hits;
        } else if (!in_set(v_i[i], t)) {
            return false;
        }
    }
    if (w_hits != 1) return false;
    if (!leaf_count_feasible(alphabet, w.size())) return false;
    if (has_unary) return true;  // int = infinity
    IntOrInf im = int_max(alphabet, w.size());
    return norm(w) + im.value > sigma_values[i];
}

TreeAlphabets build_alphabets(const Gtrs& r, unsigned ell,
                              const ReductionCaps& caps) {
    TreeAlphabets out;
    out.ell = ell;
    out.alphabet = r.alphabet();
    out.r = std::max<std::uint64_t>(r.max_rule_size(), 1);
    out.p = r.alphabet().max_rank();
    if (out.p < 2) throw InputError("reduction needs a symbol of rank >= 2");
    out.has_unary = r.alphabet().has_rank(1);
    for (unsigned i = 0; i <= ell; ++i)
        out.sigma_values.push_back(to_u64_or_cap(sigma(i, ell, out.r, out.p),
                                                 caps.max_tree_size, "sigma"));
    std::uint64_t u_limit = to_u64_or_cap(
        BigInt(out.sigma_values.back()) + BigInt(out.r) * out.p * (BigInt(1) << (2 * ell)),
        caps.max_tree_size, "U tree size");
    out.u = enumerate_trees(r.alphabet(), u_limit, caps.max_alphabet);
    for (unsigned i = 0; i <= ell; ++i) {
        std::uint64_t v_limit = out.r << (2 * i);
        std::vector<Tree> ui, vi;
        for (const Tree& t : out.u) {
            if (t.size() <= out.sigma_values[i]) ui.push_back(t);
            if (t.size() <= v_limit) vi.push_back(t);
        }
        // W_i: one symbol of rank >= 1 over V_i children, minus V_i.
        std::vector<Tree> wi;
        for (const auto& [sym, rank] : r.alphabet().arity()) {
            if (rank == 0) continue;
            std::vector<Tree> kids(rank);
            std::function<void(std::size_t)> choose = [&](std::size_t idx) {
                if (idx == rank) {
                    Tree t = Tree::make(sym, kids);
                    if (t.size() > v_limit) wi.push_back(t);
                    return;
                }
                for (const Tree& c : vi) {
                    kids[idx] = c;
                    choose(idx + 1);
                }
            };
            choose(0);
        }
        std::sort(wi.begin(), wi.end(), TreeLess{});
        wi.erase(std::unique(wi.begin(), wi.end()), wi.end());
        out.u_i.push_back(std::move(ui));
        out.v_i.push_back(std::move(vi));
        out.w_i.push_back(std::move(wi));
    }
    return out;
}

// ── Relativization ──────────────────────────────────────────────────────────

Formula relativize(const Formula& phi_prenex, unsigned ell) {
    // Validate prenex shape and count quantifiers.
    std::vector<std::pair<bool, std::string>> prefix;
    Formula body = phi_prenex;
    while (body->kind == FKind::Exists || body->kind == FKind::Forall) {
        if (!body->domain.empty())
            throw InputError("relativize: input already carries domain tags");
        prefix.emplace_back(body->kind == FKind::Forall, body->var1);
        body = body->kids[0];
    }
    if (qr(body) != 0) throw InputError("relativize needs a prenex sentence");
    if (prefix.size() != ell + 1)
        throw InputError("relativize: expected " + std::to_string(ell + 1) +
                         " quantifiers, found " + std::to_string(prefix.size()));
    Formula out = body;
    for (std::size_t j = prefix.size(); j-- > 0;) {
        std::string tag = "L" + std::to_string(ell - j);
        out = prefix[j].first ? f_forall_in(tag, prefix[j].second, out)
                              : f_exists_in(tag, prefix[j].second, out);
    }
    return out;
}

// ── Compilation ─────────────────────────────────────────────────────────────

namespace {

std::string symbol_name(const TreeString& w) {
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out += '|';
        out += to_string(w[i]);
    }
    return out;
}

struct WordEnumerator {
    const std::vector<Tree>& letters;
    std::uint64_t cap;
    std::uint64_t produced = 0;

    // All words of length in [1, max_len] passing `keep`.
    std::vector<TreeString> run(std::uint64_t max_len,
                                const std::function<bool(const TreeString&)>& keep) {
        std::vector<TreeString> out;
        TreeString cur;
        std::function<void(std::uint64_t)> go = [&](std::uint64_t remaining) {
            if (!cur.empty() && keep(cur)) {
                if (++produced > cap)
                    throw CapExceeded("word alphabet enumeration cap", produced);
                out.push_back(cur);
            }
            if (remaining == 0) return;
            for (const Tree& t : letters) {
                cur.push_back(t);
                go(remaining - 1);
                cur.pop_back();
            }
        };
        go(max_len);
        return out;
    }
};

// Minimal elements under the contiguous-factor relation.
std::vector<TreeString> factor_minimal(const std::vector<TreeString>& words) {
    std::set<std::vector<std::size_t>> keys;  // hashed by item hashes
    auto key_of = [](const TreeString& w, std::size_t from, std::size_t len) {
        std::vector<std::size_t> k;
        for (std::size_t i = 0; i < len; ++i) k.push_back(w[from + i].hash());
        return k;
    };
    for (const TreeString& w : words) keys.insert(key_of(w, 0, w.size()));
    std::vector<TreeString> out;
    for (const TreeString& w : words) {
        bool minimal = true;
        for (std::size_t len = 1; len < w.size() && minimal; ++len)
            for (std::size_t from = 0; from + len <= w.size() && minimal; ++from)
                if (keys.count(key_of(w, from, len))) minimal = false;
        if (minimal) out.push_back(w);
    }
    return out;
}

}  // namespace

CompiledInstance compile(const Gtrs& r, const Formula& phi,
                         const ReductionCaps& caps) {
    if (!is_closed(phi)) throw InputError("compile needs a closed sentence");
    if (r.rules().empty()) throw InputError("compile needs at least one rule");
    const RankedAlphabet& a = r.alphabet();
    if (a.max_rank() < 2) throw InputError("reduction needs a symbol of rank >= 2");
    if (!a.has_rank(1) && !a.has_rank(2))
        throw InputError("degenerate alphabet: neither unary nor binary symbols");

    CompiledInstance inst;
    PrenexFormula pf = prenex(phi);
    if (pf.prefix.empty()) throw InputError("compile needs at least one quantifier");
    inst.ell = static_cast<unsigned>(pf.prefix.size()) - 1;
    inst.bounds = report_bounds(inst.ell, std::max<std::uint64_t>(r.max_rule_size(), 1),
                                a.max_rank(), a.symbol_count());
    inst.alphabets = build_alphabets(r, inst.ell, caps);
    const TreeAlphabets& al = inst.alphabets;
    std::uint64_t gamma_len =
        to_u64_or_cap(gamma_bound(inst.ell, al.r, al.p), caps.max_word_len, "gamma");

    // U'' = words over U with length in M, length <= gamma.
    WordEnumerator u2_enum{al.u, caps.max_alphabet, 0};
    std::vector<TreeString> u2 = u2_enum.run(gamma_len, [&](const TreeString& w) {
        return leaf_count_feasible(a, w.size());
    });

    // U' (and V'_i): words whose length + 1 is a rank. These join the
    // symbol set; with a binary symbol they are single letters already
    // inside U''.
    auto ranks = a.ranks();
    auto is_uprime_len = [&](std::size_t len) { return ranks.count(len + 1) != 0; };
    WordEnumerator up_enum{al.u, caps.max_alphabet, 0};
    std::vector<TreeString> uprime =
        up_enum.run(std::min<std::uint64_t>(al.p > 0 ? al.p - 1 : 0, gamma_len),
                    [&](const TreeString& w) { return is_uprime_len(w.size()); });

    // Symbol table: U'' then any U' words not already present, then $, #.
    std::map<std::string, int> symbol_index;
    auto add_symbol = [&](const TreeString& w, const std::string& name) {
        auto it = symbol_index.find(name);
        if (it != symbol_index.end()) return it->second;
        int id = static_cast<int>(inst.symbol_names.size());
        inst.symbol_names.push_back(name);
        inst.symbol_words.push_back(w);
        symbol_index[name] = id;
        return id;
    };
    for (const TreeString& w : u2) add_symbol(w, symbol_name(w));
    for (const TreeString& w : uprime) add_symbol(w, symbol_name(w));
    inst.dollar_id = add_symbol({}, "$");
    inst.hash_id = add_symbol({}, "#");

    // The finite graph T: sigma-edges between symbols via one-item
    // rewriting, one marker edge per symbol into #.
    FiniteLabelledGraph& g = inst.graph;
    for (const std::string& name : inst.symbol_names) g.add_node(name);
    for (const std::string& act : r.actions()) g.add_action(act);
    for (int s = 0; s < g.node_count(); ++s) {
        const TreeString& w = inst.symbol_words[s];
        if (w.empty()) continue;  // $ and # carry no sigma-edges
        for (const std::string& act : r.actions()) {
            for (const TreeString& w2 : step_word(r, w, act)) {
                auto it = symbol_index.find(symbol_name(w2));
                if (it != symbol_index.end())
                    g.add_edge(s, g.action_id(act), it->second);
            }
        }
    }
    for (int s = 0; s < g.node_count(); ++s) {
        int marker = g.add_action(inst.symbol_names[s]);
        g.add_edge(s, marker, inst.hash_id);
    }

    // Sub-alphabets as marker-action name sets.
    auto single_names = [&](const std::vector<Tree>& trees) {
        std::set<std::string> out;
        for (const Tree& t : trees) out.insert(symbol_name(TreeString{t}));
        return out;
    };
    inst.u_hat = single_names(al.u);
    for (unsigned i = 0; i <= inst.ell; ++i) {
        inst.u_i_hat.push_back(single_names(al.u_i[i]));
        // V'_i: U'-style words over V_i.
        WordEnumerator vp_enum{al.v_i[i], caps.max_alphabet, 0};
        std::vector<TreeString> vp =
            vp_enum.run(std::min<std::uint64_t>(al.p > 0 ? al.p - 1 : 0, gamma_len),
                        [&](const TreeString& w) { return is_uprime_len(w.size()); });
        std::set<std::string> vp_names;
        for (const TreeString& w : vp) vp_names.insert(symbol_name(w));
        inst.v_p_hat.push_back(std::move(vp_names));
        // W'_i: factor-minimal words in V_i^* W_i V_i^* with the Z_i
        // property; their length obeys the gamma_i bound, gamma suffices.
        std::vector<Tree> vw = al.v_i[i];
        vw.insert(vw.end(), al.w_i[i].begin(), al.w_i[i].end());
        std::sort(vw.begin(), vw.end(), TreeLess{});
        vw.erase(std::unique(vw.begin(), vw.end()), vw.end());
        WordEnumerator wp_enum{vw, caps.max_alphabet, 0};
        std::vector<TreeString> candidates =
            wp_enum.run(gamma_len, [&](const TreeString& w) {
                return al.z_i_member(w, i);
            });
        std::set<std::string> wp_names;
        for (const TreeString& w : factor_minimal(candidates))
            wp_names.insert(symbol_name(w));
        inst.w_p_hat.push_back(std::move(wp_names));
    }

    // phi1: relativized prenex sentence.
    Formula prenexed = pf.to_formula();
    inst.phi1 = relativize(prenexed, inst.ell);

    // phi4: replace every L_i constraint by marker-edge formulas and every
    // sphere constraint by a Fischer-Rabin distance formula.
    std::set<std::string> gamma_names(inst.symbol_names.begin(),
                                      inst.symbol_names.end());
    auto in_singleton_set = [&](const std::set<std::string>& names,
                                const std::string& var) {
        // x is one marker symbol from `names`: nothing outside occurs and
        // fewer than two of them occur.
        return f_and({membership(names, gamma_names, var),
                      f_not(count_atleast(names, 2, var))});
    };
    std::vector<std::pair<bool, std::string>>& prefix = pf.prefix;
    Formula out = pf.matrix;
    for (std::size_t j = prefix.size(); j-- > 0;) {
        unsigned i = inst.ell - static_cast<unsigned>(j);
        const std::string& var = prefix[j].second;
        // Membership in L_i.
        std::set<std::string> star = inst.v_p_hat[i];
        star.insert(inst.w_p_hat[i].begin(), inst.w_p_hat[i].end());
        star.insert("$");
        Formula word_part = f_and(
            {membership(star, gamma_names, var),
             count_atleast(inst.w_p_hat[i], 1, var),
             f_not(count_atleast(inst.w_p_hat[i], 2, var)),
             f_not(in_singleton_set(inst.u_hat, var))});
        Formula tree_part = in_singleton_set(inst.u_i_hat[i], var);
        std::vector<Formula> constraint{f_or({word_part, tree_part})};
        // Sphere constraints against the outer variables.
        for (std::size_t o = 0; o < j; ++o)
            constraint.push_back(dist_leq(r.actions(), 3ULL << (2 * i), var,
                                          prefix[o].second));
        Formula c = f_or(constraint);
        out = prefix[j].first ? f_forall(var, f_implies(c, out))
                              : f_exists(var, f_and({c, out}));
    }
    inst.phi4 = out;
    return inst;
}

DecideResult decide(const Gtrs& r, const Formula& phi, const ReductionCaps& caps) {
    DecideResult res;
    try {
        res.bounds = report_bounds(r, phi);
    } catch (const InputError&) {
        throw;  // malformed input is not a cap
    }
    // Constant sentences skip the pipeline.
    PrenexFormula pf = prenex(phi);
    if (pf.prefix.empty()) {
        FiniteLabelledGraph dummy;
        dummy.add_node("v");
        res.verdict = qf_eval(dummy, pf.matrix, {}) ? Verdict::True : Verdict::False;
        return res;
    }
    try {
        CompiledInstance inst = compile(r, phi, caps);
        FrOptions opts;
        opts.engine = caps.engine;
        opts.max_states = caps.max_states;
        opts.max_words = caps.max_words;
        res.fr = fr_evaluate(inst.graph, inst.phi4, opts);
        res.verdict = res.fr.value ? Verdict::True : Verdict::False;
    } catch (const CapExceeded& e) {
        res.verdict = Verdict::Cap;
        res.cap_reason = e.what();
    }
    return res;
}

}  // namespace gtrw
