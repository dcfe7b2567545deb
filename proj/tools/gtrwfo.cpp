// gtrwfo: batch workbench for first-order logic over ground tree rewrite
// graphs. Subcommands wrap the library modules; exit codes are 0 for TRUE,
// 1 for FALSE, 2 for a resource cap, 3 for bad input.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "gtrw/guarded.hpp"
#include "gtrw/reduction.hpp"
#include "gtrw/tiling.hpp"
#include "gtrw/wordfr.hpp"

using json = nlohmann::json;
using namespace gtrw;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
}

json bounds_json(const ReductionBounds& b) {
    json sig = json::array();
    for (const BigInt& s : b.sigma_values) sig.push_back(s.str());
    return json{{"ell", b.ell},
                {"r", b.r},
                {"p", b.p},
                {"alphabet_size", b.alphabet_size},
                {"sigma", sig},
                {"gamma", b.gamma.str()},
                {"u_size_limit", b.u_size_limit.str()},
                {"u2_count_log", b.u2_count_log.str()}};
}

std::uint64_t env_node_budget() {
    const char* v = std::getenv("GTRWFO_MAX_MEM");
    if (!v) return kDefaultNodeBudget;
    return std::strtoull(v, nullptr, 10);
}

struct CheckArgs {
    std::string gtrs_file, formula_file;
    std::uint64_t max_alphabet = 200'000;
    std::uint64_t max_words = 10'000'000;
    std::uint64_t max_states = 4'000'000;
    bool bounds_only = false;
    std::string engine = "auto";
};

int run_check(const CheckArgs& a, bool as_json) {
    Gtrs r = parse_gtrs(slurp(a.gtrs_file));
    Formula phi = parse_formula(slurp(a.formula_file));
    if (a.bounds_only) {
        ReductionBounds b = report_bounds(r, phi);
        std::cout << (as_json ? bounds_json(b).dump(2) + "\n" : b.to_text());
        return 0;
    }
    ReductionCaps caps;
    caps.max_alphabet = a.max_alphabet;
    caps.max_words = a.max_words;
    caps.max_states = a.max_states;
    if (a.engine == "enum") caps.engine = FrEngine::Enumerative;
    if (a.engine == "sym") caps.engine = FrEngine::Symbolic;
    DecideResult res = decide(r, phi, caps);
    if (as_json) {
        json out{{"bounds", bounds_json(res.bounds)}};
        out["verdict"] = res.verdict == Verdict::True    ? "TRUE"
                         : res.verdict == Verdict::False ? "FALSE"
                                                         : "CAP-EXCEEDED";
        if (res.verdict == Verdict::Cap) out["cap_reason"] = res.cap_reason;
        std::cout << out.dump(2) << "\n";
    } else {
        switch (res.verdict) {
            case Verdict::True:
                std::cout << "TRUE\n";
                break;
            case Verdict::False:
                std::cout << "FALSE\n";
                break;
            case Verdict::Cap:
                std::cout << "CAP-EXCEEDED: " << res.cap_reason << "\n"
                          << res.bounds.to_text();
                break;
        }
    }
    return res.verdict == Verdict::True ? 0 : res.verdict == Verdict::False ? 1 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"first-order model checking workbench for ground tree rewrite graphs"};
    app.require_subcommand(1);
    bool as_json = false;
    std::uint64_t seed = 0;
    app.add_flag("--json", as_json, "machine-readable output");
    app.add_option("--seed", seed, "seed for randomized helpers (reserved)");

    // check
    CheckArgs check;
    auto* c_check = app.add_subcommand("check", "decide G(R) |= phi via the reduction");
    c_check->add_option("--gtrs", check.gtrs_file, "GTRS file")->required();
    c_check->add_option("--formula", check.formula_file, "formula file")->required();
    c_check->add_option("--max-alphabet", check.max_alphabet, "symbol enumeration cap");
    c_check->add_option("--max-words", check.max_words, "enumerative word budget");
    c_check->add_option("--max-states", check.max_states, "symbolic state budget");
    c_check->add_option("--engine", check.engine, "auto|sym|enum");
    c_check->add_flag("--bounds-only", check.bounds_only, "print bounds, skip deciding");

    // bounds
    std::string b_gtrs, b_formula;
    std::uint64_t b_ell = 0, b_r = 0, b_p = 0, b_asize = 0;
    auto* c_bounds = app.add_subcommand("bounds", "reduction bound calculator");
    c_bounds->add_option("--gtrs", b_gtrs, "GTRS file");
    c_bounds->add_option("--formula", b_formula, "formula file");
    c_bounds->add_option("--ell", b_ell, "quantifier prefix length minus one");
    c_bounds->add_option("--r", b_r, "maximal rule tree size");
    c_bounds->add_option("--p", b_p, "maximal symbol rank");
    c_bounds->add_option("--asize", b_asize, "alphabet size");

    // spheres
    std::string s_gtrs;
    std::vector<std::string> s_centers;
    unsigned s_radius = 1;
    bool s_word = false;
    auto* c_spheres = app.add_subcommand("spheres", "dump a sphere around centers");
    c_spheres->add_option("--gtrs", s_gtrs, "GTRS file")->required();
    c_spheres->add_option("--center", s_centers, "center term(s)")->required();
    c_spheres->add_option("--radius", s_radius, "sphere radius");
    c_spheres->add_flag("--word", s_word,
                        "centers are tree strings (terms split on ';')");

    // oracle
    std::string o_gtrs, o_formula, o_tree, o_tiling;
    std::uint64_t o_budget = 10'000'000;
    auto* c_oracle = app.add_subcommand("oracle", "guarded evaluation over G(R)");
    c_oracle->add_option("--gtrs", o_gtrs, "GTRS file")->required();
    c_oracle->add_option("--formula", o_formula, "guarded formula file")->required();
    c_oracle->add_option("--tree", o_tree, "term file bound to x")->required();
    c_oracle->add_option("--tiling", o_tiling,
                         "tiling system file; installs the marking hook");
    c_oracle->add_option("--step-budget", o_budget, "exploration step budget");

    // gen-tiling
    std::string g_system, g_preset, g_word, g_emit = "formulas", g_out = ".";
    unsigned g_n = 1;
    auto* c_gen = app.add_subcommand("gen-tiling", "emit section-4 artifacts");
    c_gen->add_option("--system", g_system, "tiling system file");
    c_gen->add_option("--preset", g_preset, "checkerboard|staircase");
    c_gen->add_option("--word", g_word, "first-row tiles, comma separated");
    c_gen->add_option("--emit", g_emit, "formulas|trees|gtrs");
    c_gen->add_option("-n", g_n, "bit parameter n");
    c_gen->add_option("--out", g_out, "output directory");

    // fr-eval
    std::string f_graph, f_formula, f_engine = "auto";
    std::uint64_t f_words = 10'000'000, f_states = 1'000'000, f_bump = 0;
    auto* c_fr = app.add_subcommand("fr-eval", "evaluate G+ |= phi for finite G");
    c_fr->add_option("--graph", f_graph, "graph file")->required();
    c_fr->add_option("--formula", f_formula, "formula file")->required();
    c_fr->add_option("--engine", f_engine, "auto|sym|enum");
    c_fr->add_option("--max-words", f_words, "enumerative word budget");
    c_fr->add_option("--max-states", f_states, "symbolic state budget");
    c_fr->add_option("--bound-bump", f_bump, "add to every quantifier bound");

    for (CLI::App* sub : app.get_subcommands({}))
        sub->fallthrough();  // global flags usable after the subcommand

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_check) return run_check(check, as_json);

        if (*c_bounds) {
            ReductionBounds b;
            if (!b_gtrs.empty() && !b_formula.empty()) {
                b = report_bounds(parse_gtrs(slurp(b_gtrs)),
                                  parse_formula(slurp(b_formula)));
            } else if (b_r > 0 && b_p > 0 && b_asize > 0) {
                b = report_bounds(b_ell, b_r, b_p, b_asize);
            } else {
                throw InputError("bounds needs --gtrs/--formula or --ell/--r/--p/--asize");
            }
            std::cout << (as_json ? bounds_json(b).dump(2) + "\n" : b.to_text());
            return 0;
        }

        if (*c_spheres) {
            Gtrs r = parse_gtrs(slurp(s_gtrs));
            SphereStructure s;
            if (s_word) {
                std::vector<TreeString> centers;
                for (const std::string& c : s_centers) {
                    TreeString w;
                    std::stringstream ss(c);
                    std::string item;
                    while (std::getline(ss, item, ';'))
                        w.push_back(parse_term(item, r.alphabet()));
                    centers.push_back(std::move(w));
                }
                s = sphere_word(r, centers, s_radius, env_node_budget());
            } else {
                std::vector<Tree> centers;
                for (const std::string& c : s_centers)
                    centers.push_back(parse_term(c, r.alphabet()));
                s = sphere(r, centers, s_radius, env_node_budget());
            }
            std::cout << s.dump();
            return 0;
        }

        if (*c_oracle) {
            Gtrs r = parse_gtrs(slurp(o_gtrs));
            Formula phi = parse_formula(slurp(o_formula));
            Tree t = parse_term(slurp(o_tree), r.alphabet());
            GuardedOptions opts;
            opts.step_budget = o_budget;
            if (!o_tiling.empty())
                opts.hooks.push_back(tiling_hook(parse_tiling(slurp(o_tiling))));
            bool value = eval_guarded(r, phi, {{"x", t}}, opts);
            if (as_json)
                std::cout << json{{"verdict", value}}.dump(2) << "\n";
            else
                std::cout << (value ? "TRUE" : "FALSE") << "\n";
            return value ? 0 : 1;
        }

        if (*c_gen) {
            TilingSystem sys;
            if (!g_system.empty())
                sys = parse_tiling(slurp(g_system));
            else if (g_preset == "staircase")
                sys = staircase_system();
            else
                sys = checkerboard_system();
            std::vector<int> w;
            {
                std::stringstream ss(g_word);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    if (item.empty()) continue;
                    int id = sys.tile_id(item);
                    if (id < 0) throw InputError("unknown tile '" + item + "'");
                    w.push_back(id);
                }
            }
            std::string dir = g_out + "/";
            if (g_emit == "gtrs") {
                write_file(dir + "r0.gtrs", to_string(r0_gtrs(sys)));
                std::cout << "wrote " << dir << "r0.gtrs\n";
            } else if (g_emit == "trees") {
                Tree tile = build_tile_tree(g_n, sys.tiles[0], 0, 0, false);
                write_file(dir + "tile.term", to_string(tile) + "\n");
                write_file(dir + "tile_marked.term",
                           to_string(build_tile_tree(g_n, sys.tiles[0], 0, 0, true)) +
                               "\n");
                if (g_n <= 1) {
                    auto sols = brute_solutions(
                        sys, static_cast<int>(grid_side(g_n)), w);
                    if (sols.empty()) throw InputError("no solution extends the word");
                    write_file(dir + "grid.term",
                               to_string(build_grid_tree(sys, g_n, sols[0])) + "\n");
                }
                std::cout << "wrote tile.term tile_marked.term"
                          << (g_n <= 1 ? " grid.term" : "") << " in " << g_out << "\n";
            } else {
                TilingFormulas f = gen_formulas(sys, g_n);
                write_file(dir + "marked.sexp", to_string(f.marked) + "\n");
                write_file(dir + "grid.sexp", to_string(f.grid) + "\n");
                write_file(dir + "sol.sexp", to_string(f.sol) + "\n");
                for (unsigned i = 1; i <= g_n + 1; ++i)
                    write_file(dir + "bit" + std::to_string(i) + ".sexp",
                               to_string(f.bit[i - 1]) + "\n");
                if (w.size() == g_n)
                    write_file(dir + "sentence.sexp",
                               to_string(gen_sentence(f, w)) + "\n");
                if (w.size() == g_n && g_n % 2 == 1)
                    write_file(dir + "alternating.sexp",
                               to_string(gen_alternating(sys, w)) + "\n");
                std::cout << "wrote formula files in " << g_out << "\n";
            }
            return 0;
        }

        if (*c_fr) {
            FiniteLabelledGraph g = parse_graph(slurp(f_graph));
            Formula phi = parse_formula(slurp(f_formula));
            FrOptions opts;
            opts.max_words = f_words;
            opts.max_states = f_states;
            opts.bound_bump = f_bump;
            if (f_engine == "enum") opts.engine = FrEngine::Enumerative;
            if (f_engine == "sym") opts.engine = FrEngine::Symbolic;
            FrResult res = fr_evaluate(g, phi, opts);
            if (as_json) {
                json bounds = json::array();
                for (const auto& b : res.bounds)
                    bounds.push_back({{"var", b.var},
                                      {"bound", b.bound},
                                      {"enforced", b.enforced}});
                std::cout << json{{"verdict", res.value},
                                  {"bounds", bounds},
                                  {"words", res.words_enumerated},
                                  {"states", res.states_created}}
                                 .dump(2)
                          << "\n";
            } else {
                std::cout << (res.value ? "TRUE" : "FALSE") << "\n";
            }
            return res.value ? 0 : 1;
        }
    } catch (const CapExceeded& e) {
        std::cerr << "CAP-EXCEEDED: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
