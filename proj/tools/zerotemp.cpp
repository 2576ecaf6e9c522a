#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <zerotemp/config.hpp>
#include <zerotemp/experiment.hpp>
#include <zerotemp/hierarchy.hpp>
#include <zerotemp/language.hpp>
#include <zerotemp/prefix_chain.hpp>
#include <zerotemp/thermo.hpp>

#ifndef ZEROTEMP_VERSION
#define ZEROTEMP_VERSION "0.1.0"
#endif

using namespace zerotemp;

namespace {

// Largest memory solved through the dense de Bruijn matrix; above it, or if that solve stalls, the prefix chain is used.
constexpr int dense_memory_limit = 14;
constexpr EigenOptions dense_options{1e-12, 20'000};

struct HierarchyFlags {
    std::string variant = "main";
    int depth = 0;
    std::vector<std::int64_t> N;
    std::vector<int> r;
    std::vector<std::int64_t> long_exp;
    std::vector<std::int64_t> short_exp;
    std::uint64_t budget_symbols = 1'000'000;

    void attach(CLI::App* app) {
        app->add_option("--variant", variant, "main or modified")->check(CLI::IsMember({"main", "modified"}));
        app->add_option("--depth", depth, "number of levels above the seed");
        app->add_option("--N", N, "N_1 .. N_K")->delimiter(',');
        app->add_option("--rep", r, "tuple length r_1 .. r_K of the markers")->delimiter(',');
        app->add_option("--long-exp", long_exp, "modified variant: long repetition exponents")->delimiter(',');
        app->add_option("--short-exp", short_exp, "modified variant: short repetition exponents")->delimiter(',');
        app->add_option("--budget-symbols", budget_symbols, "symbols a level may materialize");
    }

    HierarchyParams params(const HierarchyParams& defaults) const {
        HierarchyParams p = defaults;
        p.variant = variant == "modified" ? Variant::Modified : Variant::Main;
        p.budget_symbols = budget_symbols;
        if (!N.empty()) p.N = N;
        if (!r.empty()) p.r = r;
        p.long_exp = long_exp;
        p.short_exp = short_exp;
        p.depth = depth > 0 ? depth : static_cast<int>(p.N.size());
        // Short lists repeat their last entry; defaults longer than the depth are cut.
        auto fit = [&](auto& v, bool given) {
            const auto d = static_cast<std::size_t>(p.depth);
            if (v.empty() || (given && v.size() > d)) return;
            const auto last = v.back();
            v.resize(d, last);
        };
        fit(p.N, !N.empty());
        fit(p.r, !r.empty());
        return p;
    }
};

struct BudgetFlags {
    std::size_t states = 2'000'000;
    std::uint64_t oracle = 50'000'000;
    std::uint64_t table = 1ULL << 22;

    void attach(CLI::App* app) {
        app->add_option("--budget-states", states, "prefix-chain states");
        app->add_option("--budget-oracle", oracle, "symbols indexed by the admissibility oracle");
        app->add_option("--budget-table", table, "entries of a dense potential table");
    }
};

struct Solved {
    double pressure = 0;
    double mu0 = 0;
    double entropy = 0;
    double residual = 0;
};

Solved solve_hierarchy_potential(const Hierarchy& h, int m, double beta, Envelope env, const BudgetFlags& b) {
    const AdmissibilityOracle oracle(h, static_cast<std::size_t>(m), b.oracle);
    Solved out;
    if (m <= dense_memory_limit) {
        try {
            const auto pot = truncated_potential(oracle, m, env, b.table);
            const auto sol = solve_transfer(pot, beta, dense_options);
            out.pressure = sol.pressure;
            out.mu0 = cylinder_mass(sol.markov, Word::parse("0"));
            out.entropy = entropy(sol.markov);
            out.residual = variational_residual(sol, pot);
            return out;
        } catch (const Error& e) {
            // Power iteration can stall at very large beta; the chain solver does not.
            if (e.kind() != ErrorKind::NumericFailure) throw;
        }
    }
    {
        const PrefixChain chain(oracle, m, b.states);
        const auto mm = solve_chain(chain, beta, env);
        out.pressure = mm.pressure;
        out.mu0 = symbol_mass(mm, 0);
        out.entropy = mm.entropy;
        out.residual = mm.variational_residual();
    }
    return out;
}

int memory_or_default(int memory, const Hierarchy& h) { return memory > 0 ? memory : default_memory(h, 1024); }

std::ostream& output(const std::string& path, std::ofstream& file) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) fail(ErrorKind::InvalidInput, "cannot write '" + path + "'");
    return file;
}

std::string fmt(double x) { return format_double(x); }

void print_level(const Level& lv) {
    std::cout << "level " << lv.k << ": ell=" << lv.ell << " |A|=" << lv.countA << " |B|=" << lv.countB;
    if (lv.k > 0 && lv.variant == Variant::Main) std::cout << " |c|=" << lv.c_length;
    std::cout << (lv.materialized ? " materialized" : " counts-only") << '\n';
    if (lv.ell_paper_formula != 0 && lv.ell_paper_formula != lv.ell)
        std::cout << "  note: closed-form length " << lv.ell_paper_formula << " differs from the built length\n";
    if (lv.constant_one_in_A) std::cout << "  1^ell in A: " << (*lv.constant_one_in_A ? "yes" : "no") << '\n';
    if (lv.constant_two_in_B) std::cout << "  2^ell in B: " << (*lv.constant_two_in_B ? "yes" : "no") << '\n';
}

std::string pass(bool ok) { return ok ? "pass" : "FAIL"; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical subshift, distance potential, and zero-temperature sweeps"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("zerotemp ") + ZEROTEMP_VERSION);

    HierarchyParams lemma_defaults;  // N = (3, 3), r = (2, 2)
    const HierarchyParams sweep_defaults = SweepConfig::acceptance_hierarchy();

    // build-hierarchy
    auto* build = app.add_subcommand("build-hierarchy", "build the levels and print their sizes");
    HierarchyFlags build_h;
    build_h.attach(build);
    bool emit_words = false;
    build->add_flag("--emit-words", emit_words, "print every materialized block and marker");

    // check-lemmas
    auto* lemmas = app.add_subcommand("check-lemmas", "machine-check the block lemmas at desk scale");
    HierarchyFlags lemma_h;
    lemma_h.attach(lemmas);
    BudgetFlags lemma_b;
    lemma_b.attach(lemmas);
    LemmaOptions lemma_opt;
    lemma_opt.exponent = 2;
    bool no_thermo = false;
    lemmas->add_option("--exponent", lemma_opt.exponent, "count exponent E");
    lemmas->add_option("--coupling", lemma_opt.coupling, "beta_k = 2^(coupling * ell_k)");
    lemmas->add_option("--memory", lemma_opt.memory, "memory m (default ell_1 + 2)");
    lemmas->add_option("--budget-windows", lemma_opt.window_budget, "windows scanned by the parsability check");
    lemmas->add_flag("--no-thermo", no_thermo, "skip the parts that solve a Gibbs measure");

    // admissible
    auto* adm = app.add_subcommand("admissible", "decide whether a word is a factor of the subshift");
    HierarchyFlags adm_h;
    adm_h.attach(adm);
    std::string adm_word;
    bool adm_witness = false;
    adm->add_option("word", adm_word, "binary word")->required();
    adm->add_flag("--witness", adm_witness, "print a pair of blocks containing the word");

    // potential-table
    auto* table = app.add_subcommand("potential-table", "print the truncated potential as CSV");
    HierarchyFlags table_h;
    table_h.attach(table);
    BudgetFlags table_b;
    table_b.attach(table);
    int table_m = 0;
    std::string table_env = "upper", table_out;
    table->add_option("--memory", table_m, "window length m")->required();
    table->add_option("--envelope", table_env, "upper or lower")->check(CLI::IsMember({"upper", "lower"}));
    table->add_option("--out", table_out, "output file");

    // pressure
    auto* pres = app.add_subcommand("pressure", "pressure of the truncated distance potential");
    HierarchyFlags pres_h;
    pres_h.attach(pres);
    BudgetFlags pres_b;
    pres_b.attach(pres);
    int pres_m = 0;
    double pres_beta = 0;
    std::string pres_env = "upper";
    pres->add_option("--memory", pres_m, "window length m (default ell_1 + 2)");
    pres->add_option("--beta", pres_beta, "inverse temperature")->required();
    pres->add_option("--envelope", pres_env, "upper or lower")->check(CLI::IsMember({"upper", "lower"}));

    // gibbs
    auto* gibbs = app.add_subcommand("gibbs", "equilibrium measure of the truncated potential");
    HierarchyFlags gibbs_h;
    gibbs_h.attach(gibbs);
    BudgetFlags gibbs_b;
    gibbs_b.attach(gibbs);
    int gibbs_m = 0;
    double gibbs_beta = 0;
    std::string gibbs_env = "upper", gibbs_out;
    bool dump = false;
    gibbs->add_option("--memory", gibbs_m, "window length m")->required();
    gibbs->add_option("--beta", gibbs_beta, "inverse temperature")->required();
    gibbs->add_option("--envelope", gibbs_env, "upper or lower")->check(CLI::IsMember({"upper", "lower"}));
    gibbs->add_flag("--dump-markov", dump, "print transitions and the stationary vector as CSV");
    gibbs->add_option("--out", gibbs_out, "output file for the dump");

    // sweep
    auto* sw = app.add_subcommand("sweep", "beta sweep of both envelopes, CSV output");
    std::string sw_config, sw_out;
    int sw_jobs = 0;
    std::size_t sw_states = 0;
    std::uint64_t sw_oracle = 0;
    sw->add_option("--config", sw_config, "key = value configuration file");
    sw->add_option("--out", sw_out, "CSV file (default standard output)");
    sw->add_option("--jobs", sw_jobs, "worker threads");
    sw->add_option("--budget-states", sw_states, "prefix-chain states");
    sw->add_option("--budget-oracle", sw_oracle, "symbols indexed by the admissibility oracle");

    // report
    auto* rep = app.add_subcommand("report", "count threshold crossings of mu0 in a sweep CSV");
    std::string rep_in;
    double rep_low = 0.45, rep_high = 0.55;
    rep->add_option("--in", rep_in, "sweep CSV")->required();
    rep->add_option("--low", rep_low, "lower threshold");
    rep->add_option("--high", rep_high, "upper threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (*build) {
            const auto h = Hierarchy::build(build_h.params(lemma_defaults));
            for (const auto& lv : h.levels()) {
                print_level(lv);
                if (!emit_words || !lv.materialized) continue;
                if (lv.k > 0 && lv.variant == Variant::Main) std::cout << "  c " << lv.c.str() << '\n';
                for (const auto& w : lv.A) std::cout << "  A " << w.str() << '\n';
                for (const auto& w : lv.B) std::cout << "  B " << w.str() << '\n';
            }
        } else if (*lemmas) {
            const auto params = lemma_h.params(lemma_defaults);
            lemma_opt.thermodynamic = !no_thermo;
            lemma_opt.budget_states = lemma_b.states;
            lemma_opt.budget_oracle_symbols = lemma_b.oracle;
            const auto r = lemma_suite(params, lemma_opt);
            bool all = true;
            for (const auto& f : r.frequency) {
                if (!f.available) {
                    std::cout << "frequency k=" << f.k << ": unavailable\n";
                    continue;
                }
                std::cout << "frequency k=" << f.k << ": f0 on A in [" << f.A[0].min << ", " << f.A[0].max << "], on B in ["
                          << f.B[0].min << ", " << f.B[0].max << "] " << pass(f.pass) << '\n';
                if (f.k == 0 && params.variant == Variant::Main) all = all && f.pass;
            }
            for (const auto& c : r.counts) {
                std::cout << "count k=" << c.k << ": " << c.big << " > " << c.small << "^" << lemma_opt.exponent << " "
                          << pass(c.pass) << '\n';
                all = all && c.pass;
            }
            for (const auto& p : r.parsability) {
                std::cout << "parsability k=" << p.k << ": " << p.windows_checked << " windows " << pass(p.pass) << '\n';
                all = all && p.pass;
            }
            for (const auto& c : r.concentration) {
                std::cout << "concentration k=" << c.k << ": ";
                if (!c.evaluated) {
                    std::cout << "skipped (" << c.note << ")\n";
                    continue;
                }
                std::cout << "beta=" << fmt(c.beta) << " mass=" << fmt(c.mass) << " bound=" << fmt(c.bound) << " "
                          << pass(c.pass) << '\n';
            }
            for (const auto& mb : r.markov) {
                std::cout << "markov k=" << mb.k << ": beta=" << fmt(mb.beta) << " pressure=" << fmt(mb.pressure)
                          << " >= " << fmt(mb.entropy_bound) << " - " << fmt(mb.slack) << " " << pass(mb.pass) << '\n';
                all = all && mb.pass;
            }
            for (const auto& n : r.notes) std::cout << "note: " << n << '\n';
            if (lemma_opt.thermodynamic)
                std::cout << "memory " << r.memory << ", max variational residual " << fmt(r.max_residual) << '\n';
            std::cout << (all ? "all checks passed" : "some checks failed") << '\n';
        } else if (*adm) {
            const auto h = Hierarchy::build(adm_h.params(lemma_defaults));
            const Word w = Word::parse(adm_word);
            const AdmissibilityOracle oracle(h, std::max<std::size_t>(w.size(), 1));
            const bool ok = oracle.admissible(w);
            std::cout << (ok ? "true" : "false") << '\n';
            if (adm_witness) {
                if (const auto wit = oracle.witness(w)) {
                    const Level& lv = h.level(wit->k);
                    std::cout << "level " << wit->k << " blocks " << wit->u << ' ' << wit->v << " offset " << wit->offset << '\n';
                    if (lv.materialized) {
                        const auto blocks = lv.blocks();
                        std::cout << "u " << blocks[wit->u].str() << '\n' << "v " << blocks[wit->v].str() << '\n';
                    }
                } else {
                    std::cout << "longest admissible prefix " << oracle.longest_admissible_prefix(w) << '\n';
                }
            }
        } else if (*table) {
            const auto h = Hierarchy::build(table_h.params(sweep_defaults));
            const AdmissibilityOracle oracle(h, static_cast<std::size_t>(table_m), table_b.oracle);
            const auto pot = truncated_potential(oracle, table_m, parse_envelope(table_env), table_b.table);
            std::ofstream file;
            auto& os = output(table_out, file);
            os << "word,value\n";
            for (std::size_t code = 0; code < pot.size(); ++code) os << pot.decode(code).str() << ',' << fmt(pot[code]) << '\n';
        } else if (*pres) {
            const auto h = Hierarchy::build(pres_h.params(sweep_defaults));
            const int m = memory_or_default(pres_m, h);
            const auto s = solve_hierarchy_potential(h, m, pres_beta, parse_envelope(pres_env), pres_b);
            std::cout << "pressure = " << fmt(s.pressure) << '\n'
                      << "mu0 = " << fmt(s.mu0) << '\n'
                      << "entropy = " << fmt(s.entropy) << '\n'
                      << "variational_residual = " << fmt(s.residual) << '\n';
        } else if (*gibbs) {
            const auto h = Hierarchy::build(gibbs_h.params(sweep_defaults));
            const Envelope env = parse_envelope(gibbs_env);
            const AdmissibilityOracle oracle(h, static_cast<std::size_t>(gibbs_m), gibbs_b.oracle);
            std::ofstream file;
            std::optional<TransferSolution> dense_sol;
            if (gibbs_m <= dense_memory_limit) {
                try {
                    dense_sol = solve_transfer(truncated_potential(oracle, gibbs_m, env, gibbs_b.table), gibbs_beta, dense_options);
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::NumericFailure) throw;
                }
            }
            if (dense_sol) {
                const auto& sol = *dense_sol;
                std::cerr << "pressure " << fmt(sol.pressure) << ", mu0 " << fmt(cylinder_mass(sol.markov, Word::parse("0")))
                          << ", entropy " << fmt(entropy(sol.markov)) << '\n';
                if (dump) {
                    auto& os = output(gibbs_out, file);
                    const auto& mm = sol.markov;
                    os << "state,next,prob\n";
                    for (std::size_t u = 0; u < mm.states; ++u)
                        for (int s = 0; s < mm.alphabet; ++s) {
                            const auto e = u * static_cast<std::size_t>(mm.alphabet) + static_cast<std::size_t>(s);
                            os << u << ',' << mm.next[e] << ',' << fmt(mm.prob[e]) << '\n';
                        }
                    os << "state,pi\n";
                    for (std::size_t u = 0; u < mm.states; ++u) os << u << ',' << fmt(mm.pi[u]) << '\n';
                }
            } else {
                const PrefixChain chain(oracle, gibbs_m, gibbs_b.states);
                const auto mm = solve_chain(chain, gibbs_beta, env);
                std::cerr << "pressure " << fmt(mm.pressure) << ", mu0 " << fmt(symbol_mass(mm, 0)) << ", entropy "
                          << fmt(mm.entropy) << ", states " << chain.size() << '\n';
                if (dump) {
                    auto& os = output(gibbs_out, file);
                    os << "state,next,prob\n";
                    for (std::size_t u = 0; u < chain.size(); ++u)
                        for (int s = 0; s < 2; ++s)
                            os << u << ',' << chain.next(u, s) << ',' << fmt(mm.prob[2 * u + static_cast<std::size_t>(s)]) << '\n';
                    os << "state,pi\n";
                    for (std::size_t u = 0; u < chain.size(); ++u) os << u << ',' << fmt(mm.pi[u]) << '\n';
                }
            }
        } else if (*sw) {
            SweepConfig cfg = sw_config.empty() ? SweepConfig{} : load_config(sw_config);
            if (sw_jobs > 0) cfg.jobs = sw_jobs;
            if (sw_states > 0) cfg.budget_states = sw_states;
            if (sw_oracle > 0) cfg.budget_oracle_symbols = sw_oracle;
            if (!sw_out.empty()) cfg.output = sw_out;
            const auto res = sweep(cfg);
            std::cerr << "memory " << res.memory << ", " << res.states << " chain states, " << res.rows.size() << " rows\n";
            std::ofstream file;
            write_csv(output(cfg.output, file), res.rows, res.mass_levels);
            const auto r = oscillation_report(res.rows, cfg.low, cfg.high);
            std::cerr << "crossings " << r.crossings << (r.nonconvergent ? " (non-convergent at desk scale)" : "") << '\n';
        } else if (*rep) {
            std::ifstream in(rep_in);
            if (!in) fail(ErrorKind::InvalidInput, "cannot open '" + rep_in + "'");
            const auto rows = read_csv(in);
            const auto r = oscillation_report(rows, rep_low, rep_high);
            std::cout << "rows " << rows.size() << '\n'
                      << "thresholds " << fmt(r.low) << ' ' << fmt(r.high) << '\n';
            for (const auto& [beta, mu0, side] : r.extremes)
                std::cout << (side > 0 ? "above " : "below ") << "beta=" << fmt(beta) << " mu0=" << fmt(mu0) << '\n';
            std::cout << "crossings " << r.crossings << '\n'
                      << "max envelope gap / (beta 2^-m) " << fmt(r.max_gap_ratio) << (r.gaps_ok ? "" : " (bound violated)")
                      << '\n'
                      << "verdict " << (r.nonconvergent ? "non-convergent at desk scale" : "no oscillation detected") << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::bad_alloc&) {
        std::cerr << "error: out of memory\n";
        return exit_code(ErrorKind::ResourceLimit);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
