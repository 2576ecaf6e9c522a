#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "hierarchy.hpp"
#include "language.hpp"
#include "prefix_chain.hpp"
#include "words.hpp"

namespace zerotemp {

struct SweepRecord {
    double beta = 0;
    int memory = 0;
    double pressure_upper = std::numeric_limits<double>::quiet_NaN();
    double pressure_lower = std::numeric_limits<double>::quiet_NaN();
    double mu0 = std::numeric_limits<double>::quiet_NaN();
    double mu0_lower = std::numeric_limits<double>::quiet_NaN();
    double entropy = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> massA;  // index k-1 for level k
    std::vector<double> massB;
    double residual_upper = 0;
    double residual_lower = 0;
    bool converged = false;
    std::string error;
};

// Natural logarithm of a positive big integer.
inline double log_big(const BigInt& x) {
    if (x <= 0) fail(ErrorKind::InvalidInput, "logarithm of a nonpositive integer");
    const auto bits = boost::multiprecision::msb(x);
    if (bits < 1000) return std::log(static_cast<double>(x));
    const auto drop = bits - 60;
    return std::log(static_cast<double>(BigInt(x >> drop))) + static_cast<double>(drop) * std::log(2.0);
}

// Default memory min(ell_1 + 2, cap).
inline int default_memory(const Hierarchy& h, int cap) {
    const BigInt want = h.depth() >= 1 ? h.level(1).ell + 2 : h.level(0).ell;
    return want > BigInt(cap) ? cap : static_cast<int>(want);
}

inline int resolve_memory(const SweepConfig& cfg, const Hierarchy& h) {
    return cfg.memory > 0 ? cfg.memory : default_memory(h, cfg.memory_cap);
}

// beta_k = 2^{c * ell_k}, when representable as a double.
inline std::optional<double> coupled_beta(const Hierarchy& h, int k, double c) {
    const double e = c * static_cast<double>(h.level(k).ell > BigInt(1'000'000) ? 1'000'000 : static_cast<long>(h.level(k).ell));
    if (e >= 1023) return std::nullopt;
    return std::exp2(e);
}

inline std::vector<double> beta_grid(const SweepConfig& cfg, const Hierarchy& h) {
    std::vector<double> out(cfg.betas);
    if (cfg.beta_count > 0) {
        const double a = std::log(cfg.beta_min), b = std::log(cfg.beta_max);
        for (int i = 0; i < cfg.beta_count; ++i) {
            const double t = cfg.beta_count == 1 ? 0.0 : static_cast<double>(i) / (cfg.beta_count - 1);
            out.push_back(i == 0 ? cfg.beta_min : i == cfg.beta_count - 1 ? cfg.beta_max : std::exp(a + (b - a) * t));
        }
    }
    if (cfg.include_coupled)
        for (int k = 0; k <= h.depth(); ++k)
            if (auto b = coupled_beta(h, k, cfg.coupling)) out.push_back(*b);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Solves both envelopes at one beta and fills the record. Numeric failures flag the row.
inline SweepRecord sweep_point(const Hierarchy& h, const PrefixChain& chain, double beta,
                               const ChainSolverOptions& opt = {}) {
    SweepRecord rec;
    rec.beta = beta;
    rec.memory = chain.memory();
    try {
        const auto up = solve_chain(chain, beta, Envelope::Upper, opt);
        const auto lo = solve_chain(chain, beta, Envelope::Lower, opt);
        rec.pressure_upper = up.pressure;
        rec.pressure_lower = lo.pressure;
        rec.mu0 = symbol_mass(up, 0);
        rec.mu0_lower = symbol_mass(lo, 0);
        rec.entropy = up.entropy;
        rec.residual_upper = up.variational_residual();
        rec.residual_lower = lo.variational_residual();
        for (int k = 1; k <= h.depth(); ++k) {
            const Level& lv = h.level(k);
            if (!lv.materialized) break;
            rec.massA.push_back(mass_on_family(up, lv.A));
            rec.massB.push_back(mass_on_family(up, lv.B));
        }
        rec.converged = true;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NumericFailure) throw;
        rec.error = e.what();
    }
    return rec;
}

struct SweepResult {
    std::vector<SweepRecord> rows;
    int memory = 0;
    std::size_t states = 0;
    int mass_levels = 0;  // levels 1..mass_levels carry family masses
};

inline SweepResult sweep(const SweepConfig& cfg) {
    cfg.validate();
    const auto h = Hierarchy::build(cfg.hierarchy);
    const int m = resolve_memory(cfg, h);
    const AdmissibilityOracle oracle(h, static_cast<std::size_t>(m), cfg.budget_oracle_symbols);
    const PrefixChain chain(oracle, m, cfg.budget_states);
    const auto betas = beta_grid(cfg, h);
    SweepResult res;
    res.memory = m;
    res.states = chain.size();
    for (int k = 1; k <= h.depth() && h.level(k).materialized; ++k) res.mass_levels = k;
    res.rows.resize(betas.size());
    const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(betas.size())));
    std::atomic<std::size_t> cursor{0};
    std::vector<std::string> errors(static_cast<std::size_t>(jobs));
    auto work = [&](int id) {
        try {
            for (std::size_t i; (i = cursor++) < betas.size();) res.rows[i] = sweep_point(h, chain, betas[i]);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(id)] = e.what();
        }
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(work, j);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (!e.empty()) fail(ErrorKind::ResourceLimit, e);
    return res;
}

// Round-trip exact formatting, independent of locale.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_csv(std::ostream& os, const std::vector<SweepRecord>& rows, int mass_levels) {
    os << "beta,memory,pressure_upper,pressure_lower,mu0,entropy";
    for (int k = 1; k <= mass_levels; ++k) os << ",massA" << k << ",massB" << k;
    os << ",converged\n";
    for (const auto& r : rows) {
        os << format_double(r.beta) << ',' << r.memory << ',' << format_double(r.pressure_upper) << ','
           << format_double(r.pressure_lower) << ',' << format_double(r.mu0) << ',' << format_double(r.entropy);
        for (int k = 0; k < mass_levels; ++k) {
            const auto i = static_cast<std::size_t>(k);
            os << ',' << format_double(i < r.massA.size() ? r.massA[i] : std::nan(""));
            os << ',' << format_double(i < r.massB.size() ? r.massB[i] : std::nan(""));
        }
        os << ',' << (r.converged ? "true" : "false") << '\n';
    }
}

inline std::vector<SweepRecord> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) fail(ErrorKind::InvalidInput, "empty CSV");
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
        return out;
    };
    const auto header = split(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* need : {"beta", "memory", "pressure_upper", "pressure_lower", "mu0", "entropy", "converged"})
        if (!col.count(need)) fail(ErrorKind::InvalidInput, std::string("CSV lacks column ") + need);
    auto num = [](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
            fail(ErrorKind::InvalidInput, "bad number '" + s + "' in CSV");
        }
    };
    std::vector<SweepRecord> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) fail(ErrorKind::InvalidInput, "CSV row has the wrong number of cells");
        SweepRecord r;
        r.beta = num(cells[col["beta"]]);
        r.memory = static_cast<int>(num(cells[col["memory"]]));
        r.pressure_upper = num(cells[col["pressure_upper"]]);
        r.pressure_lower = num(cells[col["pressure_lower"]]);
        r.mu0 = num(cells[col["mu0"]]);
        r.entropy = num(cells[col["entropy"]]);
        for (int k = 1; col.count("massA" + std::to_string(k)); ++k) {
            r.massA.push_back(num(cells[col["massA" + std::to_string(k)]]));
            r.massB.push_back(num(cells[col["massB" + std::to_string(k)]]));
        }
        const auto& c = cells[col["converged"]];
        if (c != "true" && c != "false") fail(ErrorKind::InvalidInput, "converged must be true or false");
        r.converged = c == "true";
        rows.push_back(std::move(r));
    }
    return rows;
}

struct OscillationReport {
    double low = 0.45;
    double high = 0.55;
    int crossings = 0;
    // Rows where mu0 left the band on a new side: (beta, mu0, +1 above high / -1 below low).
    std::vector<std::tuple<double, double, int>> extremes;
    double max_gap_ratio = 0;  // max over rows of (P_upper - P_lower) / (beta 2^{-m}); <= 1 expected
    bool gaps_ok = true;
    bool nonconvergent = false;
};

inline OscillationReport oscillation_report(const std::vector<SweepRecord>& rows, double low = 0.45, double high = 0.55) {
    if (!(0 < low && low < high && high < 1)) fail(ErrorKind::InvalidInput, "thresholds need 0 < low < high < 1");
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].beta < rows[i - 1].beta) fail(ErrorKind::InvalidInput, "rows must be sorted by beta");
    OscillationReport rep;
    rep.low = low;
    rep.high = high;
    int side = 0;
    for (const auto& r : rows) {
        if (!r.converged) continue;
        const int now = r.mu0 > high ? 1 : (r.mu0 < low ? -1 : 0);
        if (now != 0 && now != side) {
            if (side != 0) ++rep.crossings;
            side = now;
            rep.extremes.emplace_back(r.beta, r.mu0, now);
        }
        const double gap = r.pressure_upper - r.pressure_lower;
        const double bound = r.beta * std::ldexp(1.0, -r.memory);
        if (gap < -1e-12 || gap > bound * (1 + 1e-9) + 1e-12) rep.gaps_ok = false;
        if (bound > 0) rep.max_gap_ratio = std::max(rep.max_gap_ratio, gap / bound);
    }
    rep.nonconvergent = rep.crossings >= 2;
    return rep;
}

struct Decomposition {
    struct Segment {
        std::size_t start = 0;
        std::size_t length = 0;
        bool block = false;
        std::size_t index = 0;  // into A_k then B_k when block
    };
    std::vector<Segment> segments;
    Rational coverage{0};
};

// Splits w into level-k blocks (located through c_k and validated as whole blocks) and filler.
inline Decomposition parse_blocks(const Word& w, const Level& level) {
    if (level.variant != Variant::Main) fail(ErrorKind::UnsupportedVariant, "parsing needs marker blocks");
    if (level.k < 1 || !level.materialized) fail(ErrorKind::InvalidInput, "parsing needs a materialized level k >= 1");
    if (w.empty()) fail(ErrorKind::InvalidInput, "cannot parse the empty word");
    const std::size_t ell = level.length();
    std::unordered_map<std::string, std::size_t> lookup;
    const auto blocks = level.blocks();
    for (std::size_t i = 0; i < blocks.size(); ++i) lookup.emplace(blocks[i].symbols(), i);
    const auto& c = level.c.symbols();
    const auto starts = detail::find_all(c, detail::prefix_function(c), w.symbols());
    std::vector<std::pair<std::size_t, std::size_t>> found;  // (start, block index)
    for (auto p : starts) {
        if (p + ell > w.size()) continue;
        auto it = lookup.find(w.symbols().substr(p, ell));
        if (it != lookup.end()) found.emplace_back(p, it->second);
    }
    for (std::size_t i = 1; i < found.size(); ++i)
        if (found[i].first < found[i - 1].first + ell)
            fail(ErrorKind::Ambiguity, "overlapping blocks at offsets " + std::to_string(found[i - 1].first) + " and " +
                                           std::to_string(found[i].first));
    Decomposition d;
    std::size_t pos = 0, covered = 0;
    for (const auto& [p, idx] : found) {
        if (p > pos) d.segments.push_back({pos, p - pos, false, 0});
        d.segments.push_back({p, ell, true, idx});
        covered += ell;
        pos = p + ell;
    }
    if (pos < w.size()) d.segments.push_back({pos, w.size() - pos, false, 0});
    d.coverage = Rational(static_cast<std::int64_t>(covered), static_cast<std::int64_t>(w.size()));
    return d;
}

struct LemmaOptions {
    int exponent = 100;              // count exponent E
    double coupling = 3;             // beta_k = 2^{coupling * ell_k}
    Rational gap_constant{100};      // modified-variant frequency gap
    int memory = 0;                  // 0 selects min(ell_1 + 2, memory_cap)
    int memory_cap = 1024;
    std::uint64_t window_budget = 2'000'000'000ULL;
    std::size_t budget_states = 2'000'000;
    std::uint64_t budget_oracle_symbols = 50'000'000;
    bool thermodynamic = true;       // parts (c) and (d) need a chain solve
};

struct CountCheck {
    int k = 0;
    BigInt big;    // the family that should dominate
    BigInt small;  // the other family
    bool pass = false;
};

struct ConcentrationCheck {
    int k = 0;
    double beta = 0;
    bool evaluated = false;
    double mass = 0;   // ell_k * mass of the L_k cylinders
    double bound = 0;  // 1 - 2^{-ell_k}
    bool pass = false;
    std::string note;
};

struct MarkovBoundCheck {
    int k = 0;
    double beta = 0;
    double pressure = 0;
    double entropy_bound = 0;  // log|dominant family| / ell_k
    double slack = 0;
    bool pass = false;
};

struct LemmaReport {
    std::vector<FrequencyReport> frequency;
    std::vector<CountCheck> counts;
    std::vector<ParsabilityReport> parsability;
    std::vector<ConcentrationCheck> concentration;
    std::vector<MarkovBoundCheck> markov;
    int memory = 0;
    double max_residual = 0;
    std::vector<std::string> notes;

    bool frequency_pass(int k) const {
        for (const auto& f : frequency)
            if (f.k == k) return f.available && f.pass;
        return false;
    }
};

inline LemmaReport lemma_suite(const HierarchyParams& params, const LemmaOptions& opt = {}) {
    const auto h = Hierarchy::build(params);
    LemmaReport rep;
    for (int k = 0; k <= h.depth(); ++k) {
        rep.frequency.push_back(check_frequency_gap(h.level(k), params.variant, opt.gap_constant));
        if (params.variant == Variant::Modified) {
            const Level& lv = h.level(k);
            if (k >= 1 && lv.ell_paper_formula != 0 && lv.ell_paper_formula != lv.ell)
                rep.notes.push_back("level " + std::to_string(k) + ": block length " + lv.ell.str() +
                                    " differs from the closed form " + lv.ell_paper_formula.str());
            if (lv.constant_one_in_A && !*lv.constant_one_in_A)
                rep.notes.push_back("level " + std::to_string(k) + ": the constant word 1^ell is not an A-block");
            if (lv.constant_two_in_B && !*lv.constant_two_in_B)
                rep.notes.push_back("level " + std::to_string(k) + ": the constant word 2^ell is not a B-block");
        }
    }
    if (params.variant == Variant::Modified) return rep;

    for (int k = 1; k <= h.depth(); ++k) {
        const auto [a, b] = count_blocks(params, k);
        CountCheck c;
        c.k = k;
        c.big = k % 2 == 1 ? b : a;
        c.small = k % 2 == 1 ? a : b;
        c.pass = c.big > boost::multiprecision::pow(c.small, static_cast<unsigned>(opt.exponent));
        rep.counts.push_back(c);
        if (h.level(k).materialized) rep.parsability.push_back(check_unique_parsability(h.level(k), opt.window_budget));
    }
    if (!opt.thermodynamic) return rep;

    const int m = opt.memory > 0 ? opt.memory : default_memory(h, opt.memory_cap);
    rep.memory = m;
    const AdmissibilityOracle oracle(h, static_cast<std::size_t>(m), opt.budget_oracle_symbols);
    const PrefixChain chain(oracle, m, opt.budget_states);
    auto solve = [&](double beta) {
        auto mm = solve_chain(chain, beta, Envelope::Upper);
        rep.max_residual = std::max(rep.max_residual, std::abs(mm.variational_residual()));
        return mm;
    };
    for (int k = 1; k <= h.depth(); ++k) {
        const Level& lv = h.level(k);
        const auto beta = coupled_beta(h, k, opt.coupling);
        ConcentrationCheck cc;
        cc.k = k;
        cc.bound = 1 - std::exp2(-static_cast<double>(std::min<BigInt>(lv.ell, 2000)));
        MarkovBoundCheck mb;
        mb.k = k;
        const BigInt& dominant = k % 2 == 1 ? lv.countB : lv.countA;
        mb.entropy_bound = log_big(dominant) / static_cast<double>(std::min<BigInt>(lv.ell, BigInt(1) << 60));
        if (!beta) {
            cc.note = "beta_k = 2^(c*ell_k) is not representable";
            rep.concentration.push_back(cc);
            continue;
        }
        cc.beta = mb.beta = *beta;
        const auto mm = solve(*beta);
        if (lv.materialized) {
            cc.evaluated = true;
            cc.mass = static_cast<double>(lv.length()) * (mass_on_family(mm, lv.A) + mass_on_family(mm, lv.B));
            cc.pass = cc.mass > cc.bound;
        } else {
            cc.note = "level is counts-only";
        }
        rep.concentration.push_back(cc);
        // Windows of <B_k> (odd k) are admissible up to length ell_k + 1.
        mb.pressure = mm.pressure;
        mb.slack = m > lv.ell + 1 ? *beta * std::exp2(-static_cast<double>(lv.ell + 1)) : 0.0;
        mb.pass = mb.pressure >= mb.entropy_bound - mb.slack - 1e-12;
        if (k % 2 == 1) rep.markov.push_back(mb);
    }
    return rep;
}

}  // namespace zerotemp
