#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "error.hpp"
#include "words.hpp"

namespace zerotemp {

using BigInt = boost::multiprecision::cpp_int;

enum class Variant { Main, Modified };

enum class TupleOrder { Lexicographic };

struct HierarchyParams {
    Variant variant = Variant::Main;
    int depth = 2;
    std::vector<std::int64_t> N{3, 3};
    std::vector<int> r{2, 2};
    // Modified variant only: per-level exponent overrides. On odd levels A-blocks are
    // a^{long_exp} and B-blocks are b^{short_exp} followed by the tail; even levels swap.
    std::vector<std::int64_t> long_exp;
    std::vector<std::int64_t> short_exp;
    // Total symbols a single level may materialize.
    std::uint64_t budget_symbols = 1'000'000;
    // Block-structure entries (level k blocks as index lists over level k-1) kept per level.
    std::uint64_t budget_tails = 4'000'000;
    // Over-budget levels become counts-only when true, otherwise building fails.
    bool counts_only_on_budget = true;

    void validate() const {
        if (depth < 1) fail(ErrorKind::InvalidInput, "depth must be at least 1");
        if (N.size() != static_cast<std::size_t>(depth))
            fail(ErrorKind::InvalidInput, "N must list exactly depth entries");
        for (auto n : N)
            if (n < 1) fail(ErrorKind::InvalidInput, "every N_k must be positive");
        if (variant == Variant::Main) {
            if (r.size() != static_cast<std::size_t>(depth))
                fail(ErrorKind::InvalidInput, "r must list exactly depth entries");
            for (int x : r)
                if (x < 2) fail(ErrorKind::InvalidInput, "every r_k must be at least 2");
        } else {
            if (!long_exp.empty() && long_exp.size() != static_cast<std::size_t>(depth))
                fail(ErrorKind::InvalidInput, "long exponent overrides must list depth entries");
            if (short_exp.size() != long_exp.size())
                fail(ErrorKind::InvalidInput, "long and short exponent overrides must have equal length");
            for (std::size_t i = 0; i < long_exp.size(); ++i)
                if (short_exp[i] < 1 || long_exp[i] <= short_exp[i])
                    fail(ErrorKind::InvalidInput, "exponent overrides need 1 <= short < long");
        }
        if (budget_symbols == 0 || budget_tails == 0) fail(ErrorKind::InvalidInput, "budgets must be positive");
    }
};

// Symbol counts of one block (index = symbol).
using SymbolCounts = std::array<std::int64_t, 3>;

struct Level {
    int k = 0;
    Variant variant = Variant::Main;
    int alphabet = 2;
    BigInt ell;
    BigInt c_length;  // zero for the seed level and the modified variant
    BigInt countA;
    BigInt countB;
    bool materialized = false;
    std::vector<Word> A;
    std::vector<Word> B;
    Word c;
    int r = 0;
    std::int64_t N = 0;
    // Main variant, k >= 1: tails as indices into the previous level's blocks (A first, then B).
    bool has_structure = false;
    std::vector<std::vector<std::uint32_t>> tailsA;
    std::vector<std::vector<std::uint32_t>> tailsB;
    // Per-block symbol counts, available whenever the structure or the words are known.
    std::vector<SymbolCounts> symbolsA;
    std::vector<SymbolCounts> symbolsB;
    // Modified variant bookkeeping.
    BigInt ell_paper_formula;
    std::optional<bool> constant_one_in_A;
    std::optional<bool> constant_two_in_B;

    std::size_t length() const {
        if (ell > BigInt(std::numeric_limits<std::int64_t>::max()))
            fail(ErrorKind::ResourceLimit, "block length of level " + std::to_string(k) + " exceeds 64 bits");
        return static_cast<std::size_t>(ell);
    }

    std::size_t block_count() const { return A.size() + B.size(); }

    // A-blocks followed by B-blocks.
    std::vector<Word> blocks() const {
        std::vector<Word> out(A);
        out.insert(out.end(), B.begin(), B.end());
        return out;
    }
};

namespace detail {

inline Word seed_word(const char* text, int alphabet) { return Word::parse(text, alphabet); }

inline SymbolCounts count_symbols(const Word& w) {
    SymbolCounts out{0, 0, 0};
    for (unsigned char s : w.symbols()) ++out[s];
    return out;
}

inline void add_counts(SymbolCounts& into, const SymbolCounts& x, std::int64_t times = 1) {
    for (int s = 0; s < 3; ++s) into[s] += x[s] * times;
}

// Calls f(tuple) for every length-n tuple over [0, base) in lexicographic order.
template <class F>
void for_each_tuple(std::size_t base, std::size_t n, F&& f) {
    std::vector<std::uint32_t> idx(n, 0);
    if (base == 0) return;
    while (true) {
        f(idx);
        std::size_t i = n;
        while (i > 0) {
            --i;
            if (++idx[i] < base) break;
            idx[i] = 0;
            if (i == 0) return;
        }
        if (n == 0) return;
    }
}

inline BigInt pow_big(const BigInt& base, std::uint64_t e) {
    BigInt out = 1;
    for (std::uint64_t i = 0; i < e; ++i) out *= base;
    return out;
}

}  // namespace detail

inline Level seed_level(Variant variant) {
    Level lv;
    lv.k = 0;
    lv.variant = variant;
    if (variant == Variant::Main) {
        lv.alphabet = 2;
        lv.A = {detail::seed_word("00000", 2), detail::seed_word("01000", 2)};
        lv.B = {detail::seed_word("11111", 2), detail::seed_word("10111", 2)};
        lv.ell = 5;
    } else {
        lv.alphabet = 3;
        lv.A = {detail::seed_word("00", 3), detail::seed_word("01", 3)};
        lv.B = {detail::seed_word("00", 3), detail::seed_word("02", 3)};
        lv.ell = 2;
    }
    lv.countA = 2;
    lv.countB = 2;
    lv.materialized = true;
    for (const auto& w : lv.A) lv.symbolsA.push_back(detail::count_symbols(w));
    for (const auto& w : lv.B) lv.symbolsB.push_back(detail::count_symbols(w));
    return lv;
}

// Concatenation of all r-tuples over A_{k-1} then B_{k-1}, in lexicographic tuple order.
inline Word build_c(const Level& prev, int r, TupleOrder order = TupleOrder::Lexicographic,
                    std::uint64_t budget_symbols = 1'000'000) {
    (void)order;
    if (r < 2) fail(ErrorKind::InvalidInput, "tuple length r must be at least 2");
    if (!prev.materialized) fail(ErrorKind::InvalidInput, "previous level is not materialized");
    const auto blocks = prev.blocks();
    BigInt len = BigInt(r) * prev.ell * detail::pow_big(BigInt(blocks.size()), static_cast<std::uint64_t>(r));
    if (len > BigInt(budget_symbols))
        fail(ErrorKind::ResourceLimit, "marker block of length " + len.str() + " exceeds the symbol budget");
    std::string out;
    out.reserve(static_cast<std::size_t>(len));
    detail::for_each_tuple(blocks.size(), static_cast<std::size_t>(r), [&](const std::vector<std::uint32_t>& t) {
        for (auto i : t) out += blocks[i].symbols();
    });
    return Word::from_symbols(std::move(out), prev.alphabet);
}

inline Level build_level_main(const Level& prev, std::int64_t N, int r, std::uint64_t budget_symbols = 1'000'000,
                              std::uint64_t budget_tails = 4'000'000, bool counts_only_on_budget = true) {
    if (N < 1) fail(ErrorKind::InvalidInput, "N_k must be positive");
    if (r < 2) fail(ErrorKind::InvalidInput, "r_k must be at least 2");
    Level lv;
    lv.k = prev.k + 1;
    lv.variant = Variant::Main;
    lv.alphabet = 2;
    lv.N = N;
    lv.r = r;
    const bool odd = lv.k % 2 == 1;
    const BigInt nprev = prev.countA + prev.countB;
    lv.c_length = BigInt(r) * prev.ell * detail::pow_big(nprev, static_cast<std::uint64_t>(r));
    lv.ell = lv.c_length + BigInt(N) * prev.ell;
    if (odd) {
        lv.countA = prev.countA;
        lv.countB = detail::pow_big(prev.countB, static_cast<std::uint64_t>(N));
    } else {
        lv.countA = detail::pow_big(prev.countA, static_cast<std::uint64_t>(N));
        lv.countB = prev.countB;
    }

    const BigInt total_blocks = lv.countA + lv.countB;
    const bool prev_known = prev.materialized;
    if (prev_known && total_blocks * BigInt(N) <= BigInt(budget_tails)) {
        const auto nA = static_cast<std::uint32_t>(prev.A.size());
        const auto nB = static_cast<std::uint32_t>(prev.B.size());
        auto constant = [&](std::uint32_t base, std::uint32_t count, std::vector<std::vector<std::uint32_t>>& out) {
            for (std::uint32_t i = 0; i < count; ++i) out.emplace_back(static_cast<std::size_t>(N), base + i);
        };
        auto tuples = [&](std::uint32_t base, std::uint32_t count, std::vector<std::vector<std::uint32_t>>& out) {
            detail::for_each_tuple(count, static_cast<std::size_t>(N), [&](const std::vector<std::uint32_t>& t) {
                std::vector<std::uint32_t> row(t);
                for (auto& x : row) x += base;
                out.push_back(std::move(row));
            });
        };
        if (odd) {
            constant(0, nA, lv.tailsA);
            tuples(nA, nB, lv.tailsB);
        } else {
            tuples(0, nA, lv.tailsA);
            constant(nA, nB, lv.tailsB);
        }
        lv.has_structure = true;

        std::vector<SymbolCounts> prev_counts(prev.symbolsA);
        prev_counts.insert(prev_counts.end(), prev.symbolsB.begin(), prev.symbolsB.end());
        SymbolCounts c_counts{0, 0, 0};
        const std::int64_t per_block = static_cast<std::int64_t>(r) *
                                       static_cast<std::int64_t>(detail::pow_big(nprev, static_cast<std::uint64_t>(r - 1)));
        for (const auto& pc : prev_counts) detail::add_counts(c_counts, pc, per_block);
        auto tail_counts = [&](const std::vector<std::vector<std::uint32_t>>& tails, std::vector<SymbolCounts>& out) {
            for (const auto& t : tails) {
                SymbolCounts sc = c_counts;
                for (auto i : t) detail::add_counts(sc, prev_counts[i]);
                out.push_back(sc);
            }
        };
        if (lv.ell <= BigInt(std::numeric_limits<std::int64_t>::max() / 4)) {
            tail_counts(lv.tailsA, lv.symbolsA);
            tail_counts(lv.tailsB, lv.symbolsB);
        }
    }

    const BigInt symbols = lv.ell * total_blocks + lv.c_length;
    if (prev_known && lv.has_structure && symbols <= BigInt(budget_symbols)) {
        lv.c = build_c(prev, r, TupleOrder::Lexicographic, budget_symbols);
        const auto pb = prev.blocks();
        auto render = [&](const std::vector<std::vector<std::uint32_t>>& tails, std::vector<Word>& out) {
            for (const auto& t : tails) {
                std::string s = lv.c.symbols();
                for (auto i : t) s += pb[i].symbols();
                out.push_back(Word::from_symbols(std::move(s), 2));
            }
        };
        render(lv.tailsA, lv.A);
        render(lv.tailsB, lv.B);
        lv.materialized = true;
    } else if (!counts_only_on_budget) {
        fail(ErrorKind::ResourceLimit,
             "level " + std::to_string(lv.k) + " needs " + symbols.str() + " symbols, above the budget");
    }
    return lv;
}

// Modified construction over {0,1,2}. Exponents default to the closed forms
// 1 + 2^{ell_{k-1}} + N_k (long) and 1 + 2^{ell_{k-1}} (short).
inline Level build_level_modified(const Level& prev, std::int64_t N, std::optional<std::int64_t> long_exp = {},
                                  std::optional<std::int64_t> short_exp = {}, std::uint64_t budget_symbols = 1'000'000,
                                  bool counts_only_on_budget = true) {
    if (N < 1) fail(ErrorKind::InvalidInput, "N_k must be positive");
    Level lv;
    lv.k = prev.k + 1;
    lv.variant = Variant::Modified;
    lv.alphabet = 3;
    lv.N = N;
    const bool odd = lv.k % 2 == 1;

    BigInt two_pow = 0;
    if (!long_exp || !short_exp) {
        if (prev.ell > 4'000'000) fail(ErrorKind::ResourceLimit, "exponent 2^ell of the previous level is too large");
        two_pow = BigInt(1) << static_cast<unsigned>(prev.ell);
    }
    const BigInt L = long_exp ? BigInt(*long_exp) : 1 + two_pow + N;
    const BigInt S = short_exp ? BigInt(*short_exp) : 1 + two_pow;
    if (S < 1 || L <= S) fail(ErrorKind::InvalidInput, "exponents need 1 <= short < long");
    lv.ell = prev.ell * L;
    if (!long_exp && !short_exp) lv.ell_paper_formula = prev.ell * ((BigInt(1) << static_cast<unsigned>(prev.ell + 1)) + N);
    lv.countA = prev.countA;
    lv.countB = prev.countB;

    const BigInt symbols = lv.ell * (lv.countA + lv.countB);
    if (prev.materialized && symbols <= BigInt(budget_symbols)) {
        const auto l = static_cast<std::size_t>(L);
        const auto s = static_cast<std::size_t>(S);
        const auto tail = (l - s) * static_cast<std::size_t>(prev.ell);
        const Word twos = Word::from_symbols(std::string(tail, '\2'), 3);
        const Word ones = Word::from_symbols(std::string(tail, '\1'), 3);
        for (const auto& a : prev.A) lv.A.push_back(odd ? power(a, l) : concat(power(a, s), ones));
        for (const auto& b : prev.B) lv.B.push_back(odd ? concat(power(b, s), twos) : power(b, l));
        for (const auto& w : lv.A) lv.symbolsA.push_back(detail::count_symbols(w));
        for (const auto& w : lv.B) lv.symbolsB.push_back(detail::count_symbols(w));
        lv.materialized = true;
        const auto n = lv.length();
        lv.constant_one_in_A = std::any_of(lv.A.begin(), lv.A.end(), [&](const Word& w) {
            return w.symbols() == std::string(n, '\1');
        });
        lv.constant_two_in_B = std::any_of(lv.B.begin(), lv.B.end(), [&](const Word& w) {
            return w.symbols() == std::string(n, '\2');
        });
    } else if (!counts_only_on_budget) {
        fail(ErrorKind::ResourceLimit,
             "level " + std::to_string(lv.k) + " needs " + symbols.str() + " symbols, above the budget");
    }
    return lv;
}

class Hierarchy {
public:
    static Hierarchy build(const HierarchyParams& params) {
        params.validate();
        Hierarchy h;
        h.params_ = params;
        h.levels_.push_back(seed_level(params.variant));
        for (int k = 1; k <= params.depth; ++k) {
            const Level& prev = h.levels_.back();
            const auto i = static_cast<std::size_t>(k - 1);
            if (params.variant == Variant::Main) {
                h.levels_.push_back(build_level_main(prev, params.N[i], params.r[i], params.budget_symbols,
                                                     params.budget_tails, params.counts_only_on_budget));
            } else {
                std::optional<std::int64_t> le, se;
                if (!params.long_exp.empty()) {
                    le = params.long_exp[i];
                    se = params.short_exp[i];
                }
                h.levels_.push_back(build_level_modified(prev, params.N[i], le, se, params.budget_symbols,
                                                         params.counts_only_on_budget));
            }
        }
        return h;
    }

    const HierarchyParams& params() const noexcept { return params_; }
    int depth() const noexcept { return static_cast<int>(levels_.size()) - 1; }
    const Level& level(int k) const {
        if (k < 0 || k > depth()) fail(ErrorKind::DepthExceeded, "level " + std::to_string(k) + " was not built");
        return levels_[static_cast<std::size_t>(k)];
    }
    const std::vector<Level>& levels() const noexcept { return levels_; }

private:
    HierarchyParams params_;
    std::vector<Level> levels_;
};

// Exact (|A_k|, |B_k|) from the recurrences alone.
inline std::pair<BigInt, BigInt> count_blocks(const HierarchyParams& params, int k) {
    params.validate();
    if (k < 0 || k > params.depth) fail(ErrorKind::DepthExceeded, "level beyond the configured depth");
    BigInt a = 2, b = 2;
    if (params.variant == Variant::Modified) return {a, b};
    for (int j = 1; j <= k; ++j) {
        const auto n = static_cast<std::uint64_t>(params.N[static_cast<std::size_t>(j - 1)]);
        if (j % 2 == 1)
            b = detail::pow_big(b, n);
        else
            a = detail::pow_big(a, n);
    }
    return {a, b};
}

struct SymbolRange {
    Rational min{0};
    Rational max{0};
};

struct FrequencyReport {
    int k = 0;
    bool available = false;  // false when neither words nor symbol counts are known
    // Index = symbol; alphabet-many entries are meaningful.
    std::array<SymbolRange, 3> A;
    std::array<SymbolRange, 3> B;
    Rational gap_constant{1};
    bool pass = false;
    std::string detail;
};

// Main variant: min f0 over A > 2/3 and max f0 over B < 1/3.
// Modified variant: min f0(a) > g * max f0(b) on odd levels, roles swapped on even levels.
inline FrequencyReport check_frequency_gap(const Level& level, Variant variant, Rational gap_constant = Rational(100)) {
    FrequencyReport rep;
    rep.k = level.k;
    rep.gap_constant = gap_constant;
    if (level.symbolsA.empty() || level.symbolsB.empty()) {
        rep.detail = "level " + std::to_string(level.k) + " has no symbol counts (counts-only)";
        return rep;
    }
    rep.available = true;
    const auto len = static_cast<std::int64_t>(level.length());
    auto ranges = [&](const std::vector<SymbolCounts>& counts, std::array<SymbolRange, 3>& out) {
        for (int s = 0; s < 3; ++s) {
            std::int64_t lo = std::numeric_limits<std::int64_t>::max(), hi = 0;
            for (const auto& c : counts) {
                lo = std::min(lo, c[s]);
                hi = std::max(hi, c[s]);
            }
            out[s] = {Rational(lo, len), Rational(hi, len)};
        }
    };
    ranges(level.symbolsA, rep.A);
    ranges(level.symbolsB, rep.B);
    if (variant == Variant::Main) {
        rep.pass = rep.A[0].min > Rational(2, 3) && rep.B[0].max < Rational(1, 3);
    } else if (level.k % 2 == 1) {
        rep.pass = rep.A[0].min > gap_constant * rep.B[0].max;
    } else {
        rep.pass = rep.B[0].min > gap_constant * rep.A[0].max;
    }
    return rep;
}

namespace detail {

inline std::vector<std::int64_t> prefix_function(const std::string& p) {
    std::vector<std::int64_t> pi(p.size(), 0);
    for (std::size_t i = 1; i < p.size(); ++i) {
        auto j = pi[i - 1];
        while (j > 0 && p[i] != p[static_cast<std::size_t>(j)]) j = pi[static_cast<std::size_t>(j - 1)];
        if (p[i] == p[static_cast<std::size_t>(j)]) ++j;
        pi[i] = j;
    }
    return pi;
}

// Start positions of every occurrence of p in t (Knuth-Morris-Pratt).
inline std::vector<std::size_t> find_all(const std::string& p, const std::vector<std::int64_t>& pi, const std::string& t) {
    std::vector<std::size_t> out;
    if (p.empty()) return out;
    std::int64_t j = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        while (j > 0 && t[i] != p[static_cast<std::size_t>(j)]) j = pi[static_cast<std::size_t>(j - 1)];
        if (t[i] == p[static_cast<std::size_t>(j)]) ++j;
        if (j == static_cast<std::int64_t>(p.size())) {
            out.push_back(i + 1 - p.size());
            j = pi[static_cast<std::size_t>(j - 1)];
        }
    }
    return out;
}

}  // namespace detail

struct ParsabilityCounterexample {
    std::vector<std::uint32_t> blocks;  // indices into A_k then B_k
    std::size_t offset = 0;             // spurious marker start inside the concatenation
};

struct ParsabilityReport {
    int k = 0;
    std::uint64_t pairs_scanned = 0;
    std::uint64_t triples_scanned = 0;
    std::uint64_t windows_checked = 0;
    bool exhaustive = false;
    bool pass = false;
    std::vector<ParsabilityCounterexample> counterexamples;
};

// Scans every concatenation of two and of three level-k blocks (as the budget allows) for
// occurrences of c_k away from block boundaries. Every length-2*ell window of such a
// concatenation contains a whole block start, so the absence of stray occurrences fixes the
// marker offset inside every window.
inline ParsabilityReport check_unique_parsability(const Level& level, std::uint64_t window_budget = 2'000'000'000ULL) {
    if (level.variant != Variant::Main) fail(ErrorKind::UnsupportedVariant, "parsability needs marker blocks");
    if (level.k < 1) fail(ErrorKind::InvalidInput, "parsability is defined for levels k >= 1");
    if (!level.materialized) fail(ErrorKind::ResourceLimit, "level " + std::to_string(level.k) + " is not materialized");
    ParsabilityReport rep;
    rep.k = level.k;
    const auto blocks = level.blocks();
    const std::size_t ell = level.length();
    const std::string& c = level.c.symbols();
    const auto pi = detail::prefix_function(c);
    const std::size_t n = blocks.size();
    std::uint64_t spent = 0;
    bool complete = true;
    auto scan = [&](const std::vector<std::uint32_t>& idx) {
        std::string t;
        t.reserve(idx.size() * ell);
        for (auto i : idx) t += blocks[i].symbols();
        for (auto pos : detail::find_all(c, pi, t)) {
            if (pos % ell != 0 && rep.counterexamples.size() < 16) rep.counterexamples.push_back({idx, pos});
        }
        rep.windows_checked += t.size() >= 2 * ell ? t.size() - 2 * ell + 1 : 0;
        spent += t.size();
    };
    for (std::uint32_t u = 0; u < n; ++u)
        for (std::uint32_t v = 0; v < n; ++v) {
            if (spent + 2 * ell > window_budget) {
                complete = false;
                break;
            }
            scan({u, v});
            ++rep.pairs_scanned;
        }
    for (std::uint32_t u = 0; u < n && complete; ++u)
        for (std::uint32_t v = 0; v < n && complete; ++v)
            for (std::uint32_t w = 0; w < n; ++w) {
                if (spent + 3 * ell > window_budget) {
                    complete = false;
                    break;
                }
                scan({u, v, w});
                ++rep.triples_scanned;
            }
    rep.exhaustive = complete;
    rep.pass = rep.counterexamples.empty() && rep.pairs_scanned == n * n;
    return rep;
}

}  // namespace zerotemp
