#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "hierarchy.hpp"
#include "suffix_automaton.hpp"
#include "words.hpp"

namespace zerotemp {

enum class Envelope { Upper, Lower };

inline const char* to_string(Envelope e) { return e == Envelope::Upper ? "upper" : "lower"; }

inline Envelope parse_envelope(const std::string& s) {
    if (s == "upper") return Envelope::Upper;
    if (s == "lower") return Envelope::Lower;
    fail(ErrorKind::InvalidInput, "envelope must be 'upper' or 'lower', got '" + s + "'");
}

// One-sided metric d(x, y) = 2^{-(n + metric_offset)} with n the first disagreement index.
inline constexpr int metric_offset = 0;

// Distance between two words seen as prefixes of one-sided sequences; 0 when one is a prefix of the other.
inline double prefix_distance(const Word& x, const Word& y) {
    const std::size_t n = std::min(x.size(), y.size());
    for (std::size_t i = 0; i < n; ++i)
        if (x[i] != y[i]) return std::ldexp(1.0, -static_cast<int>(i) - metric_offset);
    return 0.0;
}

// Potential value of a length-m window whose longest admissible prefix has length n.
inline double window_potential(std::size_t n, std::size_t m, Envelope env) {
    if (n < m) return -std::ldexp(1.0, -static_cast<int>(n) - metric_offset);
    return env == Envelope::Upper ? 0.0 : -std::ldexp(1.0, -static_cast<int>(m) - metric_offset);
}

struct AdmissibilityWitness {
    int k = 0;
    std::size_t u = 0;       // index into A_k then B_k
    std::size_t v = 0;
    std::size_t offset = 0;  // start of the word inside u·v
};

// Factor oracle for words of length up to max_length. Built at the smallest level k with
// ell_k >= max_length from texts that jointly contain every factor of length <= max_length of
// every concatenation uv with u, v in L_k, and nothing else. A word of X of length at most
// ell_k spans at most two adjacent L_k blocks; every pair uv occurs in c_{k+1}, hence in X.
// The automaton indexes the reversed texts so that prepending a symbol is one transition.
class AdmissibilityOracle {
public:
    AdmissibilityOracle(const Hierarchy& h, std::size_t max_length, std::uint64_t budget_symbols = 50'000'000)
        : max_length_(max_length), sam_(2 * budget_symbols + 16) {
        if (h.params().variant != Variant::Main)
            fail(ErrorKind::UnsupportedVariant, "the modified hierarchy has no admissibility oracle");
        if (max_length == 0) max_length_ = max_length = 1;
        int k = 0;
        while (k <= h.depth() && h.level(k).ell < BigInt(max_length)) ++k;
        if (k > h.depth())
            fail(ErrorKind::DepthExceeded, "words of length " + std::to_string(max_length) +
                                               " exceed the top block length " + h.level(h.depth()).ell.str());
        k_ = k;
        const Level& lv = h.level(k);
        if (k == 0 || !structural(h, lv, budget_symbols)) pair_texts(h, lv, budget_symbols);
    }

    int level() const noexcept { return k_; }
    std::size_t max_length() const noexcept { return max_length_; }
    const SuffixAutomaton& automaton() const noexcept { return sam_; }

    bool admissible(const Word& w) const {
        check_length(w);
        return locate(w) != SuffixAutomaton::none;
    }

    // Length of the longest admissible prefix, by matching statistics from the right end.
    std::size_t longest_admissible_prefix(const Word& w) const {
        check_length(w);
        std::int32_t v = 0;
        std::int32_t len = 0;
        for (std::size_t i = w.size(); i-- > 0;) prepend(v, len, w[i]);
        return static_cast<std::size_t>(len);
    }

    // One step of matching statistics: the state (v, len) stands for the admissible word p of
    // length len whose reversal lies in node v; afterwards it stands for the longest admissible
    // prefix of s·p.
    void prepend(std::int32_t& v, std::int32_t& len, int s) const {
        while (v != 0 && sam_.go(v, s) == SuffixAutomaton::none) {
            v = sam_.node(v).link;
            len = sam_.node(v).len;
        }
        const auto t = sam_.go(v, s);
        if (t == SuffixAutomaton::none) {
            len = 0;
            return;
        }
        v = t;
        ++len;
    }

    // Shortens the state to length len (a suffix of the reversed word).
    void truncate(std::int32_t& v, std::int32_t len) const {
        if (len == 0) {
            v = 0;
            return;
        }
        while (v != 0 && sam_.node(sam_.node(v).link).len >= len) v = sam_.node(v).link;
    }

    std::optional<AdmissibilityWitness> witness(const Word& w) const {
        check_length(w);
        const auto v = locate(w);
        if (v == SuffixAutomaton::none) return std::nullopt;
        const auto& n = sam_.node(v);
        const auto& src = sources_[static_cast<std::size_t>(n.text)];
        // The reversed occurrence ends at n.end, so in the forward text it starts at len-1-end.
        const std::size_t start = src.length - 1 - static_cast<std::size_t>(n.end);
        return AdmissibilityWitness{k_, src.u, src.v, src.base + start};
    }

private:
    struct Source {
        std::size_t u = 0;
        std::size_t v = 0;
        std::size_t base = 0;
        std::size_t length = 0;
    };

    void check_length(const Word& w) const {
        if (w.alphabet() != 2) fail(ErrorKind::InvalidInput, "main hierarchy words are binary");
        if (w.size() > max_length_)
            fail(ErrorKind::DepthExceeded, "word of length " + std::to_string(w.size()) +
                                               " is longer than the oracle's range " + std::to_string(max_length_));
    }

    std::int32_t locate(const Word& w) const {
        std::int32_t v = 0;
        for (std::size_t i = w.size(); i-- > 0;) {
            v = sam_.go(v, w[i]);
            if (v == SuffixAutomaton::none) return v;
        }
        return v;
    }

    void add(std::string text, Source src) {
        src.length = text.size();
        std::reverse(text.begin(), text.end());
        sam_.add_text(text);
        sources_.push_back(src);
    }

    // Every ordered pair uv rendered in full.
    void pair_texts(const Hierarchy& h, const Level& lv, std::uint64_t budget) {
        const std::size_t n = static_cast<std::size_t>(lv.countA + lv.countB);
        const BigInt need = BigInt(2) * lv.ell * BigInt(n) * BigInt(n);
        if (need > BigInt(budget))
            fail(ErrorKind::ResourceLimit, "admissibility texts at level " + std::to_string(lv.k) + " need " +
                                               need.str() + " symbols, above the budget");
        std::vector<std::string> blocks = render_blocks(h, lv);
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = 0; v < n; ++v) add(blocks[u] + blocks[v], {u, v, 0, 0});
    }

    static std::vector<std::string> render_blocks(const Hierarchy& h, const Level& lv) {
        std::vector<std::string> out;
        if (lv.materialized) {
            for (const auto& w : lv.blocks()) out.push_back(w.symbols());
            return out;
        }
        if (lv.k == 0 || !lv.has_structure || !h.level(lv.k - 1).materialized)
            fail(ErrorKind::ResourceLimit, "level " + std::to_string(lv.k) + " blocks are unavailable");
        const auto prev = h.level(lv.k - 1).blocks();
        const Word c = build_c(h.level(lv.k - 1), lv.r, TupleOrder::Lexicographic, UINT64_MAX);
        for (const auto* tails : {&lv.tailsA, &lv.tailsB})
            for (const auto& t : *tails) {
                std::string s = c.symbols();
                for (auto i : t) s += prev[i].symbols();
                out.push_back(std::move(s));
            }
        return out;
    }

    // c_k itself plus, for every block, its tail padded by enough marker context on both sides.
    bool structural(const Hierarchy& h, const Level& lv, std::uint64_t budget) {
        const Level& prev = h.level(lv.k - 1);
        if (!lv.has_structure || !prev.materialized) return false;
        const std::size_t pl = prev.length();
        const std::size_t pad = (max_length_ - 1 + pl - 1) / pl;  // previous-level blocks of context
        const BigInt c_blocks = BigInt(lv.r) * detail::pow_big(prev.countA + prev.countB, static_cast<std::uint64_t>(lv.r));
        if (BigInt(pad) > c_blocks) return false;
        const std::size_t nblocks = lv.tailsA.size() + lv.tailsB.size();
        const BigInt need = lv.c_length + BigInt(nblocks) * BigInt((2 * pad + static_cast<std::size_t>(lv.N)) * pl);
        if (need > BigInt(budget))
            fail(ErrorKind::ResourceLimit, "admissibility texts at level " + std::to_string(lv.k) + " need " +
                                               need.str() + " symbols, above the budget");
        const auto pb = prev.blocks();
        std::vector<std::uint32_t> seq;
        std::string c;
        c.reserve(static_cast<std::size_t>(lv.c_length));
        detail::for_each_tuple(pb.size(), static_cast<std::size_t>(lv.r), [&](const std::vector<std::uint32_t>& t) {
            for (auto i : t) {
                c += pb[i].symbols();
                seq.push_back(i);
            }
        });
        const std::vector<std::uint32_t> head(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(pad));
        const std::vector<std::uint32_t> tail(seq.end() - static_cast<std::ptrdiff_t>(pad), seq.end());
        const std::size_t ctx = pad * pl;
        add(c, {0, 0, 0, 0});
        std::string left, right;
        for (auto i : tail) left += pb[i].symbols();
        for (auto i : head) right += pb[i].symbols();
        std::size_t u = 0;
        for (const auto* tails : {&lv.tailsA, &lv.tailsB})
            for (const auto& t : *tails) {
                std::string s = left;
                for (auto i : t) s += pb[i].symbols();
                s += right;
                add(std::move(s), {u, 0, c.size() - ctx, 0});
                ++u;
            }
        return true;
    }

    std::size_t max_length_;
    int k_ = 0;
    SuffixAutomaton sam_;
    std::vector<Source> sources_;
};

inline bool admissible(const Word& w, const Hierarchy& h) {
    return AdmissibilityOracle(h, std::max<std::size_t>(w.size(), 1)).admissible(w);
}

inline std::size_t longest_admissible_prefix(const Word& w, const Hierarchy& h) {
    return AdmissibilityOracle(h, std::max<std::size_t>(w.size(), 1)).longest_admissible_prefix(w);
}

// Truncated distance potential on every word of length m (index = base-alphabet code, first symbol most significant).
struct PotentialTable {
    int m = 1;
    int alphabet = 2;
    Envelope envelope = Envelope::Upper;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t code) const { return values[code]; }

    double at(const Word& w) const {
        if (static_cast<int>(w.size()) != m) fail(ErrorKind::InvalidInput, "potential lookup needs a word of length m");
        return values[encode(w)];
    }

    std::size_t encode(const Word& w) const {
        std::size_t code = 0;
        for (std::size_t i = 0; i < w.size(); ++i) code = code * static_cast<std::size_t>(alphabet) + static_cast<std::size_t>(w[i]);
        return code;
    }

    Word decode(std::size_t code) const {
        std::string s(static_cast<std::size_t>(m), '\0');
        for (int i = m - 1; i >= 0; --i) {
            s[static_cast<std::size_t>(i)] = static_cast<char>(code % static_cast<std::size_t>(alphabet));
            code /= static_cast<std::size_t>(alphabet);
        }
        return Word::from_symbols(std::move(s), alphabet);
    }
};

inline std::size_t table_size(int alphabet, int m, std::uint64_t cap) {
    std::uint64_t n = 1;
    for (int i = 0; i < m; ++i) {
        n *= static_cast<std::uint64_t>(alphabet);
        if (n > cap) fail(ErrorKind::ResourceLimit, "potential table with memory " + std::to_string(m) + " exceeds the budget");
    }
    return static_cast<std::size_t>(n);
}

inline PotentialTable truncated_potential(const AdmissibilityOracle& oracle, int m, Envelope env,
                                          std::uint64_t cap = 1ULL << 22) {
    if (m < 1) fail(ErrorKind::InvalidInput, "memory must be positive");
    if (static_cast<std::size_t>(m) > oracle.max_length())
        fail(ErrorKind::DepthExceeded, "oracle range is shorter than the memory");
    PotentialTable t;
    t.m = m;
    t.alphabet = 2;
    t.envelope = env;
    t.values.resize(table_size(2, m, cap));
    for (std::size_t code = 0; code < t.values.size(); ++code) {
        const auto n = oracle.longest_admissible_prefix(t.decode(code));
        t.values[code] = window_potential(n, static_cast<std::size_t>(m), env);
    }
    return t;
}

inline PotentialTable truncated_potential(const Hierarchy& h, int m, Envelope env, std::uint64_t cap = 1ULL << 22) {
    return truncated_potential(AdmissibilityOracle(h, static_cast<std::size_t>(std::max(m, 1))), m, env, cap);
}

}  // namespace zerotemp
