#include <gtest/gtest.h>

#include <random>
#include <set>
#include <string>

#include <zerotemp/language.hpp>

using namespace zerotemp;

namespace {

HierarchyParams params(std::vector<std::int64_t> N, std::vector<int> r) {
    HierarchyParams p;
    p.depth = static_cast<int>(N.size());
    p.N = std::move(N);
    p.r = std::move(r);
    return p;
}

// Reference language: factors of the top-level blocks. For |w| <= ell_{K-1} this is exactly the
// set of factors of X, since every such factor sits inside two adjacent level-(K-1) blocks and
// every such pair is spelled out inside c_K.
struct BruteForce {
    std::vector<std::string> texts;
    explicit BruteForce(const Level& top) {
        for (const auto& w : top.blocks()) texts.push_back(w.symbols());
    }
    bool contains(const std::string& s) const {
        for (const auto& t : texts)
            if (t.find(s) != std::string::npos) return true;
        return false;
    }
    std::size_t longest_prefix(const std::string& s) const {
        std::size_t n = 0;
        while (n < s.size() && contains(s.substr(0, n + 1))) ++n;
        return n;
    }
};

std::string bits(std::uint64_t code, std::size_t n) {
    std::string s(n, '\0');
    for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<char>((code >> (n - 1 - i)) & 1);
    return s;
}

}  // namespace

TEST(Metric, PrefixDistance) {
    EXPECT_DOUBLE_EQ(prefix_distance(Word::parse("0110"), Word::parse("0111")), 0.125);
    EXPECT_DOUBLE_EQ(prefix_distance(Word::parse("1"), Word::parse("0")), 1.0);
    EXPECT_DOUBLE_EQ(prefix_distance(Word::parse("01"), Word::parse("011")), 0.0);
}

TEST(Metric, WindowPotential) {
    EXPECT_DOUBLE_EQ(window_potential(3, 5, Envelope::Upper), -0.125);
    EXPECT_DOUBLE_EQ(window_potential(3, 5, Envelope::Lower), -0.125);
    EXPECT_DOUBLE_EQ(window_potential(5, 5, Envelope::Upper), 0.0);
    EXPECT_DOUBLE_EQ(window_potential(5, 5, Envelope::Lower), -1.0 / 32);
    EXPECT_DOUBLE_EQ(window_potential(0, 5, Envelope::Upper), -1.0);
    EXPECT_EQ(parse_envelope("lower"), Envelope::Lower);
    EXPECT_THROW(parse_envelope("middle"), Error);
}

TEST(Oracle, SeedBlocksAreAdmissible) {
    const auto h = Hierarchy::build(params({2}, {2}));
    EXPECT_TRUE(admissible(Word::parse("01000"), h));
    EXPECT_TRUE(admissible(Word::parse("10111"), h));
    EXPECT_EQ(longest_admissible_prefix(Word::parse("0"), h), 1u);
    EXPECT_EQ(longest_admissible_prefix(Word::parse("1"), h), 1u);
}

TEST(Oracle, SeedPairsExhaustive) {
    // Words of length <= 5 are checked against all 16 concatenations of two seed blocks.
    const auto h = Hierarchy::build(params({2}, {2}));
    const AdmissibilityOracle oracle(h, 5);
    EXPECT_EQ(oracle.level(), 0);
    std::set<std::string> pairs;
    const auto seed = h.level(0).blocks();
    for (const auto& u : seed)
        for (const auto& v : seed) pairs.insert(concat(u, v).str());
    auto in_pairs = [&](const std::string& s) {
        for (const auto& t : pairs)
            if (t.find(s) != std::string::npos) return true;
        return false;
    };
    for (std::size_t n = 1; n <= 5; ++n)
        for (std::uint64_t code = 0; code < (1ULL << n); ++code) {
            const Word w = Word::from_symbols(bits(code, n));
            EXPECT_EQ(oracle.admissible(w), in_pairs(w.str())) << w.str();
        }
    EXPECT_TRUE(oracle.admissible(Word::parse("0010")));
    EXPECT_TRUE(oracle.admissible(Word::parse("0101")));
    EXPECT_FALSE(oracle.admissible(Word::parse("0110")));
}

TEST(Oracle, MatchesBruteForceExhaustively) {
    const auto h = Hierarchy::build(params({2, 2}, {2, 2}));
    ASSERT_TRUE(h.level(2).materialized);
    const BruteForce ref(h.level(2));
    const AdmissibilityOracle oracle(h, 12);
    for (std::size_t n = 1; n <= 12; ++n)
        for (std::uint64_t code = 0; code < (1ULL << n); ++code) {
            const Word w = Word::from_symbols(bits(code, n));
            ASSERT_EQ(oracle.admissible(w), ref.contains(w.symbols())) << w.str();
            ASSERT_EQ(oracle.longest_admissible_prefix(w), ref.longest_prefix(w.symbols())) << w.str();
        }
}

TEST(Oracle, StructuralTextsMatchBruteForceOnLongWords) {
    // Length 120 forces level 1; the structural oracle must agree with the factor set of L_2.
    const auto h = Hierarchy::build(params({2, 2}, {2, 2}));
    const BruteForce ref(h.level(2));
    const std::size_t len = 120;
    const AdmissibilityOracle oracle(h, len);
    EXPECT_EQ(oracle.level(), 1);
    std::mt19937_64 rng(7);
    const auto& text = ref.texts;
    for (int trial = 0; trial < 400; ++trial) {
        const auto& t = text[rng() % text.size()];
        const std::size_t start = rng() % (t.size() - len);
        std::string s = t.substr(start, len);
        if (trial % 2 == 1) s[rng() % len] ^= 1;
        const Word w = Word::from_symbols(s);
        ASSERT_EQ(oracle.admissible(w), ref.contains(s));
        ASSERT_EQ(oracle.longest_admissible_prefix(w), ref.longest_prefix(s));
    }
}

TEST(Oracle, CountsOnlyLevelUsesStructure) {
    // Level 2 is not materialized; words longer than ell_1 are decided from the level-2 structure.
    auto p = params({3, 3}, {2, 2});
    p.budget_symbols = 100'000;
    const auto h = Hierarchy::build(p);
    ASSERT_FALSE(h.level(2).materialized);
    const AdmissibilityOracle oracle(h, 200);
    EXPECT_EQ(oracle.level(), 2);
    const Level& l1 = h.level(1);
    // c_2 starts with A_1[0] A_1[0]; any window of it is admissible.
    const Word aa = concat(l1.A[0], l1.A[0]);
    EXPECT_TRUE(oracle.admissible(aa.substr(50, 200)));
    // Every level-1 block is followed by c_1, which starts with zeros.
    std::string bad = l1.A[0].symbols() + std::string(25, '\1');
    EXPECT_FALSE(oracle.admissible(Word::from_symbols(bad)));
    EXPECT_LT(oracle.longest_admissible_prefix(Word::from_symbols(bad)), 200u);
}

TEST(Oracle, PrefixMonotoneUnderExtension) {
    const auto h = Hierarchy::build(params({2, 2}, {2, 2}));
    const AdmissibilityOracle oracle(h, 64);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::string s;
        std::size_t last = 0;
        for (std::size_t n = 1; n <= 64; ++n) {
            s.push_back(static_cast<char>(rng() & 1));
            const auto now = oracle.longest_admissible_prefix(Word::from_symbols(s));
            if (n > 1) {
                // Appending a symbol keeps the prefix unless the whole word was admissible.
                EXPECT_EQ(now, last < n - 1 ? last : now);
                EXPECT_GE(now, last);
                EXPECT_LE(now, last + 1);
            }
            EXPECT_EQ(now == n, oracle.admissible(Word::from_symbols(s)));
            last = now;
        }
    }
}

TEST(Oracle, Witness) {
    const auto h = Hierarchy::build(params({2, 2}, {2, 2}));
    const AdmissibilityOracle oracle(h, 100);
    const Level& l1 = h.level(1);
    const Word w = concat(l1.B[3], l1.A[1]).substr(150, 40);
    const auto wit = oracle.witness(w);
    ASSERT_TRUE(wit.has_value());
    EXPECT_EQ(wit->k, 1);
    const auto blocks = l1.blocks();
    const Word uv = concat(blocks[wit->u], blocks[wit->v]);
    EXPECT_EQ(uv.substr(wit->offset, w.size()), w);
    EXPECT_FALSE(oracle.witness(Word::from_symbols(std::string(40, '\1'))).has_value());
}

TEST(Oracle, Errors) {
    const auto h = Hierarchy::build(params({2}, {2}));
    EXPECT_THROW(AdmissibilityOracle(h, 1000), Error);
    const AdmissibilityOracle oracle(h, 8);
    EXPECT_THROW(oracle.admissible(Word::parse("000000000")), Error);
    HierarchyParams m;
    m.variant = Variant::Modified;
    m.depth = 1;
    m.N = {1};
    EXPECT_THROW(AdmissibilityOracle(Hierarchy::build(m), 4), Error);
}

TEST(Potential, ForcedValues) {
    const auto h = Hierarchy::build(params({2}, {2}));
    const auto up = truncated_potential(h, 5, Envelope::Upper);
    const auto lo = truncated_potential(h, 5, Envelope::Lower);
    ASSERT_EQ(up.size(), 32u);
    const AdmissibilityOracle oracle(h, 5);
    for (std::size_t code = 0; code < up.size(); ++code) {
        const Word w = up.decode(code);
        EXPECT_EQ(up.encode(w), code);
        const auto n = oracle.longest_admissible_prefix(w);
        if (n < 5) {
            EXPECT_DOUBLE_EQ(up[code], -std::ldexp(1.0, -static_cast<int>(n)));
            EXPECT_DOUBLE_EQ(lo[code], up[code]);
        } else {
            EXPECT_DOUBLE_EQ(up[code], 0.0);
            EXPECT_DOUBLE_EQ(lo[code], -1.0 / 32);
        }
    }
    // "0110" is not a factor of any seed pair, "011" is.
    EXPECT_DOUBLE_EQ(up.at(Word::parse("01100")), -0.125);
    EXPECT_DOUBLE_EQ(up.at(Word::parse("01010")), -0.0625);
    EXPECT_DOUBLE_EQ(up.at(Word::parse("01000")), 0.0);
    EXPECT_THROW(up.at(Word::parse("0100")), Error);
    EXPECT_THROW(truncated_potential(h, 23, Envelope::Upper, 1 << 20), Error);
}
