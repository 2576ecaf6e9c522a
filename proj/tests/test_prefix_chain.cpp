#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <zerotemp/prefix_chain.hpp>

using namespace zerotemp;

namespace {

Hierarchy toy() {
    HierarchyParams p;
    p.depth = 2;
    p.N = {2, 2};
    p.r = {2, 2};
    return Hierarchy::build(p);
}

}  // namespace

class ChainVsDense : public ::testing::TestWithParam<int> {};

TEST_P(ChainVsDense, AgreesWithDeBruijnSolution) {
    const int m = GetParam();
    static const Hierarchy h = toy();
    const AdmissibilityOracle oracle(h, static_cast<std::size_t>(m));
    const PrefixChain chain(oracle, m);
    EXPECT_LE(chain.size(), chain.expanded_size());
    EXPECT_LE(chain.size(), std::size_t{1} << m);
    std::mt19937_64 rng(static_cast<std::uint64_t>(m));
    for (Envelope env : {Envelope::Upper, Envelope::Lower}) {
        const auto pot = truncated_potential(oracle, m, env);
        for (double beta : {0.0, 1.0, 10.0, 300.0, 1e5}) {
            // Power iteration on the de Bruijn graph stalls at very large beta.
            if (beta > 1e3 && m > 5) continue;
            const auto dense = solve_transfer(pot, beta);
            const auto mm = solve_chain(chain, beta, env);
            EXPECT_NEAR(mm.pressure, dense.pressure, 1e-10) << "m=" << m << " beta=" << beta;
            EXPECT_NEAR(mm.entropy, entropy(dense.markov), 1e-8);
            EXPECT_NEAR(symbol_mass(mm, 0), cylinder_mass(dense.markov, Word::parse("0")), 1e-9);
            EXPECT_NEAR(mm.variational_residual(), 0.0, 1e-8);
            for (int trial = 0; trial < 8; ++trial) {
                const std::size_t len = 1 + rng() % static_cast<std::uint64_t>(m + 4);
                std::string s(len, '\0');
                for (auto& ch : s) ch = static_cast<char>(rng() & 1);
                const Word w = Word::from_symbols(s);
                EXPECT_NEAR(cylinder_mass(mm, w), cylinder_mass(dense.markov, w), 1e-9) << w.str();
            }
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Memories, ChainVsDense, ::testing::Values(1, 2, 3, 5, 8, 11, 13));

TEST(Chain, BetaZeroIsUniform) {
    const auto h = toy();
    const AdmissibilityOracle oracle(h, 60);
    const PrefixChain chain(oracle, 60);
    const auto mm = solve_chain(chain, 0.0, Envelope::Upper);
    EXPECT_NEAR(mm.pressure, std::log(2.0), 1e-12);
    EXPECT_NEAR(symbol_mass(mm, 0), 0.5, 1e-12);
    EXPECT_NEAR(mm.entropy, std::log(2.0), 1e-12);
    EXPECT_NEAR(cylinder_mass(mm, Word::parse("0110100")), 1.0 / 128, 1e-12);
}

TEST(Chain, EnvelopeBracketAndGap) {
    const auto h = toy();
    const int m = 40;
    const AdmissibilityOracle oracle(h, m);
    const PrefixChain chain(oracle, m);
    for (double beta : {1.0, 1e3, 1e8, 1e11}) {
        const auto up = solve_chain(chain, beta, Envelope::Upper);
        const auto lo = solve_chain(chain, beta, Envelope::Lower);
        EXPECT_LE(lo.pressure, up.pressure + 1e-12);
        EXPECT_LE(up.pressure - lo.pressure, beta * std::ldexp(1.0, -m) * (1 + 1e-9) + 1e-12);
        EXPECT_GE(up.pressure, -1e-10);
        EXPECT_NEAR(up.variational_residual(), 0.0, 1e-8);
        EXPECT_NEAR(lo.variational_residual(), 0.0, 1e-8);
    }
}

TEST(Chain, GroundStateEntropyBound) {
    // As beta grows the pressure approaches the entropy of the admissible windows, which is at least
    // the entropy of free concatenations of level-1 blocks.
    const auto h = toy();
    const Level& l1 = h.level(1);
    const int m = static_cast<int>(l1.length()) + 2;
    const AdmissibilityOracle oracle(h, static_cast<std::size_t>(m));
    const PrefixChain chain(oracle, m);
    const auto mm = solve_chain(chain, 1e300, Envelope::Upper);
    const double bound = std::log(static_cast<double>(l1.block_count())) / static_cast<double>(l1.length());
    EXPECT_GE(mm.pressure, bound - 1e-12);
    EXPECT_LE(mm.pressure, std::log(2.0));
    double family = mass_on_family(mm, l1.A) + mass_on_family(mm, l1.B);
    EXPECT_GT(family * static_cast<double>(l1.length()), 0.99);
}

TEST(Chain, MassesAreConsistent) {
    const auto h = toy();
    const AdmissibilityOracle oracle(h, 30);
    const PrefixChain chain(oracle, 30);
    const auto mm = solve_chain(chain, 500.0, Envelope::Upper);
    double total = 0;
    for (double p : mm.pi) total += p;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_NEAR(symbol_mass(mm, 0) + symbol_mass(mm, 1), 1.0, 1e-12);
    for (const char* w : {"0", "10", "0100", "00000000", "0100001000"}) {
        const Word x = Word::parse(w);
        const double m = cylinder_mass(mm, x);
        EXPECT_NEAR(cylinder_mass(mm, concat(x, Word::parse("0"))) + cylinder_mass(mm, concat(x, Word::parse("1"))), m, 1e-12);
        EXPECT_NEAR(cylinder_mass(mm, concat(Word::parse("0"), x)) + cylinder_mass(mm, concat(Word::parse("1"), x)), m, 1e-12);
    }
}

TEST(Chain, StateBudget) {
    const auto h = toy();
    const AdmissibilityOracle oracle(h, 100);
    EXPECT_THROW(PrefixChain(oracle, 100, 50), Error);
    EXPECT_THROW(PrefixChain(oracle, 101), Error);
    EXPECT_THROW(PrefixChain(oracle, 0), Error);
}
