#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <random>
#include <sstream>

#include <zerotemp/experiment.hpp>

using namespace zerotemp;

namespace {

std::vector<SweepRecord> rows_from(const std::vector<double>& mu0) {
    std::vector<SweepRecord> rows;
    for (std::size_t i = 0; i < mu0.size(); ++i) {
        SweepRecord r;
        r.beta = static_cast<double>(i + 1);
        r.memory = 10;
        r.pressure_upper = r.pressure_lower = 0.1;
        r.mu0 = mu0[i];
        r.entropy = 0.1;
        r.converged = true;
        rows.push_back(r);
    }
    return rows;
}

HierarchyParams params(std::vector<std::int64_t> N) {
    HierarchyParams p;
    p.depth = static_cast<int>(N.size());
    p.N = std::move(N);
    p.r.assign(p.N.size(), 2);
    return p;
}

}  // namespace

TEST(Oscillation, ConstantHasNoCrossings) {
    const auto rep = oscillation_report(rows_from({0.5, 0.5, 0.5, 0.5}));
    EXPECT_EQ(rep.crossings, 0);
    EXPECT_FALSE(rep.nonconvergent);
}

TEST(Oscillation, Alternation) {
    const auto rep = oscillation_report(rows_from({0.2, 0.8, 0.2}), 1.0 / 3, 2.0 / 3);
    EXPECT_EQ(rep.crossings, 2);
    EXPECT_TRUE(rep.nonconvergent);
    ASSERT_EQ(rep.extremes.size(), 3u);
    EXPECT_EQ(std::get<2>(rep.extremes[1]), 1);
}

TEST(Oscillation, BandExcursionsDoNotCount) {
    EXPECT_EQ(oscillation_report(rows_from({0.2, 0.5, 0.3, 0.54, 0.4})).crossings, 0);
    EXPECT_EQ(oscillation_report(rows_from({0.2, 0.5, 0.6, 0.5, 0.7})).crossings, 1);
}

TEST(Oscillation, RefinementNeverReducesCount) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> coarse(8);
        for (auto& x : coarse) x = u(rng);
        auto rows = rows_from(coarse);
        const int before = oscillation_report(rows).crossings;
        for (int extra = 0; extra < 5; ++extra) {
            SweepRecord r = rows[0];
            r.beta = 1 + u(rng) * 7;
            r.mu0 = u(rng);
            rows.push_back(r);
        }
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.beta < b.beta; });
        EXPECT_GE(oscillation_report(rows).crossings, before);
    }
}

TEST(Oscillation, GapBound) {
    auto rows = rows_from({0.5, 0.5});
    rows[1].pressure_lower = rows[1].pressure_upper - 2 * rows[1].beta * std::ldexp(1.0, -10);
    EXPECT_FALSE(oscillation_report(rows).gaps_ok);
    EXPECT_THROW(oscillation_report(rows, 0.6, 0.4), Error);
    std::swap(rows[0], rows[1]);
    EXPECT_THROW(oscillation_report(rows), Error);
}

TEST(Csv, RoundTrip) {
    auto rows = rows_from({0.25, 0.75});
    rows[0].massA = {0.001};
    rows[0].massB = {0.002};
    rows[1].massA = {1.0 / 3};
    rows[1].massB = {std::nan("")};
    rows[1].converged = false;
    std::stringstream ss;
    write_csv(ss, rows, 1);
    const std::string text = ss.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "beta,memory,pressure_upper,pressure_lower,mu0,entropy,massA1,massB1,converged");
    const auto back = read_csv(ss);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].massA[0], 1.0 / 3);
    EXPECT_TRUE(std::isnan(back[1].massB[0]));
    EXPECT_FALSE(back[1].converged);
    EXPECT_EQ(back[0].mu0, 0.25);
    std::stringstream again;
    write_csv(again, back, 1);
    EXPECT_EQ(again.str(), text);
}

TEST(Csv, RejectsMalformed) {
    std::stringstream missing("beta,mu0\n1,0.5\n");
    EXPECT_THROW(read_csv(missing), Error);
    std::stringstream bad("beta,memory,pressure_upper,pressure_lower,mu0,entropy,converged\n1,2,x,0,0,0,true\n");
    EXPECT_THROW(read_csv(bad), Error);
}

TEST(Parse, PureConcatenation) {
    const auto h = Hierarchy::build(params({3}));
    const Level& l1 = h.level(1);
    const Word w = concat(concat(l1.B[5], l1.A[1]), l1.B[0]);
    const auto d = parse_blocks(w, l1);
    EXPECT_EQ(d.coverage, Rational(1));
    ASSERT_EQ(d.segments.size(), 3u);
    EXPECT_EQ(d.segments[0].index, 2u + 5u);
    EXPECT_EQ(d.segments[1].index, 1u);
}

TEST(Parse, JunkReducesCoverage) {
    const auto h = Hierarchy::build(params({3}));
    const Level& l1 = h.level(1);
    const Word w = concat(l1.A[0], Word::parse("101"));
    const auto d = parse_blocks(w, l1);
    EXPECT_EQ(d.coverage, Rational(175, 178));
    ASSERT_EQ(d.segments.size(), 2u);
    EXPECT_FALSE(d.segments[1].block);
    // Junk inserted at a block boundary never raises the coverage.
    const Word two = concat(concat(l1.A[0], Word::parse("11")), l1.B[2]);
    EXPECT_EQ(parse_blocks(two, l1).coverage, Rational(350, 352));
}

TEST(Parse, MarkerLookalikeInJunkIsRejected) {
    const auto h = Hierarchy::build(params({3}));
    const Level& l1 = h.level(1);
    // A full marker followed by a tail that is not a level-1 tail.
    const Word fake = concat(l1.c, Word::parse("000001111100000"));
    const auto d = parse_blocks(concat(fake, l1.A[1]), l1);
    EXPECT_EQ(d.coverage, Rational(175, 350));
    EXPECT_FALSE(d.segments[0].block);
    EXPECT_TRUE(d.segments[1].block);
}

TEST(Grid, LogSpacedWithCoupledBetas) {
    SweepConfig cfg;
    cfg.hierarchy = params({3, 3});
    cfg.beta_min = 1;
    cfg.beta_max = 1e6;
    cfg.beta_count = 7;
    const auto h = Hierarchy::build(cfg.hierarchy);
    const auto grid = beta_grid(cfg, h);
    // 7 log-spaced points plus 2^15 and 2^525; 2^(3 * 35525) is not representable.
    ASSERT_EQ(grid.size(), 9u);
    EXPECT_DOUBLE_EQ(grid.front(), 1.0);
    EXPECT_NEAR(grid[1], 10.0, 1e-9);
    EXPECT_EQ(grid[grid.size() - 2], 1e6);
    EXPECT_EQ(grid.back(), std::ldexp(1.0, 525));
    EXPECT_TRUE(std::is_sorted(grid.begin(), grid.end()));
    EXPECT_FALSE(coupled_beta(h, 2, 3).has_value());
    EXPECT_EQ(*coupled_beta(h, 0, 3), 32768.0);
}

TEST(Sweep, SmallRunIsDeterministicAndBracketed) {
    SweepConfig cfg;
    cfg.hierarchy = params({2, 2});
    cfg.memory = 24;
    cfg.betas = {0.0, 0.5, 4.0};
    cfg.beta_min = 10;
    cfg.beta_max = 1e9;
    cfg.beta_count = 5;
    const auto a = sweep(cfg);
    cfg.jobs = 3;
    const auto b = sweep(cfg);
    std::stringstream sa, sb;
    write_csv(sa, a.rows, a.mass_levels);
    write_csv(sb, b.rows, b.mass_levels);
    EXPECT_EQ(sa.str(), sb.str());
    ASSERT_FALSE(a.rows.empty());
    const auto& zero = a.rows.front();
    EXPECT_EQ(zero.beta, 0.0);
    EXPECT_NEAR(zero.mu0, 0.5, 1e-12);
    EXPECT_NEAR(zero.entropy, std::log(2.0), 1e-12);
    EXPECT_NEAR(zero.pressure_upper, std::log(2.0), 1e-12);
    EXPECT_NEAR(zero.pressure_lower, std::log(2.0), 1e-12);
    for (const auto& r : a.rows) {
        EXPECT_TRUE(r.converged);
        EXPECT_LE(r.pressure_lower, r.pressure_upper + 1e-12);
        EXPECT_LE(r.pressure_upper - r.pressure_lower, r.beta * std::ldexp(1.0, -24) * (1 + 1e-9) + 1e-12);
        EXPECT_GE(r.mu0, 0.0);
        EXPECT_LE(r.mu0, 1.0);
        EXPECT_LT(std::abs(r.residual_upper), 1e-8);
        EXPECT_LT(std::abs(r.residual_lower), 1e-8);
    }
    EXPECT_TRUE(oscillation_report(a.rows).gaps_ok);
}

TEST(Lemmas, DeskScaleSuite) {
    LemmaOptions opt;
    opt.exponent = 2;
    const auto rep = lemma_suite(params({3, 3}), opt);
    EXPECT_TRUE(rep.frequency_pass(0));
    EXPECT_FALSE(rep.frequency_pass(1));
    ASSERT_EQ(rep.counts.size(), 2u);
    EXPECT_EQ(rep.counts[0].big, 8);
    EXPECT_EQ(rep.counts[0].small, 2);
    EXPECT_TRUE(rep.counts[0].pass);
    // |A_2| = 2^3 = 8 against |B_2|^2 = 64.
    EXPECT_EQ(rep.counts[1].big, 8);
    EXPECT_EQ(rep.counts[1].small, 8);
    EXPECT_FALSE(rep.counts[1].pass);
    ASSERT_EQ(rep.parsability.size(), 2u);
    EXPECT_TRUE(rep.parsability[0].pass);
    EXPECT_TRUE(rep.parsability[1].pass);
    EXPECT_EQ(rep.memory, 177);
    ASSERT_EQ(rep.markov.size(), 1u);
    EXPECT_TRUE(rep.markov[0].pass);
    EXPECT_LT(rep.max_residual, 1e-8);
}

TEST(Lemmas, ModifiedVariantReportsNotes) {
    HierarchyParams p;
    p.variant = Variant::Modified;
    p.depth = 1;
    p.N = {1};
    const auto rep = lemma_suite(p);
    EXPECT_TRUE(rep.counts.empty());
    EXPECT_FALSE(rep.notes.empty());
}

TEST(LogBig, LargeValues) {
    EXPECT_NEAR(log_big(BigInt(1) << 3000), 3000 * std::log(2.0), 1e-9);
    EXPECT_NEAR(log_big(BigInt(1000)), std::log(1000.0), 1e-14);
    EXPECT_THROW(log_big(BigInt(0)), Error);
}
