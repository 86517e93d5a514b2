#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "fdlab/census.hpp"
#include "fdlab/error.hpp"
#include "oracles.hpp"

using namespace fdlab;

namespace {

// Couple parameters wide enough that regularity is not saturated at n = 5.
ReductionParams mixed_params() {
    ReductionParams p;
    p.n = 5;
    p.k = 2;
    p.epsilon0 = 2.0;
    p.epsilon1 = 0.9;
    p.gamma = 0.02;
    return p;
}

// Distribution of sum_i e_i 2^{n-i}, e_i = +-1, by repeated convolution.
std::map<long long, std::uint64_t> dyadic_subset_sums(int n) {
    std::map<long long, std::uint64_t> dist{{0, 1}};
    for (int i = 1; i <= n; ++i) {
        const long long step = 1LL << (n - i);
        std::map<long long, std::uint64_t> next;
        for (auto [v, c] : dist) {
            next[v + step] += c;
            next[v - step] += c;
        }
        dist.swap(next);
    }
    return dist;
}

RhoFn constant_rho(double r) {
    return [r](int, std::uint64_t, std::size_t) { return r; };
}

} // namespace

TEST(PairCount, SortedSweepMatchesBruteForce) {
    PerturbedMap m(0.01);
    CounterRng rng(2);
    for (int n = 1; n <= 10; ++n) {
        for (int t = 0; t < 3; ++t) {
            Word a(rng.word_bits(2 * t, n), n), d(rng.word_bits(2 * t + 1, n), n);
            std::vector<double> z = zeta_table(m, a, d);
            std::vector<double> sigmas = {0.0, std::ldexp(1.0, -20), std::ldexp(1.0, -10), std::ldexp(1.0, -n), 0.01, 0.1};
            std::vector<std::uint64_t> fast = pair_counts(z, sigmas);
            for (std::size_t i = 0; i < sigmas.size(); ++i)
                ASSERT_EQ(fast[i], oracle::brute_pairs(z, sigmas[i])) << n << " " << sigmas[i];
            ASSERT_EQ(pair_concentration(m, a, d, std::ldexp(1.0, -10)), oracle::brute_pairs(z, std::ldexp(1.0, -10)));
        }
    }
}

TEST(PairCount, DegenerateCases) {
    const int n = 8;
    Word a(17, n), d(200, n);
    EXPECT_EQ(pair_concentration(PerturbedMap(0.0), a, d, 0.0), std::uint64_t{1} << (2 * n));
    PerturbedMap m(0.01);
    EXPECT_EQ(pair_concentration(m, a, d, std::exp(8.0 * 0.01 * n)), std::uint64_t{1} << (2 * n));
    EXPECT_EQ(pair_count_sorted({}, 1.0), 0u);
    EXPECT_THROW(pair_count_sorted({1.0}, -1.0), DomainError);
}

TEST(PairCount, MonotoneInSigma) {
    PerturbedMap m(0.01);
    CensusReport r = pair_census(m, Word(3, 9), Word(300, 9), dyadic_grid(std::ldexp(1.0, -30), 1.0));
    for (std::size_t i = 1; i < r.counts.size(); ++i) EXPECT_GE(r.counts[i], r.counts[i - 1]);
    for (double f : r.fractions) {
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0);
    }
    EXPECT_EQ(r.population, std::uint64_t{1} << 18);
    EXPECT_EQ(r.mode(), "exhaustive");
}

TEST(Zeta, RangeAndZeroDelta) {
    const int n = 8;
    PerturbedMap m(0.01);
    Word a(99, n), d(12, n);
    std::vector<double> z = zeta_table(m, a, d);
    for (double v : z) {
        EXPECT_GE(v, std::exp(-0.32));
        EXPECT_LE(v, std::exp(0.32));
    }
    for (std::uint64_t b : {0u, 1u, 77u, 255u}) EXPECT_NEAR(z[b], zeta(m, a, d, Word(b, n)), 1e-13);
    for (double v : zeta_table(PerturbedMap(0.0), a, d)) EXPECT_EQ(v, 1.0);
    EXPECT_THROW(zeta(m, Word(1, 3), Word(1, 4), Word(1, 3)), DomainError);
}

TEST(Zeta, ReconstructedFromBirkhoffSums) {
    // 4^n g'_{ab}(x) = z^{-2n} exp(-delta S_{2n} tent(g_{ab} x))
    for (double delta : {0.001, 0.01}) {
        PerturbedMap m(delta);
        const int n = 7;
        Word a(45, n), d(101, n);
        const double x = m.branch(d, 0.0);
        std::vector<double> z = zeta_table(m, a, d);
        for (std::uint64_t b = 0; b < z.size(); ++b) {
            double rebuilt = std::pow(m.z(), -2.0 * n) * std::exp(-delta * m.birkhoff_sum(a.concat(Word(b, n)), x));
            ASSERT_NEAR(z[b], rebuilt, 1e-10);
        }
    }
}

TEST(RegularCouple, Definition) {
    std::vector<double> z = {0.0, 0.1, 0.2, 0.3};
    // 4 diagonal pairs out of 16 at small scales, all 16 at scale 1.
    EXPECT_TRUE(couple_is_regular(z, {0.01, 0.05}, 0.01));
    EXPECT_FALSE(couple_is_regular(z, {0.01, 0.05, 1.0 - 1e-9}, 0.01));
    EXPECT_FALSE(couple_is_regular(z, {0.01}, 2.0));
    ReductionParams p;
    p.n = 6;
    EXPECT_FALSE(regular_couple_test(PerturbedMap(0.0), Word(3, 6), Word(9, 6), p));
}

TEST(RegularCouple, DefaultWindowIsSaturatedAtDeskScale) {
    // Every scale in [e^{-4 eps0 n}, e^{-eps0 eps1 n/2}] exceeds the spread of
    // zeta, so all 4^n pairs are close and no couple can be regular.
    PerturbedMap m(0.01);
    for (int n : {6, 8, 10}) {
        ReductionParams p;
        p.n = n;
        std::vector<double> z = zeta_table(m, Word(5, n), Word(9, n));
        auto [lo, hi] = std::minmax_element(z.begin(), z.end());
        EXPECT_LT(*hi - *lo, p.couple_sigma_range().first);
        EXPECT_FALSE(regular_couple_test(m, Word(5, n), Word(9, n), p));
    }
}

TEST(BlockCensus, SingleBlockReducesToCouples) {
    PerturbedMap m(0.01);
    ReductionParams p = mixed_params();
    p.k = 1;
    CensusReport r = regular_block_census(m, p, Sampler::exhaustive());
    std::uint64_t regular = 0;
    for (std::uint64_t a = 0; a < 32; ++a)
        for (std::uint64_t d = 0; d < 32; ++d) regular += regular_couple_test(m, Word(a, 5), Word(d, 5), p);
    EXPECT_EQ(r.population, 1024u);
    EXPECT_EQ(r.stat("irregular_blocks"), 1024.0 - regular);
    EXPECT_DOUBLE_EQ(r.stat("regular_couple_fraction"), regular / 1024.0);
    EXPECT_GT(regular, 0u);
    EXPECT_LT(regular, 1024u);
}

TEST(BlockCensus, MonteCarloAgreesWithExhaustive) {
    PerturbedMap m(0.01);
    ReductionParams p = mixed_params();
    CensusReport ex = regular_block_census(m, p, Sampler::exhaustive());
    CensusReport mc = regular_block_census(m, p, Sampler::random(10000, 7));
    const double e = ex.stat("irregular_fraction"), f = mc.stat("irregular_fraction");
    EXPECT_GT(e, 0.2);
    EXPECT_LT(e, 0.8);
    const double se = std::sqrt(e * (1 - e) / 10000.0);
    EXPECT_LE(std::abs(f - e), 3.0 * se);
    EXPECT_LE(mc.stat("ci_low"), f);
    EXPECT_GE(mc.stat("ci_high"), f);
    EXPECT_EQ(mc.mode(), "monte-carlo(7, 10000)");
    for (std::size_t i = 0; i < ex.fractions.size(); ++i) EXPECT_NEAR(mc.fractions[i], ex.fractions[i], 0.02);
    for (std::size_t i = 1; i < ex.counts.size(); ++i) EXPECT_GE(ex.counts[i], ex.counts[i - 1]);
}

TEST(BlockCensus, Errors) {
    PerturbedMap m(0.01);
    ReductionParams p;
    p.n = 10;
    p.k = 2;
    EXPECT_THROW(regular_block_census(m, p, Sampler::exhaustive()), BudgetError);
    Sampler no_seed;
    no_seed.monte_carlo = true;
    no_seed.samples = 10;
    EXPECT_THROW(regular_block_census(m, p, no_seed), DomainError);
    p.n = 0;
    EXPECT_THROW(regular_block_census(m, p, Sampler::random(10, 1)), DomainError);
}

TEST(DerivativeCensus, ExpansionMatchesFiniteDifference) {
    PerturbedMap m(0.01);
    const int n = 6;
    Word a(37, n);
    for (double x : {0.1, 0.4, 0.77}) {
        std::vector<double> D = detail::word_functional(m, a, n, x, detail::Track::derivative_expansion);
        std::vector<double> S = detail::word_functional(m, a, n, x, detail::Track::birkhoff);
        const double h = 1e-5;
        for (std::uint64_t b = 0; b < D.size(); ++b) {
            Word w = a.concat(Word(b, n));
            double fd = (m.birkhoff_sum(w, x + h) - m.birkhoff_sum(w, x - h)) / (2 * h);
            ASSERT_NEAR(D[b], fd, 1e-6) << b;
            ASSERT_NEAR(S[b], m.birkhoff_sum(w, x), 1e-13);
        }
    }
}

TEST(DerivativeCensus, RademacherClosedFormAtZeroDelta) {
    // delta = 0: the expansions are sum_m e_m 2^-m, spaced 2^{1-n} apart.
    const int n = 8;
    ReductionParams p;
    p.epsilon0 = 0.5;
    p.delta = 0.0;
    std::vector<double> sigmas = {std::ldexp(1.0, -20), std::ldexp(1.0, -10), 0.25};
    CensusReport r = derivative_census(PerturbedMap(0.0), Word(11, n), sigmas, p);
    const double N = std::ldexp(1.0, n);
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        const double theta = std::pow(sigmas[i], 0.1);
        const double t = std::min(N - 1, std::floor(theta * N / 2.0));
        const double pairs = N + 2.0 * (t * N - t * (t + 1) / 2.0);
        EXPECT_DOUBLE_EQ(r.fractions[i], pairs / (N * N)) << sigmas[i];
    }
    EXPECT_EQ(r.stat("lipschitz"), 0.0);
}

TEST(DerivativeCensus, WithinBound) {
    PerturbedMap m(0.01);
    const int n = 10;
    ReductionParams p;
    p.n = n;
    auto [lo, hi] = p.census_sigma_range();
    std::vector<double> sigmas = dyadic_grid(lo, std::min(hi, 4.0));
    CensusReport r = derivative_census(m, Word(301, n), sigmas, p);
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        EXPECT_LE(r.fractions[i], std::pow(0.01, -0.5) * std::pow(sigmas[i], 0.02));
        if (i) {
            EXPECT_GE(r.fractions[i], r.fractions[i - 1]);
        }
    }
    EXPECT_THROW(derivative_census(m, Word(301, n), {lo / 2}, p), DomainError);
    EXPECT_THROW(derivative_census(m, Word(1, 13), {0.5}, p), BudgetError);
}

TEST(DerivativeCensus, SplitDepth) {
    EXPECT_EQ(derivative_split(1.0, 10), 0);
    EXPECT_EQ(derivative_split(0.25, 10), 1);
    EXPECT_EQ(derivative_split(std::ldexp(1.0, -7), 10), 3);
    EXPECT_EQ(derivative_split(std::ldexp(1.0, -40), 10), 10);
    EXPECT_EQ(derivative_split(8.0, 10), 0);
}

TEST(BirkhoffCensus, LargeScaleCountsEverything) {
    PerturbedMap m(0.01);
    const int n = 8;
    ReductionParams p;
    CensusReport r = birkhoff_proximity_census(m, Word(77, n), {n / 2.0 + 1.0}, p, Sampler::exhaustive());
    EXPECT_EQ(r.fractions[0], 1.0);
    EXPECT_EQ(r.population, std::uint64_t{1} << (3 * n));
}

TEST(BirkhoffCensus, WithinBoundAndSpaced) {
    PerturbedMap m(0.01);
    const int n = 10;
    ReductionParams p;
    p.n = n;
    auto [lo, hi] = p.census_sigma_range();
    std::vector<double> sigmas = dyadic_grid(lo, hi);
    CensusReport r = birkhoff_proximity_census(m, Word(600, n), sigmas, p, Sampler::exhaustive());
    for (std::size_t i = 0; i < sigmas.size(); ++i) EXPECT_LE(r.fractions[i], 2.0 * std::pow(0.01, -0.5) * std::pow(sigmas[i], 0.02));
    EXPECT_EQ(r.stat("spacing_ok"), 1.0);
    EXPECT_GE(r.stat("min_spacing"), r.stat("spacing_bound"));
}

TEST(BirkhoffCensus, MonteCarloAgreesWithExhaustive) {
    PerturbedMap m(0.01);
    const int n = 8;
    ReductionParams p;
    p.n = n;
    std::vector<double> sigmas = {0.25, 0.5, 1.0, 2.0};
    Word a(140, n);
    CensusReport ex = birkhoff_proximity_census(m, a, sigmas, p, Sampler::exhaustive());
    CensusReport mc = birkhoff_proximity_census(m, a, sigmas, p, Sampler::random(100000, 3));
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        const double se = std::sqrt(ex.fractions[i] * (1 - ex.fractions[i]) / 1e5);
        EXPECT_LE(std::abs(mc.fractions[i] - ex.fractions[i]), 3.0 * se + 1e-12) << sigmas[i];
        EXPECT_GT(mc.stat("std_error_" + std::to_string(i)), 0.0);
    }
}

TEST(Rademacher, MatchesSubsetSumDistribution) {
    const int n = 14;
    auto dist = dyadic_subset_sums(n);
    std::vector<double> sigmas = {std::ldexp(1.0, -10), std::ldexp(1.0, -4), 0.3, 1.0};
    auto res = rademacher_anticoncentration(n, constant_rho(0.5), {0.0}, sigmas);
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        std::uint64_t expect = 0;
        for (auto [v, c] : dist)
            if (std::abs(static_cast<double>(v)) <= sigmas[i] * std::ldexp(1.0, n)) expect += c;
        EXPECT_EQ(res.counts[i], expect) << sigmas[i];
    }
}

TEST(Rademacher, FullWindowAndErrors) {
    PerturbedMap m(0.01);
    auto res = rademacher_anticoncentration(12, branch_rho(m, {0.2, 0.7}), {0.0, 0.1}, {2.0});
    EXPECT_EQ(res.fractions[0], 1.0);
    EXPECT_THROW(rademacher_anticoncentration(21, constant_rho(0.5), {0.0}, {1.0}), BudgetError);
    EXPECT_THROW(rademacher_anticoncentration(4, constant_rho(0.5), {}, {1.0}), DomainError);
}

TEST(Rademacher, BranchRhoStaysInWindow) {
    PerturbedMap m(0.01);
    RhoFn rho = branch_rho(m, {0.0, 0.5, 0.9});
    for (int level = 1; level <= 6; ++level)
        for (std::uint64_t prefix = 0; prefix < (1u << level); ++prefix)
            for (std::size_t e = 0; e < 3; ++e) {
                double r = rho(level, prefix, e);
                EXPECT_GT(r, std::exp(-0.02) / 2);
                EXPECT_LT(r, std::exp(0.02) / 2);
            }
}

TEST(Rademacher, BoundHolds) {
    const double a0 = rademacher_alpha0();
    EXPECT_NEAR(a0, 1.0 - std::log(3.0) / std::log(4.0), 1e-15);
    std::vector<double> sigmas = dyadic_grid(std::ldexp(1.0, -10), 1.0);
    for (double delta : {0.0, 0.001, 0.004}) {
        PerturbedMap m(delta);
        for (int n = 1; n <= 14; ++n) {
            auto res = rademacher_anticoncentration(n, branch_rho(m, {0.3}), {0.0}, sigmas);
            for (std::size_t i = 0; i < sigmas.size(); ++i)
                ASSERT_LE(res.fractions[i], anticoncentration_bound(n, sigmas[i], delta)) << delta << " " << n << " " << sigmas[i];
        }
    }
}

TEST(Census, DyadicGrid) {
    auto g = dyadic_grid(0.1, 1.0);
    EXPECT_EQ(g, (std::vector<double>{0.125, 0.25, 0.5, 1.0}));
    EXPECT_EQ(dyadic_grid(0.3, 0.4), (std::vector<double>{0.3, 0.4}));
    EXPECT_THROW(dyadic_grid(0.0, 1.0), DomainError);
    ReductionParams p;
    p.n = 12;
    for (double s : p.couple_sigma_grid()) {
        EXPECT_GE(s, p.couple_sigma_range().first);
        EXPECT_LE(s, p.couple_sigma_range().second);
    }
}
