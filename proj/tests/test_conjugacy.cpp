#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fdlab/conjugacy.hpp"
#include "fdlab/error.hpp"
#include "fdlab/numeric.hpp"

using namespace fdlab;

namespace {

double circle_distance(double a, double b) {
    double d = std::abs(a - b);
    return std::min(d, 1.0 - d);
}

// x with psi(x, depth) = t, by bisection on the monotone map psi.
double psi_preimage(const PerturbedMap& m, double t, int depth) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        if (psi(m, mid, depth) < t) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST(Psi, Examples) {
    for (double d : {0.0, 0.001, 0.01, 0.04}) {
        PerturbedMap m(d);
        EXPECT_EQ(psi(m, 0.0, 20), 0.0);
        EXPECT_EQ(psi(m, 0.5, 20), 0.5);
        EXPECT_EQ(psi(m, 0.5, 1), 0.5);
    }
    PerturbedMap flat(0.0);
    for (double x : {0.1, 0.333, 0.71234, 0.999})
        EXPECT_EQ(psi(flat, x, 10), std::floor(x * 1024.0) / 1024.0);
}

TEST(Psi, MonotoneOnSortedGrid) {
    PerturbedMap m(0.01);
    double prev = -1.0;
    for (int i = 0; i < 20000; ++i) {
        double v = psi(m, i / 20000.0, 30);
        ASSERT_GE(v, prev) << i;
        prev = v;
    }
}

TEST(Psi, ConjugacyResidual) {
    PerturbedMap m(0.01);
    ConjugacyEvaluator ev(m, 30);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        double x = (i + 0.5) / 10000.0;
        double lhs = ev.psi(reduce_unit(2.0 * x));
        double rhs = m.map(ev.psi(x));
        worst = std::max(worst, circle_distance(lhs, rhs));
    }
    EXPECT_LE(worst, 3.0 * ev.error_bound());
    EXPECT_DOUBLE_EQ(ev.error_bound(), std::ldexp(std::exp(0.6), -30));
}

TEST(PsiInv, Examples) {
    PerturbedMap m(0.01);
    EXPECT_EQ(psi_inv(m, 0.0, 30).value, 0.0);
    EXPECT_EQ(psi_inv(m, 1.0, 30).value, 1.0);
    PerturbedMap flat(0.0);
    for (double y : {0.1, 0.333, 0.71234, 0.5})
        EXPECT_EQ(psi_inv(flat, y, 12).value, std::floor(y * 4096.0) / 4096.0);
    EXPECT_EQ(psi_inv(m, 0.5, 5).value, 0.5);
}

TEST(PsiInv, Errors) {
    PerturbedMap m(0.01);
    EXPECT_THROW(psi_inv(m, 0.3, 41), BudgetError);
    EXPECT_NO_THROW(psi_inv(m, 0.3, 40));
    EXPECT_THROW(psi_inv(m, 0.3, 0), DomainError);
    EXPECT_THROW(psi_inv(m, 1.2, 10), DomainError);
}

TEST(PsiInv, RoundTrip) {
    PerturbedMap m(0.01);
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 20;
    for (int i = 0; i < 1000; ++i) {
        double x = u(gen);
        double y = psi(m, x, 2 * n);
        EXPECT_LE(std::abs(psi_inv(m, y, n).value - x), 2.0 * std::ldexp(1.0, -n)) << x;
    }
}

TEST(PsiInv, PrecisionFlag) {
    PerturbedMap m(0.01);
    // exact partition point reached after one step: the orbit sits on 1/2 within round-off
    double y = m.branch(Word::from_string("01"), 0.0);
    ItineraryResult r = psi_inv(m, y, 30);
    EXPECT_TRUE(r.precision_loss);
    EXPECT_NEAR(r.value, 0.25, 2.0 * std::ldexp(1.0, -30));
    ItineraryResult q = psi_inv(m, 0.3, 30);
    EXPECT_GT(q.forward_error, 0.0);
    EXPECT_FALSE(psi_inv(m, 0.3, 3).precision_loss);
}

TEST(Measure, LebesgueAtZeroDelta) {
    ConjugacyEvaluator ev(PerturbedMap(0.0), 30);
    for (double x : {0.1, 0.5, 0.77})
        for (double r : {0.001, 0.01, 0.2}) EXPECT_NEAR(ev.measure_interval(x, r).mass, 2.0 * r, 4.0 * std::ldexp(1.0, -30));
    EXPECT_NEAR(ev.measure_interval(0.01, 0.05).mass, 0.1, 4.0 * std::ldexp(1.0, -30));
    EXPECT_NEAR(ev.measure_interval(0.98, 0.05).mass, 0.1, 4.0 * std::ldexp(1.0, -30));
}

TEST(Measure, FullCircleAndMonotoneInRadius) {
    ConjugacyEvaluator ev(PerturbedMap(0.01), 30);
    EXPECT_NEAR(ev.measure_interval(0.3, 0.4999999999).mass, 1.0, 1e-8);
    for (double x : {0.0, 0.123, 0.5, 0.9}) {
        double prev = 0.0;
        for (double r : log_spaced(1e-7, 0.49, 40)) {
            double mass = ev.measure_interval(x, r).mass;
            EXPECT_GE(mass, prev);
            EXPECT_LE(mass, 1.0);
            prev = mass;
        }
    }
    EXPECT_THROW(ev.measure_interval(0.3, 0.0), DomainError);
    EXPECT_THROW(ev.measure_interval(0.3, 0.5), DomainError);
}

TEST(Measure, CylinderMassesAreDyadic) {
    PerturbedMap m(0.01);
    const int depth = 30;
    const double tol = 4.0 * std::ldexp(1.0, -depth);
    for (int n = 1; n <= 12; ++n) {
        double total = 0.0;
        for (std::uint64_t i = 0; i < word_count(n); ++i) {
            Cylinder c = m.cylinder(Word(i, n));
            double mass = psi_inv(m, c.right, depth).value - psi_inv(m, c.left, depth).value;
            ASSERT_NEAR(mass, std::ldexp(1.0, -n), tol) << n << " " << i;
            total += mass;
        }
        EXPECT_NEAR(total, 1.0, std::ldexp(1.0, n + 2 - depth));
    }
}

TEST(Measure, PushForwardMatchesBisection) {
    PerturbedMap m(0.01);
    ConjugacyEvaluator ev(m, 30);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double a = u(gen), b = u(gen);
        if (a > b) std::swap(a, b);
        if (b - a < 1e-4 || b - a > 0.99) continue;
        double x = 0.5 * (a + b), r = 0.5 * (b - a);
        double lebesgue = psi_preimage(m, b, 40) - psi_preimage(m, a, 40);
        EXPECT_NEAR(ev.measure_interval(x, r).mass, lebesgue, 1e-6) << a << " " << b;
    }
}

TEST(Holder, LebesgueExponent) {
    ConjugacyEvaluator ev(PerturbedMap(0.0), 30);
    std::vector<double> xs;
    for (int i = 0; i < 64; ++i) xs.push_back((i + 0.37) / 64.0);
    HolderFit f = holder_mass_fit(ev, xs, log_spaced(1e-6, 0.1, 24));
    EXPECT_NEAR(f.delta_mu_est, 1.0, 0.02);
    EXPECT_NEAR(f.C_est, 2.0, 0.1);
}

namespace {

std::vector<double> holder_xs() {
    std::vector<double> xs;
    for (int i = 0; i < 256; ++i) xs.push_back((i + 0.5) / 256.0);
    for (double x : {0.0, 0.5, 0.25, 0.75}) xs.push_back(x);
    return xs;
}

// sup_x mu([x - r, x + r]) from a count of depth-24 base points.
double census_sup_mass(const PerturbedMap& m, const std::vector<double>& xs, double r) {
    static thread_local std::vector<double> pts;
    static thread_local double cached = -1.0;
    const int n = 24;
    if (cached != m.delta()) {
        pts = branch_table(m, n, 0.0).value;
        std::sort(pts.begin(), pts.end());
        cached = m.delta();
    }
    double best = 0.0;
    for (double x : xs) {
        auto count = [&](double lo, double hi) {
            return static_cast<double>(std::upper_bound(pts.begin(), pts.end(), hi) - std::lower_bound(pts.begin(), pts.end(), lo));
        };
        double c = count(x - r, x + r);
        if (x - r < 0.0) c += count(x - r + 1.0, 1.0);
        if (x + r > 1.0) c += count(0.0, x + r - 1.0);
        best = std::max(best, std::ldexp(c, -n));
    }
    return best;
}

} // namespace

TEST(Holder, PerturbedExponentMatchesCensus) {
    PerturbedMap m(0.01);
    ConjugacyEvaluator ev(m, 30);
    auto xs = holder_xs();
    auto rs = log_spaced(1e-5, 0.1, 20);
    HolderFit f = holder_mass_fit(ev, xs, rs);
    EXPECT_GT(f.delta_mu_est, 0.9);
    EXPECT_LT(f.delta_mu_est, 1.05);
    EXPECT_GT(f.r_squared, 0.99);

    std::vector<double> sup;
    for (double r : rs) sup.push_back(census_sup_mass(m, xs, r));
    EXPECT_NEAR(fit_power_law(rs, sup).slope, f.delta_mu_est, 0.02);
}

TEST(Holder, TrendInDelta) {
    auto xs = holder_xs();
    auto rs = log_spaced(1e-5, 0.1, 20);
    double strong = holder_mass_fit(ConjugacyEvaluator(PerturbedMap(0.01), 30), xs, rs).delta_mu_est;
    double weak = holder_mass_fit(ConjugacyEvaluator(PerturbedMap(0.002), 30), xs, rs).delta_mu_est;
    EXPECT_GE(weak, strong - 0.05);
}

TEST(Holder, InsufficientRange) {
    ConjugacyEvaluator ev(PerturbedMap(0.01), 12);
    EXPECT_THROW(holder_mass_fit(ev, {0.3}, log_spaced(1e-5, 0.1, 20)), InsufficientRangeError);
    EXPECT_THROW(holder_mass_fit(ev, {}, log_spaced(1e-5, 0.1, 20)), DomainError);
}
