#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fdlab/dynamics.hpp"
#include "fdlab/numeric.hpp"
#include "fdlab/parallel.hpp"
#include "fdlab/rng.hpp"

namespace fdlab {

struct ReductionParams {
    int n = 6;
    int k = 2;
    double epsilon0 = 1.0 / 20.0;
    double epsilon1 = 0.1;
    double gamma = 1.0 / 100.0;
    double delta = 0.01;
    double alpha = 0.25;
    // Overrides the default dyadic couple grid when non-empty.
    std::vector<double> sigma_grid;

    void validate() const {
        if (n < 1 || n > 24) throw DomainError("word length n must lie in [1, 24]");
        if (k < 1) throw DomainError("block count k must be >= 1");
        if (!(epsilon0 > 0) || !(epsilon1 > 0) || !(gamma > 0)) throw DomainError("epsilon0, epsilon1 and gamma must be positive");
        check_delta(delta);
    }

    // Scale window for couple regularity: [e^{-4 eps0 n}, e^{-eps0 eps1 n / 2}].
    std::pair<double, double> couple_sigma_range() const {
        return {std::exp(-4.0 * epsilon0 * n), std::exp(-epsilon0 * epsilon1 * n / 2.0)};
    }

    // Scale window for the derivative and Birkhoff censuses:
    // [e^{-5 eps0 n}, e^{-eps0 eps1 n / 3} / delta].
    std::pair<double, double> census_sigma_range() const {
        double hi = delta > 0 ? std::exp(-epsilon0 * epsilon1 * n / 3.0) / delta : HUGE_VAL;
        return {std::exp(-5.0 * epsilon0 * n), hi};
    }

    std::vector<double> couple_sigma_grid() const;
};

// Powers of two in [lo, hi], ascending. Falls back to the endpoints when the
// window holds no power of two.
std::vector<double> dyadic_grid(double lo, double hi);


struct CensusReport {
    std::string kind;
    std::vector<double> sigma;
    std::vector<std::uint64_t> counts;
    std::vector<double> fractions;
    double gamma_hat = 0.0;
    // Number of objects counted in each fraction's denominator.
    std::uint64_t population = 0;
    bool monte_carlo = false;
    std::optional<std::uint64_t> seed;
    std::uint64_t samples = 0;
    // Census-specific scalars (irregular fraction, confidence bounds, spacing, ...).
    std::vector<std::pair<std::string, double>> stats;

    std::string mode() const {
        if (!monte_carlo) return "exhaustive";
        return "monte-carlo(" + std::to_string(seed.value_or(0)) + ", " + std::to_string(samples) + ")";
    }

    double stat(const std::string& name) const {
        for (const auto& [key, v] : stats)
            if (key == name) return v;
        throw DomainError("census report has no statistic '" + name + "'");
    }
};

struct Sampler {
    bool monte_carlo = false;
    std::uint64_t samples = 0;
    std::optional<std::uint64_t> seed;

    static Sampler exhaustive() { return {}; }
    static Sampler random(std::uint64_t samples, std::uint64_t seed) { return {true, samples, seed}; }
};

// Slope of ln(fraction) against ln(sigma) over points with positive fraction;
// 0 when fewer than two such points exist.
double fit_concentration_exponent(const std::vector<double>& sigma, const std::vector<double>& fractions);

void finish_report(CensusReport& r, double denominator);

// ---------------------------------------------------------------- zeta maps

inline void check_same_length(const Word& a, const Word& b, const char* what) {
    if (a.size() != b.size() || a.size() < 1) throw DomainError(std::string(what) + ": words must have equal positive length");
}

// zeta(b) = 4^n g'_{a_prev b}(x_{a_next}), x_{a_next} = g_{a_next}(0).
double zeta(const PerturbedMap& map, const Word& a_prev, const Word& a_next, const Word& b);

// zeta for every b of length n, indexed by b.bits().
std::vector<double> zeta_table(const PerturbedMap& map, const Word& a_prev, const Word& a_next);

// ---------------------------------------------------------------- pair counts

// #{(i, j) ordered : |v_i - v_j| <= sigma} for an ascending vector, in O(N).
std::uint64_t pair_count_sorted(const std::vector<double>& sorted, double sigma);

std::vector<std::uint64_t> pair_counts(std::vector<double> values, const std::vector<double>& sigmas);

inline std::uint64_t pair_concentration(const PerturbedMap& map, const Word& a_prev, const Word& a_next, double sigma) {
    return pair_counts(zeta_table(map, a_prev, a_next), {sigma}).front();
}

// Pair census of one couple over a sigma grid; fractions are normalized by 4^n.
CensusReport pair_census(const PerturbedMap& map, const Word& a_prev, const Word& a_next,
                         const std::vector<double>& sigmas);

// A couple is regular when 4^-n #{|zeta(b) - zeta(c)| <= s} <= s^gamma at every grid scale s.
bool couple_is_regular(const std::vector<double>& sorted_zeta, const std::vector<double>& grid, double gamma);

bool regular_couple_test(const PerturbedMap& map, const Word& a, const Word& d, const ReductionParams& params);

// ---------------------------------------------------------------- blocks

namespace detail {

struct CoupleSummary {
    bool regular = false;
    std::vector<std::uint64_t> counts;
};

CoupleSummary summarize_couple(const PerturbedMap& map, int n, std::uint64_t a, std::uint64_t d,
                               const std::vector<double>& grid, double gamma);

} // namespace detail

// Fraction of blocks a_0 ... a_k (each a_j of length n) whose adjacent
// couples (a_{j-1}, a_j) are all regular. counts/fractions hold the pair
// counts summed over all adjacent couples of the counted blocks, normalized
// by blocks * k * 4^n.
CensusReport regular_block_census(const PerturbedMap& map, const ReductionParams& params, const Sampler& sampler);

// ---------------------------------------------------------------- derivative census

// Lipschitz bound for x -> (S_{2n} tent_phi o g_{ab} - S_{2n} tent_phi o g_{ac})'(x).
double derivative_expansion_lipschitz(const PerturbedMap& map);

inline int derivative_split(double sigma, int n) {
    int m = static_cast<int>(std::floor(-std::log2(sigma) / 2.0));
    return std::clamp(m, 0, n);
}

namespace detail {

void check_census_scale(const ReductionParams& p, double sigma);

// For every b of length n, walk the word a b from its last letter, recording
// value, derivative, and either the derivative expansion
// sum_j tent_phi_slope(w_j) g'_{w_j ... w_m}(x) or the Birkhoff sum.
enum class Track { derivative_expansion, birkhoff };

std::vector<double> word_functional(const PerturbedMap& map, const Word& a, int n, double x, Track track);

} // namespace detail

// For each sigma: normalized count of triples (b, c, d), b, c in {0,1}^n and
// d in {0,1}^m with m = floor(-log2(sigma) / 2), for which the derivative
// difference of the 2n-step Birkhoff sums along a b and a c may drop to
// sigma^{1/10} somewhere on S_d. The infimum over S_d is bounded below by the
// value at x_d minus Lipschitz constant times diam(S_d), so the count is an
// upper bound on the exact one.
CensusReport derivative_census(const PerturbedMap& map, const Word& a, const std::vector<double>& sigmas,
                               const ReductionParams& params);

// ---------------------------------------------------------------- Birkhoff census

// Smallest gap between consecutive base points x_d, |d| = n.
double base_point_spacing(const PerturbedMap& map, int n);

// Normalized count of triples (b, c, d) in ({0,1}^n)^3 with
// |S_{2n} tent_phi(g_{ab}(x_d)) - S_{2n} tent_phi(g_{ac}(x_d))| <= sigma.
CensusReport birkhoff_proximity_census(const PerturbedMap& map, const Word& a, const std::vector<double>& sigmas,
                                       const ReductionParams& params, const Sampler& sampler);

// ---------------------------------------------------------------- Rademacher sums

// rho(i, prefix, x_index): the i-th contraction factor (i = 1..n) given the
// signs of the first i terms, packed with the first sign in the highest bit
// of `prefix` and bit 1 meaning -1.
using RhoFn = std::function<double(int, std::uint64_t, std::size_t)>;

struct AnticoncentrationResult {
    std::vector<double> sigma;
    std::vector<std::uint64_t> counts;
    std::vector<double> fractions;
};

// 2^-n #{signs : exists x in E with |sum_i sign_i kappa_i(x) - target(x)| <= sigma},
// kappa_i = rho_1 ... rho_i, by direct enumeration of all 2^n sign vectors.
AnticoncentrationResult rademacher_anticoncentration(int n, const RhoFn& rho, const std::vector<double>& target,
                                                     const std::vector<double>& sigmas);

inline double rademacher_alpha0() { return 1.0 - std::log(3.0) / std::log(4.0); }

// (4/3)^2 sigma^a0 e^{2 a0 delta n} + 2 (3/4)^{n/2}
inline double anticoncentration_bound(int n, double sigma, double delta) {
    const double a0 = rademacher_alpha0();
    return 16.0 / 9.0 * std::pow(sigma, a0) * std::exp(2.0 * a0 * delta * n) + 2.0 * std::pow(0.75, n / 2.0);
}

// Contraction factors induced by the inverse branches: the i-th sign is the
// slope sign of the i-th letter applied to x (last letter of the word first).
RhoFn branch_rho(const PerturbedMap& map, const std::vector<double>& points);

} // namespace fdlab
