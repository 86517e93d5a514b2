#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "fdlab/census.hpp"
#include "fdlab/dynamics.hpp"
#include "fdlab/numeric.hpp"
#include "fdlab/parallel.hpp"

namespace fdlab {

enum class SumMethod { direct, binned };

inline std::string to_string(SumMethod m) { return m == SumMethod::direct ? "direct" : "binned"; }

SumMethod parse_sum_method(const std::string& s);

struct ExpSumInput {
    std::vector<std::vector<double>> tables;
    double eta = 0.0;
    SumMethod method = SumMethod::direct;
    std::size_t bins = std::size_t{1} << 20;
};

namespace detail {

inline std::complex<double> cadd(const std::complex<double>& a, const std::complex<double>& b) { return a + b; }

// Sum of exp(i w zeta_1(b_1) ... zeta_k(b_k)) over all index tuples.
std::complex<double> direct_phase_sum(const std::vector<std::vector<double>>& t, double w);

// Distribution of sum_j ln zeta_j(b_j) on a grid of width h, with each value
// split linearly between its two neighbouring bins.
std::complex<double> binned_phase_sum(const std::vector<std::vector<double>>& t, double w, std::size_t bins);

} // namespace detail

// |prod_j |Z_j|^-1 sum_B exp(i eta zeta_1(b_1) ... zeta_k(b_k))|
double exp_sum(const ExpSumInput& in);

// Table bounds |eta|^{-eps1/2} <= zeta <= |eta|^{eps1/2} plus the pair
// non-concentration 4^-n #{|zeta(b) - zeta(c)| <= s} <= s^gamma on dyadic s in
// [|eta|^-2, |eta|^-eps1], for every table.
bool sum_product_hypothesis(const std::vector<std::vector<double>>& tables, double eta, double epsilon1, double gamma);

struct ScanPoint {
    double eta = 0.0;
    double modulus = 0.0;
    SumMethod method = SumMethod::direct;
    bool hypothesis_ok = false;
    bool in_window = false;
};

struct DecayScan {
    std::vector<ScanPoint> points;
    std::vector<double> envelope;
    double epsilon1_hat = 0.0;
    bool block_regular = false;
};

// eta window [e^{eps0 n / 2}, e^{2 eps0 n}].
inline std::pair<double, double> eta_window(const ReductionParams& p) {
    return {std::exp(p.epsilon0 * p.n / 2.0), std::exp(2.0 * p.epsilon0 * p.n)};
}

// zeta tables of a block a_0 ... a_k: table j is zeta(a_{j-1}, a_j, .).
std::vector<std::vector<double>> block_tables(const PerturbedMap& map, const std::vector<Word>& block);

bool block_is_regular(const PerturbedMap& map, const std::vector<Word>& block, const ReductionParams& params);

// Modulus of the block's exponential sum across an eta grid (default: 12
// log-spaced points over the eta window), with the running-sup envelope and
// its log-log decay rate.
DecayScan decay_scan(const PerturbedMap& map, const std::vector<Word>& block, const ReductionParams& params,
                     std::vector<double> eta_grid, SumMethod method = SumMethod::direct,
                     std::size_t bins = std::size_t{1} << 20);

// Interleaved word a_0 b_1 a_1 ... b_k a_k.
Word interleave(const std::vector<Word>& A, const std::vector<Word>& B);

inline double linearization_scale(int n, int k, double delta, double alpha) {
    return std::exp(alpha * delta * n) * std::ldexp(1.0, -(2 * k + 2) * n);
}

// |g_{A*B}(x) - g_{A*B}(y) - 4^{-kn} zeta_1(b_1) ... zeta_k(b_k) (g_{a_k}(x) - g_{a_k}(y))|
double linearization_check(const PerturbedMap& map, const std::vector<Word>& A, const std::vector<Word>& B,
                           double x, double y, const ReductionParams& params);

} // namespace fdlab
