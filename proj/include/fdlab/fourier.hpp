#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "fdlab/dynamics.hpp"
#include "fdlab/numeric.hpp"
#include "fdlab/parallel.hpp"

namespace fdlab {

inline constexpr int kMaxFourierDepth = 30;

struct SpectrumSample {
    double xi = 0.0;
    std::complex<double> value{1.0, 0.0};
    // |xi| * max cylinder diameter: rigorous, since every cylinder carries mass 2^-n.
    double error_bound = 0.0;
    int depth = 0;
    // 2 |v_n - v_{n+1}|, filled when the sample was computed with refinement.
    double refinement_error = 0.0;
};

// Upper bound on max_a diam(S_a) over words of length n.
inline double max_diameter_bound(const PerturbedMap& map, int n) {
    return std::pow(map.max_letter_derivative(), n);
}

// Default depth ceil(log2 |xi|) + 4, raised until |xi| * diameter <= 0.1.
int fourier_depth(const PerturbedMap& map, double xi, int requested = 0);

namespace detail {

// Sum of exp(i w g_p(v)) over all words p of length `levels`.
std::complex<double> prefix_sum(const PerturbedMap& map, double w, double v, int levels);

// Sum over all words a of length n of exp(i w g_a(start)), w >= 0.
std::complex<double> base_point_sum(const PerturbedMap& map, double w, int n, double start);

} // namespace detail

// mu_hat(xi) = integral exp(i xi x) dmu(x), approximated by placing each
// depth-n cylinder's mass 2^-n at its base point g_a(0).
SpectrumSample mu_hat(const PerturbedMap& map, double xi, int depth = 0, bool with_refinement = false);

enum class FitMode { envelope, all_points };

inline std::string to_string(FitMode m) { return m == FitMode::envelope ? "envelope" : "all-points"; }

FitMode parse_fit_mode(const std::string& s);

struct DecayFit {
    double rho = 0.0;
    double C = 0.0;
    double xi_min = 0.0;
    double xi_max = 0.0;
    FitMode mode = FitMode::envelope;
    std::size_t n_samples = 0;
    double r_squared = 0.0;
    std::vector<SpectrumSample> samples;
};

// Power-law fit |mu_hat(xi)| ~ C |xi|^-rho over a log-spaced grid. Refuses
// (ResolutionError) when the estimated discretization error of any sample
// exceeds 10% of its modulus.
DecayFit decay_fit(const PerturbedMap& map, const std::vector<double>& xi_grid, FitMode mode);

namespace detail {

struct GaussRule {
    std::array<double, 10> node{};
    std::array<double, 10> weight{};
};

// 10-point Gauss-Legendre rule on [-1, 1] by Newton iteration on P_10.
const GaussRule& gauss10();

std::complex<double> gauss_panel(const std::function<double(double)>& phase, double xi, double a, double b);

std::complex<double> adaptive_panel(const std::function<double(double)>& phase, double xi, double a, double b,
                                    std::complex<double> whole, int level);

} // namespace detail

// |integral_0^1 exp(i xi phase(x)) dx| by adaptive Gauss-Legendre panels, at
// least 10 panels per 2 pi of xi. k is the order of the derivative of the
// phase bounded below (used only for validation).
double vdc_baseline(const std::function<double(double)>& phase, int k, double xi);

} // namespace fdlab
