#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace fdlab {

// W(t) = X_0 t + sqrt(2) sum_{n=1}^N (X_n sin(2 pi n t) + Y_n (1 - cos(2 pi n t))) / (2 pi n)
struct WienerPath {
    double x0 = 0.0;
    std::vector<double> x;
    std::vector<double> y;
    int modes = 0;
    std::uint64_t seed = 0;

    double value(double t) const {
        double s = 0.0;
        for (int n = 1; n <= modes; ++n) {
            const double nt = n * t;
            const double theta = 2.0 * std::numbers::pi * (nt - std::floor(nt));
            s += (x[n - 1] * std::sin(theta) + y[n - 1] * (1.0 - std::cos(theta))) / (2.0 * std::numbers::pi * n);
        }
        return x0 * t + std::numbers::sqrt2 * s;
    }

    // W at t_m = m / M for m = 0..M, by one length-M inverse FFT.
    std::vector<double> grid_values(std::size_t M) const;
};

// Draw k of the stream is the k-th counter-based normal: X_0 is draw 0, X_n is
// draw 2n - 1 and Y_n is draw 2n, so paths with more modes extend paths with fewer.
WienerPath sample_path(int N, std::uint64_t seed);

void check_resolution(const WienerPath& path, std::size_t M);

// |integral_0^1 exp(i xi W(t)) dt| by the trapezoid rule on M + 1 points, for each xi.
std::vector<double> oscillatory_integrals(const WienerPath& path, const std::vector<double>& xis, std::size_t M);

double oscillatory_integral(const WienerPath& path, double xi, std::size_t M);

} // namespace fdlab
