#include "fdlab/brownian.hpp"

#include <fftw3.h>

#include <complex>
#include <mutex>

#include "fdlab/error.hpp"
#include "fdlab/rng.hpp"

namespace fdlab {

namespace {
// the FFTW planner is not thread-safe
std::mutex planner_mutex;
} // namespace

std::vector<double> WienerPath::grid_values(std::size_t M) const {
    if (M < 1) throw DomainError("grid_values: need M >= 1");
    fftw_complex* buf = fftw_alloc_complex(M);
    for (std::size_t m = 0; m < M; ++m) buf[m][0] = buf[m][1] = 0.0;
    double offset = 0.0;
    for (int n = 1; n <= modes; ++n) {
        const double scale = 1.0 / (2.0 * std::numbers::pi * n);
        const std::size_t bin = static_cast<std::size_t>(n) % M;
        buf[bin][0] += x[n - 1] * scale;
        buf[bin][1] -= y[n - 1] * scale;
        offset += y[n - 1] * scale;
    }
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex);
        plan = fftw_plan_dft_1d(static_cast<int>(M), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::vector<double> w(M + 1);
    for (std::size_t m = 0; m < M; ++m)
        w[m] = x0 * (static_cast<double>(m) / static_cast<double>(M)) + std::numbers::sqrt2 * (buf[m][1] + offset);
    w[0] = 0.0;
    w[M] = x0;
    {
        std::lock_guard<std::mutex> lock(planner_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
    return w;
}

WienerPath sample_path(int N, std::uint64_t seed) {
    if (N < 1) throw DomainError("sample_path: need N >= 1");
    CounterRng rng(seed);
    WienerPath p;
    p.modes = N;
    p.seed = seed;
    p.x0 = rng.normal(0);
    p.x.resize(N);
    p.y.resize(N);
    for (int n = 1; n <= N; ++n) {
        p.x[n - 1] = rng.normal(2 * static_cast<std::uint64_t>(n) - 1);
        p.y[n - 1] = rng.normal(2 * static_cast<std::uint64_t>(n));
    }
    return p;
}

void check_resolution(const WienerPath& path, std::size_t M) {
    if (M < 10 * static_cast<std::size_t>(path.modes))
        throw ResolutionError("oscillatory_integral: grid M must be at least 10 N to resolve the highest mode");
}

std::vector<double> oscillatory_integrals(const WienerPath& path, const std::vector<double>& xis, std::size_t M) {
    check_resolution(path, M);
    const std::vector<double> w = path.grid_values(M);
    std::vector<double> out;
    for (double xi : xis) {
        if (xi == 0.0) {
            out.push_back(1.0);
            continue;
        }
        std::complex<double> s = 0.5 * (std::polar(1.0, xi * w[0]) + std::polar(1.0, xi * w[M]));
        for (std::size_t m = 1; m < M; ++m) s += std::polar(1.0, xi * w[m]);
        out.push_back(std::abs(s) / static_cast<double>(M));
    }
    return out;
}

double oscillatory_integral(const WienerPath& path, double xi, std::size_t M) {
    return oscillatory_integrals(path, {xi}, M).front();
}

} // namespace fdlab
