#include "fdlab/fourier.hpp"

namespace fdlab {

int fourier_depth(const PerturbedMap& map, double xi, int requested) {
    const double a = std::abs(xi);
    int n = requested > 0 ? requested : std::max(1, static_cast<int>(std::ceil(std::log2(std::max(a, 1.0)))) + 4);
    while (n <= kMaxFourierDepth && a * max_diameter_bound(map, n) > 0.1) ++n;
    if (n > kMaxFourierDepth)
        throw BudgetError("mu_hat: |xi| = " + std::to_string(a) + " needs depth above 30");
    return n;
}

namespace detail {

std::complex<double> prefix_sum(const PerturbedMap& map, double w, double v, int levels) {
    if (levels == 0) return std::polar(1.0, w * v);
    if (levels == 1) return std::polar(1.0, w * map.letter(0, v)) + std::polar(1.0, w * map.letter(1, v));
    return prefix_sum(map, w, map.letter(0, v), levels - 1) + prefix_sum(map, w, map.letter(1, v), levels - 1);
}

std::complex<double> base_point_sum(const PerturbedMap& map, double w, int n, double start) {
    const int split = std::min(n, 12);
    BranchTable tails = branch_table(map, split, start);
    return parallel_reduce(
        tails.value.size(), std::complex<double>{},
        [&](std::size_t t) { return prefix_sum(map, w, tails.value[t], n - split); },
        [](const std::complex<double>& x, const std::complex<double>& y) { return x + y; });
}

} // namespace detail

SpectrumSample mu_hat(const PerturbedMap& map, double xi, int depth, bool with_refinement) {
    SpectrumSample s;
    s.xi = xi;
    if (xi == 0.0) return s;
    const int n = fourier_depth(map, xi, depth);
    const double w = std::abs(xi);
    std::complex<double> s0 = detail::base_point_sum(map, w, n, 0.0);
    s.depth = n;
    s.value = std::ldexp(1.0, -n) * s0;
    s.error_bound = w * max_diameter_bound(map, n);
    if (with_refinement) {
        // Base points at depth n+1 are g_a(0) and g_a(1/2).
        std::complex<double> s_half = detail::base_point_sum(map, w, n, 0.5);
        s.refinement_error = std::ldexp(std::abs(s0 - s_half), -n);
    }
    if (xi < 0.0) s.value = std::conj(s.value);
    return s;
}

FitMode parse_fit_mode(const std::string& s) {
    if (s == "envelope") return FitMode::envelope;
    if (s == "all-points" || s == "all_points") return FitMode::all_points;
    throw DomainError("fit mode must be 'envelope' or 'all-points'");
}

DecayFit decay_fit(const PerturbedMap& map, const std::vector<double>& xi_grid, FitMode mode) {
    if (xi_grid.size() < 12) throw InsufficientRangeError("decay_fit: need at least 12 frequencies");
    for (std::size_t i = 0; i < xi_grid.size(); ++i) {
        if (!(xi_grid[i] > 0.0)) throw DomainError("decay_fit: frequencies must be positive");
        if (i > 0 && !(xi_grid[i] > xi_grid[i - 1])) throw DomainError("decay_fit: frequencies must be increasing");
    }
    if (xi_grid.back() < 999.999 * xi_grid.front())
        throw InsufficientRangeError("decay_fit: grid must span at least 3 decades");

    DecayFit fit;
    fit.mode = mode;
    fit.xi_min = xi_grid.front();
    fit.xi_max = xi_grid.back();
    fit.n_samples = xi_grid.size();
    std::vector<double> mod;
    for (double xi : xi_grid) {
        SpectrumSample s = mu_hat(map, xi, 0, true);
        if (s.refinement_error > 0.1 * std::abs(s.value))
            throw ResolutionError("decay_fit: discretization error exceeds 10% of |mu_hat| at xi = " + std::to_string(xi));
        mod.push_back(std::abs(s.value));
        fit.samples.push_back(s);
    }
    if (mode == FitMode::envelope) mod = running_sup_from_right(std::move(mod));
    LineFit lf = fit_power_law(xi_grid, mod);
    fit.rho = -lf.slope;
    fit.C = std::exp(lf.intercept);
    fit.r_squared = lf.r_squared;
    return fit;
}

namespace detail {

const GaussRule& gauss10() {
    static const GaussRule rule = [] {
        GaussRule r;
        constexpr int m = 10;
        for (int i = 0; i < m; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= m; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            r.node[i] = x;
            r.weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        return r;
    }();
    return rule;
}

std::complex<double> gauss_panel(const std::function<double(double)>& phase, double xi, double a, double b) {
    const GaussRule& g = gauss10();
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    std::complex<double> s{};
    for (int i = 0; i < 10; ++i) s += g.weight[i] * std::polar(1.0, xi * phase(c + h * g.node[i]));
    return h * s;
}

std::complex<double> adaptive_panel(const std::function<double(double)>& phase, double xi, double a, double b,
                                    std::complex<double> whole, int level) {
    const double m = 0.5 * (a + b);
    std::complex<double> left = gauss_panel(phase, xi, a, m), right = gauss_panel(phase, xi, m, b);
    std::complex<double> both = left + right;
    if (level >= 30 || std::abs(both - whole) <= 1e-14 * (b - a) + 1e-16) return both;
    return adaptive_panel(phase, xi, a, m, left, level + 1) + adaptive_panel(phase, xi, m, b, right, level + 1);
}

} // namespace detail

double vdc_baseline(const std::function<double(double)>& phase, int k, double xi) {
    if (k < 2) throw DomainError("vdc_baseline: derivative order k must be >= 2");
    if (!std::isfinite(xi)) throw DomainError("vdc_baseline: frequency must be finite");
    if (std::abs(xi) > 1e8) throw BudgetError("vdc_baseline: |xi| above 1e8 exceeds the quadrature budget");
    if (xi == 0.0) return 1.0;
    const auto panels = static_cast<std::size_t>(std::max(16.0, std::ceil(10.0 * std::abs(xi) / (2.0 * M_PI))));
    const double h = 1.0 / static_cast<double>(panels);
    std::vector<std::complex<double>> part(panels);
    parallel_for(panels, [&](std::size_t p) {
        const double a = p * h, b = (p + 1 == panels) ? 1.0 : (p + 1) * h;
        part[p] = detail::adaptive_panel(phase, xi, a, b, detail::gauss_panel(phase, xi, a, b), 0);
    });
    std::complex<double> total = tree_combine(std::move(part), std::complex<double>{},
                                              [](const std::complex<double>& x, const std::complex<double>& y) { return x + y; });
    return std::abs(total);
}

} // namespace fdlab
