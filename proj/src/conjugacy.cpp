#include "fdlab/conjugacy.hpp"

namespace fdlab {

Word binary_digits(double x, int n) {
    if (n < 1 || n > 52) throw DomainError("binary_digits: depth must lie in [1, 52]");
    double r = reduce_unit(x);
    auto k = static_cast<std::uint64_t>(std::floor(std::ldexp(r, n)));
    return Word(k, n);
}

ItineraryResult psi_inv(const PerturbedMap& map, double y, int n) {
    if (n < 1) throw DomainError("psi_inv: depth must be >= 1");
    if (n > kMaxItineraryDepth) throw BudgetError("psi_inv: depth above 40 exceeds the double-precision budget of forward iteration");
    if (!(y >= 0.0 && y <= 1.0)) throw DomainError("psi_inv: argument must lie in [0, 1]");
    ItineraryResult res;
    if (y == 1.0) {
        res.value = 1.0;
        return res;
    }
    const double lipschitz = map.map_prime(0.5);
    constexpr double step_roundoff = 4.0 * 0x1.0p-53;
    std::uint64_t k = 0;
    double w = y, err = 0.0;
    for (int j = 0; j < n; ++j) {
        const double gap = std::min({std::abs(w - 0.5), w, 1.0 - w});
        if (err > 0.0 && gap <= err) res.precision_loss = true;
        k = (k << 1) | (w >= 0.5 ? 1u : 0u);
        if (j + 1 < n) {
            w = map.map(w);
            err = err * lipschitz + step_roundoff;
        }
    }
    res.value = std::ldexp(static_cast<double>(k), -n);
    res.forward_error = err;
    return res;
}

HolderFit holder_mass_fit(const ConjugacyEvaluator& ev, const std::vector<double>& xs,
                          const std::vector<double>& rs) {
    if (xs.empty()) throw DomainError("holder_mass_fit: empty x grid");
    const double r_floor = std::ldexp(256.0, -ev.depth());
    std::vector<double> usable;
    for (double r : rs) {
        if (!(r > 0.0 && r < 0.5)) throw DomainError("holder_mass_fit: radii must lie in (0, 1/2)");
        if (r >= r_floor) usable.push_back(r);
    }
    if (usable.size() < 6) throw InsufficientRangeError("holder_mass_fit: fewer than 6 radii are resolved at this depth");
    std::vector<double> sup(usable.size(), 0.0);
    parallel_for(usable.size(), [&](std::size_t i) {
        double m = 0.0;
        for (double x : xs) m = std::max(m, ev.measure_interval(x, usable[i]).mass);
        sup[i] = m;
    });
    LineFit f = fit_power_law(usable, sup);
    HolderFit h;
    h.delta_mu_est = f.slope;
    h.C_est = std::exp(f.intercept);
    h.r_squared = f.r_squared;
    h.r = std::move(usable);
    h.sup_mass = std::move(sup);
    return h;
}

} // namespace fdlab
