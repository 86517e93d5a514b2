#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fdlab/dynamics.hpp"
#include "fdlab/parallel.hpp"

namespace fdlab {

inline constexpr int kMaxItineraryDepth = 40;

struct ItineraryResult {
    double value = 0.0;
    // Some orbit point fell within the accumulated round-off of a partition
    // point, so the recorded digit there could go either way. The value is
    // still within about 2^-n of the truth because the inverse conjugacy is
    // continuous across partition points.
    bool precision_loss = false;
    // Bound on |computed - exact| for the last forward iterate.
    double forward_error = 0.0;
};

struct MeasureQuery {
    double x = 0.0;
    double r = 0.0;
    double mass = 0.0;
    bool precision_loss = false;
};

// First n binary digits of x in [0, 1) as a word.
Word binary_digits(double x, int n);

// Conjugacy from the doubling map to the perturbed map, evaluated through the
// doubling itinerary of x and the matching perturbed branch.
inline double psi(const PerturbedMap& map, double x, int n) {
    return map.branch(binary_digits(x, n), 0.0);
}

// Inverse conjugacy: read the itinerary of y under the perturbed map against
// the partition [0, 1/2), [1/2, 1) and return it as a binary fraction.
ItineraryResult psi_inv(const PerturbedMap& map, double y, int n);

class ConjugacyEvaluator {
public:
    ConjugacyEvaluator(const PerturbedMap& map, int depth) : map_(map), depth_(depth) {
        if (depth < 1 || depth > 52) throw DomainError("conjugacy depth must lie in [1, 52]");
    }

    const PerturbedMap& map() const { return map_; }
    int depth() const { return depth_; }

    // Largest cylinder diameter at this depth is at most 2^-n e^{2 delta n}.
    double error_bound() const { return std::ldexp(std::exp(2.0 * map_.delta() * depth_), -depth_); }

    double psi(double x) const { return fdlab::psi(map_, x, depth_); }
    ItineraryResult psi_inv(double y) const { return fdlab::psi_inv(map_, y, depth_); }

    // mu([x - r, x + r]) on the circle, mu being the push-forward of Lebesgue
    // measure under psi.
    MeasureQuery measure_interval(double x, double r) const {
        if (!(r > 0.0 && r < 0.5)) throw DomainError("measure_interval: radius must satisfy 0 < r < 1/2");
        MeasureQuery q;
        q.x = reduce_unit(x);
        q.r = r;
        const double lo = q.x - r, hi = q.x + r;
        auto cdf = [&](double t) {
            ItineraryResult it = psi_inv(t);
            q.precision_loss = q.precision_loss || it.precision_loss;
            return it.value;
        };
        if (lo < 0.0)
            q.mass = cdf(hi) + (1.0 - cdf(lo + 1.0));
        else if (hi > 1.0)
            q.mass = cdf(hi - 1.0) + (1.0 - cdf(lo));
        else
            q.mass = cdf(hi) - cdf(lo);
        q.mass = std::clamp(q.mass, 0.0, 1.0);
        return q;
    }

private:
    PerturbedMap map_;
    int depth_;
};

struct HolderFit {
    double C_est = 0.0;
    double delta_mu_est = 0.0;
    double r_squared = 0.0;
    std::vector<double> r;
    std::vector<double> sup_mass;
};

// Log-log regression of sup_x mu([x - r, x + r]) against r. Radii whose ball
// is not resolved by the itinerary depth (r < 256 * 2^-depth) are dropped.
HolderFit holder_mass_fit(const ConjugacyEvaluator& ev, const std::vector<double>& xs,
                          const std::vector<double>& rs);

} // namespace fdlab
