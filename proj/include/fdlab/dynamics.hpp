#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fdlab/error.hpp"
#include "fdlab/numeric.hpp"
#include "fdlab/word.hpp"

namespace fdlab {

// Hard domain of the family. The sign-sum anticoncentration estimates are
// only claimed below kSmallDelta; larger delta is allowed for experiments.
inline constexpr double kMaxDelta = 1.0 / 20.0;
inline constexpr double kSmallDelta = 1.0 / 200.0;

// Reduce to [0, 1).
inline double reduce_unit(double x) {
    double r = x - std::floor(x);
    return r >= 1.0 ? 0.0 : r;
}

// Tent potential: x - 1/4 on [0, 1/2), 3/4 - x on [1/2, 1), extended 1-periodically.
inline double tent_phi(double x) {
    double r = reduce_unit(x);
    return r < 0.5 ? r - 0.25 : 0.75 - r;
}

// Right-limit slope of tent_phi: +1 on [0, 1/2), -1 on [1/2, 1).
inline double tent_phi_slope(double x) { return reduce_unit(x) < 0.5 ? 1.0 : -1.0; }

// Slope of tent_phi on the depth-1 cylinder of letter b.
inline double letter_slope(int b) { return b == 0 ? 1.0 : -1.0; }

inline void check_delta(double delta) {
    if (!(delta >= 0.0 && delta < kMaxDelta))
        throw DomainError("delta = " + std::to_string(delta) +
                          " is outside the admissible range [0, 1/20); the anticoncentration estimates further require delta < 1/200");
}

// z = 1 / integral_0^1 exp(delta * tent_phi) = (delta/4) / sinh(delta/4).
inline double normalizer(double delta) {
    check_delta(delta);
    if (delta == 0.0) return 1.0;
    const double q = delta / 4.0;
    return q / std::sinh(q);
}

// Which way the warp phi and the doubling are composed.
//   warp_then_double:  f(x) = 2 phi(x) mod 1, branches g_b(y) = phi^{-1}((y + b) / 2)
//   double_then_warp:  f(x) = phi(2x mod 1),  branches g_b(y) = (phi^{-1}(y) + b) / 2
// Only the first satisfies ln f' = ln 2 + ln z + delta * tent_phi, which is what
// the cohomology identity and the derivative expansions below rely on. The two
// are smoothly conjugate through phi.
enum class Composition { warp_then_double, double_then_warp };

struct LetterStep {
    double value;
    double derivative;
};

struct Cylinder {
    Word word;
    double left = 0.0;
    double right = 1.0;
    double base_point = 0.0;
    double diameter = 1.0;
    int depth = 0;

    double mass() const { return std::ldexp(1.0, -depth); }
};

class PerturbedMap {
public:
    explicit PerturbedMap(double delta, Composition composition = Composition::warp_then_double)
        : delta_(delta), z_(normalizer(delta)), composition_(composition) {
        c_ = delta_ == 0.0 ? 0.0 : 2.0 * std::expm1(delta_ / 2.0);
    }

    double delta() const { return delta_; }
    bool in_small_delta_regime() const { return delta_ < kSmallDelta; }
    double z() const { return z_; }
    Composition composition() const { return composition_; }

    // phi(x) = z * integral_0^x exp(delta * tent_phi(t)) dt
    double phi(double x) const {
        check_unit(x, "phi");
        if (delta_ == 0.0) return x;
        if (x <= 0.5) return std::expm1(delta_ * x) / c_;
        return 1.0 - std::expm1(delta_ * (1.0 - x)) / c_;
    }

    double phi_inv(double y) const {
        check_unit(y, "phi_inv");
        if (delta_ == 0.0 || y == 0.5) return y;
        if (y < 0.5) return std::log1p(c_ * y) / delta_;
        return 1.0 - std::log1p(c_ * (1.0 - y)) / delta_;
    }

    double phi_prime(double x) const {
        if (delta_ == 0.0) return 1.0;
        double r = reduce_unit(x);
        return delta_ * std::exp(delta_ * std::min(r, 1.0 - r)) / c_;
    }

    // phi_inv(q + h) - phi_inv(q) without cancellation.
    double phi_inv_increment(double q, double h) const {
        if (delta_ == 0.0) return h;
        if (h < 0.0) return -phi_inv_increment(q + h, -h);
        if (h == 0.0) return 0.0;
        const double r = q + h;
        if (r <= 0.5) return std::log1p(c_ * h / (1.0 + c_ * q)) / delta_;
        if (q >= 0.5) return std::log1p(c_ * h / (1.0 + c_ * (1.0 - r))) / delta_;
        return phi_inv_increment(q, 0.5 - q) + phi_inv_increment(0.5, r - 0.5);
    }

    // Smallest and largest possible single-letter branch derivatives.
    double min_letter_derivative() const { return 0.5 / phi_prime(0.5); }
    double max_letter_derivative() const { return 0.5 / phi_prime(0.0); }

    double map(double x) const {
        double r = reduce_unit(x);
        if (composition_ == Composition::double_then_warp) return phi(reduce_unit(2.0 * r));
        if (r < 0.5) return reduce_unit(2.0 * phi(r));
        if (delta_ == 0.0) return reduce_unit(2.0 * r - 1.0);
        return reduce_unit(1.0 - 2.0 * std::expm1(delta_ * (1.0 - r)) / c_);
    }

    double map_prime(double x) const {
        double r = reduce_unit(x);
        if (composition_ == Composition::double_then_warp) return 2.0 * phi_prime(reduce_unit(2.0 * r));
        return 2.0 * phi_prime(r);
    }

    // Inverse branch g_b and its derivative at y in [0, 1].
    LetterStep letter_step(int b, double y) const {
        if (composition_ == Composition::warp_then_double) {
            double v = phi_inv((y + b) * 0.5);
            return {v, 0.5 / phi_prime(v)};
        }
        double w = phi_inv(y);
        return {(w + b) * 0.5, 0.5 / phi_prime(w)};
    }

    double letter(int b, double y) const {
        if (composition_ == Composition::warp_then_double) return phi_inv((y + b) * 0.5);
        return (phi_inv(y) + b) * 0.5;
    }
    double letter_prime(int b, double y) const { return letter_step(b, y).derivative; }

    // g_a(x) = g_{a_1} o ... o g_{a_n}(x)
    double branch(const Word& a, double x) const {
        check_unit(x, "branch");
        if (delta_ == 0.0) {
            double y = x;
            for (int j = a.size() - 1; j >= 0; --j) y = letter(a[j], y);
            return y;
        }
        // extended precision, one rounding at the end
        const long double d = delta_;
        const long double c = 2.0L * std::expm1(d / 2.0L);
        auto inv = [&](long double q) {
            if (q == 0.5L) return q;
            if (q < 0.5L) return std::log1p(c * q) / d;
            return 1.0L - std::log1p(c * (1.0L - q)) / d;
        };
        const bool warp_first = composition_ == Composition::warp_then_double;
        long double y = x;
        for (int j = a.size() - 1; j >= 0; --j)
            y = warp_first ? inv((y + a[j]) * 0.5L) : (inv(y) + a[j]) * 0.5L;
        return static_cast<double>(y);
    }

    double branch_derivative(const Word& a, double x) const {
        check_unit(x, "branch_derivative");
        double y = x, d = 1.0;
        for (int j = a.size() - 1; j >= 0; --j) {
            LetterStep s = letter_step(a[j], y);
            y = s.value;
            d *= s.derivative;
        }
        return d;
    }

    // g_a(x) - g_a(y), propagated as an increment so that nearby points keep
    // full relative precision.
    double branch_difference(const Word& a, double x, double y) const {
        check_unit(x, "branch_difference");
        check_unit(y, "branch_difference");
        double u = y, d = x - y;
        for (int j = a.size() - 1; j >= 0; --j) {
            const int b = a[j];
            if (composition_ == Composition::warp_then_double) {
                const double q = (u + b) * 0.5;
                d = phi_inv_increment(q, d * 0.5);
                u = phi_inv(q);
            } else {
                d = 0.5 * phi_inv_increment(u, d);
                u = (phi_inv(u) + b) * 0.5;
            }
        }
        return d;
    }

    // S_n tent_phi (g_a(x)) = sum_{k<n} tent_phi(f^k(g_a(x))). The orbit point
    // f^k(g_a(x)) is the suffix branch g_{a_{k+1}...a_n}(x).
    double birkhoff_sum(const Word& a, double x) const {
        check_unit(x, "birkhoff_sum");
        CompensatedSum s;
        double y = x;
        for (int j = a.size() - 1; j >= 0; --j) {
            y = letter_step(a[j], y).value;
            s.add(tent_phi(y));
        }
        return s.value();
    }

    Cylinder cylinder(const Word& a) const {
        Cylinder c;
        c.word = a;
        c.depth = a.size();
        c.left = branch(a, 0.0);
        c.base_point = c.left;
        c.right = branch(a, 1.0);
        c.diameter = branch_difference(a, 1.0, 0.0);
        return c;
    }

private:
    static void check_unit(double x, const char* what) {
        if (!(x >= 0.0 && x <= 1.0))
            throw DomainError(std::string(what) + ": argument must lie in [0, 1]");
    }

    double delta_;
    double z_;
    double c_ = 0.0;  // 2 * expm1(delta / 2)
    Composition composition_;
};

// Values and derivatives of g_b(x) for every word b of length n, indexed by
// b.bits(). Built by prepending letters, O(n 2^n).
struct BranchTable {
    int depth = 0;
    std::vector<double> value;
    std::vector<double> derivative;
};

inline BranchTable branch_table(const PerturbedMap& map, int n, double x) {
    if (n < 0 || n > 26) throw BudgetError("branch_table: depth must lie in [0, 26]");
    BranchTable t;
    t.depth = n;
    t.value.assign(1, x);
    t.derivative.assign(1, 1.0);
    for (int m = 1; m <= n; ++m) {
        const std::size_t half = t.value.size();
        std::vector<double> v(2 * half), d(2 * half);
        for (int b = 0; b < 2; ++b) {
            for (std::size_t i = 0; i < half; ++i) {
                LetterStep s = map.letter_step(b, t.value[i]);
                v[b * half + i] = s.value;
                d[b * half + i] = s.derivative * t.derivative[i];
            }
        }
        t.value.swap(v);
        t.derivative.swap(d);
    }
    return t;
}

// Empirical distortion constant: max |ln(2^n g_a'(x))| / (delta n) over all
// words of length n_min..n_max at x in {0, 1/2, 1}. Zero when delta = 0.
inline double measured_alpha(const PerturbedMap& map, int n_min = 1, int n_max = 12) {
    if (map.delta() == 0.0) return 0.0;
    double alpha = 0.0;
    for (double x : {0.0, 0.5, 1.0}) {
        for (int n = n_min; n <= n_max; ++n) {
            BranchTable t = branch_table(map, n, x);
            for (double d : t.derivative) {
                double v = std::abs(std::log(std::ldexp(d, n))) / (map.delta() * n);
                alpha = std::max(alpha, v);
            }
        }
    }
    return alpha;
}

} // namespace fdlab
