#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "fdlab/error.hpp"

namespace fdlab {

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t count = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DomainError("fit_line: size mismatch");
    if (x.size() < 2) throw InsufficientRangeError("fit_line: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) throw InsufficientRangeError("fit_line: abscissae are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    f.count = x.size();
    return f;
}

// Least squares of ln y against ln x.
inline LineFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    lx.reserve(x.size());
    ly.reserve(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw DomainError("fit_power_law: values must be positive");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return fit_line(lx, ly);
}

// out[i] = max(v[i], v[i+1], ...)
inline std::vector<double> running_sup_from_right(std::vector<double> v) {
    for (std::size_t i = v.size(); i-- > 1;) v[i - 1] = std::max(v[i - 1], v[i]);
    return v;
}

inline std::vector<double> log_spaced(double lo, double hi, std::size_t points) {
    if (!(lo > 0) || !(hi > lo) || points < 2) throw DomainError("log_spaced: need 0 < lo < hi and >= 2 points");
    std::vector<double> out(points);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < points; ++i)
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

// Linear-interpolation quantile (type 7).
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw DomainError("quantile of empty sample");
    std::sort(v.begin(), v.end());
    double pos = q * static_cast<double>(v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double t = pos - static_cast<double>(lo);
    return v[lo] + t * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

struct Proportion {
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// Wilson score interval at 95%.
inline Proportion wilson_interval(std::uint64_t successes, std::uint64_t trials) {
    if (trials == 0) throw DomainError("proportion with zero trials");
    constexpr double z = 1.959963984540054;
    Proportion p;
    p.successes = successes;
    p.trials = trials;
    const double n = static_cast<double>(trials);
    const double ph = static_cast<double>(successes) / n;
    p.estimate = ph;
    p.std_error = std::sqrt(ph * (1 - ph) / n);
    const double denom = 1 + z * z / n;
    const double centre = (ph + z * z / (2 * n)) / denom;
    const double half = z * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / denom;
    p.ci_low = std::max(0.0, centre - half);
    p.ci_high = std::min(1.0, centre + half);
    return p;
}

} // namespace fdlab
