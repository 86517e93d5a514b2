#include "fdlab/sumproduct.hpp"

namespace fdlab {

SumMethod parse_sum_method(const std::string& s) {
    if (s == "direct") return SumMethod::direct;
    if (s == "binned") return SumMethod::binned;
    throw DomainError("sum method must be 'direct' or 'binned'");
}

namespace detail {

std::complex<double> direct_phase_sum(const std::vector<std::vector<double>>& t, double w) {
    const std::size_t k = t.size();
    std::size_t outer = 1;
    for (std::size_t j = 0; j + 1 < k; ++j) outer *= t[j].size();
    const std::vector<double>& last = t.back();
    return parallel_reduce(outer, std::complex<double>{}, [&](std::size_t idx) {
        double p = w;
        for (std::size_t j = k - 1; j-- > 0;) {
            p *= t[j][idx % t[j].size()];
            idx /= t[j].size();
        }
        std::complex<double> s{};
        for (double z : last) s += std::polar(1.0, p * z);
        return s;
    }, cadd);
}

std::complex<double> binned_phase_sum(const std::vector<std::vector<double>>& t, double w, std::size_t bins) {
    std::vector<double> lo(t.size()), hi(t.size());
    double range = 0.0, top = 0.0, origin = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
        lo[j] = HUGE_VAL;
        hi[j] = -HUGE_VAL;
        for (double z : t[j]) {
            if (!(z > 0)) throw DomainError("exp_sum: binned method needs positive table values");
            lo[j] = std::min(lo[j], std::log(z));
            hi[j] = std::max(hi[j], std::log(z));
        }
        range += hi[j] - lo[j];
        top += hi[j];
        origin += lo[j];
    }
    double total = 1.0;
    for (const auto& tj : t) total *= static_cast<double>(tj.size());
    if (range == 0.0) return total * std::polar(1.0, w * std::exp(origin));
    const double h = range / static_cast<double>(bins - 1);
    if (w * h * std::exp(top) > 0.01)
        throw ResolutionError("exp_sum: bin width times |eta| exceeds 0.01; increase the bin count");

    std::vector<double> dense{1.0};
    for (std::size_t j = 0; j < t.size(); ++j) {
        const std::size_t span = static_cast<std::size_t>(std::ceil((hi[j] - lo[j]) / h)) + 2;
        std::vector<double> sparse(span, 0.0);
        for (double z : t[j]) {
            const double pos = (std::log(z) - lo[j]) / h;
            const auto i = static_cast<std::size_t>(std::floor(pos));
            const double frac = pos - static_cast<double>(i);
            sparse[i] += 1.0 - frac;
            sparse[i + 1] += frac;
        }
        std::vector<std::size_t> nz;
        for (std::size_t i = 0; i < span; ++i)
            if (sparse[i] != 0.0) nz.push_back(i);
        std::vector<double> next(dense.size() + span, 0.0);
        for (std::size_t p = 0; p < dense.size(); ++p) {
            if (dense[p] == 0.0) continue;
            for (std::size_t q : nz) next[p + q] += dense[p] * sparse[q];
        }
        dense.swap(next);
    }
    const std::size_t chunk = 4096;
    return parallel_reduce((dense.size() + chunk - 1) / chunk, std::complex<double>{}, [&](std::size_t c) {
        std::complex<double> s{};
        const std::size_t end = std::min(dense.size(), (c + 1) * chunk);
        for (std::size_t p = c * chunk; p < end; ++p)
            if (dense[p] != 0.0) s += dense[p] * std::polar(1.0, w * std::exp(origin + static_cast<double>(p) * h));
        return s;
    }, cadd);
}

} // namespace detail

double exp_sum(const ExpSumInput& in) {
    if (in.tables.empty()) throw DomainError("exp_sum: need at least one table");
    double log_size = 0.0, total = 1.0;
    for (const auto& t : in.tables) {
        if (t.empty()) throw DomainError("exp_sum: empty table");
        log_size += std::log2(static_cast<double>(t.size()));
        total *= static_cast<double>(t.size());
    }
    if (in.eta == 0.0) return 1.0;
    const double w = std::abs(in.eta);
    std::complex<double> s;
    if (in.method == SumMethod::direct) {
        if (log_size > 26.0 + 1e-9) throw BudgetError("exp_sum: direct method requires k n <= 26");
        s = detail::direct_phase_sum(in.tables, w);
    } else {
        if (in.bins < 2) throw DomainError("exp_sum: need at least two bins");
        s = detail::binned_phase_sum(in.tables, w, in.bins);
    }
    return std::min(1.0, std::abs(s) / total);
}

bool sum_product_hypothesis(const std::vector<std::vector<double>>& tables, double eta, double epsilon1, double gamma) {
    const double a = std::abs(eta);
    if (!(a > 1.0)) return false;
    const double bound = std::pow(a, epsilon1 / 2.0);
    const std::vector<double> grid = dyadic_grid(std::pow(a, -2.0), std::pow(a, -epsilon1));
    for (const auto& t : tables) {
        for (double z : t)
            if (z < 1.0 / bound || z > bound) return false;
        std::vector<double> sorted = t;
        std::sort(sorted.begin(), sorted.end());
        if (!couple_is_regular(sorted, grid, gamma)) return false;
    }
    return true;
}

std::vector<std::vector<double>> block_tables(const PerturbedMap& map, const std::vector<Word>& block) {
    if (block.size() < 2) throw DomainError("block needs at least two words");
    std::vector<std::vector<double>> t;
    for (std::size_t j = 1; j < block.size(); ++j) t.push_back(zeta_table(map, block[j - 1], block[j]));
    return t;
}

bool block_is_regular(const PerturbedMap& map, const std::vector<Word>& block, const ReductionParams& params) {
    for (std::size_t j = 1; j < block.size(); ++j)
        if (!regular_couple_test(map, block[j - 1], block[j], params)) return false;
    return true;
}

DecayScan decay_scan(const PerturbedMap& map, const std::vector<Word>& block, const ReductionParams& params,
                     std::vector<double> eta_grid, SumMethod method,
                     std::size_t bins) {
    auto [wlo, whi] = eta_window(params);
    if (eta_grid.empty()) eta_grid = log_spaced(wlo, whi, 12);
    const auto tables = block_tables(map, block);
    DecayScan scan;
    scan.block_regular = block_is_regular(map, block, params);
    std::vector<double> mods;
    for (double eta : eta_grid) {
        ScanPoint pt;
        pt.eta = eta;
        pt.method = method;
        pt.modulus = exp_sum({tables, eta, method, bins});
        pt.hypothesis_ok = sum_product_hypothesis(tables, eta, params.epsilon1, params.gamma);
        pt.in_window = std::abs(eta) >= wlo * (1 - 1e-12) && std::abs(eta) <= whi * (1 + 1e-12);
        scan.points.push_back(pt);
        mods.push_back(pt.modulus);
    }
    scan.envelope = running_sup_from_right(mods);
    if (eta_grid.size() >= 2 && std::all_of(scan.envelope.begin(), scan.envelope.end(), [](double v) { return v > 0; })) {
        std::vector<double> abs_eta;
        for (double e : eta_grid) abs_eta.push_back(std::abs(e));
        scan.epsilon1_hat = std::max(0.0, -fit_power_law(abs_eta, scan.envelope).slope);
    }
    return scan;
}

Word interleave(const std::vector<Word>& A, const std::vector<Word>& B) {
    if (A.size() != B.size() + 1 || B.empty()) throw DomainError("interleave: need k+1 words A and k words B");
    Word w = A[0];
    for (std::size_t j = 0; j < B.size(); ++j) w = w.concat(B[j]).concat(A[j + 1]);
    return w;
}

double linearization_check(const PerturbedMap& map, const std::vector<Word>& A, const std::vector<Word>& B,
                           double x, double y, const ReductionParams& params) {
    const Word ab = interleave(A, B);
    const int n = A[0].size();
    for (const auto& w : A) check_same_length(A[0], w, "linearization_check");
    for (const auto& w : B) check_same_length(A[0], w, "linearization_check");
    const int k = static_cast<int>(B.size());
    const double cut = std::exp(-(params.epsilon0 / 2.0 - params.alpha * params.delta) * n);
    if (!(std::abs(x - y) > cut))
        throw DomainError("linearization_check: |x - y| must exceed the diagonal cut " + std::to_string(cut));
    const double full = map.branch_difference(ab, x, y);
    const double inner = map.branch_difference(A.back(), x, y);
    double prod = 1.0;
    for (int j = 1; j <= k; ++j) prod *= zeta(map, A[j - 1], A[j], B[j - 1]);
    return std::abs(full - std::ldexp(prod, -2 * k * n) * inner);
}

} // namespace fdlab
