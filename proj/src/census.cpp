#include "fdlab/census.hpp"

namespace fdlab {

std::vector<double> dyadic_grid(double lo, double hi) {
    if (!(lo > 0) || !(hi >= lo)) throw DomainError("dyadic_grid: need 0 < lo <= hi");
    std::vector<double> g;
    for (int j = static_cast<int>(std::floor(std::log2(hi))) + 1; j >= -1100; --j) {
        double s = std::ldexp(1.0, j);
        if (s < lo) break;
        if (s <= hi) g.push_back(s);
    }
    if (g.empty()) return lo == hi ? std::vector<double>{lo} : std::vector<double>{lo, hi};
    std::reverse(g.begin(), g.end());
    return g;
}

std::vector<double> ReductionParams::couple_sigma_grid() const {
    if (!sigma_grid.empty()) return sigma_grid;
    auto [lo, hi] = couple_sigma_range();
    return dyadic_grid(lo, hi);
}

double fit_concentration_exponent(const std::vector<double>& sigma, const std::vector<double>& fractions) {
    std::vector<double> s, f;
    for (std::size_t i = 0; i < sigma.size(); ++i)
        if (fractions[i] > 0) {
            s.push_back(sigma[i]);
            f.push_back(fractions[i]);
        }
    if (s.size() < 2 || s.front() == s.back()) return 0.0;
    return fit_power_law(s, f).slope;
}

void finish_report(CensusReport& r, double denominator) {
    r.fractions.resize(r.counts.size());
    for (std::size_t i = 0; i < r.counts.size(); ++i)
        r.fractions[i] = static_cast<double>(r.counts[i]) / denominator;
    r.gamma_hat = fit_concentration_exponent(r.sigma, r.fractions);
}

double zeta(const PerturbedMap& map, const Word& a_prev, const Word& a_next, const Word& b) {
    check_same_length(a_prev, a_next, "zeta");
    check_same_length(a_prev, b, "zeta");
    const int n = b.size();
    const double x = map.branch(a_next, 0.0);
    return std::ldexp(map.branch_derivative(a_prev.concat(b), x), 2 * n);
}

std::vector<double> zeta_table(const PerturbedMap& map, const Word& a_prev, const Word& a_next) {
    check_same_length(a_prev, a_next, "zeta_table");
    const int n = a_prev.size();
    if (n > 24) throw BudgetError("zeta_table: n above 24");
    BranchTable t = branch_table(map, n, map.branch(a_next, 0.0));
    std::vector<double> z(t.value.size());
    const std::size_t chunk = 1024;
    parallel_for((z.size() + chunk - 1) / chunk, [&](std::size_t c) {
        const std::size_t end = std::min(z.size(), (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i)
            z[i] = std::ldexp(t.derivative[i] * map.branch_derivative(a_prev, t.value[i]), 2 * n);
    });
    return z;
}

std::uint64_t pair_count_sorted(const std::vector<double>& sorted, double sigma) {
    if (!(sigma >= 0)) throw DomainError("pair count: sigma must be >= 0");
    const std::size_t n = sorted.size();
    std::uint64_t above_diagonal = 0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (j < i + 1) j = i + 1;
        while (j < n && sorted[j] - sorted[i] <= sigma) ++j;
        above_diagonal += static_cast<std::uint64_t>(j - i - 1);
    }
    return 2 * above_diagonal + static_cast<std::uint64_t>(n);
}

std::vector<std::uint64_t> pair_counts(std::vector<double> values, const std::vector<double>& sigmas) {
    std::sort(values.begin(), values.end());
    std::vector<std::uint64_t> out;
    out.reserve(sigmas.size());
    for (double s : sigmas) out.push_back(pair_count_sorted(values, s));
    return out;
}

CensusReport pair_census(const PerturbedMap& map, const Word& a_prev, const Word& a_next,
                         const std::vector<double>& sigmas) {
    CensusReport r;
    r.kind = "pair";
    r.sigma = sigmas;
    r.counts = pair_counts(zeta_table(map, a_prev, a_next), sigmas);
    const int n = a_prev.size();
    r.population = std::uint64_t{1} << (2 * n);
    finish_report(r, std::ldexp(1.0, 2 * n));
    return r;
}

bool couple_is_regular(const std::vector<double>& sorted_zeta, const std::vector<double>& grid, double gamma) {
    const double norm = static_cast<double>(sorted_zeta.size()) * static_cast<double>(sorted_zeta.size());
    for (double s : grid)
        if (static_cast<double>(pair_count_sorted(sorted_zeta, s)) / norm > std::pow(s, gamma)) return false;
    return true;
}

bool regular_couple_test(const PerturbedMap& map, const Word& a, const Word& d, const ReductionParams& params) {
    std::vector<double> z = zeta_table(map, a, d);
    std::sort(z.begin(), z.end());
    return couple_is_regular(z, params.couple_sigma_grid(), params.gamma);
}

namespace detail {

CoupleSummary summarize_couple(const PerturbedMap& map, int n, std::uint64_t a, std::uint64_t d,
                               const std::vector<double>& grid, double gamma) {
    std::vector<double> z = zeta_table(map, Word(a, n), Word(d, n));
    std::sort(z.begin(), z.end());
    CoupleSummary s;
    s.regular = true;
    const double norm = std::ldexp(1.0, 2 * n);
    for (double sig : grid) {
        std::uint64_t c = pair_count_sorted(z, sig);
        s.counts.push_back(c);
        if (static_cast<double>(c) / norm > std::pow(sig, gamma)) s.regular = false;
    }
    return s;
}

} // namespace detail

CensusReport regular_block_census(const PerturbedMap& map, const ReductionParams& params, const Sampler& sampler) {
    params.validate();
    const int n = params.n, k = params.k;
    const std::vector<double> grid = params.couple_sigma_grid();
    CensusReport r;
    r.kind = "regular-block";
    r.sigma = grid;
    r.counts.assign(grid.size(), 0);
    const std::uint64_t words = std::uint64_t{1} << n;

    if (!sampler.monte_carlo) {
        if ((k + 1) * n > 24) throw BudgetError("regular_block_census: exhaustive mode requires (k+1) n <= 24");
        const std::uint64_t couples = words * words;
        std::vector<detail::CoupleSummary> summary(couples);
        parallel_for(couples, [&](std::size_t i) {
            summary[i] = detail::summarize_couple(map, n, i / words, i % words, grid, params.gamma);
        });
        // Regular chains a_0 ... a_j ending at each word.
        std::vector<std::uint64_t> chains(words, 1);
        for (int j = 1; j <= k; ++j) {
            std::vector<std::uint64_t> next(words, 0);
            for (std::uint64_t a = 0; a < words; ++a)
                for (std::uint64_t d = 0; d < words; ++d)
                    if (summary[a * words + d].regular) next[d] += chains[a];
            chains.swap(next);
        }
        std::uint64_t regular = 0;
        for (auto c : chains) regular += c;
        const std::uint64_t population = std::uint64_t{1} << ((k + 1) * n);
        // Each couple sits at k positions, each completed by 2^{(k-1) n} blocks.
        const std::uint64_t multiplicity = static_cast<std::uint64_t>(k) << ((k - 1) * n);
        for (const auto& s : summary)
            for (std::size_t g = 0; g < grid.size(); ++g) r.counts[g] += s.counts[g] * multiplicity;
        r.population = population;
        finish_report(r, static_cast<double>(population) * k * std::ldexp(1.0, 2 * n));
        Proportion p = wilson_interval(population - regular, population);
        r.stats = {{"irregular_blocks", static_cast<double>(population - regular)},
                   {"irregular_fraction", p.estimate},
                   {"ci_low", p.estimate},
                   {"ci_high", p.estimate},
                   {"regular_couple_fraction", [&] {
                        std::uint64_t c = 0;
                        for (const auto& s : summary) c += s.regular;
                        return static_cast<double>(c) / static_cast<double>(couples);
                    }()}};
        return r;
    }

    if (!sampler.seed) throw DomainError("regular_block_census: monte-carlo mode requires a seed");
    if (sampler.samples == 0) throw DomainError("regular_block_census: monte-carlo mode requires samples > 0");
    CounterRng rng(*sampler.seed);
    std::vector<std::uint64_t> blocks(sampler.samples * static_cast<std::uint64_t>(k + 1));
    for (std::uint64_t i = 0; i < blocks.size(); ++i) blocks[i] = rng.word_bits(i, n);
    std::vector<std::uint64_t> keys;
    for (std::uint64_t s = 0; s < sampler.samples; ++s)
        for (int j = 1; j <= k; ++j) {
            const std::uint64_t* A = &blocks[s * (k + 1)];
            keys.push_back(A[j - 1] * words + A[j]);
        }
    std::vector<std::uint64_t> distinct = keys;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<detail::CoupleSummary> summary(distinct.size());
    parallel_for(distinct.size(), [&](std::size_t i) {
        summary[i] = detail::summarize_couple(map, n, distinct[i] / words, distinct[i] % words, grid, params.gamma);
    });
    std::unordered_map<std::uint64_t, std::size_t> where;
    for (std::size_t i = 0; i < distinct.size(); ++i) where.emplace(distinct[i], i);
    std::uint64_t irregular = 0, regular_couples = 0;
    for (std::uint64_t s = 0; s < sampler.samples; ++s) {
        bool ok = true;
        for (int j = 1; j <= k; ++j) {
            const auto& cs = summary[where.at(keys[s * k + (j - 1)])];
            ok = ok && cs.regular;
            regular_couples += cs.regular;
            for (std::size_t g = 0; g < grid.size(); ++g) r.counts[g] += cs.counts[g];
        }
        irregular += !ok;
    }
    r.monte_carlo = true;
    r.seed = sampler.seed;
    r.samples = sampler.samples;
    r.population = sampler.samples;
    finish_report(r, static_cast<double>(sampler.samples) * k * std::ldexp(1.0, 2 * n));
    Proportion p = wilson_interval(irregular, sampler.samples);
    r.stats = {{"irregular_blocks", static_cast<double>(irregular)},
               {"irregular_fraction", p.estimate},
               {"ci_low", p.ci_low},
               {"ci_high", p.ci_high},
               {"regular_couple_fraction", static_cast<double>(regular_couples) / static_cast<double>(keys.size())}};
    return r;
}

double derivative_expansion_lipschitz(const PerturbedMap& map) {
    if (map.delta() == 0.0) return 0.0;
    const double lam = map.max_letter_derivative();
    const double log_lip = map.delta() / (map.phi_prime(0.0) * (1.0 - lam));
    return 2.0 * log_lip * lam / (1.0 - lam);
}

namespace detail {

void check_census_scale(const ReductionParams& p, double sigma) {
    auto [lo, hi] = p.census_sigma_range();
    if (!(sigma >= lo * (1 - 1e-12) && sigma <= hi * (1 + 1e-12)))
        throw DomainError("sigma = " + std::to_string(sigma) + " lies outside the census window [" + std::to_string(lo) +
                          ", " + std::to_string(hi) + "]");
}

std::vector<double> word_functional(const PerturbedMap& map, const Word& a, int n, double x, Track track) {
    std::vector<double> val{x}, der{1.0}, acc{0.0};
    auto prepend = [&](int b, double& v, double& d, double& s) {
        LetterStep st = map.letter_step(b, v);
        v = st.value;
        d *= st.derivative;
        s += track == Track::birkhoff ? tent_phi(v) : letter_slope(b) * d;
    };
    for (int m = 1; m <= n; ++m) {
        const std::size_t half = val.size();
        std::vector<double> v2(2 * half), d2(2 * half), s2(2 * half);
        for (int b = 0; b < 2; ++b)
            for (std::size_t i = 0; i < half; ++i) {
                double v = val[i], d = der[i], s = acc[i];
                prepend(b, v, d, s);
                v2[b * half + i] = v;
                d2[b * half + i] = d;
                s2[b * half + i] = s;
            }
        val.swap(v2);
        der.swap(d2);
        acc.swap(s2);
    }
    for (std::size_t i = 0; i < val.size(); ++i)
        for (int j = a.size() - 1; j >= 0; --j) prepend(a[j], val[i], der[i], acc[i]);
    return acc;
}

} // namespace detail

CensusReport derivative_census(const PerturbedMap& map, const Word& a, const std::vector<double>& sigmas,
                               const ReductionParams& params) {
    const int n = a.size();
    if (n < 1 || n > 12) throw BudgetError("derivative_census: n must lie in [1, 12]");
    ReductionParams p = params;
    p.n = n;
    for (double s : sigmas) detail::check_census_scale(p, s);
    const double lip = derivative_expansion_lipschitz(map);
    CensusReport r;
    r.kind = "derivative";
    r.sigma = sigmas;
    r.population = std::uint64_t{1} << (2 * n);
    std::vector<double> splits;
    for (double sigma : sigmas) {
        const int m = derivative_split(sigma, n);
        const double theta = std::pow(sigma, 0.1);
        std::vector<std::uint64_t> per_d(std::size_t{1} << m);
        parallel_for(per_d.size(), [&](std::size_t d) {
            Word dw(d, m);
            const double x = map.branch(dw, 0.0);
            const double diam = m == 0 ? 1.0 : map.branch_difference(dw, 1.0, 0.0);
            std::vector<double> D = detail::word_functional(map, a, n, x, detail::Track::derivative_expansion);
            std::sort(D.begin(), D.end());
            per_d[d] = pair_count_sorted(D, theta + lip * diam);
        });
        std::uint64_t total = 0;
        for (auto c : per_d) total += c;
        r.counts.push_back(total);
        r.fractions.push_back(static_cast<double>(total) / std::ldexp(1.0, 2 * n + m));
        splits.push_back(m);
    }
    r.gamma_hat = fit_concentration_exponent(r.sigma, r.fractions);
    r.stats.emplace_back("lipschitz", lip);
    for (std::size_t i = 0; i < splits.size(); ++i) r.stats.emplace_back("split_" + std::to_string(i), splits[i]);
    return r;
}

double base_point_spacing(const PerturbedMap& map, int n) {
    BranchTable t = branch_table(map, n, 0.0);
    double gap = 1.0 - t.value.back();
    for (std::size_t i = 1; i < t.value.size(); ++i) gap = std::min(gap, t.value[i] - t.value[i - 1]);
    return gap;
}

CensusReport birkhoff_proximity_census(const PerturbedMap& map, const Word& a, const std::vector<double>& sigmas,
                                       const ReductionParams& params, const Sampler& sampler) {
    const int n = a.size();
    if (n < 1 || n > 12) throw BudgetError("birkhoff_proximity_census: n must lie in [1, 12]");
    ReductionParams p = params;
    p.n = n;
    for (double s : sigmas) detail::check_census_scale(p, s);
    CensusReport r;
    r.kind = "birkhoff";
    r.sigma = sigmas;
    r.counts.assign(sigmas.size(), 0);
    const std::uint64_t words = std::uint64_t{1} << n;
    const BranchTable base = branch_table(map, n, 0.0);

    if (!sampler.monte_carlo) {
        std::vector<std::vector<std::uint64_t>> per_d(words);
        parallel_for(words, [&](std::size_t d) {
            per_d[d] = pair_counts(detail::word_functional(map, a, n, base.value[d], detail::Track::birkhoff), sigmas);
        });
        for (const auto& c : per_d)
            for (std::size_t i = 0; i < sigmas.size(); ++i) r.counts[i] += c[i];
        r.population = words * words * words;
        finish_report(r, std::ldexp(1.0, 3 * n));
    } else {
        if (!sampler.seed) throw DomainError("birkhoff_proximity_census: monte-carlo mode requires a seed");
        if (sampler.samples == 0) throw DomainError("birkhoff_proximity_census: monte-carlo mode requires samples > 0");
        CounterRng rng(*sampler.seed);
        std::vector<double> gap(sampler.samples);
        parallel_for(sampler.samples, [&](std::size_t s) {
            const Word b(rng.word_bits(3 * s, n), n), c(rng.word_bits(3 * s + 1, n), n);
            const double x = base.value[rng.word_bits(3 * s + 2, n)];
            gap[s] = std::abs(map.birkhoff_sum(a.concat(b), x) - map.birkhoff_sum(a.concat(c), x));
        });
        for (double g : gap)
            for (std::size_t i = 0; i < sigmas.size(); ++i) r.counts[i] += g <= sigmas[i];
        r.monte_carlo = true;
        r.seed = sampler.seed;
        r.samples = sampler.samples;
        r.population = sampler.samples;
        finish_report(r, static_cast<double>(sampler.samples));
        for (std::size_t i = 0; i < sigmas.size(); ++i) {
            Proportion pr = wilson_interval(r.counts[i], sampler.samples);
            r.stats.emplace_back("std_error_" + std::to_string(i), pr.std_error);
        }
    }
    const double spacing = base_point_spacing(map, n);
    const double spacing_bound = std::ldexp(std::exp(-4.0 * map.delta() * n), -n);
    r.stats.emplace_back("min_spacing", spacing);
    r.stats.emplace_back("spacing_bound", spacing_bound);
    r.stats.emplace_back("spacing_ok", spacing >= spacing_bound ? 1.0 : 0.0);
    for (std::size_t i = 0; i < sigmas.size(); ++i)
        r.stats.emplace_back("split_" + std::to_string(i), derivative_split(sigmas[i], n));
    return r;
}

AnticoncentrationResult rademacher_anticoncentration(int n, const RhoFn& rho, const std::vector<double>& target,
                                                     const std::vector<double>& sigmas) {
    if (n < 1 || n > 20) throw BudgetError("rademacher_anticoncentration: n must lie in [1, 20]");
    if (target.empty()) throw DomainError("rademacher_anticoncentration: empty sample E");
    const std::size_t E = target.size();
    const int split = std::min(n, 8);
    const std::size_t total = std::size_t{1} << n;
    std::vector<double> closest(total);

    parallel_for(std::size_t{1} << split, [&](std::size_t head) {
        std::vector<double> kappa((n + 1) * E), sum((n + 1) * E);
        for (std::size_t e = 0; e < E; ++e) {
            kappa[e] = 1.0;
            sum[e] = 0.0;
        }
        auto extend = [&](int level, std::uint64_t prefix) {
            const int sign_bit = static_cast<int>(prefix & 1u);
            const double sign = sign_bit ? -1.0 : 1.0;
            for (std::size_t e = 0; e < E; ++e) {
                const double kap = kappa[(level - 1) * E + e] * rho(level, prefix, e);
                kappa[level * E + e] = kap;
                sum[level * E + e] = sum[(level - 1) * E + e] + sign * kap;
            }
        };
        for (int l = 1; l <= split; ++l) extend(l, head >> (split - l));
        const int rest = n - split;
        const std::size_t tail_count = std::size_t{1} << rest;
        for (std::size_t tail = 0; tail < tail_count; ++tail) {
            // Recompute only the levels below the deepest changed bit.
            int from = split + 1;
            if (tail != 0) from = split + rest - static_cast<int>(std::countr_zero(tail));
            for (int l = from; l <= n; ++l) extend(l, (head << (l - split)) | (tail >> (n - l)));
            double best = HUGE_VAL;
            for (std::size_t e = 0; e < E; ++e) best = std::min(best, std::abs(sum[n * E + e] - target[e]));
            closest[(head << rest) | tail] = best;
        }
    });

    std::sort(closest.begin(), closest.end());
    AnticoncentrationResult res;
    res.sigma = sigmas;
    for (double s : sigmas) {
        auto c = static_cast<std::uint64_t>(std::upper_bound(closest.begin(), closest.end(), s) - closest.begin());
        res.counts.push_back(c);
        res.fractions.push_back(static_cast<double>(c) / static_cast<double>(total));
    }
    return res;
}

RhoFn branch_rho(const PerturbedMap& map, const std::vector<double>& points) {
    return [map, points](int level, std::uint64_t prefix, std::size_t e) {
        double y = points[e];
        for (int l = 1; l < level; ++l) y = map.letter(static_cast<int>((prefix >> (level - l)) & 1u), y);
        return map.letter_prime(static_cast<int>(prefix & 1u), y);
    };
}

} // namespace fdlab
