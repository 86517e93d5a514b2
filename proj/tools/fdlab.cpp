#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fdlab/brownian.hpp"
#include "fdlab/census.hpp"
#include "fdlab/conjugacy.hpp"
#include "fdlab/fourier.hpp"
#include "fdlab/io.hpp"
#include "fdlab/rng.hpp"
#include "fdlab/sumproduct.hpp"

namespace fs = std::filesystem;
using fdlab::io::json;

namespace {

struct Common {
    double delta = 0.01;
    std::string composition = "warp-then-double";
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string output;
    std::string format = "csv";
    bool record_time = false;
};

struct Run {
    CLI::App* app = nullptr;
    Common common;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    fdlab::PerturbedMap map() const {
        if (common.composition == "warp-then-double") return fdlab::PerturbedMap(common.delta);
        if (common.composition == "double-then-warp")
            return fdlab::PerturbedMap(common.delta, fdlab::Composition::double_then_warp);
        throw fdlab::DomainError("composition must be 'warp-then-double' or 'double-then-warp'");
    }

    // Every option of the subcommand with its effective value.
    json config() const {
        json c = json::object();
        c["subcommand"] = app->get_name();
        for (const CLI::Option* opt : app->get_options()) {
            std::string name = opt->get_single_name();
            if (name == "help" || name == "config" || name.empty()) continue;
            if (opt->get_expected_min() == 0) {
                c[name] = opt->count() > 0;
            } else if (opt->count() > 0) {
                auto res = opt->reduced_results();
                c[name] = res.size() == 1 ? json(res.front()) : json(res);
            } else {
                c[name] = opt->get_default_str();
            }
        }
        return c;
    }

    json provenance() const {
        json p = fdlab::io::provenance(config());
        if (common.record_time)
            p["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return p;
    }

    fs::path output(const std::string& fallback) const {
        fs::path out = common.output.empty() ? fs::path(fallback) : fs::path(common.output);
        if (out.is_relative())
            if (const char* dir = std::getenv("FDLAB_OUTPUT_DIR"); dir && *dir) out = fs::path(dir) / out;
        return out;
    }

    bool json_format() const {
        if (common.format == "json") return true;
        if (common.format == "csv") return false;
        throw fdlab::DomainError("format must be 'csv' or 'json'");
    }

    void emit(const fs::path& path, const fdlab::io::Csv& csv) const {
        fdlab::io::write_atomic(path, csv.str(provenance()));
        std::cout << path.string() << "\n";
    }

    void emit(const fs::path& path, json body) const {
        body["provenance"] = provenance();
        fdlab::io::write_atomic(path, fdlab::io::json_text(body));
        std::cout << path.string() << "\n";
    }

    void emit_report(const fs::path& path, const fdlab::CensusReport& r) const {
        if (json_format())
            emit(path, fdlab::io::to_json(r));
        else
            emit(path, fdlab::io::to_csv(r));
    }
};

fs::path sibling(const fs::path& p, const std::string& suffix) {
    fs::path s = p;
    s.replace_extension();
    s += suffix;
    return s;
}

std::string extension(const Run& run) { return run.json_format() ? ".json" : ".csv"; }

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--delta", c.delta, "perturbation size, 0 <= delta < 1/20");
    sub->add_option("--composition", c.composition, "warp-then-double | double-then-warp");
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--threads", c.threads, "worker threads (0 = hardware)");
    sub->add_option("-o,--output", c.output, "output file");
    sub->add_option("--format", c.format, "csv | json");
    sub->add_flag("--record-time", c.record_time, "embed wall time (artifacts then differ between runs)");
    sub->add_option("--config", "key=value file; later flags override it");
}

fdlab::Word random_word(const fdlab::CounterRng& rng, std::uint64_t index, int n) {
    return fdlab::Word(rng.word_bits(index, n), n);
}

fdlab::Word word_or_random(const std::string& text, const fdlab::CounterRng& rng, std::uint64_t index, int n) {
    if (text.empty()) return random_word(rng, index, n);
    fdlab::Word w = fdlab::Word::from_string(text);
    if (w.size() != n) throw fdlab::DomainError("word '" + text + "' does not have length n = " + std::to_string(n));
    return w;
}

std::vector<double> full_dyadic(int n) {
    std::vector<double> s;
    for (int j = 2 * n; j >= 1; --j) s.push_back(std::ldexp(1.0, -j));
    return s;
}

// Turns "--config FILE" into "--key=value" tokens placed right after the
// subcommand name, so explicit flags that follow take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string file;
        std::size_t consumed = 0;
        if (args[i] == "--config" && i + 1 < args.size()) {
            file = args[i + 1];
            consumed = 2;
        } else if (args[i].rfind("--config=", 0) == 0) {
            file = args[i].substr(9);
            consumed = 1;
        } else {
            continue;
        }
        std::ifstream in(file);
        if (!in) throw fdlab::DomainError("cannot read config file " + file);
        std::vector<std::string> tokens;
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto eq = line.find('=');
            auto trim = [](std::string s) {
                s.erase(0, s.find_first_not_of(" \t\r"));
                s.erase(s.find_last_not_of(" \t\r") + 1);
                return s;
            };
            if (eq == std::string::npos) {
                if (!trim(line).empty()) throw fdlab::DomainError("config line without '=': " + line);
                continue;
            }
            tokens.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
        }
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + consumed));
        args.insert(args.begin() + 1, tokens.begin(), tokens.end());
        return args;
    }
    return args;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fourier decay laboratory for a perturbed doubling map"};
    app.set_version_flag("--version", std::string(fdlab::io::kToolName) + " " + fdlab::io::kVersion);
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Run run;
    Common& c = run.common;

    // decay
    double xi_min = 1e2, xi_max = 1e6;
    int points = 40;
    std::string mode = "envelope";
    auto* decay = app.add_subcommand("decay", "spectrum of the invariant measure and power-law decay fit");
    add_common(decay, c);
    decay->add_option("--xi-min", xi_min);
    decay->add_option("--xi-max", xi_max);
    decay->add_option("--points", points);
    decay->add_option("--mode", mode, "envelope | all-points");

    // census
    std::string kind = "pairs", word_a, word_d;
    int n = 8, k = 2;
    std::vector<double> sigma;
    std::uint64_t samples = 0;
    double eps0 = 1.0 / 20.0, eps1 = 0.1;
    auto* census = app.add_subcommand("census", "pair, derivative, Birkhoff or sign-sum concentration census");
    add_common(census, c);
    census->add_option("--kind", kind, "pairs | derivative | birkhoff | rademacher");
    census->add_option("--n", n);
    census->add_option("--a", word_a, "first word (random when empty)");
    census->add_option("--d", word_d, "second word for pair censuses (random when empty)");
    census->add_option("--sigma", sigma, "scales (default depends on kind)");
    census->add_option("--samples", samples, "Monte Carlo samples for the Birkhoff census (0 = exhaustive)");
    census->add_option("--epsilon0", eps0);
    census->add_option("--epsilon1", eps1);

    // couples
    auto* couples = app.add_subcommand("couples", "regularity and concentration exponent of random couples");
    add_common(couples, c);
    couples->add_option("--n", n);
    couples->add_option("--samples", samples);
    couples->add_option("--epsilon0", eps0);
    couples->add_option("--epsilon1", eps1);

    // blocks
    bool exhaustive = false;
    auto* blocks = app.add_subcommand("blocks", "regular block census");
    add_common(blocks, c);
    blocks->add_option("--n", n);
    blocks->add_option("--k", k);
    blocks->add_option("--samples", samples);
    blocks->add_flag("--exhaustive", exhaustive);
    blocks->add_option("--epsilon0", eps0);
    blocks->add_option("--epsilon1", eps1);

    // sumproduct
    std::string block_text, method = "direct";
    double eta_min = 0, eta_max = 0;
    std::size_t bins = std::size_t{1} << 20;
    auto* sumproduct = app.add_subcommand("sumproduct", "exponential sums of a block's zeta tables across eta");
    add_common(sumproduct, c);
    sumproduct->add_option("--n", n);
    sumproduct->add_option("--k", k);
    sumproduct->add_option("--block", block_text, "comma-separated words a_0,...,a_k (random when empty)");
    sumproduct->add_option("--eta-min", eta_min, "0 = lower end of the eta window");
    sumproduct->add_option("--eta-max", eta_max, "0 = upper end of the eta window");
    sumproduct->add_option("--points", points);
    sumproduct->add_option("--method", method, "direct | binned");
    sumproduct->add_option("--bins", bins);
    sumproduct->add_option("--epsilon0", eps0);
    sumproduct->add_option("--epsilon1", eps1);

    // linearize
    double alpha = -1;
    auto* linearize = app.add_subcommand("linearize", "linearization residuals of interleaved branches");
    add_common(linearize, c);
    linearize->add_option("--n", n);
    linearize->add_option("--k", k);
    linearize->add_option("--samples", samples);
    linearize->add_option("--alpha", alpha, "distortion constant (negative = measure it)");
    linearize->add_option("--epsilon0", eps0);

    // brownian
    int modes = 10000, seeds = 200;
    std::size_t grid = std::size_t{1} << 17;
    std::vector<double> xis{1e2, 1e3, 1e4};
    auto* brownian = app.add_subcommand("brownian", "oscillatory integrals along truncated Wiener paths");
    add_common(brownian, c);
    brownian->add_option("--modes", modes);
    brownian->add_option("--grid", grid);
    brownian->add_option("--seeds", seeds);
    brownian->add_option("--xi", xis);

    // conjugacy
    int depth = 30;
    auto* conjugacy = app.add_subcommand("conjugacy", "conjugacy to the doubling map on a uniform grid");
    add_common(conjugacy, c);
    conjugacy->add_option("--depth", depth);
    conjugacy->add_option("--points", points);

    // measure
    int x_points = 512, r_points = 16;
    double r_min = 1e-6, r_max = 0.1;
    auto* measure = app.add_subcommand("measure", "local mass exponent of the invariant measure");
    add_common(measure, c);
    measure->add_option("--depth", depth);
    measure->add_option("--x-points", x_points);
    measure->add_option("--r-min", r_min);
    measure->add_option("--r-max", r_max);
    measure->add_option("--r-points", r_points);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config(args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        std::cerr << sub->help();
        return 2;
    } catch (const fdlab::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        run.app = app.get_subcommands().front();
        fdlab::set_max_threads(c.threads);
        const fdlab::PerturbedMap map = run.map();
        const fdlab::CounterRng rng(c.seed);
        fdlab::ReductionParams params;
        params.n = n;
        params.k = k;
        params.epsilon0 = eps0;
        params.epsilon1 = eps1;
        params.delta = c.delta;
        const std::string name = run.app->get_name();

        if (name == "decay") {
            if (points < 2) throw fdlab::DomainError("--points must be >= 2");
            auto fit = fdlab::decay_fit(map, fdlab::log_spaced(xi_min, xi_max, static_cast<std::size_t>(points)),
                                        fdlab::parse_fit_mode(mode));
            fs::path out = run.output("spectrum" + extension(run));
            if (run.json_format()) {
                json rows = json::array();
                for (const auto& s : fit.samples)
                    rows.push_back({{"xi", s.xi}, {"re", s.value.real()}, {"im", s.value.imag()}, {"abs", std::abs(s.value)},
                                    {"error_bound", s.error_bound}, {"depth", s.depth}});
                run.emit(out, json{{"samples", rows}});
            } else {
                run.emit(out, fdlab::io::spectrum_csv(fit.samples));
            }
            run.emit(sibling(out, ".fit.json"), fdlab::io::to_json(fit));
        } else if (name == "census") {
            params.validate();
            fdlab::CensusReport r;
            if (kind == "pairs") {
                fdlab::Word a = word_or_random(word_a, rng, 0, n), d = word_or_random(word_d, rng, 1, n);
                r = fdlab::pair_census(map, a, d, sigma.empty() ? full_dyadic(n) : sigma);
                r.stats.emplace_back("a", static_cast<double>(a.bits()));
                r.stats.emplace_back("d", static_cast<double>(d.bits()));
            } else if (kind == "derivative" || kind == "birkhoff") {
                fdlab::Word a = word_or_random(word_a, rng, 0, n);
                if (sigma.empty()) {
                    auto [lo, hi] = params.census_sigma_range();
                    sigma = fdlab::dyadic_grid(lo, std::min(hi, 1.0));
                }
                if (kind == "derivative")
                    r = fdlab::derivative_census(map, a, sigma, params);
                else
                    r = fdlab::birkhoff_proximity_census(map, a, sigma, params,
                                                         samples ? fdlab::Sampler::random(samples, c.seed)
                                                                 : fdlab::Sampler::exhaustive());
            } else if (kind == "rademacher") {
                if (sigma.empty())
                    for (int j = 10; j >= 0; --j) sigma.push_back(std::ldexp(1.0, -j));
                std::vector<double> pts{0.0};
                auto res = fdlab::rademacher_anticoncentration(n, fdlab::branch_rho(map, pts), {0.0}, sigma);
                r.kind = "rademacher";
                r.sigma = res.sigma;
                r.counts = res.counts;
                r.fractions = res.fractions;
                r.population = std::uint64_t{1} << n;
                r.gamma_hat = fdlab::fit_concentration_exponent(r.sigma, r.fractions);
                for (std::size_t i = 0; i < sigma.size(); ++i)
                    r.stats.emplace_back("bound_" + std::to_string(i), fdlab::anticoncentration_bound(n, sigma[i], c.delta));
            } else {
                throw fdlab::DomainError("--kind must be pairs, derivative, birkhoff or rademacher");
            }
            run.emit_report(run.output("census" + extension(run)), r);
        } else if (name == "couples") {
            params.validate();
            if (samples == 0) samples = 100;
            const auto grid_sigma = params.couple_sigma_grid();
            const auto fit_grid = full_dyadic(n);
            std::vector<json> rows(samples);
            std::vector<int> regular(samples);
            std::vector<double> gammas(samples);
            for (std::uint64_t i = 0; i < samples; ++i) {
                fdlab::Word a = random_word(rng, 2 * i, n), d = random_word(rng, 2 * i + 1, n);
                auto z = fdlab::zeta_table(map, a, d);
                std::sort(z.begin(), z.end());
                regular[i] = fdlab::couple_is_regular(z, grid_sigma, params.gamma);
                std::vector<double> frac;
                for (double s : fit_grid)
                    frac.push_back(static_cast<double>(fdlab::pair_count_sorted(z, s)) / std::ldexp(1.0, 2 * n));
                gammas[i] = fdlab::fit_concentration_exponent(fit_grid, frac);
                rows[i] = {{"a", a.to_string()}, {"d", d.to_string()}, {"regular", regular[i] != 0}, {"gamma_hat", gammas[i]}};
            }
            std::uint64_t reg = 0;
            for (int v : regular) reg += v;
            fdlab::Proportion p = fdlab::wilson_interval(reg, samples);
            fs::path out = run.output("couples" + extension(run));
            if (run.json_format()) {
                run.emit(out, json{{"regular_fraction", p.estimate},
                                   {"ci_low", p.ci_low},
                                   {"ci_high", p.ci_high},
                                   {"gamma_hat_median", fdlab::median(gammas)},
                                   {"sigma_grid", grid_sigma},
                                   {"couples", rows}});
            } else {
                fdlab::io::Csv csv({"a", "d", "regular", "gamma_hat"});
                for (std::uint64_t i = 0; i < samples; ++i)
                    csv.add_row({rows[i]["a"].get<std::string>(), rows[i]["d"].get<std::string>(),
                                 static_cast<long long>(regular[i]), gammas[i]});
                run.emit(out, csv);
            }
        } else if (name == "blocks") {
            auto sampler = exhaustive ? fdlab::Sampler::exhaustive()
                                      : fdlab::Sampler::random(samples ? samples : 10000, c.seed);
            auto r = fdlab::regular_block_census(map, params, sampler);
            run.emit_report(run.output("blocks" + extension(run)), r);
        } else if (name == "sumproduct") {
            params.validate();
            std::vector<fdlab::Word> block;
            if (block_text.empty()) {
                for (int j = 0; j <= k; ++j) block.push_back(random_word(rng, static_cast<std::uint64_t>(j), n));
            } else {
                std::stringstream ss(block_text);
                std::string w;
                while (std::getline(ss, w, ',')) block.push_back(word_or_random(w, rng, 0, n));
                if (static_cast<int>(block.size()) != k + 1)
                    throw fdlab::DomainError("--block must list k + 1 words");
            }
            auto [wlo, whi] = fdlab::eta_window(params);
            auto grid_eta = fdlab::log_spaced(eta_min > 0 ? eta_min : wlo, eta_max > 0 ? eta_max : whi,
                                              static_cast<std::size_t>(std::max(points, 2)));
            auto scan = fdlab::decay_scan(map, block, params, grid_eta, fdlab::parse_sum_method(method), bins);
            fs::path out = run.output("sumproduct" + extension(run));
            if (run.json_format())
                run.emit(out, fdlab::io::to_json(scan));
            else
                run.emit(out, fdlab::io::scan_csv(scan));
        } else if (name == "linearize") {
            params.validate();
            if (samples == 0) samples = 1000;
            params.alpha = alpha >= 0 ? alpha : fdlab::measured_alpha(map);
            const double cut = std::exp(-(params.epsilon0 / 2.0 - params.alpha * params.delta) * n);
            const double scale = fdlab::linearization_scale(n, k, c.delta, params.alpha);
            fdlab::io::Csv csv({"index", "x", "y", "residual", "scale"});
            double worst = 0.0;
            for (std::uint64_t i = 0; i < samples; ++i) {
                std::uint64_t base = i * static_cast<std::uint64_t>(2 * k + 4);
                std::vector<fdlab::Word> A, B;
                for (int j = 0; j <= k; ++j) A.push_back(random_word(rng, base + j, n));
                for (int j = 0; j < k; ++j) B.push_back(random_word(rng, base + k + 1 + j, n));
                const double x = rng.uniform(base + 2 * k + 1) * (1.0 - cut);
                const double y = x + cut + rng.uniform(base + 2 * k + 2) * (1.0 - cut - x);
                const double res = fdlab::linearization_check(map, A, B, x, std::min(y, 1.0), params);
                worst = std::max(worst, res);
                csv.add_row({static_cast<long long>(i), x, std::min(y, 1.0), res, scale});
            }
            fs::path out = run.output("linearize" + extension(run));
            if (run.json_format())
                run.emit(out, json{{"max_residual", worst}, {"scale", scale}, {"max_ratio", worst / scale},
                                   {"alpha", params.alpha}, {"samples", samples}});
            else
                run.emit(out, csv);
        } else if (name == "brownian") {
            if (seeds < 1) throw fdlab::DomainError("--seeds must be >= 1");
            std::vector<std::vector<double>> mods(static_cast<std::size_t>(seeds));
            fdlab::parallel_for(mods.size(), [&](std::size_t s) {
                auto path = fdlab::sample_path(modes, c.seed + s);
                mods[s] = fdlab::oscillatory_integrals(path, xis, grid);
            });
            fdlab::io::Csv csv({"xi", "seed", "modulus"});
            json summary = json::array();
            std::vector<double> medians;
            for (std::size_t x = 0; x < xis.size(); ++x) {
                std::vector<double> col;
                for (std::size_t s = 0; s < mods.size(); ++s) {
                    csv.add_row({xis[x], static_cast<long long>(c.seed + s), mods[s][x]});
                    col.push_back(mods[s][x]);
                }
                medians.push_back(fdlab::median(col));
                summary.push_back({{"xi", xis[x]},
                                   {"q10", fdlab::quantile(col, 0.1)},
                                   {"q25", fdlab::quantile(col, 0.25)},
                                   {"median", medians.back()},
                                   {"q75", fdlab::quantile(col, 0.75)},
                                   {"q90", fdlab::quantile(col, 0.9)}});
            }
            fs::path out = run.output("brownian.csv");
            run.emit(out, csv);
            json body{{"quantiles", summary}};
            if (xis.size() >= 2) body["median_slope"] = fdlab::fit_power_law(xis, medians).slope;
            run.emit(sibling(out, ".summary.json"), body);
        } else if (name == "conjugacy") {
            fdlab::ConjugacyEvaluator ev(map, depth);
            fdlab::io::Csv csv({"x", "psi", "error_bound"});
            if (points < 1) throw fdlab::DomainError("--points must be >= 1");
            for (int i = 0; i < points; ++i) {
                double x = static_cast<double>(i) / points;
                csv.add_row({x, ev.psi(x), ev.error_bound()});
            }
            run.emit(run.output("conjugacy.csv"), csv);
        } else if (name == "measure") {
            fdlab::ConjugacyEvaluator ev(map, depth);
            std::vector<double> xs;
            for (int i = 0; i < x_points; ++i) xs.push_back((i + 0.5) / x_points);
            auto fit = fdlab::holder_mass_fit(ev, xs, fdlab::log_spaced(r_min, r_max, static_cast<std::size_t>(r_points)));
            fs::path out = run.output("measure" + extension(run));
            if (run.json_format()) {
                run.emit(out, fdlab::io::to_json(fit));
            } else {
                fdlab::io::Csv csv({"r", "sup_mass"});
                for (std::size_t i = 0; i < fit.r.size(); ++i) csv.add_row({fit.r[i], fit.sup_mass[i]});
                run.emit(out, csv);
            }
        }
    } catch (const fdlab::BudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 3;
    } catch (const fdlab::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
