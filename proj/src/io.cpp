#include "fdlab/io.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fdlab::io {

namespace {

void write_line(std::ostringstream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
}

} // namespace

void write_atomic(const std::filesystem::path& target, const std::string& content) {
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    std::filesystem::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename onto " + target.string() + ": " + ec.message());
    }
}

std::string format_number(double v) {
    if (!std::isfinite(v)) throw std::runtime_error("refusing to write a non-finite number");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string Csv::str(const json& provenance) const {
    std::ostringstream os;
    os << "# " << provenance.dump() << '\n';
    write_line(os, header_);
    for (const auto& row : rows_) {
        std::vector<std::string> cells;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (const double* d = std::get_if<double>(&row[i])) {
                if (!std::isfinite(*d)) throw std::runtime_error("non-finite value in column " + header_[i]);
                cells.push_back(format_number(*d));
            } else if (const long long* n = std::get_if<long long>(&row[i])) {
                cells.push_back(std::to_string(*n));
            } else {
                cells.push_back(std::get<std::string>(row[i]));
            }
        }
        write_line(os, cells);
    }
    return os.str();
}

void check_finite(const json& j, const std::string& where) {
    if (j.is_number_float() && !std::isfinite(j.get<double>())) throw std::runtime_error("non-finite value at " + where);
    if (j.is_object())
        for (auto it = j.begin(); it != j.end(); ++it) check_finite(it.value(), where + "/" + it.key());
    if (j.is_array())
        for (std::size_t i = 0; i < j.size(); ++i) check_finite(j[i], where + "/" + std::to_string(i));
}

std::string json_text(const json& j) {
    check_finite(j);
    return j.dump(2) + "\n";
}

json provenance(const json& config) {
    return json{{"tool", kToolName}, {"version", kVersion}, {"config", config}};
}

json to_json(const CensusReport& r) {
    json j{{"kind", r.kind},
           {"sigma", r.sigma},
           {"counts", r.counts},
           {"fractions", r.fractions},
           {"gamma_hat", r.gamma_hat},
           {"population", r.population},
           {"mode", r.mode()}};
    if (r.seed) j["seed"] = *r.seed;
    if (r.monte_carlo) j["samples"] = r.samples;
    json stats = json::object();
    for (const auto& [k, v] : r.stats) stats[k] = v;
    j["stats"] = stats;
    return j;
}

Csv to_csv(const CensusReport& r) {
    Csv c({"sigma", "count", "fraction"});
    for (std::size_t i = 0; i < r.sigma.size(); ++i)
        c.add_row({r.sigma[i], static_cast<long long>(r.counts[i]), r.fractions[i]});
    return c;
}

json to_json(const DecayFit& f) {
    return json{{"rho", f.rho},
                {"C", f.C},
                {"xi_min", f.xi_min},
                {"xi_max", f.xi_max},
                {"mode", to_string(f.mode)},
                {"n_samples", f.n_samples},
                {"r_squared", f.r_squared}};
}

Csv spectrum_csv(const std::vector<SpectrumSample>& samples) {
    Csv c({"xi", "re", "im", "abs", "error_bound", "depth"});
    for (const auto& s : samples)
        c.add_row({s.xi, s.value.real(), s.value.imag(), std::abs(s.value), s.error_bound, static_cast<long long>(s.depth)});
    return c;
}

Csv scan_csv(const DecayScan& scan) {
    Csv c({"eta", "modulus", "method", "hypothesis_ok"});
    for (const auto& p : scan.points)
        c.add_row({p.eta, p.modulus, to_string(p.method), static_cast<long long>(p.hypothesis_ok)});
    return c;
}

json to_json(const DecayScan& scan) {
    json pts = json::array();
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
        const auto& p = scan.points[i];
        pts.push_back({{"eta", p.eta},
                       {"modulus", p.modulus},
                       {"envelope", scan.envelope[i]},
                       {"method", to_string(p.method)},
                       {"hypothesis_ok", p.hypothesis_ok},
                       {"in_window", p.in_window}});
    }
    return json{{"points", pts}, {"epsilon1_hat", scan.epsilon1_hat}, {"block_regular", scan.block_regular}};
}

json to_json(const HolderFit& h) {
    return json{{"C_est", h.C_est}, {"delta_mu_est", h.delta_mu_est}, {"r_squared", h.r_squared}, {"r", h.r}, {"sup_mass", h.sup_mass}};
}

} // namespace fdlab::io
