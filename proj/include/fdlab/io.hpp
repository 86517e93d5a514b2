#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "fdlab/census.hpp"
#include "fdlab/conjugacy.hpp"
#include "fdlab/error.hpp"
#include "fdlab/fourier.hpp"
#include "fdlab/sumproduct.hpp"

namespace fdlab::io {

inline constexpr const char* kToolName = "fdlab";
inline constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

// Write to a sibling temporary file, then rename over the target.
void write_atomic(const std::filesystem::path& target, const std::string& content);

std::string format_number(double v);

using Cell = std::variant<double, long long, std::string>;

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<Cell> row) {
        if (row.size() != header_.size()) throw std::logic_error("csv row width does not match header");
        rows_.push_back(std::move(row));
    }

    std::size_t rows() const { return rows_.size(); }

    // Leading comment line carries the provenance as one-line JSON.
    std::string str(const json& provenance) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

// Rejects NaN and infinities anywhere in a JSON document.
void check_finite(const json& j, const std::string& where = "");

std::string json_text(const json& j);

json provenance(const json& config);

json to_json(const CensusReport& r);

Csv to_csv(const CensusReport& r);

json to_json(const DecayFit& f);

Csv spectrum_csv(const std::vector<SpectrumSample>& samples);

Csv scan_csv(const DecayScan& scan);

json to_json(const DecayScan& scan);

json to_json(const HolderFit& h);

} // namespace fdlab::io
