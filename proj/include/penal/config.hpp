#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "penal/suites.hpp"

namespace penal {

// One run: [run] suite/seed/workers/out/timing, [grid] dt, [params] suite.key = value,
// and any number of [family.NAME] blocks.
struct ExperimentConfig {
    std::string suite;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::string out = "reports";
    bool timing = false;
    double dt = 0x1.0p-10;
    std::map<std::string, double> params;
    std::vector<NamedFamily> families;
};

// Throws ConfigError with the file line on syntax errors and with the condition name
// when a family block fails validation.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

SuiteOptions suite_options(const ExperimentConfig& cfg);

std::string csv_header();
// %.17g for reals so a rerun with the same seed gives identical bytes.
std::string csv_row(const ResultRow& row);

// One CSV per experiment under out/<suite>/<experiment>.csv, in row order. Returns the paths.
std::vector<std::filesystem::path> write_reports(const std::vector<ResultRow>& rows, const std::filesystem::path& out,
                                                 const std::string& suite);

}  // namespace penal
