#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "penal/parallel.hpp"
#include "penal/weights.hpp"

namespace penal {

// One line of a report CSV.
struct ResultRow {
    std::string experiment;
    std::string name;
    double t = 0.0;
    double estimate = 0.0;
    double se = 0.0;
    double target = 0.0;
    // Allowed deviation minus the observed one, or p-value minus level; >= 0 passes.
    double margin = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    double wall_ms = 0.0;
    std::size_t invalid = 0;
    std::string reason;
    // Acceptance criterion the row belongs to, 0 for none.
    int criterion = 0;
    bool mandatory = true;
    // Estimate is a test statistic and target the level.
    bool test = false;
};

struct ParamDoc {
    std::string key;
    double value;
    std::string doc;
};

struct SuiteInfo {
    std::string name;
    std::string summary;
    std::vector<ParamDoc> params;
};

using NamedFamily = std::pair<std::string, WeightSpec>;

const std::vector<SuiteInfo>& suite_catalog();
std::vector<std::string> suite_names();
// Throws ConfigError naming the closest known suite.
const SuiteInfo& find_suite(const std::string& name);
std::string describe_suite(const std::string& name);

// Closest candidate by edit distance.
std::string nearest_name(const std::string& name, const std::vector<std::string>& candidates);
std::size_t edit_distance(const std::string& a, const std::string& b);

// phi = Exp(1); lambda = 1 with psi = 2; h+ = h- = e^{-l}; one atom (1, 1); G(n) = 2^{-n} on [0, 1].
std::vector<NamedFamily> default_families();

struct SuiteOptions {
    RunContext ctx;
    double dt = 0x1.0p-10;
    // Overrides of the documented parameters, keyed "suite.key".
    std::map<std::string, double> params;
    // Replaces the default families where a suite iterates over families.
    std::vector<NamedFamily> families;
    bool timing = false;
};

// Rejects unknown parameter keys with the nearest known key.
void validate_params(const std::map<std::string, double>& params);

std::vector<ResultRow> run_suite(const std::string& name, const SuiteOptions& opt);

}  // namespace penal
