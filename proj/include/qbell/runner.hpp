#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace qbell {

inline constexpr const char* kVersion = "0.1.0";

// Everything that determines a report. `threads` only changes scheduling and
// is left out of the echo so reports do not depend on it.
struct ExperimentConfig {
    std::string command;      // learn, hidden-group, size-test, doped-test, stab-test, tolerant, oracle, fig, selftest
    std::string sub;          // oracle: pdist|bdist|char; fig: range
    std::string backend = "povm";
    std::string source;       // stabiliser, haar, doped, magic, size-fixture, near, far, file
    std::string state_path;
    std::string group_path;
    std::string out;
    int d = 2;
    int n = 1;
    std::uint64_t seed = 1;
    int trials = 1;
    double eps = 0.1;
    double eps1 = 0.0;
    double eps2 = 0.5;
    double delta = 0.1;
    int r = 3;
    int t = 0;
    int doping = -1;          // -1: largest t below n / 2
    std::string mode = "shared";
    int k = 4;
    int grid = 100;
    bool transcript = false;
    bool qubit_template = false;
    bool allow_out_of_range = false;
    bool large_table = false;
    bool separate_columns = false;
    int threads = 0;

    nlohmann::json echo() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

std::string sha256_hex(const std::string& data);

// Runs the experiment and returns the report. Throws qbell::Error.
nlohmann::json run_experiment(const ExperimentConfig& cfg);

// Report text exactly as written to disk.
std::string report_text(const nlohmann::json& report);

// Quick internal consistency checks; each entry is {name, pass, detail}.
nlohmann::json run_selftest();

}  // namespace qbell
