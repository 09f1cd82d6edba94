// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ptest/core_types.hpp"
#include "ptest/harness.hpp"

namespace ptest {

enum ExitCode : int {
    kExitOk = 0,
    kExitInputError = 1,
    kExitAbstained = 2,
    kExitCertificationFailed = 3,
};

/// What to run. Paths are resolved before use; see README for the schema.
struct RunManifest {
    std::string spec;    // CalibrationSpec JSON file, or "default"
    std::string source;  // source descriptor JSON, bundle directory, or "simulator"
    std::vector<std::string> methods;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    std::vector<double> alpha_grid;  // sweeps the first controlled objective
    std::string out;
    std::size_t search_budget = 200;
};

/// The default bi-objective calibration spec: accuracy_reduction <= 0.1, cost free.
CalibrationSpec default_spec();

/// The default synthetic source: K = W = 12, kappa = 0.3, 2000 examples, benchmark grid.
SimulatorSource default_simulator_source();

CalibrationSpec load_spec(const std::string& spec);
Source load_source(const std::string& source);

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ptest
