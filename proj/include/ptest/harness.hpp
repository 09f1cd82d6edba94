// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ptest/core_types.hpp"
#include "ptest/moo.hpp"
#include "ptest/simulator.hpp"
#include "ptest/testing.hpp"

namespace ptest {

/// Fresh examples per trial; risks judged against the oracle.
struct SimulatorSource {
    SimModel model;
    ConfigGrid grid;
    std::vector<LossDefinition> losses;
    std::size_t examples = 2000;
    std::size_t n_oracle = 200000;
};

/// Each trial draws `calibration_size` rows; the remaining rows are the
/// held-out test portion used to judge risks.
struct TableSource {
    std::shared_ptr<const LossTable> table;
    std::size_t calibration_size = 0;
};

using Source = std::variant<SimulatorSource, TableSource>;

struct TrialReport {
    std::size_t trial_index = 0;
    std::uint64_t trial_seed = 0;
    std::uint64_t split_hash = 0;
    std::string method;
    std::size_t spec_index = 0;  // position in the spec list passed to run_trials
    std::vector<double> alphas;

    std::vector<std::size_t> selected;
    std::vector<ConfigPoint> selected_configs;
    std::vector<std::string> binding_objectives;
    std::string stopping_objective;
    std::size_t rejected_count = 0;

    std::vector<std::string> controlled_ids;
    std::vector<double> risks;      // per controlled objective, max over selected
    std::vector<bool> violations;   // risks[i] > alphas[i]
    bool violated = false;          // any of the above
    bool rejected_set_violated = false;
    bool rejected_set_checked = false;

    std::vector<std::string> free_ids;
    std::vector<double> free_values;  // per free objective, mean over selected
    bool abstained = true;
};

void to_json(json& j, const TrialReport& r);

struct HarnessOptions {
    std::size_t search_budget = 200;
    bool search_on_grid = false;
    std::size_t search_eval_examples = 20000;  // held-out sample for off-grid configurations
    bool keep_first_outcomes = true;
};

struct TrialRun {
    std::vector<TrialReport> reports;  // ordered by (trial, spec, method)
    std::vector<TestOutcome> first_outcomes;  // trial 0, ordered by (spec, method)
};

/// Seed of trial t: derive_seed(derive_seed(master, trial), t).
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial);

TrialRun run_trials(const Source& source, std::span<const std::string> methods,
                    std::span<const CalibrationSpec> specs, std::size_t n_trials, std::uint64_t master_seed,
                    const HarnessOptions& options = {});

struct ViolationSummary {
    std::size_t trials = 0;
    std::size_t abstained = 0;
    std::size_t violations = 0;
    double rate = 0.0;  // violations / trials, abstentions count as non-violations
    std::optional<double> rate_given_selection;
    double upper_95 = 0.0;  // one-sided Clopper-Pearson
    double lower_95 = 0.0;
    bool no_selections = false;
};

struct ClopperPearson {
    double lower = 0.0;
    double upper = 1.0;
};

/// One-sided 95% bounds for x successes in n trials.
ClopperPearson clopper_pearson(std::size_t x, std::size_t n, double confidence = 0.95);

/// Selected-set violations; with `rejected_set` the FWER event over the whole rejected set.
ViolationSummary violation_rate(std::span<const TrialReport> reports, bool rejected_set = false);

/// Violations of one controlled objective.
ViolationSummary violation_rate(std::span<const TrialReport> reports, const std::string& objective);

struct FreeObjectiveSummary {
    std::string id;
    std::optional<double> mean;  // over non-abstained trials
    std::optional<double> standard_error;
    double mean_with_fallback = 1.0;  // abstained trials contribute 1.0
};

struct EfficiencySummary {
    std::size_t trials = 0;
    double abstention_rate = 0.0;
    std::vector<FreeObjectiveSummary> free;
};

EfficiencySummary efficiency_summary(std::span<const TrialReport> reports);

/// Reports matching a method and spec index.
std::vector<TrialReport> filter_reports(std::span<const TrialReport> reports, const std::string& method,
                                        std::optional<std::size_t> spec_index = std::nullopt);

}  // namespace ptest
