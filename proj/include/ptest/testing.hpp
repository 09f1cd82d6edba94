// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ptest/core_types.hpp"
#include "ptest/moo.hpp"

namespace ptest {

// ---------------------------------------------------------------------------
// Splits and cached empirical risks

struct DataSplit {
    std::vector<std::size_t> opt;   // ascending example indices
    std::vector<std::size_t> test;  // ascending example indices
};

/// Seeded shuffle of 0..m-1; the first round(fraction * m) indices (clamped to
/// [1, m-1]) form the optimization split. Requires m >= 2.
DataSplit make_split(std::size_t m, double fraction, std::uint64_t seed);

/// Empirical risks of every configuration on the optimization split, the
/// testing split and the whole calibration set, one row per spec objective.
struct CalibrationData {
    const LossTable* table = nullptr;
    CalibrationSpec spec;
    DataSplit split;
    std::vector<std::vector<double>> opt_means;
    std::vector<std::vector<double>> test_means;
    std::vector<std::vector<double>> full_means;

    /// `calibration` restricts the calibration set to those table rows (all rows when empty).
    static CalibrationData build(const LossTable& table, const CalibrationSpec& spec, std::uint64_t split_seed,
                                 std::span<const std::size_t> calibration = {});

    std::size_t m1() const { return split.opt.size(); }
    std::size_t m2() const { return split.test.size(); }
    std::size_t m() const { return m1() + m2(); }
    std::size_t config_count() const { return table->config_count(); }

    /// Same cached means with a different spec (only alphas may differ).
    CalibrationData with_spec(const CalibrationSpec& other) const;
};

enum class Portion { opt, test, full };

/// Per-controlled-objective p-values of configuration `c` on a data portion.
std::vector<double> objective_pvalues(const CalibrationData& data, std::size_t c, Portion portion);

/// max over controlled objectives.
double combined_pvalue(const CalibrationData& data, std::size_t c, Portion portion);

// ---------------------------------------------------------------------------
// FWER procedures

struct FstResult {
    std::vector<std::size_t> rejected;  // 0..stop_index-1
    std::size_t stop_index = 0;         // first position with p >= delta, or size
};

FstResult fixed_sequence_test(std::span<const double> ordered_pvalues, double delta);

/// Positions i with p[i] < delta / n_tests, ascending.
std::vector<std::size_t> bonferroni(std::span<const double> pvalues, double delta, std::size_t n_tests);

struct BudgetGraph {
    std::vector<double> initial_budgets;
    std::vector<std::vector<std::pair<std::size_t, double>>> edges;  // from -> [(to, weight)]

    std::size_t node_count() const { return initial_budgets.size(); }
    /// Throws std::invalid_argument unless budgets sum to delta and weights are sane.
    void validate(double delta) const;
};

struct SgtResult {
    std::vector<std::size_t> rejected;      // in rejection order
    std::vector<double> live_budget_trace;  // total live budget after each step, starting with the initial total
    std::vector<double> dissipated_trace;   // budget lost to removed nodes, same steps
};

/// Sequential graphical testing. Repeatedly picks the live node minimizing
/// p/A among nodes with A > 0, rejects it while p < A and forwards its budget
/// to live successors by edge weight; stops at the first failed test.
SgtResult sgt(const BudgetGraph& graph, std::span<const double> pvalues, double delta);

/// Hamming graph on a grid of the given shape. All budget sits at `corner`;
/// each node sends equal weight to its forward neighbours, one step away from
/// the corner in exactly one dimension. Corner coordinates must be 0 or the
/// last index of their dimension.
BudgetGraph build_hamming_graph(std::span<const std::size_t> shape, std::span<const std::size_t> corner,
                                double delta);

BudgetGraph build_3d_hamming_graph(std::size_t i, std::size_t j, std::size_t k,
                                   std::span<const std::size_t> corner, double delta);

// ---------------------------------------------------------------------------
// Selection procedures. Each is a pure function of (data, spec, seed).

TestOutcome pareto_testing(const CalibrationData& data);
TestOutcome pareto_testing(const LossTable& table, const CalibrationSpec& spec, std::uint64_t split_seed);

TestOutcome split_fst_baseline(const CalibrationData& data);
TestOutcome split_fst_baseline(const LossTable& table, const CalibrationSpec& spec, std::uint64_t split_seed);

TestOutcome sgt_hamming(const CalibrationData& data);
TestOutcome bonferroni_baseline(const CalibrationData& data);

TestOutcome low_risk_path(const CalibrationData& data);
TestOutcome low_risk_path(const LossTable& table, const CalibrationSpec& spec, std::uint64_t split_seed);

TestOutcome constrained_path(const CalibrationData& data);
TestOutcome constrained_path(const LossTable& table, const CalibrationSpec& spec, std::uint64_t split_seed);

/// Argmin of the first free objective on the full calibration set subject to
/// every controlled risk < alpha. nullopt when infeasible.
std::optional<std::size_t> alpha_constrained(const LossTable& table, const CalibrationSpec& spec);
/// Same with feasibility p_cal < delta.
std::optional<std::size_t> alpha_delta_constrained(const LossTable& table, const CalibrationSpec& spec);

TestOutcome alpha_constrained_outcome(const CalibrationData& data);
TestOutcome alpha_delta_constrained_outcome(const CalibrationData& data);

/// Path of grid points from `start` to `end` (coordinates), one step per
/// move, each step choosing among forward single-dimension moves that stay
/// within `end` the one with the smallest score; ties keep the lowest
/// dimension. `forward[d]` is +1 or -1.
std::vector<std::size_t> create_path(const ConfigGrid& grid, std::span<const std::size_t> start,
                                     std::span<const std::size_t> end, std::span<const int> forward,
                                     std::span<const double> score);

// ---------------------------------------------------------------------------
// Black-box search path

/// Evaluates objectives at arbitrary configurations over subsets of examples.
class ConfigEvaluator {
public:
    virtual ~ConfigEvaluator() = default;
    virtual std::size_t example_count() const = 0;
    virtual std::vector<std::pair<double, double>> bounds() const = 0;
    /// Mean loss per objective id (in `ids` order) over `examples`.
    virtual std::vector<double> mean_losses(const ConfigPoint& config, std::span<const std::string> ids,
                                            std::span<const std::size_t> examples) const = 0;
};

/// Pareto Testing with the front produced by scalarized_search on the
/// optimization split. Candidate ids are archive positions; `configs` holds
/// the thresholds of every ordered candidate.
TestOutcome pareto_testing_search(const ConfigEvaluator& eval, const CalibrationSpec& spec,
                                  std::uint64_t split_seed, const EvalBudget& budget,
                                  const ConfigGrid* grid = nullptr);

// ---------------------------------------------------------------------------
// Method registry

inline constexpr std::string_view kGridMethods[] = {
    "pareto_testing",    "split_fst",         "sgt_3d",
    "bonferroni",        "low_risk_path",     "constrained_path",
    "alpha_constrained", "alpha_delta_constrained",
};

bool is_known_method(std::string_view id);
/// False for the two naive baselines.
bool controls_fwer(std::string_view id);
/// Runs a grid-backed method by id. Throws std::invalid_argument otherwise.
TestOutcome run_method(std::string_view id, const CalibrationData& data);

// ---------------------------------------------------------------------------
// Time sharing

struct SimplexWeights {
    std::vector<double> weights;
    void validate() const;
};

/// i.i.d. categorical draws (indices into `selected`) per example.
std::vector<std::size_t> time_share(std::span<const std::size_t> selected, const SimplexWeights& weights,
                                    std::size_t example_count, std::uint64_t seed);

}  // namespace ptest
