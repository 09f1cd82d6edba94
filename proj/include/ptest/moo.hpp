// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ptest/core_types.hpp"
#include "ptest/pareto.hpp"

namespace ptest {

struct EvalBudget {
    std::size_t max_evaluations = 200;
    std::uint64_t seed = 0;
};

struct EvaluatedConfig {
    ConfigPoint config;
    std::vector<double> values;
};

struct SearchResult {
    std::vector<EvaluatedConfig> front;    // non-dominated subset of the archive
    std::vector<EvaluatedConfig> archive;  // every evaluated point, in evaluation order
    std::size_t evaluations = 0;
};

/// Black-box objective: configuration -> objective vector (all minimized).
/// Returning an empty vector marks a failed evaluation.
using ObjectiveFn = std::function<std::vector<double>(const ConfigPoint&)>;

/// Empirical risks of every grid configuration on the given examples, for
/// the objectives named in `ids` (in that order). Point i has grid_index i.
std::vector<ObjectivePoint> grid_points(const LossTable& table, std::span<const std::string> ids,
                                        std::span<const std::size_t> examples);

/// Exact Pareto front of the spec's objectives over the optimization split.
std::vector<ObjectivePoint> grid_front(const LossTable& table, const CalibrationSpec& spec,
                                       std::span<const std::size_t> opt_split);

/// Budgeted random-scalarization search.
///
/// The initial design is the lower corner of the box, its centre and
/// uniform draws, n + 1 points in total (fewer when the budget is smaller).
///
/// Each round draws a weight vector uniformly from the simplex and runs a
/// coordinate pattern search on the augmented Tchebycheff scalarization
/// max_i w_i z_i + 0.05 sum_i w_i z_i, where z are objectives normalized by the
/// running min/max of the archive. The local search starts from the archive
/// point that is best under the current weights. When `grid` is given every
/// proposal is snapped to it and repeated grid points are not re-evaluated.
SearchResult scalarized_search(const ObjectiveFn& eval, std::span<const std::pair<double, double>> bounds,
                               const EvalBudget& budget, const ConfigGrid* grid = nullptr);

}  // namespace ptest
