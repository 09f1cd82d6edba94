// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ptest/core_types.hpp"

namespace ptest {

/// Empirical risks of one configuration, controlled objectives first.
struct ObjectivePoint {
    std::size_t grid_index = 0;
    std::vector<double> values;

    bool operator==(const ObjectivePoint&) const = default;
};

/// a < b in every coordinate.
bool strictly_dominates(std::span<const double> a, std::span<const double> b);

/// a <= b in every coordinate and a < b in at least one.
bool weakly_dominates(std::span<const double> a, std::span<const double> b);

/// Points not strictly dominated by any other point, in input order.
/// Throws std::invalid_argument on inconsistent dimensionality.
std::vector<ObjectivePoint> pareto_front(std::span<const ObjectivePoint> points);

/// Positions (into `points`) of the front members, ascending.
std::vector<std::size_t> pareto_front_positions(std::span<const ObjectivePoint> points);

/// Removes candidates that are weakly dominated in the reduced
/// (p_opt, free_values...) space. Input order is preserved.
std::vector<Candidate> prune_front(std::span<const Candidate> front);

/// Computes p_opt = max over controlled objectives of p(Q_i; alpha_i, m1),
/// sorts ascending (ties: larger first free value first, then grid index) and
/// keeps the first `budget` entries.
std::vector<Candidate> order_by_pvalue(std::span<const ObjectivePoint> front, std::span<const double> alphas,
                                       std::size_t m1, PValueKind kind, std::size_t budget);

/// Same ordering rule applied to candidates whose p_opt is already known.
void sort_candidates(std::vector<Candidate>& candidates);

}  // namespace ptest
