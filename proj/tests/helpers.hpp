#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ptest/core_types.hpp"

namespace ptest::testutil {

inline CalibrationSpec one_risk_spec(double alpha, double delta = 0.1) {
    CalibrationSpec s;
    s.objectives = {{"risk", ObjectiveKind::controlled, alpha}, {"cost", ObjectiveKind::free, std::nullopt}};
    s.delta = delta;
    return s;
}

// Table with per-config constant losses: risk[k] and cost[k] on every row.
inline LossTable constant_table(const std::vector<double>& risk, const std::vector<double>& cost, std::size_t rows,
                                std::optional<ConfigGrid> grid = std::nullopt) {
    const std::size_t c = risk.size();
    std::vector<double> r(rows * c), k(rows * c);
    for (std::size_t e = 0; e < rows; ++e)
        for (std::size_t j = 0; j < c; ++j) {
            r[e * c + j] = risk[j];
            k[e * c + j] = cost[j];
        }
    return LossTable({"risk", "cost"}, rows, c, {std::move(r), std::move(k)}, std::move(grid));
}

// Grid 0..n-1 per dimension.
inline ConfigGrid index_grid(const std::vector<std::size_t>& shape) {
    std::vector<std::vector<double>> dims;
    for (const auto n : shape) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
        dims.push_back(std::move(v));
    }
    return ConfigGrid(std::move(dims));
}

}  // namespace ptest::testutil
