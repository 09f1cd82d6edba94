// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "ptest/core_types.hpp"

namespace ptest {

/// Per-example outcome of running one configuration.
struct ExampleRecord {
    bool full_correct = false;
    bool pruned_correct = false;
    std::size_t label = 0;
    double confidence = 1.0;  // max_y f(X, y; tau)
    double cost_ratio = 1.0;  // per-example relative compute
};

/// [1{full correct} - 1{pruned correct}]_+
double accuracy_reduction_loss(const ExampleRecord& rec);

double empirical_risk(std::span<const double> losses);

/// Per-class loss D' 1{Y = y} + alpha 1{Y != y}; its mean is <= alpha iff
/// the class-conditional risk is <= alpha.
double class_accuracy_loss(const ExampleRecord& rec, std::size_t cls, double alpha);

/// max over classes of the mean of class_accuracy_loss. Classes absent from
/// the sample contribute exactly alpha.
double worst_class_empirical_risk(std::span<const ExampleRecord> recs, double alpha,
                                  std::size_t class_count);

/// 1{confidence < lambda}
double abstention_loss(const ExampleRecord& rec, double lambda);

enum class SelectiveBase { cost, accuracy };

/// Base loss when the prediction is made (confidence >= lambda), alpha otherwise.
double selective_loss(const ExampleRecord& rec, double lambda, double alpha, SelectiveBase base);

enum class LossType {
    accuracy_reduction,
    cost,
    class_accuracy_reduction,
    abstention,
    selective_cost,
    selective_accuracy,
};

/// A named per-example loss, as exported into loss tables.
struct LossDefinition {
    std::string id;
    LossType type = LossType::accuracy_reduction;
    std::size_t cls = 0;  // class_accuracy_reduction
    double alpha = 0.0;   // class_accuracy_reduction, selective_*
    double lambda = 0.0;  // abstention, selective_*

    double operator()(const ExampleRecord& rec) const;

    bool operator==(const LossDefinition&) const = default;
};

std::string_view to_string(LossType type);
LossType loss_type_from_string(std::string_view name);

void to_json(json& j, const LossDefinition& d);
void from_json(const json& j, LossDefinition& d);

}  // namespace ptest
