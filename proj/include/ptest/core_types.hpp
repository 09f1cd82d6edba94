// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ptest {

using json = nlohmann::json;

/// A threshold tuple, one value per configuration dimension.
struct ConfigPoint {
    std::vector<double> thresholds;
    std::optional<std::size_t> grid_index;

    bool operator==(const ConfigPoint&) const = default;
};

/// Finite Cartesian grid of candidate configurations.
///
/// Points are indexed in row-major order: the last dimension varies fastest.
/// Per-dimension value lists must be strictly increasing.
class ConfigGrid {
public:
    ConfigGrid() = default;
    explicit ConfigGrid(std::vector<std::vector<double>> dims,
                        std::vector<std::string> names = {});

    std::size_t dimension_count() const { return dims_.size(); }
    std::size_t size() const { return size_; }
    const std::vector<double>& values(std::size_t dim) const { return dims_.at(dim); }
    const std::vector<std::vector<double>>& dims() const { return dims_; }
    const std::vector<std::string>& names() const { return names_; }
    std::vector<std::size_t> shape() const;

    std::vector<std::size_t> unravel(std::size_t index) const;
    std::size_t ravel(std::span<const std::size_t> coords) const;
    ConfigPoint point(std::size_t index) const;
    std::vector<ConfigPoint> points() const;

    std::pair<double, double> bounds(std::size_t dim) const;

    /// Nearest grid value per dimension (ties go to the lower value).
    ConfigPoint snap(std::span<const double> thresholds) const;

    /// Checks a point's length and per-dimension bounds.
    bool contains(const ConfigPoint& p) const;

    bool operator==(const ConfigGrid&) const = default;

private:
    std::vector<std::vector<double>> dims_;
    std::vector<std::string> names_;
    std::size_t size_ = 0;
};

enum class ObjectiveKind { controlled, free };

struct ObjectiveSpec {
    std::string id;
    ObjectiveKind kind = ObjectiveKind::free;
    std::optional<double> alpha;  // present iff controlled

    bool operator==(const ObjectiveSpec&) const = default;
};

enum class PValueKind { hoeffding, hoeffding_bentkus };

std::string_view to_string(PValueKind kind);
PValueKind pvalue_kind_from_string(std::string_view name);

struct CalibrationSpec {
    std::vector<ObjectiveSpec> objectives;  // controlled first, then free
    double delta = 0.1;
    double split_fraction = 0.5;
    std::size_t front_budget = 1000;
    PValueKind pvalue_kind = PValueKind::hoeffding_bentkus;

    // Procedure options.
    bool prune_front = true;
    std::size_t eps_steps = 20;
    double beta_step = 0.01;
    std::optional<std::vector<std::size_t>> sgt_corner;

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;

    std::size_t controlled_count() const;
    std::size_t free_count() const;
    std::vector<double> alphas() const;
    std::vector<std::string> controlled_ids() const;
    std::vector<std::string> free_ids() const;
    std::vector<std::string> objective_ids() const;

    /// Copy with the i-th controlled objective's alpha replaced.
    CalibrationSpec with_alpha(std::size_t controlled_index, double alpha) const;

    bool operator==(const CalibrationSpec&) const = default;
};

/// Per-objective (example x configuration) loss matrices, values in [0, 1].
///
/// Rows are examples and are stored contiguously, so summing a split of
/// examples touches memory linearly. Immutable after construction.
class LossTable {
public:
    LossTable() = default;
    LossTable(std::vector<std::string> objective_ids, std::size_t example_count,
              std::size_t config_count, std::vector<std::vector<double>> matrices,
              std::optional<ConfigGrid> grid = std::nullopt);

    std::size_t example_count() const { return examples_; }
    std::size_t config_count() const { return configs_; }
    std::size_t objective_count() const { return ids_.size(); }
    const std::vector<std::string>& objective_ids() const { return ids_; }
    const std::optional<ConfigGrid>& grid() const { return grid_; }

    /// Throws std::out_of_range for an unknown id.
    std::size_t objective_index(std::string_view id) const;
    bool has_objective(std::string_view id) const;

    double at(std::size_t objective, std::size_t example, std::size_t config) const {
        return data_[objective][example * configs_ + config];
    }
    std::span<const double> row(std::size_t objective, std::size_t example) const {
        return {data_[objective].data() + example * configs_, configs_};
    }
    const std::vector<double>& matrix(std::size_t objective) const { return data_.at(objective); }

    /// Mean loss per configuration over the given examples.
    std::vector<double> column_means(std::size_t objective,
                                     std::span<const std::size_t> examples) const;

    bool operator==(const LossTable&) const = default;

private:
    std::vector<std::string> ids_;
    std::size_t examples_ = 0;
    std::size_t configs_ = 0;
    std::vector<std::vector<double>> data_;
    std::optional<ConfigGrid> grid_;
};

struct Candidate {
    std::size_t grid_index = 0;
    double p_opt = 1.0;
    std::vector<double> free_values;

    bool operator==(const Candidate&) const = default;
};

/// Result of one configuration-selection procedure.
///
/// `rejected` is the ordered prefix of `ordered_candidates` before
/// `stop_index` for the sequential procedures; for Bonferroni and SGT it is the
/// rejection set in rejection order. An empty `selected` is an abstention.
struct TestOutcome {
    std::string method;
    std::vector<Candidate> ordered_candidates;
    std::vector<std::size_t> rejected;
    std::vector<std::size_t> selected;
    std::size_t stop_index = 0;  // 0-based position of the first failed test
    std::map<std::size_t, double> testing_pvalues;
    std::vector<std::string> binding_objectives;  // one per selected entry
    std::string stopping_objective;  // largest p-value at the first failed sequential test, if any
    std::map<std::size_t, ConfigPoint> configs;   // candidate id -> configuration
    std::vector<std::string> notes;

    bool abstained() const { return selected.empty(); }

    bool operator==(const TestOutcome&) const = default;
};

void to_json(json& j, const ConfigPoint& p);
void from_json(const json& j, ConfigPoint& p);
void to_json(json& j, const ConfigGrid& g);
void from_json(const json& j, ConfigGrid& g);
void to_json(json& j, const ObjectiveSpec& o);
void from_json(const json& j, ObjectiveSpec& o);
void to_json(json& j, const CalibrationSpec& s);
void from_json(const json& j, CalibrationSpec& s);
void to_json(json& j, const Candidate& c);
void from_json(const json& j, Candidate& c);
void to_json(json& j, const TestOutcome& t);
void from_json(const json& j, TestOutcome& t);

}  // namespace ptest
