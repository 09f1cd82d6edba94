// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ptest/core_types.hpp"
#include "ptest/objectives.hpp"
#include "ptest/rng.hpp"
#include "ptest/testing.hpp"

namespace ptest {

/// Synthetic adaptive-pruning model. Configurations are threshold triples
/// (tau_tok, tau_layer, tau_head) in that order.
struct SimModelSpec {
    std::size_t layers = 12;          // K
    std::size_t heads = 12;           // W
    std::size_t min_tokens = 16;      // L(x) ~ uniform integers [min_tokens, max_tokens]
    std::size_t max_tokens = 128;
    double base_accuracy = 0.9;
    double kappa = 0.3;               // degradation strength
    std::size_t class_count = 2;
    std::vector<double> class_difficulty;  // Beta(a_y, 1) shape per class; empty means all 1
    std::uint64_t seed = 0;

    void validate() const;
    double difficulty_shape(std::size_t label) const;

    bool operator==(const SimModelSpec&) const = default;
};

void to_json(json& j, const SimModelSpec& s);
void from_json(const json& j, SimModelSpec& s);

struct SimModel {
    SimModelSpec spec;
    std::vector<std::vector<double>> head_scores;  // [layer][head], each row sums to 1

    static SimModel create(const SimModelSpec& spec);
    /// Explicit head scores, rows must sum to 1.
    static SimModel with_heads(const SimModelSpec& spec, std::vector<std::vector<double>> head_scores);

private:
    friend std::vector<std::size_t> head_counts(const SimModel&, double);
    std::vector<std::vector<double>> sorted_heads_;
};

struct SimExample {
    std::vector<std::vector<double>> token_scores;  // [layer][token]
    std::vector<double> layer_entropy_scores;       // one per layer
    bool full_correct = true;
    std::size_t label = 0;
    double difficulty = 0.0;  // u
    double flip_draw = 0.0;   // v
    double confidence_base = 1.0;

    /// Builds the derived survival tables; call after setting the scores.
    void finalize();

    std::size_t length() const { return token_scores.empty() ? 0 : token_scores.front().size(); }
    /// Sorted running minimum of the token scores through each layer.
    const std::vector<std::vector<double>>& survival() const { return survival_; }

private:
    std::vector<std::vector<double>> survival_;
};

SimExample sample_example(const SimModel& model, Rng& rng);
/// Example `index` of the stream rooted at `seed`; independent of other indices.
SimExample sample_example(const SimModel& model, std::uint64_t seed, std::size_t index);
std::vector<SimExample> sample_examples(const SimModel& model, std::size_t n, std::uint64_t seed);

/// L_j: tokens whose scores exceed tau_tok at every layer up to j.
std::vector<std::size_t> token_counts(const SimExample& ex, double tau_tok);
/// 1-based index of the first layer whose entropy score is below tau_layer, K if none.
std::size_t exit_layer(const SimExample& ex, double tau_layer);
/// W_j: heads with score above tau_head.
std::vector<std::size_t> head_counts(const SimModel& model, double tau_head);

double cost_ratio(const SimExample& ex, const SimModel& model, const ConfigPoint& config);
ExampleRecord evaluate_config(const SimExample& ex, const SimModel& model, const ConfigPoint& config);

/// Records for every point of a (tok, layer, head) grid, in grid order.
/// Bit-identical to calling evaluate_config point by point.
void evaluate_grid(const SimExample& ex, const SimModel& model, const ConfigGrid& grid,
                   std::vector<ExampleRecord>& out);

struct OracleEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Monte Carlo risk from n_oracle fresh examples on the model's oracle stream.
OracleEstimate oracle_risk(const SimModel& model, const ConfigPoint& config, const LossDefinition& loss,
                           std::size_t n_oracle = 200000);

LossTable build_loss_table(const SimModel& model, std::span<const SimExample> examples, const ConfigGrid& grid,
                           std::span<const LossDefinition> losses);

/// Oracle risks for every grid point and loss, [loss][config].
struct OracleTable {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> mean;
    std::vector<std::vector<double>> standard_error;
    std::size_t n_oracle = 0;

    std::size_t index(const std::string& id) const;
};

/// Computed once per (model, grid, losses, n_oracle) and cached for the process.
std::shared_ptr<const OracleTable> oracle_table(const SimModel& model, const ConfigGrid& grid,
                                                std::span<const LossDefinition> losses,
                                                std::size_t n_oracle = 200000);

/// ConfigEvaluator over a fixed set of sampled examples.
class SimLossEvaluator : public ConfigEvaluator {
public:
    SimLossEvaluator(const SimModel& model, std::shared_ptr<const std::vector<SimExample>> examples,
                     std::vector<LossDefinition> losses, std::vector<std::pair<double, double>> bounds);

    std::size_t example_count() const override { return examples_->size(); }
    std::vector<std::pair<double, double>> bounds() const override { return bounds_; }
    std::vector<double> mean_losses(const ConfigPoint& config, std::span<const std::string> ids,
                                    std::span<const std::size_t> examples) const override;

    const std::vector<SimExample>& examples() const { return *examples_; }

private:
    const SimModel& model_;
    std::shared_ptr<const std::vector<SimExample>> examples_;
    std::vector<LossDefinition> losses_;
    std::vector<std::pair<double, double>> bounds_;
};

// Default threshold ranges; each starts at 0 so grid index 0 is the full model.
inline constexpr double kMaxTauTok = 0.2;
inline constexpr double kMaxTauLayer = 0.5;
inline constexpr double kMaxTauHead = 0.12;

/// Evenly spaced (tok, layer, head) grid over the default ranges.
ConfigGrid threshold_grid(std::size_t n_tok, std::size_t n_layer, std::size_t n_head);
/// 10 x 9 x 9 = 810 configurations.
ConfigGrid benchmark_grid();
/// 20 x 18 x 18 = 6480 configurations.
ConfigGrid paper_grid();

/// Losses of the default bi-objective task: accuracy reduction (controlled) and cost (free).
std::vector<LossDefinition> default_losses();

}  // namespace ptest
