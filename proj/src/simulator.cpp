// SPDX-License-Identifier: Apache-2.0
#include "ptest/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace ptest {

void SimModelSpec::validate() const {
    if (layers < 1) throw std::invalid_argument("SimModelSpec: layers must be >= 1");
    if (heads < 1) throw std::invalid_argument("SimModelSpec: heads must be >= 1");
    if (min_tokens < 1 || min_tokens > max_tokens) throw std::invalid_argument("SimModelSpec: bad token length range");
    if (!(base_accuracy > 0.0 && base_accuracy < 1.0))
        throw std::invalid_argument("SimModelSpec: base_accuracy not in (0,1)");
    if (!(kappa >= 0.0)) throw std::invalid_argument("SimModelSpec: kappa must be >= 0");
    if (class_count < 2) throw std::invalid_argument("SimModelSpec: class_count must be >= 2");
    if (!class_difficulty.empty() && class_difficulty.size() != class_count)
        throw std::invalid_argument("SimModelSpec: class_difficulty length != class_count");
    for (const double a : class_difficulty)
        if (!(a > 0.0)) throw std::invalid_argument("SimModelSpec: class_difficulty shapes must be > 0");
}

double SimModelSpec::difficulty_shape(std::size_t label) const {
    return class_difficulty.empty() ? 1.0 : class_difficulty.at(label);
}

void to_json(json& j, const SimModelSpec& s) {
    j = json{{"layers", s.layers},
             {"heads", s.heads},
             {"min_tokens", s.min_tokens},
             {"max_tokens", s.max_tokens},
             {"base_accuracy", s.base_accuracy},
             {"kappa", s.kappa},
             {"class_count", s.class_count},
             {"class_difficulty", s.class_difficulty},
             {"seed", s.seed}};
}

void from_json(const json& j, SimModelSpec& s) {
    s = SimModelSpec{};
    s.layers = j.value("layers", s.layers);
    s.heads = j.value("heads", s.heads);
    s.min_tokens = j.value("min_tokens", s.min_tokens);
    s.max_tokens = j.value("max_tokens", s.max_tokens);
    s.base_accuracy = j.value("base_accuracy", s.base_accuracy);
    s.kappa = j.value("kappa", s.kappa);
    s.class_count = j.value("class_count", s.class_count);
    s.class_difficulty = j.value("class_difficulty", s.class_difficulty);
    s.seed = j.value("seed", s.seed);
    s.validate();
}

SimModel SimModel::with_heads(const SimModelSpec& spec, std::vector<std::vector<double>> head_scores) {
    spec.validate();
    if (head_scores.size() != spec.layers) throw std::invalid_argument("SimModel: head score rows != layers");
    for (const auto& row : head_scores) {
        if (row.size() != spec.heads) throw std::invalid_argument("SimModel: head score row length != heads");
        const double s = std::accumulate(row.begin(), row.end(), 0.0);
        if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("SimModel: head scores must sum to 1 per layer");
    }
    SimModel m;
    m.spec = spec;
    m.head_scores = std::move(head_scores);
    m.sorted_heads_ = m.head_scores;
    for (auto& row : m.sorted_heads_) std::sort(row.begin(), row.end());
    return m;
}

SimModel SimModel::create(const SimModelSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, Stream::model));
    std::vector<std::vector<double>> heads(spec.layers, std::vector<double>(spec.heads));
    for (auto& row : heads) {
        double s = 0.0;
        for (auto& x : row) s += (x = rng.exponential());
        for (auto& x : row) x /= s;
    }
    return with_heads(spec, std::move(heads));
}

void SimExample::finalize() {
    survival_ = token_scores;
    for (std::size_t j = 1; j < survival_.size(); ++j)
        for (std::size_t l = 0; l < survival_[j].size(); ++l)
            survival_[j][l] = std::min(survival_[j][l], survival_[j - 1][l]);
    for (auto& row : survival_) std::sort(row.begin(), row.end());
}

SimExample sample_example(const SimModel& model, Rng& rng) {
    const auto& s = model.spec;
    SimExample ex;
    const auto len = static_cast<std::size_t>(
        rng.integer(static_cast<std::int64_t>(s.min_tokens), static_cast<std::int64_t>(s.max_tokens)));
    ex.token_scores.assign(s.layers, std::vector<double>(len));
    for (auto& row : ex.token_scores)
        for (auto& x : row) x = rng.uniform_open0();
    ex.layer_entropy_scores.resize(s.layers);
    for (std::size_t j = 0; j < s.layers; ++j)
        ex.layer_entropy_scores[j] = rng.beta_int(2, static_cast<unsigned>(j + 2));
    ex.label = static_cast<std::size_t>(rng.below(s.class_count));
    ex.full_correct = rng.bernoulli(s.base_accuracy);
    ex.difficulty = rng.beta_a1(s.difficulty_shape(ex.label));
    ex.flip_draw = rng.uniform();
    const double c = static_cast<double>(s.class_count);
    const double w = ex.full_correct ? std::sqrt(rng.uniform()) : std::pow(rng.uniform(), 2.0);
    ex.confidence_base = 1.0 / c + (1.0 - 1.0 / c) * (1.0 - 0.5 * ex.difficulty) * w;
    ex.finalize();
    return ex;
}

SimExample sample_example(const SimModel& model, std::uint64_t seed, std::size_t index) {
    Rng rng(derive_seed(seed, index));
    return sample_example(model, rng);
}

std::vector<SimExample> sample_examples(const SimModel& model, std::size_t n, std::uint64_t seed) {
    std::vector<SimExample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_example(model, seed, i));
    return out;
}

namespace {

std::size_t count_above(const std::vector<double>& sorted, double tau) {
    return static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), tau));
}

void check_config(const ConfigPoint& config) {
    if (config.thresholds.size() != 3)
        throw std::invalid_argument("simulator: configuration must be (tau_tok, tau_layer, tau_head)");
}

double cost_from_counts(const SimExample& ex, const SimModel& model, std::span<const std::size_t> l_counts,
                        std::span<const std::size_t> w_counts, std::size_t k_exit) {
    std::uint64_t num = 0;
    for (std::size_t j = 0; j < k_exit; ++j) num += static_cast<std::uint64_t>(w_counts[j]) * l_counts[j] * l_counts[j];
    const auto len = static_cast<std::uint64_t>(ex.length());
    const std::uint64_t den = static_cast<std::uint64_t>(model.spec.layers) * model.spec.heads * len * len;
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ExampleRecord record_from_cost(const SimExample& ex, const SimModel& model, double rho) {
    ExampleRecord r;
    r.full_correct = ex.full_correct;
    r.label = ex.label;
    r.cost_ratio = rho;
    const bool flip = ex.flip_draw < model.spec.kappa * (1.0 - rho) * ex.difficulty;
    r.pruned_correct = ex.full_correct && !flip;
    r.confidence = ex.confidence_base * (0.5 + 0.5 * rho);
    return r;
}

}  // namespace

std::vector<std::size_t> token_counts(const SimExample& ex, double tau_tok) {
    std::vector<std::size_t> out;
    out.reserve(ex.survival().size());
    for (const auto& row : ex.survival()) out.push_back(count_above(row, tau_tok));
    return out;
}

std::size_t exit_layer(const SimExample& ex, double tau_layer) {
    const auto& s = ex.layer_entropy_scores;
    for (std::size_t j = 0; j < s.size(); ++j)
        if (s[j] < tau_layer) return j + 1;
    return s.size();
}

std::vector<std::size_t> head_counts(const SimModel& model, double tau_head) {
    std::vector<std::size_t> out;
    out.reserve(model.sorted_heads_.size());
    for (const auto& row : model.sorted_heads_) out.push_back(count_above(row, tau_head));
    return out;
}

double cost_ratio(const SimExample& ex, const SimModel& model, const ConfigPoint& config) {
    check_config(config);
    const auto l = token_counts(ex, config.thresholds[0]);
    const auto k = exit_layer(ex, config.thresholds[1]);
    const auto w = head_counts(model, config.thresholds[2]);
    return cost_from_counts(ex, model, l, w, k);
}

ExampleRecord evaluate_config(const SimExample& ex, const SimModel& model, const ConfigPoint& config) {
    return record_from_cost(ex, model, cost_ratio(ex, model, config));
}

void evaluate_grid(const SimExample& ex, const SimModel& model, const ConfigGrid& grid,
                   std::vector<ExampleRecord>& out) {
    if (grid.dimension_count() != 3) throw std::invalid_argument("evaluate_grid: grid must be (tok, layer, head)");
    const auto& toks = grid.values(0);
    const auto& lays = grid.values(1);
    const auto& hds = grid.values(2);
    const std::size_t k = model.spec.layers;
    const auto len = static_cast<std::uint64_t>(ex.length());
    const double den = static_cast<double>(static_cast<std::uint64_t>(k) * model.spec.heads * len * len);

    std::vector<std::size_t> exits(lays.size());
    for (std::size_t b = 0; b < lays.size(); ++b) exits[b] = exit_layer(ex, lays[b]);
    std::vector<std::vector<std::size_t>> w(hds.size());
    for (std::size_t c = 0; c < hds.size(); ++c) w[c] = head_counts(model, hds[c]);

    out.resize(grid.size());
    std::vector<std::uint64_t> prefix(k + 1);
    std::vector<std::vector<std::uint64_t>> prefixes(hds.size(), std::vector<std::uint64_t>(k + 1));
    for (std::size_t a = 0; a < toks.size(); ++a) {
        const auto l = token_counts(ex, toks[a]);
        for (std::size_t c = 0; c < hds.size(); ++c) {
            auto& p = prefixes[c];
            p[0] = 0;
            for (std::size_t j = 0; j < k; ++j) p[j + 1] = p[j] + static_cast<std::uint64_t>(w[c][j]) * l[j] * l[j];
        }
        for (std::size_t b = 0; b < lays.size(); ++b) {
            for (std::size_t c = 0; c < hds.size(); ++c) {
                const double rho = den == 0.0 ? 0.0 : static_cast<double>(prefixes[c][exits[b]]) / den;
                out[(a * lays.size() + b) * hds.size() + c] = record_from_cost(ex, model, rho);
            }
        }
    }
}

OracleEstimate oracle_risk(const SimModel& model, const ConfigPoint& config, const LossDefinition& loss,
                           std::size_t n_oracle) {
    if (n_oracle < 1) throw std::invalid_argument("oracle_risk: n_oracle must be >= 1");
    const auto seed = derive_seed(model.spec.seed, Stream::oracle);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n_oracle; ++i) {
        const auto ex = sample_example(model, seed, i);
        const double v = loss(evaluate_config(ex, model, config));
        sum += v;
        sumsq += v * v;
    }
    const auto n = static_cast<double>(n_oracle);
    const double mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sumsq - n * mean * mean) / (n - 1)) : 0.0;
    return {mean, std::sqrt(var / n)};
}

LossTable build_loss_table(const SimModel& model, std::span<const SimExample> examples, const ConfigGrid& grid,
                           std::span<const LossDefinition> losses) {
    const std::size_t n = examples.size();
    const std::size_t c = grid.size();
    std::vector<std::vector<double>> mats(losses.size(), std::vector<double>(n * c));
    std::vector<ExampleRecord> recs;
    for (std::size_t e = 0; e < n; ++e) {
        evaluate_grid(examples[e], model, grid, recs);
        for (std::size_t o = 0; o < losses.size(); ++o) {
            double* row = mats[o].data() + e * c;
            for (std::size_t k = 0; k < c; ++k) row[k] = losses[o](recs[k]);
        }
    }
    std::vector<std::string> ids;
    for (const auto& l : losses) ids.push_back(l.id);
    return LossTable(std::move(ids), n, c, std::move(mats), grid);
}

std::size_t OracleTable::index(const std::string& id) const {
    const auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) throw std::out_of_range("OracleTable: unknown objective '" + id + "'");
    return static_cast<std::size_t>(it - ids.begin());
}

namespace {

std::shared_ptr<const OracleTable> compute_oracle_table(const SimModel& model, const ConfigGrid& grid,
                                                        std::span<const LossDefinition> losses, std::size_t n_oracle) {
    auto t = std::make_shared<OracleTable>();
    const std::size_t c = grid.size();
    t->n_oracle = n_oracle;
    std::vector<std::vector<double>> sum(losses.size(), std::vector<double>(c, 0.0));
    auto sumsq = sum;
    const auto seed = derive_seed(model.spec.seed, Stream::oracle);
    std::vector<ExampleRecord> recs;
    for (std::size_t i = 0; i < n_oracle; ++i) {
        const auto ex = sample_example(model, seed, i);
        evaluate_grid(ex, model, grid, recs);
        for (std::size_t o = 0; o < losses.size(); ++o) {
            for (std::size_t k = 0; k < c; ++k) {
                const double v = losses[o](recs[k]);
                sum[o][k] += v;
                sumsq[o][k] += v * v;
            }
        }
    }
    const auto n = static_cast<double>(n_oracle);
    for (std::size_t o = 0; o < losses.size(); ++o) {
        t->ids.push_back(losses[o].id);
        std::vector<double> mean(c), se(c);
        for (std::size_t k = 0; k < c; ++k) {
            mean[k] = sum[o][k] / n;
            const double var = n > 1 ? std::max(0.0, (sumsq[o][k] - n * mean[k] * mean[k]) / (n - 1)) : 0.0;
            se[k] = std::sqrt(var / n);
        }
        t->mean.push_back(std::move(mean));
        t->standard_error.push_back(std::move(se));
    }
    return t;
}

}  // namespace

std::shared_ptr<const OracleTable> oracle_table(const SimModel& model, const ConfigGrid& grid,
                                                std::span<const LossDefinition> losses, std::size_t n_oracle) {
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<const OracleTable>> cache;
    json key{{"model", model.spec}, {"heads", model.head_scores}, {"grid", grid}, {"n", n_oracle}};
    json ls = json::array();
    for (const auto& l : losses) ls.push_back(l);
    key["losses"] = ls;
    const auto k = key.dump();
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(k); it != cache.end()) return it->second;
    auto t = compute_oracle_table(model, grid, losses, n_oracle);
    cache.emplace(k, t);
    return t;
}

SimLossEvaluator::SimLossEvaluator(const SimModel& model, std::shared_ptr<const std::vector<SimExample>> examples,
                                   std::vector<LossDefinition> losses, std::vector<std::pair<double, double>> bounds)
    : model_(model), examples_(std::move(examples)), losses_(std::move(losses)), bounds_(std::move(bounds)) {}

std::vector<double> SimLossEvaluator::mean_losses(const ConfigPoint& config, std::span<const std::string> ids,
                                                  std::span<const std::size_t> examples) const {
    if (examples.empty()) throw std::invalid_argument("SimLossEvaluator: empty example set");
    std::vector<const LossDefinition*> defs;
    for (const auto& id : ids) {
        const auto it = std::find_if(losses_.begin(), losses_.end(), [&](const auto& l) { return l.id == id; });
        if (it == losses_.end()) throw std::out_of_range("SimLossEvaluator: unknown objective '" + id + "'");
        defs.push_back(&*it);
    }
    std::vector<double> sums(ids.size(), 0.0);
    for (const auto e : examples) {
        const auto rec = evaluate_config(examples_->at(e), model_, config);
        for (std::size_t o = 0; o < defs.size(); ++o) sums[o] += (*defs[o])(rec);
    }
    const double inv = 1.0 / static_cast<double>(examples.size());
    for (auto& s : sums) s = std::clamp(s * inv, 0.0, 1.0);
    return sums;
}

namespace {

std::vector<double> linspace(double hi, std::size_t n) {
    if (n < 1) throw std::invalid_argument("threshold_grid: each dimension needs >= 1 value");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? 0.0 : hi * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

}  // namespace

ConfigGrid threshold_grid(std::size_t n_tok, std::size_t n_layer, std::size_t n_head) {
    return ConfigGrid({linspace(kMaxTauTok, n_tok), linspace(kMaxTauLayer, n_layer), linspace(kMaxTauHead, n_head)},
                      {"tau_tok", "tau_layer", "tau_head"});
}

ConfigGrid benchmark_grid() { return threshold_grid(10, 9, 9); }
ConfigGrid paper_grid() { return threshold_grid(20, 18, 18); }

std::vector<LossDefinition> default_losses() {
    LossDefinition acc;
    acc.id = "accuracy_reduction";
    acc.type = LossType::accuracy_reduction;
    LossDefinition cost;
    cost.id = "cost";
    cost.type = LossType::cost;
    return {acc, cost};
}

}  // namespace ptest
