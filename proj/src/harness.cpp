// SPDX-License-Identifier: Apache-2.0
#include "ptest/harness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>

#include "ptest/rng.hpp"

namespace ptest {

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial) {
    return derive_seed(derive_seed(master_seed, Stream::trial), trial);
}

void to_json(json& j, const TrialReport& r) {
    j = json{{"trial_index", r.trial_index},
             {"trial_seed", r.trial_seed},
             {"split_hash", r.split_hash},
             {"method", r.method},
             {"spec_index", r.spec_index},
             {"alphas", r.alphas},
             {"selected", r.selected},
             {"selected_configs", r.selected_configs},
             {"binding_objectives", r.binding_objectives},
             {"stopping_objective", r.stopping_objective},
             {"rejected_count", r.rejected_count},
             {"controlled_ids", r.controlled_ids},
             {"risks", r.risks},
             {"violations", r.violations},
             {"violated", r.violated},
             {"rejected_set_violated", r.rejected_set_violated},
             {"rejected_set_checked", r.rejected_set_checked},
             {"free_ids", r.free_ids},
             {"free_values", r.free_values},
             {"abstained", r.abstained}};
}

namespace {

std::uint64_t fnv1a(std::span<const std::size_t> values) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto v : values) {
        auto x = static_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
            h ^= (x & 0xffU);
            h *= 0x100000001b3ULL;
            x >>= 8;
        }
    }
    return h;
}

// Table-backed evaluator for the search path: off-grid points are snapped.
class TableEvaluator : public ConfigEvaluator {
public:
    TableEvaluator(const LossTable& table, std::vector<std::size_t> rows) : table_(table), rows_(std::move(rows)) {
        if (!table.grid()) throw std::invalid_argument("pareto_testing_search on a table needs a grid");
    }
    std::size_t example_count() const override { return rows_.size(); }
    std::vector<std::pair<double, double>> bounds() const override {
        std::vector<std::pair<double, double>> b;
        for (std::size_t d = 0; d < table_.grid()->dimension_count(); ++d) b.push_back(table_.grid()->bounds(d));
        return b;
    }
    std::vector<double> mean_losses(const ConfigPoint& config, std::span<const std::string> ids,
                                    std::span<const std::size_t> examples) const override {
        const auto c = table_.grid()->snap(config.thresholds).grid_index.value();
        std::vector<double> out;
        for (const auto& id : ids) {
            const auto o = table_.objective_index(id);
            double s = 0.0;
            for (const auto e : examples) s += table_.at(o, rows_.at(e), c);
            out.push_back(std::clamp(s / static_cast<double>(examples.size()), 0.0, 1.0));
        }
        return out;
    }

private:
    const LossTable& table_;
    std::vector<std::size_t> rows_;
};

// True (oracle or held-out) risk of a configuration for an objective id.
using RiskFn = std::function<double(const std::string&, const ConfigPoint&)>;

TrialReport make_report(const TestOutcome& out, const CalibrationSpec& spec, const RiskFn& risk,
                        const ConfigGrid* grid) {
    TrialReport r;
    r.method = out.method;
    r.alphas = spec.alphas();
    r.controlled_ids = spec.controlled_ids();
    r.free_ids = spec.free_ids();
    r.selected = out.selected;
    r.binding_objectives = out.binding_objectives;
    r.stopping_objective = out.stopping_objective;
    r.rejected_count = out.rejected.size();
    r.abstained = out.abstained();

    auto config_of = [&](std::size_t id) {
        if (auto it = out.configs.find(id); it != out.configs.end()) return it->second;
        if (grid) return grid->point(id);
        // Tables without a grid: configurations are known only by column.
        return ConfigPoint{{}, id};
    };
    for (const auto id : out.selected) r.selected_configs.push_back(config_of(id));

    r.risks.assign(r.controlled_ids.size(), 0.0);
    r.violations.assign(r.controlled_ids.size(), false);
    for (const auto& cfg : r.selected_configs)
        for (std::size_t i = 0; i < r.controlled_ids.size(); ++i)
            r.risks[i] = std::max(r.risks[i], risk(r.controlled_ids[i], cfg));
    for (std::size_t i = 0; i < r.risks.size(); ++i) {
        r.violations[i] = !r.abstained && r.risks[i] > r.alphas[i];
        r.violated = r.violated || r.violations[i];
    }

    r.free_values.assign(r.free_ids.size(), 0.0);
    if (!r.abstained) {
        for (std::size_t k = 0; k < r.free_ids.size(); ++k) {
            double s = 0.0;
            for (const auto& cfg : r.selected_configs) s += risk(r.free_ids[k], cfg);
            r.free_values[k] = s / static_cast<double>(r.selected_configs.size());
        }
    }

    // The FWER event over every rejected hypothesis; checked when risks are cheap.
    const bool cheap = std::all_of(out.rejected.begin(), out.rejected.end(), [&](std::size_t id) {
        const auto cfg = config_of(id);
        return cfg.grid_index.has_value();
    });
    if (cheap) {
        r.rejected_set_checked = true;
        for (const auto id : out.rejected) {
            const auto cfg = config_of(id);
            for (std::size_t i = 0; i < r.controlled_ids.size() && !r.rejected_set_violated; ++i)
                r.rejected_set_violated = risk(r.controlled_ids[i], cfg) > r.alphas[i];
            if (r.rejected_set_violated) break;
        }
    }
    return r;
}

void check_objectives(const CalibrationSpec& spec, const std::function<bool(const std::string&)>& known) {
    for (const auto& id : spec.objective_ids())
        if (!known(id)) throw std::invalid_argument("objective '" + id + "' is not provided by the source");
}

}  // namespace

TrialRun run_trials(const Source& source, std::span<const std::string> methods,
                    std::span<const CalibrationSpec> specs, std::size_t n_trials, std::uint64_t master_seed,
                    const HarnessOptions& options) {
    if (n_trials < 1) throw std::invalid_argument("run_trials: n_trials must be >= 1");
    if (specs.empty()) throw std::invalid_argument("run_trials: no calibration spec");
    if (methods.empty()) throw std::invalid_argument("run_trials: no methods");
    for (const auto& m : methods)
        if (!is_known_method(m)) throw std::invalid_argument("run_trials: unknown method '" + m + "'");
    for (const auto& s : specs) {
        s.validate();
        if (s.objective_ids() != specs.front().objective_ids())
            throw std::invalid_argument("run_trials: specs must share objective ids");
    }

    TrialRun run;
    const auto* sim = std::get_if<SimulatorSource>(&source);
    const auto* tab = std::get_if<TableSource>(&source);

    std::shared_ptr<const OracleTable> oracle;
    std::shared_ptr<const std::vector<SimExample>> heldout_examples;
    if (sim) {
        check_objectives(specs.front(), [&](const std::string& id) {
            return std::any_of(sim->losses.begin(), sim->losses.end(), [&](const auto& l) { return l.id == id; });
        });
        oracle = oracle_table(sim->model, sim->grid, sim->losses, sim->n_oracle);
    } else {
        if (!tab->table) throw std::invalid_argument("run_trials: table source without a table");
        check_objectives(specs.front(), [&](const std::string& id) { return tab->table->has_objective(id); });
        if (tab->calibration_size < 2 || tab->calibration_size >= tab->table->example_count())
            throw std::invalid_argument("run_trials: calibration_size must be in [2, rows - 1]");
    }
    const bool wants_search = std::find(methods.begin(), methods.end(), "pareto_testing_search") != methods.end();

    for (std::size_t t = 0; t < n_trials; ++t) {
        const auto seed = trial_seed(master_seed, t);
        std::shared_ptr<const std::vector<SimExample>> examples;
        std::optional<LossTable> sim_table;
        const LossTable* table = nullptr;
        std::vector<std::size_t> calib, held;
        if (sim) {
            examples = std::make_shared<const std::vector<SimExample>>(
                sample_examples(sim->model, sim->examples, derive_seed(seed, Stream::examples)));
            sim_table = build_loss_table(sim->model, *examples, sim->grid, sim->losses);
            table = &*sim_table;
        } else {
            table = tab->table.get();
            std::vector<std::size_t> rows(table->example_count());
            std::iota(rows.begin(), rows.end(), 0);
            Rng rng(derive_seed(seed, Stream::heldout));
            rng.shuffle(std::span<std::size_t>(rows));
            calib.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(tab->calibration_size));
            held.assign(rows.begin() + static_cast<std::ptrdiff_t>(tab->calibration_size), rows.end());
            std::sort(calib.begin(), calib.end());
            std::sort(held.begin(), held.end());
        }

        const auto base = CalibrationData::build(*table, specs.front(), seed, calib);
        const auto split_hash = fnv1a(base.split.opt);

        // Held-out means for a table source, per objective id over all configs.
        std::map<std::string, std::vector<double>> held_means;
        if (tab)
            for (const auto& id : specs.front().objective_ids())
                held_means[id] = table->column_means(table->objective_index(id), held);

        const RiskFn risk = [&](const std::string& id, const ConfigPoint& cfg) -> double {
            if (sim) {
                if (cfg.grid_index) return oracle->mean[oracle->index(id)][*cfg.grid_index];
                if (!heldout_examples)
                    heldout_examples = std::make_shared<const std::vector<SimExample>>(sample_examples(
                        sim->model, options.search_eval_examples, derive_seed(sim->model.spec.seed, Stream::heldout)));
                const auto it = std::find_if(sim->losses.begin(), sim->losses.end(),
                                             [&](const auto& l) { return l.id == id; });
                double s = 0.0;
                for (const auto& ex : *heldout_examples) s += (*it)(evaluate_config(ex, sim->model, cfg));
                return s / static_cast<double>(heldout_examples->size());
            }
            const auto c = cfg.grid_index ? *cfg.grid_index : table->grid()->snap(cfg.thresholds).grid_index.value();
            return held_means.at(id)[c];
        };

        std::unique_ptr<ConfigEvaluator> evaluator;
        std::vector<std::pair<double, double>> bounds;
        if (wants_search) {
            if (sim) {
                for (std::size_t d = 0; d < sim->grid.dimension_count(); ++d) bounds.push_back(sim->grid.bounds(d));
                evaluator = std::make_unique<SimLossEvaluator>(sim->model, examples, sim->losses, bounds);
            } else {
                evaluator = std::make_unique<TableEvaluator>(*table, calib);
            }
        }
        const ConfigGrid* grid = table->grid() ? &*table->grid() : nullptr;

        for (std::size_t s = 0; s < specs.size(); ++s) {
            const auto data = s == 0 ? base : base.with_spec(specs[s]);
            for (const auto& m : methods) {
                TestOutcome out;
                if (m == "pareto_testing_search") {
                    EvalBudget budget{options.search_budget, derive_seed(seed, Stream::search)};
                    const ConfigGrid* snap = (options.search_on_grid || tab) ? grid : nullptr;
                    out = pareto_testing_search(*evaluator, specs[s], seed, budget, snap);
                } else {
                    out = run_method(m, data);
                }
                auto r = make_report(out, specs[s], risk, grid);
                r.trial_index = t;
                r.trial_seed = seed;
                r.split_hash = split_hash;
                r.spec_index = s;
                run.reports.push_back(std::move(r));
                if (t == 0 && options.keep_first_outcomes) run.first_outcomes.push_back(std::move(out));
            }
        }
    }
    return run;
}

ClopperPearson clopper_pearson(std::size_t x, std::size_t n, double confidence) {
    if (n == 0) return {0.0, 1.0};
    if (x > n) throw std::invalid_argument("clopper_pearson: x > n");
    const double a = 1.0 - confidence;
    ClopperPearson cp;
    const auto xd = static_cast<double>(x);
    const auto nd = static_cast<double>(n);
    cp.lower = x == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<double>(xd, nd - xd + 1.0), a);
    cp.upper = x == n ? 1.0
                      : boost::math::quantile(boost::math::beta_distribution<double>(xd + 1.0, nd - xd), 1.0 - a);
    return cp;
}

namespace {

ViolationSummary summarize(std::span<const TrialReport> reports, const std::function<bool(const TrialReport&)>& hit) {
    ViolationSummary v;
    v.trials = reports.size();
    for (const auto& r : reports) {
        if (r.abstained) ++v.abstained;
        if (hit(r)) ++v.violations;
    }
    if (v.trials > 0) v.rate = static_cast<double>(v.violations) / static_cast<double>(v.trials);
    const std::size_t made = v.trials - v.abstained;
    if (made > 0) v.rate_given_selection = static_cast<double>(v.violations) / static_cast<double>(made);
    v.no_selections = made == 0;
    const auto cp = clopper_pearson(v.violations, v.trials);
    v.lower_95 = cp.lower;
    v.upper_95 = cp.upper;
    return v;
}

}  // namespace

ViolationSummary violation_rate(std::span<const TrialReport> reports, bool rejected_set) {
    if (reports.empty()) throw std::invalid_argument("violation_rate: no reports");
    return summarize(reports, [&](const TrialReport& r) {
        return rejected_set ? (r.rejected_set_violated || r.violated) : r.violated;
    });
}

ViolationSummary violation_rate(std::span<const TrialReport> reports, const std::string& objective) {
    if (reports.empty()) throw std::invalid_argument("violation_rate: no reports");
    return summarize(reports, [&](const TrialReport& r) {
        const auto it = std::find(r.controlled_ids.begin(), r.controlled_ids.end(), objective);
        if (it == r.controlled_ids.end()) throw std::invalid_argument("violation_rate: unknown objective " + objective);
        return static_cast<bool>(r.violations[static_cast<std::size_t>(it - r.controlled_ids.begin())]);
    });
}

EfficiencySummary efficiency_summary(std::span<const TrialReport> reports) {
    if (reports.empty()) throw std::invalid_argument("efficiency_summary: no reports");
    EfficiencySummary e;
    e.trials = reports.size();
    std::size_t abstained = 0;
    for (const auto& r : reports) abstained += r.abstained ? 1 : 0;
    e.abstention_rate = static_cast<double>(abstained) / static_cast<double>(e.trials);
    const auto& ids = reports.front().free_ids;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        FreeObjectiveSummary f;
        f.id = ids[k];
        std::vector<double> vals;
        double fallback_sum = 0.0;
        for (const auto& r : reports) {
            if (r.abstained) {
                fallback_sum += 1.0;
            } else {
                vals.push_back(r.free_values[k]);
                fallback_sum += r.free_values[k];
            }
        }
        f.mean_with_fallback = fallback_sum / static_cast<double>(reports.size());
        if (!vals.empty()) {
            const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
            f.mean = mean;
            if (vals.size() > 1) {
                double ss = 0.0;
                for (const double v : vals) ss += (v - mean) * (v - mean);
                f.standard_error = std::sqrt(ss / static_cast<double>(vals.size() - 1) / static_cast<double>(vals.size()));
            }
        }
        e.free.push_back(std::move(f));
    }
    return e;
}

std::vector<TrialReport> filter_reports(std::span<const TrialReport> reports, const std::string& method,
                                        std::optional<std::size_t> spec_index) {
    std::vector<TrialReport> out;
    for (const auto& r : reports)
        if (r.method == method && (!spec_index || r.spec_index == *spec_index)) out.push_back(r);
    return out;
}

}  // namespace ptest
