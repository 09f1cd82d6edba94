// SPDX-License-Identifier: Apache-2.0
#include "ptest/moo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "ptest/rng.hpp"

namespace ptest {

std::vector<ObjectivePoint> grid_points(const LossTable& table, std::span<const std::string> ids,
                                        std::span<const std::size_t> examples) {
    if (examples.empty()) throw std::invalid_argument("grid_points: empty example split");
    std::vector<std::vector<double>> means;
    means.reserve(ids.size());
    for (const auto& id : ids) means.push_back(table.column_means(table.objective_index(id), examples));
    std::vector<ObjectivePoint> points(table.config_count());
    for (std::size_t c = 0; c < points.size(); ++c) {
        points[c].grid_index = c;
        points[c].values.resize(ids.size());
        for (std::size_t o = 0; o < ids.size(); ++o) points[c].values[o] = means[o][c];
    }
    return points;
}

std::vector<ObjectivePoint> grid_front(const LossTable& table, const CalibrationSpec& spec,
                                       std::span<const std::size_t> opt_split) {
    const auto ids = spec.objective_ids();
    const auto points = grid_points(table, ids, opt_split);
    return pareto_front(points);
}

namespace {

constexpr double kAugmentation = 0.05;

class Archive {
public:
    const std::vector<EvaluatedConfig>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    void add(EvaluatedConfig e) {
        if (lo_.empty()) {
            lo_ = e.values;
            hi_ = e.values;
        }
        for (std::size_t i = 0; i < e.values.size(); ++i) {
            lo_[i] = std::min(lo_[i], e.values[i]);
            hi_[i] = std::max(hi_[i], e.values[i]);
        }
        entries_.push_back(std::move(e));
    }

    double scalarize(std::span<const double> v, std::span<const double> w) const {
        double worst = -std::numeric_limits<double>::infinity();
        double total = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double range = hi_[i] - lo_[i];
            const double z = range > 0.0 ? (v[i] - lo_[i]) / range : 0.0;
            worst = std::max(worst, w[i] * z);
            total += w[i] * z;
        }
        return worst + kAugmentation * total;
    }

    std::size_t best_for(std::span<const double> w) const {
        std::size_t best = 0;
        double best_value = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const double s = scalarize(entries_[i].values, w);
            if (s < best_value) {
                best_value = s;
                best = i;
            }
        }
        return best;
    }

private:
    std::vector<EvaluatedConfig> entries_;
    std::vector<double> lo_, hi_;
};

class Searcher {
public:
    Searcher(const ObjectiveFn& eval, std::span<const std::pair<double, double>> bounds, const EvalBudget& budget,
             const ConfigGrid* grid)
        : eval_(eval), bounds_(bounds.begin(), bounds.end()), budget_(budget), grid_(grid), rng_(budget.seed) {}

    SearchResult run() {
        const std::size_t n = bounds_.size();
        // Initial design: lower corner, box centre, then uniform draws.
        std::vector<double> lower(n), centre(n);
        for (std::size_t d = 0; d < n; ++d) {
            lower[d] = bounds_[d].first;
            centre[d] = 0.5 * (bounds_[d].first + bounds_[d].second);
        }
        visit(lower);
        if (spent_ < budget_.max_evaluations) visit(centre);
        for (std::size_t i = 1; i < n && spent_ < budget_.max_evaluations; ++i) {
            std::vector<double> x(n);
            for (std::size_t d = 0; d < n; ++d)
                x[d] = bounds_[d].first + rng_.uniform() * (bounds_[d].second - bounds_[d].first);
            visit(x);
        }

        std::size_t idle_rounds = 0;
        while (spent_ < budget_.max_evaluations && !archive_.empty() && idle_rounds < 64) {
            const std::size_t before = spent_;
            local_search(draw_weights());
            idle_rounds = spent_ == before ? idle_rounds + 1 : 0;
        }
        if (archive_.empty()) throw std::runtime_error("scalarized_search: no evaluation completed");

        SearchResult result;
        result.evaluations = spent_;
        result.archive = archive_.entries();
        std::vector<ObjectivePoint> pts;
        for (std::size_t i = 0; i < result.archive.size(); ++i) pts.push_back({i, result.archive[i].values});
        for (const auto i : pareto_front_positions(pts)) result.front.push_back(result.archive[i]);
        return result;
    }

private:
    std::vector<double> draw_weights() {
        const std::size_t m = archive_.entries().front().values.size();
        std::vector<double> w(m);
        double s = 0.0;
        for (auto& x : w) s += (x = rng_.exponential());
        for (auto& x : w) x /= s;
        return w;
    }

    // Returns the archive position of x (evaluating it if new), or nullopt
    // when the budget is exhausted or the evaluation failed.
    std::optional<std::size_t> visit(std::vector<double> x) {
        ConfigPoint p;
        if (grid_) {
            p = grid_->snap(x);
        } else {
            for (std::size_t d = 0; d < x.size(); ++d) x[d] = std::clamp(x[d], bounds_[d].first, bounds_[d].second);
            p.thresholds = std::move(x);
        }
        if (auto it = seen_.find(p.thresholds); it != seen_.end()) return it->second;
        if (spent_ >= budget_.max_evaluations) return std::nullopt;
        ++spent_;
        auto values = eval_(p);
        if (values.empty()) return std::nullopt;
        const std::size_t pos = archive_.entries().size();
        seen_.emplace(p.thresholds, pos);
        archive_.add({std::move(p), std::move(values)});
        return pos;
    }

    void local_search(const std::vector<double>& w) {
        const std::size_t n = bounds_.size();
        std::size_t current = archive_.best_for(w);
        std::vector<double> step(n);
        for (std::size_t d = 0; d < n; ++d) step[d] = 0.25 * (bounds_[d].second - bounds_[d].first);
        const std::size_t local_cap = std::max<std::size_t>(8, 4 * n);
        const std::size_t start = spent_;
        std::vector<std::size_t> dims(n);
        std::iota(dims.begin(), dims.end(), 0);

        for (int halvings = 0; halvings < 6 && spent_ < budget_.max_evaluations && spent_ - start < local_cap;) {
            rng_.shuffle(std::span<std::size_t>(dims));
            bool improved = false;
            for (const auto d : dims) {
                for (const double sign : {1.0, -1.0}) {
                    std::vector<double> x = archive_.entries()[current].config.thresholds;
                    x[d] += sign * step[d];
                    const auto pos = visit(std::move(x));
                    if (!pos || *pos == current) continue;
                    const auto& cand = archive_.entries()[*pos].values;
                    const auto& inc = archive_.entries()[current].values;
                    if (archive_.scalarize(cand, w) < archive_.scalarize(inc, w)) {
                        current = *pos;
                        improved = true;
                        break;
                    }
                }
                if (improved || spent_ >= budget_.max_evaluations) break;
            }
            if (!improved) {
                for (auto& s : step) s *= 0.5;
                ++halvings;
            }
        }
    }

    const ObjectiveFn& eval_;
    std::vector<std::pair<double, double>> bounds_;
    EvalBudget budget_;
    const ConfigGrid* grid_;
    Rng rng_;
    Archive archive_;
    std::map<std::vector<double>, std::size_t> seen_;
    std::size_t spent_ = 0;
};

}  // namespace

SearchResult scalarized_search(const ObjectiveFn& eval, std::span<const std::pair<double, double>> bounds,
                               const EvalBudget& budget, const ConfigGrid* grid) {
    if (bounds.empty()) throw std::invalid_argument("scalarized_search: no dimensions");
    if (budget.max_evaluations < 1) throw std::invalid_argument("scalarized_search: budget must be >= 1");
    for (const auto& [lo, hi] : bounds)
        if (!(lo <= hi)) throw std::invalid_argument("scalarized_search: bad bounds");
    if (grid && grid->dimension_count() != bounds.size())
        throw std::invalid_argument("scalarized_search: grid rank does not match bounds");
    Searcher s(eval, bounds, budget, grid);
    return s.run();
}

}  // namespace ptest
