// SPDX-License-Identifier: Apache-2.0
#include "ptest/testing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ptest/pareto.hpp"
#include "ptest/pvalues.hpp"
#include "ptest/rng.hpp"

namespace ptest {

DataSplit make_split(std::size_t m, double fraction, std::uint64_t seed) {
    if (m < 2) throw std::invalid_argument("make_split: need at least 2 examples");
    if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("make_split: fraction not in (0,1)");
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, Stream::split));
    rng.shuffle(std::span<std::size_t>(perm));
    auto m1 = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m)));
    m1 = std::clamp<std::size_t>(m1, 1, m - 1);
    DataSplit s;
    s.opt.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m1));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(m1), perm.end());
    std::sort(s.opt.begin(), s.opt.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

CalibrationData CalibrationData::build(const LossTable& table, const CalibrationSpec& spec, std::uint64_t split_seed,
                                       std::span<const std::size_t> calibration) {
    spec.validate();
    CalibrationData d;
    d.table = &table;
    d.spec = spec;
    std::vector<std::size_t> rows(calibration.begin(), calibration.end());
    if (rows.empty()) {
        rows.resize(table.example_count());
        std::iota(rows.begin(), rows.end(), 0);
    }
    const auto local = make_split(rows.size(), spec.split_fraction, split_seed);
    for (const auto i : local.opt) d.split.opt.push_back(rows[i]);
    for (const auto i : local.test) d.split.test.push_back(rows[i]);
    for (const auto& id : spec.objective_ids()) {
        const auto o = table.objective_index(id);
        d.opt_means.push_back(table.column_means(o, d.split.opt));
        d.test_means.push_back(table.column_means(o, d.split.test));
        d.full_means.push_back(table.column_means(o, rows));
    }
    return d;
}

CalibrationData CalibrationData::with_spec(const CalibrationSpec& other) const {
    if (other.objective_ids() != spec.objective_ids())
        throw std::invalid_argument("CalibrationData::with_spec: objective ids differ");
    CalibrationData copy = *this;
    copy.spec = other;
    return copy;
}

namespace {

const std::vector<std::vector<double>>& means_of(const CalibrationData& d, Portion portion) {
    switch (portion) {
        case Portion::opt: return d.opt_means;
        case Portion::test: return d.test_means;
        case Portion::full: return d.full_means;
    }
    return d.full_means;
}

std::size_t size_of(const CalibrationData& d, Portion portion) {
    switch (portion) {
        case Portion::opt: return d.m1();
        case Portion::test: return d.m2();
        case Portion::full: return d.m();
    }
    return d.m();
}

}  // namespace

std::vector<double> objective_pvalues(const CalibrationData& data, std::size_t c, Portion portion) {
    const auto alphas = data.spec.alphas();
    const auto& means = means_of(data, portion);
    const std::size_t n = size_of(data, portion);
    std::vector<double> ps(alphas.size());
    for (std::size_t i = 0; i < alphas.size(); ++i) ps[i] = pvalue(data.spec.pvalue_kind, means[i][c], alphas[i], n);
    return ps;
}

double combined_pvalue(const CalibrationData& data, std::size_t c, Portion portion) {
    return combine_max(objective_pvalues(data, c, portion));
}

// ---------------------------------------------------------------------------

FstResult fixed_sequence_test(std::span<const double> ordered_pvalues, double delta) {
    FstResult r;
    r.stop_index = ordered_pvalues.size();
    for (std::size_t i = 0; i < ordered_pvalues.size(); ++i) {
        if (!(ordered_pvalues[i] < delta)) {
            r.stop_index = i;
            break;
        }
        r.rejected.push_back(i);
    }
    return r;
}

std::vector<std::size_t> bonferroni(std::span<const double> pvalues, double delta, std::size_t n_tests) {
    if (n_tests < pvalues.size()) throw std::invalid_argument("bonferroni: n_tests smaller than p-value count");
    const double threshold = delta / static_cast<double>(n_tests);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pvalues.size(); ++i)
        if (pvalues[i] < threshold) out.push_back(i);
    return out;
}

void BudgetGraph::validate(double delta) const {
    const std::size_t n = node_count();
    if (edges.size() != n) throw std::invalid_argument("BudgetGraph: edge list count != node count");
    double total = 0.0;
    for (const double a : initial_budgets) {
        if (!(a >= 0.0)) throw std::invalid_argument("BudgetGraph: negative initial budget");
        total += a;
    }
    if (std::abs(total - delta) > 1e-12) throw std::invalid_argument("BudgetGraph: budgets do not sum to delta");
    for (std::size_t from = 0; from < n; ++from) {
        double out = 0.0;
        for (const auto& [to, w] : edges[from]) {
            if (to >= n) throw std::invalid_argument("BudgetGraph: edge target out of range");
            if (to == from) throw std::invalid_argument("BudgetGraph: self loop");
            if (!(w >= 0.0)) throw std::invalid_argument("BudgetGraph: negative weight");
            out += w;
        }
        if (out > 1.0 + 1e-12) throw std::invalid_argument("BudgetGraph: outgoing weights exceed 1");
    }
}

SgtResult sgt(const BudgetGraph& graph, std::span<const double> pvalues, double delta) {
    graph.validate(delta);
    const std::size_t n = graph.node_count();
    if (pvalues.size() != n) throw std::invalid_argument("sgt: p-value count != node count");
    std::vector<double> budget = graph.initial_budgets;
    std::vector<bool> live(n, true);
    double live_total = std::accumulate(budget.begin(), budget.end(), 0.0);
    double dissipated = 0.0;

    SgtResult r;
    r.live_budget_trace.push_back(live_total);
    r.dissipated_trace.push_back(dissipated);
    while (true) {
        std::size_t best = n;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (!live[i] || !(budget[i] > 0.0)) continue;
            const double ratio = pvalues[i] / budget[i];
            if (best == n || ratio < best_ratio) {
                best = i;
                best_ratio = ratio;
            }
        }
        if (best == n || !(pvalues[best] < budget[best])) break;

        r.rejected.push_back(best);
        live[best] = false;
        const double a = budget[best];
        budget[best] = 0.0;
        double passed = 0.0;
        for (const auto& [to, w] : graph.edges[best]) {
            if (!live[to]) continue;
            budget[to] += a * w;
            passed += a * w;
        }
        dissipated += a - passed;
        live_total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (live[i]) live_total += budget[i];
        r.live_budget_trace.push_back(live_total);
        r.dissipated_trace.push_back(dissipated);
    }
    return r;
}

BudgetGraph build_hamming_graph(std::span<const std::size_t> shape, std::span<const std::size_t> corner,
                                double delta) {
    if (shape.empty()) throw std::invalid_argument("build_hamming_graph: empty shape");
    if (corner.size() != shape.size()) throw std::invalid_argument("build_hamming_graph: corner rank");
    std::vector<int> forward(shape.size());
    for (std::size_t d = 0; d < shape.size(); ++d) {
        if (shape[d] < 1) throw std::invalid_argument("build_hamming_graph: zero-length dimension");
        if (corner[d] == 0) {
            forward[d] = 1;
        } else if (corner[d] == shape[d] - 1) {
            forward[d] = -1;
        } else {
            throw std::invalid_argument("build_hamming_graph: corner must sit on a grid corner");
        }
    }
    std::vector<std::vector<double>> dims;
    for (const auto s : shape) dims.emplace_back(s, 0.0);
    std::size_t total = 1;
    for (const auto s : shape) total *= s;

    // Row-major strides, last dimension fastest.
    std::vector<std::size_t> stride(shape.size(), 1);
    for (std::size_t d = shape.size() - 1; d > 0; --d) stride[d - 1] = stride[d] * shape[d];

    BudgetGraph g;
    g.initial_budgets.assign(total, 0.0);
    g.edges.resize(total);
    std::size_t corner_index = 0;
    for (std::size_t d = 0; d < shape.size(); ++d) corner_index += corner[d] * stride[d];
    g.initial_budgets[corner_index] = delta;

    std::vector<std::size_t> coord(shape.size(), 0);
    for (std::size_t node = 0; node < total; ++node) {
        std::size_t rem = node;
        for (std::size_t d = 0; d < shape.size(); ++d) {
            coord[d] = rem / stride[d];
            rem %= stride[d];
        }
        std::vector<std::size_t> targets;
        for (std::size_t d = 0; d < shape.size(); ++d) {
            if (forward[d] > 0 && coord[d] + 1 < shape[d]) targets.push_back(node + stride[d]);
            if (forward[d] < 0 && coord[d] > 0) targets.push_back(node - stride[d]);
        }
        for (const auto t : targets) g.edges[node].emplace_back(t, 1.0 / static_cast<double>(targets.size()));
    }
    return g;
}

BudgetGraph build_3d_hamming_graph(std::size_t i, std::size_t j, std::size_t k,
                                   std::span<const std::size_t> corner, double delta) {
    const std::size_t shape[] = {i, j, k};
    return build_hamming_graph(shape, corner, delta);
}

// ---------------------------------------------------------------------------

namespace {

std::size_t controlled_count(const CalibrationData& d) { return d.spec.controlled_count(); }

std::vector<double> free_vector(const std::vector<std::vector<double>>& means, std::size_t c0, std::size_t config) {
    std::vector<double> v;
    for (std::size_t o = c0; o < means.size(); ++o) v.push_back(means[o][config]);
    return v;
}

// Final selection among rejected configurations: the single argmin for one
// free objective (first in rejection order on ties), otherwise the
// non-dominated subset.
std::vector<std::size_t> select_final(std::span<const std::size_t> ids,
                                      const std::vector<std::vector<double>>& free_values) {
    if (ids.empty()) return {};
    if (free_values.front().size() == 1) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < ids.size(); ++i)
            if (free_values[i][0] < free_values[best][0]) best = i;
        return {ids[best]};
    }
    std::vector<ObjectivePoint> pts;
    for (std::size_t i = 0; i < ids.size(); ++i) pts.push_back({i, free_values[i]});
    std::vector<std::size_t> out;
    for (const auto pos : pareto_front_positions(pts)) out.push_back(ids[pos]);
    return out;
}

std::vector<std::size_t> select_final(const CalibrationData& d, std::span<const std::size_t> rejected,
                                      Portion portion) {
    std::vector<std::vector<double>> fv;
    for (const auto c : rejected) fv.push_back(free_vector(means_of(d, portion), controlled_count(d), c));
    return select_final(rejected, fv);
}

std::string binding_objective(const CalibrationSpec& spec, std::span<const double> ps) {
    const auto ids = spec.controlled_ids();
    std::size_t best = 0;
    for (std::size_t i = 1; i < ps.size(); ++i)
        if (ps[i] > ps[best]) best = i;
    return ids[best];
}

void attach_configs(const CalibrationData& d, TestOutcome& out) {
    const auto& grid = d.table->grid();
    if (!grid) return;
    for (const auto& c : out.ordered_candidates) out.configs.emplace(c.grid_index, grid->point(c.grid_index));
    for (const auto c : out.rejected) out.configs.emplace(c, grid->point(c));
}

void finish_selection(const CalibrationData& d, TestOutcome& out, Portion portion) {
    out.selected = select_final(d, out.rejected, portion);
    for (const auto c : out.selected) out.binding_objectives.push_back(binding_objective(d.spec, objective_pvalues(d, c, portion)));
    if (out.selected.empty()) out.notes.emplace_back("abstained: no hypothesis rejected");
    attach_configs(d, out);
}

Candidate make_candidate(const CalibrationData& d, std::size_t c) {
    Candidate cand;
    cand.grid_index = c;
    cand.p_opt = combined_pvalue(d, c, Portion::opt);
    cand.free_values = free_vector(d.opt_means, controlled_count(d), c);
    return cand;
}

// FST over a fixed candidate order using testing-split p-values.
TestOutcome test_sequence(const CalibrationData& d, std::string method, std::vector<Candidate> ordered) {
    TestOutcome out;
    out.method = std::move(method);
    std::vector<double> ps;
    ps.reserve(ordered.size());
    for (const auto& c : ordered) ps.push_back(combined_pvalue(d, c.grid_index, Portion::test));
    const auto fst = fixed_sequence_test(ps, d.spec.delta);
    out.stop_index = fst.stop_index;
    for (std::size_t i = 0; i < ordered.size() && i <= fst.stop_index; ++i) out.testing_pvalues[ordered[i].grid_index] = ps[i];
    for (const auto i : fst.rejected) out.rejected.push_back(ordered[i].grid_index);
    if (fst.stop_index < ordered.size())
        out.stopping_objective =
            binding_objective(d.spec, objective_pvalues(d, ordered[fst.stop_index].grid_index, Portion::test));
    out.ordered_candidates = std::move(ordered);
    finish_selection(d, out, Portion::test);
    return out;
}

const ConfigGrid& require_grid(const CalibrationData& d, const char* who) {
    if (!d.table->grid()) throw std::invalid_argument(std::string(who) + ": loss table has no grid");
    if (d.table->grid()->size() != d.config_count())
        throw std::invalid_argument(std::string(who) + ": grid size does not match table");
    return *d.table->grid();
}

// Free objectives lexicographically, then the first controlled risk, then index.
bool better(const std::vector<std::vector<double>>& means, std::size_t c_count, std::size_t a, std::size_t b) {
    for (std::size_t o = c_count; o < means.size(); ++o) {
        if (means[o][a] != means[o][b]) return means[o][a] < means[o][b];
    }
    if (means[0][a] != means[0][b]) return means[0][a] < means[0][b];
    return a < b;
}

template <typename Feasible>
std::optional<std::size_t> constrained_argmin(const std::vector<std::vector<double>>& means, std::size_t c_count,
                                              std::size_t n_configs, Feasible feasible) {
    std::optional<std::size_t> best;
    for (std::size_t c = 0; c < n_configs; ++c) {
        if (!feasible(c)) continue;
        if (!best || better(means, c_count, c, *best)) best = c;
    }
    return best;
}

std::optional<std::size_t> eq3_solution(const std::vector<std::vector<double>>& means, const CalibrationSpec& spec,
                                        std::size_t n_configs, double eps) {
    const auto alphas = spec.alphas();
    return constrained_argmin(means, alphas.size(), n_configs, [&](std::size_t c) {
        for (std::size_t i = 0; i < alphas.size(); ++i)
            if (!(means[i][c] < alphas[i] - eps)) return false;
        return true;
    });
}

std::vector<int> forward_directions(const ConfigGrid& grid, std::span<const std::size_t> corner) {
    const auto shape = grid.shape();
    std::vector<int> fw(shape.size());
    for (std::size_t d = 0; d < shape.size(); ++d) {
        if (corner[d] == 0) fw[d] = 1;
        else if (corner[d] == shape[d] - 1) fw[d] = -1;
        else throw std::invalid_argument("corner must sit on a grid corner");
    }
    return fw;
}

std::vector<std::size_t> corner_of(const CalibrationSpec& spec, const ConfigGrid& grid) {
    if (spec.sgt_corner) {
        if (spec.sgt_corner->size() != grid.dimension_count())
            throw std::invalid_argument("sgt_corner rank does not match grid");
        return *spec.sgt_corner;
    }
    return std::vector<std::size_t>(grid.dimension_count(), 0);
}

}  // namespace

// ---------------------------------------------------------------------------

TestOutcome pareto_testing(const CalibrationData& d) {
    std::vector<ObjectivePoint> pts(d.config_count());
    for (std::size_t c = 0; c < pts.size(); ++c) {
        pts[c].grid_index = c;
        for (const auto& row : d.opt_means) pts[c].values.push_back(row[c]);
    }
    const auto front = pareto_front(pts);
    auto ordered = order_by_pvalue(front, d.spec.alphas(), d.m1(), d.spec.pvalue_kind,
                                   std::numeric_limits<std::size_t>::max());
    if (d.spec.prune_front) ordered = prune_front(ordered);
    if (ordered.size() > d.spec.front_budget) ordered.resize(d.spec.front_budget);
    auto out = test_sequence(d, "pareto_testing", std::move(ordered));
    out.notes.push_back("front_size=" + std::to_string(front.size()));
    return out;
}

TestOutcome pareto_testing(const LossTable& table, const CalibrationSpec& spec, std::uint64_t split_seed) {
    return pareto_testing(CalibrationData::build(table, spec, split_seed));
}

TestOutcome split_fst_baseline(const CalibrationData& d) {
    const std::size_t n = d.config_count();
    std::vector<std::vector<double>> pv(n);
    for (std::size_t c = 0; c < n; ++c) pv[c] = objective_pvalues(d, c, Portion::opt);

    const auto steps = static_cast<std::size_t>(std::llround(1.0 / d.spec.beta_step));
    std::vector<bool> taken(n, false);
    std::vector<Candidate> ordered;
    for (std::size_t s = 0; s <= steps; ++s) {
        const double beta = std::min(1.0, static_cast<double>(s) * d.spec.beta_step);
        std::size_t best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < n; ++c) {
            double dist = 0.0;
            for (const double p : pv[c]) dist = std::max(dist, std::abs(p - beta));
            if (dist < best_dist) {
                best_dist = dist;
                best = c;
            }
        }
        if (taken[best]) continue;
        taken[best] = true;
        ordered.push_back(make_candidate(d, best));
    }
    return test_sequence(d, "split_fst", std::move(ordered));
}

TestOutcome split_fst_baseline(const LossTable& table, const CalibrationSpec& spec, std::uint64_t split_seed) {
    return split_fst_baseline(CalibrationData::build(table, spec, split_seed));
}

TestOutcome sgt_hamming(const CalibrationData& d) {
    const auto& grid = require_grid(d, "sgt_3d");
    const auto corner = corner_of(d.spec, grid);
    const auto shape = grid.shape();
    const auto g = build_hamming_graph(shape, corner, d.spec.delta);
    std::vector<double> ps(d.config_count());
    for (std::size_t c = 0; c < ps.size(); ++c) ps[c] = combined_pvalue(d, c, Portion::full);
    const auto r = sgt(g, ps, d.spec.delta);

    TestOutcome out;
    out.method = "sgt_3d";
    out.rejected = r.rejected;
    out.stop_index = r.rejected.size();
    for (const auto c : r.rejected) out.testing_pvalues[c] = ps[c];
    finish_selection(d, out, Portion::full);
    return out;
}

TestOutcome bonferroni_baseline(const CalibrationData& d) {
    std::vector<double> ps(d.config_count());
    for (std::size_t c = 0; c < ps.size(); ++c) ps[c] = combined_pvalue(d, c, Portion::full);
    TestOutcome out;
    out.method = "bonferroni";
    out.rejected = bonferroni(ps, d.spec.delta, ps.size());
    out.stop_index = out.rejected.size();
    for (const auto c : out.rejected) out.testing_pvalues[c] = ps[c];
    finish_selection(d, out, Portion::full);
    return out;
}

std::vector<std::size_t> create_path(const ConfigGrid& grid, std::span<const std::size_t> start,
                                     std::span<const std::size_t> end, std::span<const int> forward,
                                     std::span<const double> score) {
    const std::size_t n = grid.dimension_count();
    std::vector<std::size_t> cur(start.begin(), start.end());
    std::vector<std::size_t> path{grid.ravel(cur)};
    auto remaining = [&](std::size_t d) {
        return forward[d] > 0 ? cur[d] < end[d] : cur[d] > end[d];
    };
    for (std::size_t d = 0; d < n; ++d) {
        const bool ok = forward[d] > 0 ? start[d] <= end[d] : start[d] >= end[d];
        if (!ok) throw std::invalid_argument("create_path: end is not forward of start");
    }
    while (true) {
        std::size_t best_dim = n;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t d = 0; d < n; ++d) {
            if (!remaining(d)) continue;
            auto next = cur;
            next[d] = forward[d] > 0 ? next[d] + 1 : next[d] - 1;
            const double s = score[grid.ravel(next)];
            if (best_dim == n || s < best) {
                best = s;
                best_dim = d;
            }
        }
        if (best_dim == n) break;
        cur[best_dim] = forward[best_dim] > 0 ? cur[best_dim] + 1 : cur[best_dim] - 1;
        path.push_back(grid.ravel(cur));
    }
    return path;
}

TestOutcome low_risk_path(const CalibrationData& d) {
    const auto& grid = require_grid(d, "low_risk_path");
    const auto start = corner_of(d.spec, grid);
    const auto fw = forward_directions(grid, start);
    const auto shape = grid.shape();
    std::vector<std::size_t> far(shape.size());
    for (std::size_t k = 0; k < shape.size(); ++k) far[k] = fw[k] > 0 ? shape[k] - 1 : 0;

    std::vector<double> score(d.config_count());
    for (std::size_t c = 0; c < score.size(); ++c) score[c] = combined_pvalue(d, c, Portion::opt);

    std::vector<std::size_t> path;
    std::vector<std::string> notes;
    if (const auto opt = eq3_solution(d.opt_means, d.spec, d.config_count(), 0.0)) {
        const auto mid = grid.unravel(*opt);
        path = create_path(grid, start, mid, fw, score);
        const auto tail = create_path(grid, mid, far, fw, score);
        path.insert(path.end(), tail.begin() + 1, tail.end());
        notes.push_back("tau_opt=" + std::to_string(*opt));
    } else {
        path = create_path(grid, start, far, fw, score);
        notes.emplace_back("constrained problem infeasible on the optimization split; full path used");
    }
    std::vector<Candidate> ordered;
    for (const auto c : path) ordered.push_back(make_candidate(d, c));
    auto out = test_sequence(d, "low_risk_path", std::move(ordered));
    out.notes.insert(out.notes.begin(), notes.begin(), notes.end());
    return out;
}

TestOutcome low_risk_path(const LossTable& table, const CalibrationSpec& spec, std::uint64_t split_seed) {
    return low_risk_path(CalibrationData::build(table, spec, split_seed));
}

TestOutcome constrained_path(const CalibrationData& d) {
    const auto alphas = d.spec.alphas();
    const double top = *std::min_element(alphas.begin(), alphas.end());
    const std::size_t steps = d.spec.eps_steps;
    std::vector<bool> taken(d.config_count(), false);
    std::vector<Candidate> ordered;
    std::size_t infeasible = 0;
    for (std::size_t s = 0; s < steps; ++s) {
        const double eps = s + 1 == steps ? 0.0 : top * (1.0 - static_cast<double>(s) / static_cast<double>(steps - 1));
        const auto sol = eq3_solution(d.opt_means, d.spec, d.config_count(), eps);
        if (!sol) {
            ++infeasible;
            continue;
        }
        if (taken[*sol]) continue;
        taken[*sol] = true;
        ordered.push_back(make_candidate(d, *sol));
    }
    auto out = test_sequence(d, "constrained_path", std::move(ordered));
    out.notes.push_back("infeasible_eps=" + std::to_string(infeasible));
    return out;
}

TestOutcome constrained_path(const LossTable& table, const CalibrationSpec& spec, std::uint64_t split_seed) {
    return constrained_path(CalibrationData::build(table, spec, split_seed));
}

namespace {

std::optional<std::size_t> alpha_constrained_on(const std::vector<std::vector<double>>& means,
                                                const CalibrationSpec& spec, std::size_t n) {
    return eq3_solution(means, spec, n, 0.0);
}

std::optional<std::size_t> alpha_delta_on(const std::vector<std::vector<double>>& means, const CalibrationSpec& spec,
                                          std::size_t n, std::size_t m) {
    const auto alphas = spec.alphas();
    return constrained_argmin(means, alphas.size(), n, [&](std::size_t c) {
        double p = 0.0;
        for (std::size_t i = 0; i < alphas.size(); ++i) p = std::max(p, pvalue(spec.pvalue_kind, means[i][c], alphas[i], m));
        return p < spec.delta;
    });
}

std::vector<std::vector<double>> all_means(const LossTable& table, const CalibrationSpec& spec) {
    std::vector<std::size_t> rows(table.example_count());
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<std::vector<double>> means;
    for (const auto& id : spec.objective_ids()) means.push_back(table.column_means(table.objective_index(id), rows));
    return means;
}

TestOutcome single_outcome(const CalibrationData& d, std::string method, std::optional<std::size_t> pick) {
    TestOutcome out;
    out.method = std::move(method);
    if (pick) {
        out.rejected = {*pick};
        out.selected = {*pick};
        out.stop_index = 1;
        const auto ps = objective_pvalues(d, *pick, Portion::full);
        out.testing_pvalues[*pick] = combine_max(ps);
        out.binding_objectives.push_back(binding_objective(d.spec, ps));
        attach_configs(d, out);
    } else {
        out.notes.emplace_back("infeasible: no configuration meets the constraints");
    }
    out.notes.emplace_back("no FWER control");
    return out;
}

}  // namespace

std::optional<std::size_t> alpha_constrained(const LossTable& table, const CalibrationSpec& spec) {
    spec.validate();
    return alpha_constrained_on(all_means(table, spec), spec, table.config_count());
}

std::optional<std::size_t> alpha_delta_constrained(const LossTable& table, const CalibrationSpec& spec) {
    spec.validate();
    return alpha_delta_on(all_means(table, spec), spec, table.config_count(), table.example_count());
}

TestOutcome alpha_constrained_outcome(const CalibrationData& d) {
    return single_outcome(d, "alpha_constrained", alpha_constrained_on(d.full_means, d.spec, d.config_count()));
}

TestOutcome alpha_delta_constrained_outcome(const CalibrationData& d) {
    return single_outcome(d, "alpha_delta_constrained", alpha_delta_on(d.full_means, d.spec, d.config_count(), d.m()));
}

// ---------------------------------------------------------------------------

TestOutcome pareto_testing_search(const ConfigEvaluator& eval, const CalibrationSpec& spec,
                                  std::uint64_t split_seed, const EvalBudget& budget, const ConfigGrid* grid) {
    spec.validate();
    const auto split = make_split(eval.example_count(), spec.split_fraction, split_seed);
    const auto ids = spec.objective_ids();
    const auto alphas = spec.alphas();
    const std::size_t c_count = alphas.size();

    const ObjectiveFn fn = [&](const ConfigPoint& p) { return eval.mean_losses(p, ids, split.opt); };
    const auto bounds = eval.bounds();
    const auto result = scalarized_search(fn, bounds, budget, grid);

    std::vector<ObjectivePoint> pts;
    for (std::size_t i = 0; i < result.front.size(); ++i) pts.push_back({i, result.front[i].values});
    auto ordered = order_by_pvalue(pts, alphas, split.opt.size(), spec.pvalue_kind,
                                   std::numeric_limits<std::size_t>::max());
    if (spec.prune_front) ordered = prune_front(ordered);
    if (ordered.size() > spec.front_budget) ordered.resize(spec.front_budget);

    TestOutcome out;
    out.method = "pareto_testing_search";
    std::vector<std::vector<double>> test_values;
    std::vector<double> ps;
    for (const auto& c : ordered) {
        auto v = eval.mean_losses(result.front[c.grid_index].config, ids, split.test);
        std::vector<double> pi(c_count);
        for (std::size_t i = 0; i < c_count; ++i) pi[i] = pvalue(spec.pvalue_kind, v[i], alphas[i], split.test.size());
        ps.push_back(combine_max(pi));
        test_values.push_back(std::move(v));
    }
    const auto fst = fixed_sequence_test(ps, spec.delta);
    out.stop_index = fst.stop_index;
    for (std::size_t i = 0; i < ordered.size() && i <= fst.stop_index; ++i) out.testing_pvalues[ordered[i].grid_index] = ps[i];
    std::vector<std::vector<double>> free_values;
    for (const auto i : fst.rejected) {
        out.rejected.push_back(ordered[i].grid_index);
        free_values.emplace_back(test_values[i].begin() + static_cast<std::ptrdiff_t>(c_count), test_values[i].end());
    }
    if (fst.stop_index < ordered.size()) {
        std::vector<double> pi(c_count);
        for (std::size_t i = 0; i < c_count; ++i)
            pi[i] = pvalue(spec.pvalue_kind, test_values[fst.stop_index][i], alphas[i], split.test.size());
        out.stopping_objective = binding_objective(spec, pi);
    }
    out.selected = select_final(out.rejected, free_values);
    for (const auto id : out.selected) {
        const auto pos = static_cast<std::size_t>(
            std::find_if(ordered.begin(), ordered.end(), [&](const Candidate& c) { return c.grid_index == id; }) -
            ordered.begin());
        std::vector<double> pi(c_count);
        for (std::size_t i = 0; i < c_count; ++i)
            pi[i] = pvalue(spec.pvalue_kind, test_values[pos][i], alphas[i], split.test.size());
        out.binding_objectives.push_back(binding_objective(spec, pi));
    }
    for (const auto& c : ordered) out.configs.emplace(c.grid_index, result.front[c.grid_index].config);
    out.ordered_candidates = std::move(ordered);
    out.notes.push_back("evaluations=" + std::to_string(result.evaluations));
    out.notes.push_back("front_size=" + std::to_string(result.front.size()));
    if (out.selected.empty()) out.notes.emplace_back("abstained: no hypothesis rejected");
    return out;
}

// ---------------------------------------------------------------------------

bool is_known_method(std::string_view id) {
    if (id == "pareto_testing_search") return true;
    return std::find(std::begin(kGridMethods), std::end(kGridMethods), id) != std::end(kGridMethods);
}

bool controls_fwer(std::string_view id) { return id != "alpha_constrained" && id != "alpha_delta_constrained"; }

TestOutcome run_method(std::string_view id, const CalibrationData& data) {
    if (id == "pareto_testing") return pareto_testing(data);
    if (id == "split_fst") return split_fst_baseline(data);
    if (id == "sgt_3d") return sgt_hamming(data);
    if (id == "bonferroni") return bonferroni_baseline(data);
    if (id == "low_risk_path") return low_risk_path(data);
    if (id == "constrained_path") return constrained_path(data);
    if (id == "alpha_constrained") return alpha_constrained_outcome(data);
    if (id == "alpha_delta_constrained") return alpha_delta_constrained_outcome(data);
    throw std::invalid_argument("unknown grid method '" + std::string(id) + "'");
}

// ---------------------------------------------------------------------------

void SimplexWeights::validate() const {
    if (weights.empty()) throw std::invalid_argument("SimplexWeights: empty");
    double s = 0.0;
    for (const double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("SimplexWeights: negative weight");
        s += w;
    }
    if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("SimplexWeights: weights do not sum to 1");
}

std::vector<std::size_t> time_share(std::span<const std::size_t> selected, const SimplexWeights& weights,
                                    std::size_t example_count, std::uint64_t seed) {
    weights.validate();
    if (weights.weights.size() != selected.size())
        throw std::invalid_argument("time_share: weight count does not match selection");
    std::vector<double> cum(weights.weights.size());
    std::partial_sum(weights.weights.begin(), weights.weights.end(), cum.begin());
    // The last category with positive weight absorbs rounding in the cumulative sum.
    std::size_t last = 0;
    for (std::size_t j = 0; j < cum.size(); ++j)
        if (weights.weights[j] > 0.0) last = j;
    Rng rng(derive_seed(seed, Stream::time_share));
    std::vector<std::size_t> out(example_count);
    for (auto& a : out) {
        const double u = rng.uniform();
        std::size_t j = 0;
        while (j < last && !(u < cum[j])) ++j;
        a = j;
    }
    return out;
}

}  // namespace ptest
