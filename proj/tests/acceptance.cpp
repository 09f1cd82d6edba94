// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: acceptance [criterion numbers...]   (all when none given)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ptest/cli.hpp"
#include "ptest/harness.hpp"
#include "ptest/objectives.hpp"
#include "ptest/pareto.hpp"
#include "ptest/pvalues.hpp"
#include "ptest/rng.hpp"
#include "ptest/simulator.hpp"
#include "ptest/testing.hpp"

using namespace ptest;

namespace {

struct Verdict {
    bool pass = true;
    std::vector<std::string> lines;
};

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void check(Verdict& v, bool ok, const std::string& what) {
    v.pass = v.pass && ok;
    v.lines.push_back(std::string(ok ? "  ok   " : "  FAIL ") + what);
}

double slack(double delta, std::size_t n) { return delta + 2.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(n)); }

const std::vector<std::string> kControlling = {"pareto_testing", "bonferroni",    "split_fst",
                                               "sgt_3d",         "low_risk_path", "constrained_path"};

// ---------------------------------------------------------------------------

Verdict criterion1() {
    Verdict v;
    const auto src = default_simulator_source();
    const std::vector<CalibrationSpec> specs = {default_spec().with_alpha(0, 0.05)};
    const std::size_t n = 500;
    const auto run = run_trials(src, kControlling, specs, n, 101);
    const double bound = slack(0.1, n);
    for (const auto& m : kControlling) {
        const auto reps = filter_reports(run.reports, m);
        const auto sel = violation_rate(reps);
        const auto fwer = violation_rate(reps, true);
        check(v, sel.rate <= bound && fwer.rate <= bound,
              m + ": violation rate " + fmt(sel.rate) + " <= " + fmt(bound) + " (rejected-set FWER " +
                  fmt(fwer.rate) + ", abstained " + std::to_string(sel.abstained) + "/" + std::to_string(n) + ")");
    }
    return v;
}

Verdict criterion2() {
    Verdict v;
    const std::size_t configs = 200, calibration = 200, heldout = 10000, rows = calibration + heldout;
    Rng rng(202);
    std::vector<double> risk(rows * configs), cost(rows * configs);
    for (std::size_t e = 0; e < rows; ++e)
        for (std::size_t k = 0; k < configs; ++k) {
            risk[e * configs + k] = rng.bernoulli(0.1) ? 1.0 : 0.0;
            cost[e * configs + k] = static_cast<double>(k + 1) / static_cast<double>(configs);
        }
    std::vector<std::vector<double>> dims(1);
    for (std::size_t k = 0; k < configs; ++k) dims[0].push_back(static_cast<double>(k));
    const auto table = std::make_shared<const LossTable>(std::vector<std::string>{"risk", "cost"}, rows, configs,
                                                         std::vector<std::vector<double>>{risk, cost},
                                                         ConfigGrid(dims));
    CalibrationSpec spec;
    spec.objectives = {{"risk", ObjectiveKind::controlled, 0.1}, {"cost", ObjectiveKind::free, std::nullopt}};
    spec.delta = 0.1;
    const std::vector<CalibrationSpec> specs = {spec};
    const std::vector<std::string> methods = {"alpha_constrained", "alpha_delta_constrained", "pareto_testing"};
    const std::size_t n = 500;
    const auto run = run_trials(TableSource{table, calibration}, methods, specs, n, 202);
    const auto naive = violation_rate(filter_reports(run.reports, "alpha_constrained"));
    check(v, naive.lower_95 > 0.1,
          "alpha_constrained: violation rate " + fmt(naive.rate) + ", 95% lower bound " + fmt(naive.lower_95) +
              " > 0.1");
    const auto ad = violation_rate(filter_reports(run.reports, "alpha_delta_constrained"));
    const auto pt = violation_rate(filter_reports(run.reports, "pareto_testing"));
    v.lines.push_back("  info alpha_delta_constrained rate " + fmt(ad.rate) + ", pareto_testing rate " +
                      fmt(pt.rate));
    return v;
}

Verdict criterion3() {
    Verdict v;
    constexpr std::size_t draws = 100000, m = 50;
    auto binom = [&](Rng& rng, double a) {
        std::size_t k = 0;
        for (std::size_t i = 0; i < m; ++i) k += rng.bernoulli(a) ? 1 : 0;
        return static_cast<double>(k) / static_cast<double>(m);
    };
    auto worst_excess = [&](std::vector<double>& ps) {
        std::sort(ps.begin(), ps.end());
        double worst = -1.0;
        bool ok = true;
        for (int i = 1; i <= 99; ++i) {
            const double u = i / 100.0;
            const auto hits = static_cast<double>(std::upper_bound(ps.begin(), ps.end(), u) - ps.begin());
            const double emp = hits / static_cast<double>(draws);
            const double lim = u + 3.0 * std::sqrt(u * (1.0 - u) / static_cast<double>(draws));
            worst = std::max(worst, emp - lim);
            ok = ok && emp <= lim;
        }
        return std::make_pair(ok, worst);
    };
    for (const auto kind : {PValueKind::hoeffding, PValueKind::hoeffding_bentkus}) {
        for (const double alpha : {0.1, 0.2}) {
            Rng rng(derive_seed(303, static_cast<std::uint64_t>(kind) * 10 + static_cast<std::uint64_t>(alpha * 10)));
            std::vector<double> single(draws), combined(draws);
            for (std::size_t d = 0; d < draws; ++d) {
                single[d] = pvalue(kind, binom(rng, alpha), alpha, m);
                double mx = 0.0;
                for (int s = 0; s < 3; ++s) mx = std::max(mx, pvalue(kind, binom(rng, alpha), alpha, m));
                combined[d] = mx;
            }
            const auto [ok1, w1] = worst_excess(single);
            const auto [ok3, w3] = worst_excess(combined);
            const std::string name = std::string(to_string(kind)) + " alpha=" + fmt(alpha, 2);
            check(v, ok1, name + ": max over u of P(p<=u) - bound = " + fmt(w1, 5));
            check(v, ok3, name + " combine_max x3: max over u of P(p<=u) - bound = " + fmt(w3, 5));
        }
    }
    return v;
}

Verdict criterion4() {
    Verdict v;
    const auto src = default_simulator_source();
    const std::vector<double> alphas = {0.025, 0.05, 0.1, 0.15, 0.2};
    std::vector<CalibrationSpec> specs;
    for (const double a : alphas) specs.push_back(default_spec().with_alpha(0, a));
    const std::vector<std::string> methods = {"pareto_testing", "bonferroni", "split_fst"};
    const auto run = run_trials(src, methods, specs, 100, 404);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        std::map<std::string, EfficiencySummary> e;
        for (const auto& m : methods) e[m] = efficiency_summary(filter_reports(run.reports, m, i));
        const double pt = e["pareto_testing"].free[0].mean_with_fallback;
        const double bf = e["bonferroni"].free[0].mean_with_fallback;
        const double sf = e["split_fst"].free[0].mean_with_fallback;
        check(v, pt <= bf && pt <= sf + 0.02,
              "alpha=" + fmt(alphas[i], 3) + ": cost pareto " + fmt(pt) + ", bonferroni " + fmt(bf) +
                  ", split_fst " + fmt(sf) + " (abstention " + fmt(e["pareto_testing"].abstention_rate, 2) + "/" +
                  fmt(e["bonferroni"].abstention_rate, 2) + "/" + fmt(e["split_fst"].abstention_rate, 2) + ")");
    }
    return v;
}

Verdict criterion5() {
    Verdict v;
    // (a) fronts against brute force.
    Rng rng(505);
    std::size_t mismatches = 0;
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t n = 1 + rng.below(1000), dim = 1 + rng.below(4);
        const bool coarse = inst % 3 == 0;
        std::vector<ObjectivePoint> pts(n);
        std::vector<std::vector<double>> raw(n);
        for (std::size_t i = 0; i < n; ++i) {
            pts[i].grid_index = i;
            for (std::size_t d = 0; d < dim; ++d)
                pts[i].values.push_back(coarse ? static_cast<double>(rng.below(8)) / 7.0 : rng.uniform());
            raw[i] = pts[i].values;
        }
        mismatches += pareto_front_positions(pts) == oracle::brute_front(raw) ? 0 : 1;
    }
    check(v, mismatches == 0, "(a) pareto_front vs brute force: " + std::to_string(mismatches) + "/200 mismatches");

    // (b) HB against exact arithmetic.
    double worst = 0.0;
    std::size_t points = 0;
    for (const std::size_t m : {1u, 10u, 37u, 100u, 200u}) {
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                const double r = i / 9.0;
                const double alpha = 0.01 + 0.98 * j / 9.0;
                worst = std::max(worst, std::abs(hb_pvalue(r, alpha, m) - oracle::hb_exact(r, alpha, m)));
                ++points;
            }
        }
    }
    check(v, worst <= 1e-10,
          "(b) hb_pvalue vs exact, " + std::to_string(points) + " points, m <= 200: max error " + sci(worst));

    // (c) worst-class reduction.
    std::size_t bad = 0;
    double worst_c = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t n = 20 + rng.below(400), classes = 2 + rng.below(4);
        std::vector<ExampleRecord> recs(n);
        for (auto& r : recs) {
            r.full_correct = rng.bernoulli(0.9);
            r.pruned_correct = rng.bernoulli(0.85);
            r.label = rng.below(classes);
        }
        const double alpha = 0.05 + 0.2 * rng.uniform();
        for (const auto kind : {PValueKind::hoeffding, PValueKind::hoeffding_bentkus}) {
            double max_p = 0.0;
            for (std::size_t y = 0; y < classes; ++y) {
                std::vector<double> l;
                for (const auto& r : recs) l.push_back(class_accuracy_loss(r, y, alpha));
                max_p = std::max(max_p, pvalue(kind, empirical_risk(l), alpha, n));
            }
            const double single = pvalue(kind, worst_class_empirical_risk(recs, alpha, classes), alpha, n);
            const double err = std::abs(single - max_p);
            worst_c = std::max(worst_c, err);
            bad += err <= 1e-12 ? 0 : 1;
        }
    }
    check(v, bad == 0, "(c) max class p-value vs p of worst-class risk, 100 sets x 2 kinds: max diff " +
                           sci(worst_c));
    return v;
}

Verdict criterion6() {
    Verdict v;
    Rng rng(606);
    // FST prefix property.
    std::size_t fst_bad = 0;
    for (int t = 0; t < 10000; ++t) {
        std::vector<double> p(1 + rng.below(50));
        for (auto& x : p) x = std::pow(rng.uniform(), 3.0);
        const auto r = fixed_sequence_test(p, 0.1);
        bool ok = r.rejected.size() == r.stop_index;
        for (std::size_t i = 0; i < r.rejected.size(); ++i) ok = ok && r.rejected[i] == i && p[i] < 0.1;
        if (r.stop_index < p.size()) ok = ok && p[r.stop_index] >= 0.1;
        fst_bad += ok ? 0 : 1;
    }
    check(v, fst_bad == 0, "FST prefix property on 10^4 sequences: " + std::to_string(fst_bad) + " failures");

    // SGT budget conservation on random graphs.
    std::size_t sgt_bad = 0;
    double max_live = 0.0;
    for (int t = 0; t < 2000; ++t) {
        const std::size_t n = 2 + rng.below(30);
        BudgetGraph g;
        std::vector<double> a(n);
        for (auto& x : a) x = rng.bernoulli(0.5) ? rng.uniform() : 0.0;
        a[0] += 1e-3;
        const double s = std::accumulate(a.begin(), a.end(), 0.0);
        for (auto& x : a) x *= 0.1 / s;
        a[0] = 0.1 - std::accumulate(a.begin() + 1, a.end(), 0.0);
        g.initial_budgets = a;
        g.edges.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::size_t> to;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i && rng.bernoulli(0.3)) to.push_back(j);
            double left = rng.bernoulli(0.5) ? 1.0 : rng.uniform();
            for (std::size_t q = 0; q < to.size(); ++q) {
                const double w = q + 1 == to.size() ? left : left * rng.uniform();
                g.edges[i].emplace_back(to[q], w);
                left -= w;
            }
        }
        std::vector<double> p(n);
        for (auto& x : p) x = 0.1 * std::pow(rng.uniform(), 2.0);
        const auto r = sgt(g, p, 0.1);
        for (std::size_t k = 0; k < r.live_budget_trace.size(); ++k) {
            max_live = std::max(max_live, r.live_budget_trace[k]);
            const bool ok = r.live_budget_trace[k] <= 0.1 + 1e-12 &&
                            std::abs(r.live_budget_trace[k] + r.dissipated_trace[k] - 0.1) <= 1e-12;
            sgt_bad += ok ? 0 : 1;
        }
    }
    check(v, sgt_bad == 0, "SGT live budget <= delta + 1e-12 at every step of 2000 graphs: " +
                               std::to_string(sgt_bad) + " failures (max " + fmt(max_live, 15) + ")");

    // Chain SGT equals FST.
    std::size_t chain_bad = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 1 + rng.below(40);
        BudgetGraph g;
        g.initial_budgets.assign(n, 0.0);
        g.initial_budgets[0] = 0.1;
        g.edges.resize(n);
        for (std::size_t i = 0; i + 1 < n; ++i) g.edges[i] = {{i + 1, 1.0}};
        std::vector<double> p(n);
        for (auto& x : p) x = 0.12 * std::sqrt(rng.uniform());
        chain_bad += sgt(g, p, 0.1).rejected == fixed_sequence_test(p, 0.1).rejected ? 0 : 1;
    }
    check(v, chain_bad == 0, "chain SGT == FST on 10^3 instances: " + std::to_string(chain_bad) + " mismatches");

    // Time sharing on simulator records.
    const auto model = SimModel::create(SimModelSpec{});
    const auto grid = benchmark_grid();
    const std::size_t n = 50000;
    const auto exs = sample_examples(model, n, 606);
    const std::size_t picks[] = {grid.size() / 3, grid.size() - 1};
    const auto losses = default_losses();
    std::vector<std::vector<double>> l(2, std::vector<double>(n)), c(2, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const auto rec = evaluate_config(exs[i], model, grid.point(picks[j]));
            l[j][i] = losses[0](rec);
            c[j][i] = losses[1](rec);
        }
    const auto single = time_share(picks, {{1.0, 0.0}}, n, 7);
    bool identical = true;
    for (std::size_t i = 0; i < n; ++i) {
        const auto rec = evaluate_config(exs[i], model, grid.point(picks[single[i]]));
        identical = identical && losses[0](rec) == l[0][i] && losses[1](rec) == c[0][i];
    }
    check(v, identical, "time-share with weights (1,0) is bit-identical to the single configuration");

    const double w[] = {0.3, 0.7};
    const auto mix = time_share(picks, {{w[0], w[1]}}, n, 8);
    bool within = true;
    std::string detail;
    for (const auto* loss : {&l, &c}) {
        double diff_sum = 0.0, diff_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double target = w[0] * (*loss)[0][i] + w[1] * (*loss)[1][i];
            const double d = (*loss)[mix[i]][i] - target;
            diff_sum += d;
            diff_sq += d * d;
        }
        const double mean = diff_sum / n;
        const double sigma = std::sqrt((diff_sq / n - mean * mean) / n);
        within = within && std::abs(mean) <= 3.0 * sigma;
        detail += " " + fmt(std::abs(mean), 5) + " <= 3*" + fmt(sigma, 5) + ";";
    }
    check(v, within, "time-share mixture risk identity (accuracy, cost):" + detail);
    return v;
}

Verdict criterion7() {
    Verdict v;
    SimModelSpec s;
    s.layers = 2;
    s.heads = 2;
    s.min_tokens = 1;
    s.max_tokens = 4;
    const auto m = SimModel::with_heads(s, {{0.7, 0.3}, {0.5, 0.5}});
    SimExample ex;
    ex.token_scores = {{0.9, 0.8, 0.1, 0.2}, {0.9, 0.8, 0.7, 0.6}};
    ex.layer_entropy_scores = {0.1, 0.9};
    ex.finalize();
    const double rho = cost_ratio(ex, m, ConfigPoint{{0.5, 0.5, 0.4}, {}});
    check(v, rho == 0.0625, "cost ratio K=2, W=2, L=4, exit 1, W1=1, L1=2: " + fmt(rho, 17) + " == 0.0625");

    const double h = hoeffding_pvalue(0.05, 0.1, 100);
    check(v, std::abs(h - std::exp(-0.5)) <= 1e-12, "hoeffding(0.05, 0.1, 100) = " + fmt(h, 15) + " vs exp(-0.5)");

    SimExample tok;
    tok.token_scores = {{0.9, 0.2, 0.7}, {0.8, 0.9, 0.1}};
    tok.layer_entropy_scores = {0.9, 0.3, 0.1};
    tok.finalize();
    const auto l = token_counts(tok, 0.5);
    check(v, l == std::vector<std::size_t>{2, 1}, "token counts at tau 0.5: (" + std::to_string(l[0]) + ", " +
                                                      std::to_string(l[1]) + ") == (2, 1)");
    const auto k = exit_layer(tok, 0.5);
    check(v, k == 2, "exit layer for [0.9, 0.3, 0.1] at tau 0.5: " + std::to_string(k) + " == 2");
    s.layers = 1;
    s.heads = 3;
    const auto hm = SimModel::with_heads(s, {{0.5, 0.3, 0.2}});
    const auto w = head_counts(hm, 0.25);
    check(v, w == std::vector<std::size_t>{2}, "heads [0.5, 0.3, 0.2] at tau 0.25: " + std::to_string(w[0]) + " == 2");
    return v;
}

Verdict criterion8() {
    Verdict v;
    SimModelSpec ms;
    ms.class_count = 3;
    ms.class_difficulty = {1.0, 1.5, 2.5};
    ms.seed = 8;
    const double alpha2 = 0.15;
    SimulatorSource src{SimModel::create(ms), benchmark_grid(), {}, 2000, 200000};
    src.losses.push_back({"accuracy_reduction", LossType::accuracy_reduction});
    for (std::size_t y = 0; y < 3; ++y)
        src.losses.push_back({"class_" + std::to_string(y), LossType::class_accuracy_reduction, y, alpha2});
    src.losses.push_back({"cost", LossType::cost});

    const std::vector<double> alpha1 = {0.025, 0.05, 0.075, 0.1, 0.15};
    std::vector<CalibrationSpec> specs;
    for (const double a : alpha1) {
        CalibrationSpec s;
        s.objectives = {{"accuracy_reduction", ObjectiveKind::controlled, a},
                        {"class_0", ObjectiveKind::controlled, alpha2},
                        {"class_1", ObjectiveKind::controlled, alpha2},
                        {"class_2", ObjectiveKind::controlled, alpha2},
                        {"cost", ObjectiveKind::free, std::nullopt}};
        s.delta = 0.1;
        specs.push_back(s);
    }
    const std::size_t n = 500;
    const std::vector<std::string> methods = {"pareto_testing"};
    const auto run = run_trials(src, methods, specs, n, 808);
    const double bound = slack(0.1, n);
    for (std::size_t i = 0; i < alpha1.size(); ++i) {
        const auto reps = filter_reports(run.reports, "pareto_testing", i);
        const auto joint = violation_rate(reps);
        const auto fwer = violation_rate(reps, true);
        std::size_t mean_binding = 0, selections = 0, mean_stopping = 0, stops = 0;
        for (const auto& r : reps) {
            for (const auto& b : r.binding_objectives) {
                ++selections;
                mean_binding += b == "accuracy_reduction" ? 1 : 0;
            }
            if (!r.stopping_objective.empty()) {
                ++stops;
                mean_stopping += r.stopping_objective == "accuracy_reduction" ? 1 : 0;
            }
        }
        auto share = [](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
        const auto e = efficiency_summary(reps);
        check(v, joint.rate <= bound && fwer.rate <= bound,
              "alpha1=" + fmt(alpha1[i], 3) + ": joint violation rate " + fmt(joint.rate) + ", rejected-set FWER " +
                  fmt(fwer.rate) + " <= " + fmt(bound) + " (cost " + fmt(e.free[0].mean_with_fallback) + ")");
        const std::string shares = "mean accuracy stops testing in " + fmt(share(mean_stopping, stops), 3) + " of " +
                                   std::to_string(stops) + " trials, carries the max p-value of the selection in " +
                                   fmt(share(mean_binding, selections), 3);
        if (alpha1[i] <= 0.05)
            check(v, stops > 0 && share(mean_stopping, stops) >= 0.9,
                  "alpha1=" + fmt(alpha1[i], 3) + ": " + shares + " (stopping share >= 0.9)");
        else
            v.lines.push_back("  info alpha1=" + fmt(alpha1[i], 3) + ": " + shares);
    }
    return v;
}

double median(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

Verdict criterion9() {
    Verdict v;
    const auto src = default_simulator_source();
    const std::vector<CalibrationSpec> specs = {default_spec()};
    const std::vector<std::string> methods = {"pareto_testing", "pareto_testing_search"};
    const std::size_t seeds = 50;
    std::vector<double> grid_costs;
    std::vector<double> medians, means;
    for (const std::size_t budget : {50u, 200u, 1000u}) {
        HarnessOptions opt;
        opt.search_budget = budget;
        opt.keep_first_outcomes = false;
        const auto run = run_trials(src, methods, specs, seeds, 909, opt);
        std::vector<double> costs;
        grid_costs.clear();
        for (const auto& r : run.reports) {
            const double c = r.abstained ? 1.0 : r.free_values[0];
            (r.method == "pareto_testing" ? grid_costs : costs).push_back(c);
        }
        const auto viol = violation_rate(filter_reports(run.reports, "pareto_testing_search"));
        medians.push_back(median(costs));
        means.push_back(std::accumulate(costs.begin(), costs.end(), 0.0) / static_cast<double>(costs.size()));
        v.lines.push_back("  info budget " + std::to_string(budget) + ": mean cost " + fmt(means.back()) +
                          ", median " + fmt(medians.back()) + ", violation rate " + fmt(viol.rate) + ", abstained " +
                          std::to_string(viol.abstained));
    }
    const double grid_mean = std::accumulate(grid_costs.begin(), grid_costs.end(), 0.0) / static_cast<double>(seeds);
    check(v, std::abs(means[2] - grid_mean) <= 0.05,
          "budget 1000 mean cost " + fmt(means[2]) + " within 0.05 of grid Pareto Testing " + fmt(grid_mean));
    check(v, medians[0] >= medians[1] && medians[1] >= medians[2],
          "median cost non-increasing over budgets 50/200/1000: " + fmt(medians[0]) + " >= " + fmt(medians[1]) +
              " >= " + fmt(medians[2]));
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<int, std::function<Verdict()>>> all = {
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
        {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9},
    };
    const std::map<int, std::string> names = {
        {1, "FWER validity of the risk-controlling procedures"},
        {2, "naive alpha-constrained selection violates"},
        {3, "p-value super-uniformity"},
        {4, "efficiency trend across alpha"},
        {5, "exact-oracle equivalences"},
        {6, "structural invariants"},
        {7, "hand-computable anchors"},
        {8, "multi-risk scenario"},
        {9, "optimizer path vs grid"},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    bool all_pass = true;
    for (const auto& [id, fn] : all) {
        if (!wanted.empty() && !wanted.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict verdict;
        try {
            verdict = fn();
        } catch (const std::exception& e) {
            verdict.pass = false;
            verdict.lines.push_back(std::string("  exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& l : verdict.lines) std::printf("%s\n", l.c_str());
        std::printf("criterion %d %s: %s (%.1f s)\n", id, verdict.pass ? "PASS" : "FAIL", names.at(id).c_str(), secs);
        std::fflush(stdout);
        all_pass = all_pass && verdict.pass;
    }
    return all_pass ? 0 : 1;
}
