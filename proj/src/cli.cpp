// SPDX-License-Identifier: Apache-2.0
#include "ptest/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ptest/bundle.hpp"
#include "ptest/simulator.hpp"

namespace ptest {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "ptest 1.0.0";

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InputError("cannot write " + p.string());
    out << s;
}

ConfigGrid grid_from_json(const json& j, const std::string& ctx) {
    try {
        if (j.is_string()) {
            const auto name = j.get<std::string>();
            if (name == "benchmark") return benchmark_grid();
            if (name == "paper") return paper_grid();
            throw InputError(ctx + ": unknown grid preset '" + name + "'");
        }
        if (j.contains("preset")) return grid_from_json(j.at("preset"), ctx);
        if (j.contains("shape")) {
            const auto s = j.at("shape").get<std::vector<std::size_t>>();
            if (s.size() != 3) throw InputError(ctx + ": field 'shape' needs 3 entries");
            return threshold_grid(s[0], s[1], s[2]);
        }
        return j.get<ConfigGrid>();
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw InputError(ctx + ": field 'grid': " + e.what());
    }
}

ConfigGrid load_grid(const std::string& arg) {
    if (arg == "benchmark" || arg == "paper") return grid_from_json(json(arg), arg);
    return grid_from_json(read_json_file(arg), arg);
}

struct SimDescriptor {
    SimulatorSource source;
    std::vector<BundleObjective> objectives;
};

SimDescriptor simulator_from_json(const json& j, const std::string& ctx) {
    SimDescriptor d;
    d.source = default_simulator_source();
    try {
        if (j.contains("model")) {
            d.source.model = SimModel::create(j.at("model").get<SimModelSpec>());
        }
        if (j.contains("grid")) d.source.grid = grid_from_json(j.at("grid"), ctx);
        d.source.examples = j.value("examples", d.source.examples);
        d.source.n_oracle = j.value("n_oracle", d.source.n_oracle);
        if (j.contains("losses")) d.source.losses = j.at("losses").get<std::vector<LossDefinition>>();
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw InputError(ctx + ": " + e.what());
    }
    if (d.source.examples < 2) throw InputError(ctx + ": field 'examples' must be >= 2");
    std::map<std::string, double> controlled{{"accuracy_reduction", 0.1}};
    if (j.contains("controlled")) controlled = j.at("controlled").get<std::map<std::string, double>>();
    for (const auto& l : d.source.losses) {
        BundleObjective b{l.id, false, std::nullopt};
        if (auto it = controlled.find(l.id); it != controlled.end()) {
            b.controlled = true;
            b.alpha = it->second;
        }
        d.objectives.push_back(b);
    }
    return d;
}

SimDescriptor load_sim(const std::string& arg) {
    if (arg == "default") return simulator_from_json(json::object(), arg);
    return simulator_from_json(read_json_file(arg), arg);
}

std::string join(const std::vector<double>& v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += format_number(v[i]);
    }
    return s;
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

struct Prepared {
    std::vector<CalibrationSpec> specs;
    Source source;
};

Prepared prepare(const RunManifest& m) {
    if (m.trials < 1) throw InputError("trials: must be >= 1");
    for (const auto& id : m.methods)
        if (!is_known_method(id)) throw InputError("methods: unknown method '" + id + "'");
    Prepared p;
    const auto spec = load_spec(m.spec);
    if (m.alpha_grid.empty()) {
        p.specs.push_back(spec);
    } else {
        for (const double a : m.alpha_grid) {
            if (!(a > 0.0 && a <= 1.0)) throw InputError("alpha-grid: value " + format_number(a) + " not in (0,1]");
            p.specs.push_back(spec.with_alpha(0, a));
        }
    }
    p.source = load_source(m.source);
    return p;
}

std::string summary_csv(const TrialRun& run, const RunManifest& m, const std::vector<CalibrationSpec>& specs) {
    std::ostringstream s;
    s << "method,spec_index,alpha,alphas,delta,trials,abstention_rate,violations,violation_rate,violation_upper_95,"
         "fwer_rate,free_objective,free_mean,free_se,free_mean_with_fallback\n";
    for (const auto& method : m.methods) {
        for (std::size_t i = 0; i < specs.size(); ++i) {
            const auto reps = filter_reports(run.reports, method, i);
            if (reps.empty()) continue;
            const auto v = violation_rate(reps);
            const auto fwer = violation_rate(reps, true);
            const auto e = efficiency_summary(reps);
            const auto alphas = specs[i].alphas();
            const auto& f = e.free.front();
            s << method << ',' << i << ',' << format_number(alphas.front()) << ',' << join(alphas, ';') << ','
              << format_number(specs[i].delta) << ',' << e.trials << ',' << format_number(e.abstention_rate) << ','
              << v.violations << ',' << format_number(v.rate) << ',' << format_number(v.upper_95) << ','
              << format_number(fwer.rate) << ',' << f.id << ',' << opt_number(f.mean) << ','
              << opt_number(f.standard_error) << ',' << format_number(f.mean_with_fallback) << '\n';
        }
    }
    return s.str();
}

std::string front_csv(const TrialRun& run, const std::vector<CalibrationSpec>& specs, const std::vector<std::string>& methods) {
    std::ostringstream s;
    s << "method,spec_index,alpha,rank,candidate_id,p_opt,testing_pvalue,rejected,selected,free_value,thresholds\n";
    for (std::size_t k = 0; k < run.first_outcomes.size(); ++k) {
        const auto& o = run.first_outcomes[k];
        const std::size_t spec_index = k / methods.size();
        const double alpha = specs[spec_index].alphas().front();
        for (std::size_t r = 0; r < o.ordered_candidates.size(); ++r) {
            const auto& c = o.ordered_candidates[r];
            const auto id = c.grid_index;
            const bool rej = std::find(o.rejected.begin(), o.rejected.end(), id) != o.rejected.end();
            const bool sel = std::find(o.selected.begin(), o.selected.end(), id) != o.selected.end();
            std::string tp;
            if (auto it = o.testing_pvalues.find(id); it != o.testing_pvalues.end()) tp = format_number(it->second);
            std::string th;
            if (auto it = o.configs.find(id); it != o.configs.end()) th = join(it->second.thresholds, ';');
            s << o.method << ',' << spec_index << ',' << format_number(alpha) << ',' << r << ',' << id << ','
              << format_number(c.p_opt) << ',' << tp << ',' << (rej ? 1 : 0) << ',' << (sel ? 1 : 0) << ','
              << (c.free_values.empty() ? std::string() : format_number(c.free_values.front())) << ',' << th
              << '\n';
        }
    }
    return s.str();
}

json manifest_json(const RunManifest& m) {
    return json{{"spec", m.spec},     {"source", m.source}, {"methods", m.methods},
                {"trials", m.trials}, {"seed", m.seed},     {"alpha_grid", m.alpha_grid},
                {"out", m.out},       {"search_budget", m.search_budget}};
}

TrialRun execute(const RunManifest& m, const Prepared& p, const std::vector<CalibrationSpec>& run_specs) {
    HarnessOptions opts;
    opts.search_budget = m.search_budget;
    return run_trials(p.source, m.methods, run_specs, m.trials, m.seed, opts);
}

int cmd_calibrate(const RunManifest& m, std::ostream& out) {
    const auto p = prepare(m);
    const auto run = execute(m, p, p.specs);
    const fs::path dir(m.out);
    fs::create_directories(dir);

    json report;
    report["version"] = kVersion;
    report["manifest"] = manifest_json(m);
    report["specs"] = p.specs;
    report["outcomes"] = run.first_outcomes;
    report["reports"] = run.reports;
    write_text(dir / "report.json", report.dump(1) + "\n");
    write_text(dir / "summary.csv", summary_csv(run, m, p.specs));
    write_text(dir / "pareto_front.csv", front_csv(run, p.specs, m.methods));

    const bool all_abstained =
        std::all_of(run.reports.begin(), run.reports.end(), [](const TrialReport& r) { return r.abstained; });
    out << "wrote " << (dir / "report.json").string() << ", summary.csv, pareto_front.csv (" << run.reports.size()
        << " reports)\n";
    if (all_abstained) {
        out << "every trial abstained\n";
        return kExitAbstained;
    }
    return kExitOk;
}

int cmd_certify(const RunManifest& m, double inflate, std::ostream& out) {
    const auto p = prepare(m);
    auto run_specs = p.specs;
    for (auto& s : run_specs) s.delta = std::min(0.99, s.delta * inflate);
    const auto run = execute(m, p, run_specs);

    json checks = json::array();
    bool passed = true;
    for (const auto& method : m.methods) {
        if (!controls_fwer(method)) continue;
        for (std::size_t i = 0; i < p.specs.size(); ++i) {
            const auto reps = filter_reports(run.reports, method, i);
            const double delta = p.specs[i].delta;
            const double threshold = delta + 2.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(m.trials));
            const bool full = std::all_of(reps.begin(), reps.end(), [](const auto& r) { return r.rejected_set_checked; });
            const auto v = violation_rate(reps, full);
            const bool ok = v.rate <= threshold;
            passed = passed && ok;
            checks.push_back(json{{"method", method},
                                  {"spec_index", i},
                                  {"alphas", p.specs[i].alphas()},
                                  {"delta", delta},
                                  {"trials", v.trials},
                                  {"violations", v.violations},
                                  {"rate", v.rate},
                                  {"upper_95", v.upper_95},
                                  {"rejected_set", full},
                                  {"threshold", threshold},
                                  {"passed", ok}});
        }
    }
    json verdict{{"version", kVersion}, {"passed", passed}, {"manifest", manifest_json(m)}, {"checks", checks}};
    if (inflate != 1.0) verdict["inflate_delta"] = inflate;
    if (!m.out.empty()) {
        fs::create_directories(m.out);
        write_text(fs::path(m.out) / "verdict.json", verdict.dump(2) + "\n");
    }
    out << verdict.dump(2) << "\n";
    return passed ? kExitOk : kExitCertificationFailed;
}

int cmd_simulate(const std::string& sim, const std::string& grid_arg, const std::string& out_dir,
                 std::optional<std::size_t> examples, std::ostream& out) {
    auto d = load_sim(sim);
    if (!grid_arg.empty()) d.source.grid = load_grid(grid_arg);
    if (examples) d.source.examples = *examples;
    const auto& model = d.source.model;
    const auto ex = sample_examples(model, d.source.examples, derive_seed(model.spec.seed, Stream::examples));
    const auto table = build_loss_table(model, ex, d.source.grid, d.source.losses);
    write_bundle(out_dir, table, d.objectives);
    out << "wrote bundle " << out_dir << ": " << table.example_count() << " examples x " << table.config_count()
        << " configurations x " << table.objective_count() << " objectives\n";
    return kExitOk;
}

void apply_manifest_file(const std::string& path, RunManifest& m, const CLI::App& sub) {
    const auto j = read_json_file(path);
    const auto base = fs::path(path).parent_path();
    auto given = [&](const char* flag) { return sub.get_option(flag)->count() > 0; };
    try {
        if (j.contains("spec") && !given("--spec")) {
            const auto s = j.at("spec").get<std::string>();
            m.spec = s == "default" ? s : resolve(base, s).string();
        }
        if (j.contains("source") && !given("--source")) {
            const auto s = j.at("source").get<std::string>();
            m.source = s == "simulator" ? s : resolve(base, s).string();
        }
        if (j.contains("methods") && !given("--methods")) m.methods = j.at("methods").get<std::vector<std::string>>();
        if (j.contains("trials") && !given("--trials")) m.trials = j.at("trials").get<std::size_t>();
        if (j.contains("seed") && !given("--seed")) m.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("alpha_grid") && !given("--alpha-grid"))
            m.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
        if (j.contains("out") && !given("--out")) m.out = resolve(base, j.at("out").get<std::string>()).string();
        if (j.contains("search_budget") && !given("--search-budget"))
            m.search_budget = j.at("search_budget").get<std::size_t>();
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

void add_run_options(CLI::App& sub, RunManifest& m, std::string& manifest) {
    sub.add_option("--manifest", manifest, "Run manifest JSON (flags override its fields)");
    sub.add_option("--spec", m.spec, "Calibration spec JSON, or 'default'");
    sub.add_option("--source", m.source, "Source descriptor JSON, bundle directory, or 'simulator'");
    sub.add_option("--methods", m.methods, "Comma-separated method ids")->delimiter(',');
    sub.add_option("--trials", m.trials, "Number of trials");
    sub.add_option("--seed", m.seed, "Master seed");
    sub.add_option("--alpha-grid", m.alpha_grid, "Comma-separated alphas for the first controlled objective")
        ->delimiter(',');
    sub.add_option("--out", m.out, "Output directory");
    sub.add_option("--search-budget", m.search_budget, "Evaluations for pareto_testing_search");
}

}  // namespace

CalibrationSpec default_spec() {
    CalibrationSpec s;
    s.objectives = {{"accuracy_reduction", ObjectiveKind::controlled, 0.1}, {"cost", ObjectiveKind::free, std::nullopt}};
    s.delta = 0.1;
    return s;
}

SimulatorSource default_simulator_source() {
    SimulatorSource s{SimModel::create(SimModelSpec{}), benchmark_grid(), default_losses(), 2000, 200000};
    return s;
}

CalibrationSpec load_spec(const std::string& spec) {
    if (spec.empty()) throw InputError("spec: no calibration spec given (--spec)");
    if (spec == "default") return default_spec();
    const auto j = read_json_file(spec);
    try {
        return j.get<CalibrationSpec>();
    } catch (const std::exception& e) {
        throw InputError(spec + ": " + e.what());
    }
}

Source load_source(const std::string& source) {
    if (source.empty()) throw InputError("source: no source given (--source)");
    if (source == "simulator") return default_simulator_source();
    const fs::path p(source);
    if (!fs::exists(p)) throw InputError(source + ": not found");
    if (fs::is_directory(p)) {
        auto b = read_bundle(p);
        TableSource t{std::make_shared<const LossTable>(std::move(b.table)), 0};
        t.calibration_size = t.table->example_count() / 2;
        return t;
    }
    const auto j = read_json_file(p);
    const auto type = j.value("type", std::string("simulator"));
    if (type == "simulator") return simulator_from_json(j, source).source;
    if (type == "bundle") {
        if (!j.contains("path")) throw InputError(source + ": missing field 'path'");
        const auto dir = resolve(p.parent_path(), j.at("path").get<std::string>());
        auto b = read_bundle(dir);
        TableSource t{std::make_shared<const LossTable>(std::move(b.table)), 0};
        t.calibration_size = j.value("calibration_size", t.table->example_count() / 2);
        return t;
    }
    throw InputError(source + ": field 'type' must be 'simulator' or 'bundle'");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Risk-controlled configuration selection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    RunManifest cal_m, cert_m;
    cal_m.methods.assign(std::begin(kGridMethods), std::end(kGridMethods));
    cert_m.methods = {"pareto_testing", "split_fst", "sgt_3d", "bonferroni", "low_risk_path", "constrained_path"};
    cert_m.trials = 500;
    std::string cal_manifest, cert_manifest;
    double inflate = 1.0;

    auto* cal = app.add_subcommand("calibrate", "Run procedures over seeded trials and write reports");
    add_run_options(*cal, cal_m, cal_manifest);
    auto* cert = app.add_subcommand("certify", "Check violation rates of the risk-controlling procedures");
    add_run_options(*cert, cert_m, cert_manifest);
    cert->add_option("--inflate-delta", inflate)->group("");

    std::string sim = "default", grid_arg, sim_out;
    std::optional<std::size_t> examples;
    auto* simc = app.add_subcommand("simulate", "Export a simulator loss-table bundle");
    simc->add_option("--sim", sim, "Simulator spec JSON, or 'default'");
    simc->add_option("--grid", grid_arg, "Grid JSON, or 'benchmark' / 'paper'");
    simc->add_option("--examples", examples, "Example count (overrides the simulator spec)");
    simc->add_option("--out", sim_out, "Bundle directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (*cal) {
            if (!cal_manifest.empty()) apply_manifest_file(cal_manifest, cal_m, *cal);
            if (cal_m.out.empty()) throw InputError("out: no output directory given (--out)");
            return cmd_calibrate(cal_m, out);
        }
        if (*cert) {
            if (!cert_manifest.empty()) apply_manifest_file(cert_manifest, cert_m, *cert);
            if (!(inflate > 0.0)) throw InputError("inflate-delta: must be > 0");
            return cmd_certify(cert_m, inflate, out);
        }
        return cmd_simulate(sim, grid_arg, sim_out, examples, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return kExitInputError;
}

}  // namespace ptest
