// SPDX-License-Identifier: Apache-2.0
#include "ptest/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ptest {

ConfigGrid::ConfigGrid(std::vector<std::vector<double>> dims, std::vector<std::string> names)
    : dims_(std::move(dims)), names_(std::move(names)) {
    if (dims_.empty()) throw std::invalid_argument("ConfigGrid: at least one dimension required");
    if (!names_.empty() && names_.size() != dims_.size())
        throw std::invalid_argument("ConfigGrid: names/dims length mismatch");
    size_ = 1;
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        const auto& v = dims_[d];
        if (v.empty())
            throw std::invalid_argument("ConfigGrid: dimension " + std::to_string(d) + " is empty");
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i]))
                throw std::invalid_argument("ConfigGrid: non-finite threshold");
            if (i > 0 && !(v[i] > v[i - 1]))
                throw std::invalid_argument("ConfigGrid: dimension " + std::to_string(d) +
                                            " is not strictly increasing");
        }
        size_ *= v.size();
    }
}

std::vector<std::size_t> ConfigGrid::shape() const {
    std::vector<std::size_t> s;
    s.reserve(dims_.size());
    for (const auto& v : dims_) s.push_back(v.size());
    return s;
}

std::vector<std::size_t> ConfigGrid::unravel(std::size_t index) const {
    if (index >= size_) throw std::out_of_range("ConfigGrid: index out of range");
    std::vector<std::size_t> coords(dims_.size());
    for (std::size_t d = dims_.size(); d-- > 0;) {
        coords[d] = index % dims_[d].size();
        index /= dims_[d].size();
    }
    return coords;
}

std::size_t ConfigGrid::ravel(std::span<const std::size_t> coords) const {
    if (coords.size() != dims_.size()) throw std::invalid_argument("ConfigGrid: coordinate rank");
    std::size_t index = 0;
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        if (coords[d] >= dims_[d].size()) throw std::out_of_range("ConfigGrid: coordinate range");
        index = index * dims_[d].size() + coords[d];
    }
    return index;
}

ConfigPoint ConfigGrid::point(std::size_t index) const {
    const auto coords = unravel(index);
    ConfigPoint p;
    p.thresholds.resize(coords.size());
    for (std::size_t d = 0; d < coords.size(); ++d) p.thresholds[d] = dims_[d][coords[d]];
    p.grid_index = index;
    return p;
}

std::vector<ConfigPoint> ConfigGrid::points() const {
    std::vector<ConfigPoint> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) out.push_back(point(i));
    return out;
}

std::pair<double, double> ConfigGrid::bounds(std::size_t dim) const {
    const auto& v = dims_.at(dim);
    return {v.front(), v.back()};
}

ConfigPoint ConfigGrid::snap(std::span<const double> thresholds) const {
    if (thresholds.size() != dims_.size()) throw std::invalid_argument("ConfigGrid::snap: rank");
    std::vector<std::size_t> coords(dims_.size());
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        const auto& v = dims_[d];
        auto it = std::lower_bound(v.begin(), v.end(), thresholds[d]);
        if (it == v.end()) {
            coords[d] = v.size() - 1;
        } else if (it == v.begin()) {
            coords[d] = 0;
        } else {
            const auto hi = static_cast<std::size_t>(it - v.begin());
            coords[d] = (thresholds[d] - v[hi - 1] <= v[hi] - thresholds[d]) ? hi - 1 : hi;
        }
    }
    return point(ravel(coords));
}

bool ConfigGrid::contains(const ConfigPoint& p) const {
    if (p.thresholds.size() != dims_.size()) return false;
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        const auto [lo, hi] = bounds(d);
        if (p.thresholds[d] < lo || p.thresholds[d] > hi) return false;
    }
    return true;
}

std::string_view to_string(PValueKind kind) {
    return kind == PValueKind::hoeffding ? "hoeffding" : "hoeffding_bentkus";
}

PValueKind pvalue_kind_from_string(std::string_view name) {
    if (name == "hoeffding") return PValueKind::hoeffding;
    if (name == "hoeffding_bentkus" || name == "hb") return PValueKind::hoeffding_bentkus;
    throw std::invalid_argument("unknown pvalue_kind '" + std::string(name) + "'");
}

void CalibrationSpec::validate() const {
    if (objectives.empty()) throw std::invalid_argument("CalibrationSpec: no objectives");
    bool seen_free = false;
    std::vector<std::string> ids;
    for (const auto& o : objectives) {
        if (o.id.empty()) throw std::invalid_argument("CalibrationSpec: empty objective id");
        if (std::find(ids.begin(), ids.end(), o.id) != ids.end())
            throw std::invalid_argument("CalibrationSpec: duplicate objective id '" + o.id + "'");
        ids.push_back(o.id);
        if (o.kind == ObjectiveKind::controlled) {
            if (seen_free)
                throw std::invalid_argument("CalibrationSpec: controlled objective '" + o.id +
                                            "' listed after a free objective");
            if (!o.alpha || !(*o.alpha > 0.0 && *o.alpha <= 1.0))
                throw std::invalid_argument("CalibrationSpec: objective '" + o.id +
                                            "' needs alpha in (0,1]");
        } else {
            seen_free = true;
            if (o.alpha)
                throw std::invalid_argument("CalibrationSpec: free objective '" + o.id +
                                            "' must not carry alpha");
        }
    }
    if (controlled_count() < 1) throw std::invalid_argument("CalibrationSpec: no controlled objective");
    if (free_count() < 1) throw std::invalid_argument("CalibrationSpec: no free objective");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("CalibrationSpec: delta not in (0,1)");
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw std::invalid_argument("CalibrationSpec: split_fraction not in (0,1)");
    if (front_budget < 1) throw std::invalid_argument("CalibrationSpec: front_budget must be >= 1");
    if (eps_steps < 2) throw std::invalid_argument("CalibrationSpec: eps_steps must be >= 2");
    if (!(beta_step > 0.0 && beta_step <= 1.0))
        throw std::invalid_argument("CalibrationSpec: beta_step not in (0,1]");
}

std::size_t CalibrationSpec::controlled_count() const {
    return static_cast<std::size_t>(std::count_if(objectives.begin(), objectives.end(), [](const auto& o) {
        return o.kind == ObjectiveKind::controlled;
    }));
}

std::size_t CalibrationSpec::free_count() const { return objectives.size() - controlled_count(); }

std::vector<double> CalibrationSpec::alphas() const {
    std::vector<double> a;
    for (const auto& o : objectives)
        if (o.kind == ObjectiveKind::controlled) a.push_back(o.alpha.value());
    return a;
}

std::vector<std::string> CalibrationSpec::controlled_ids() const {
    std::vector<std::string> v;
    for (const auto& o : objectives)
        if (o.kind == ObjectiveKind::controlled) v.push_back(o.id);
    return v;
}

std::vector<std::string> CalibrationSpec::free_ids() const {
    std::vector<std::string> v;
    for (const auto& o : objectives)
        if (o.kind == ObjectiveKind::free) v.push_back(o.id);
    return v;
}

std::vector<std::string> CalibrationSpec::objective_ids() const {
    std::vector<std::string> v;
    for (const auto& o : objectives) v.push_back(o.id);
    return v;
}

CalibrationSpec CalibrationSpec::with_alpha(std::size_t controlled_index, double alpha) const {
    CalibrationSpec copy = *this;
    std::size_t seen = 0;
    for (auto& o : copy.objectives) {
        if (o.kind != ObjectiveKind::controlled) continue;
        if (seen++ == controlled_index) {
            o.alpha = alpha;
            return copy;
        }
    }
    throw std::out_of_range("CalibrationSpec::with_alpha: controlled index out of range");
}

LossTable::LossTable(std::vector<std::string> objective_ids, std::size_t example_count,
                     std::size_t config_count, std::vector<std::vector<double>> matrices,
                     std::optional<ConfigGrid> grid)
    : ids_(std::move(objective_ids)),
      examples_(example_count),
      configs_(config_count),
      data_(std::move(matrices)),
      grid_(std::move(grid)) {
    if (ids_.empty()) throw std::invalid_argument("LossTable: no objectives");
    if (data_.size() != ids_.size()) throw std::invalid_argument("LossTable: matrix count mismatch");
    if (grid_ && grid_->size() != configs_)
        throw std::invalid_argument("LossTable: grid size does not match config count");
    for (std::size_t o = 0; o < data_.size(); ++o) {
        if (data_[o].size() != examples_ * configs_)
            throw std::invalid_argument("LossTable: objective '" + ids_[o] + "' has wrong shape");
        for (std::size_t i = 0; i < data_[o].size(); ++i) {
            const double v = data_[o][i];
            if (!(v >= 0.0 && v <= 1.0))
                throw std::domain_error("LossTable: objective '" + ids_[o] + "' example " +
                                        std::to_string(i / configs_) + " config " +
                                        std::to_string(i % configs_) + " value outside [0,1]");
        }
    }
    for (std::size_t i = 0; i < ids_.size(); ++i)
        for (std::size_t j = i + 1; j < ids_.size(); ++j)
            if (ids_[i] == ids_[j]) throw std::invalid_argument("LossTable: duplicate id '" + ids_[i] + "'");
}

std::size_t LossTable::objective_index(std::string_view id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i)
        if (ids_[i] == id) return i;
    throw std::out_of_range("LossTable: unknown objective '" + std::string(id) + "'");
}

bool LossTable::has_objective(std::string_view id) const {
    return std::find(ids_.begin(), ids_.end(), id) != ids_.end();
}

std::vector<double> LossTable::column_means(std::size_t objective,
                                            std::span<const std::size_t> examples) const {
    if (examples.empty()) throw std::invalid_argument("LossTable::column_means: empty example set");
    std::vector<double> sums(configs_, 0.0);
    const auto& m = data_.at(objective);
    for (const auto e : examples) {
        if (e >= examples_) throw std::out_of_range("LossTable::column_means: example index");
        const double* r = m.data() + e * configs_;
        for (std::size_t c = 0; c < configs_; ++c) sums[c] += r[c];
    }
    const double inv = 1.0 / static_cast<double>(examples.size());
    for (auto& s : sums) s = std::clamp(s * inv, 0.0, 1.0);
    return sums;
}

// ---- JSON ----

void to_json(json& j, const ConfigPoint& p) {
    j = json{{"thresholds", p.thresholds}};
    if (p.grid_index) j["grid_index"] = *p.grid_index;
}

void from_json(const json& j, ConfigPoint& p) {
    p.thresholds = j.at("thresholds").get<std::vector<double>>();
    if (p.thresholds.empty()) throw std::invalid_argument("ConfigPoint: empty thresholds");
    p.grid_index.reset();
    if (j.contains("grid_index")) p.grid_index = j.at("grid_index").get<std::size_t>();
}

void to_json(json& j, const ConfigGrid& g) {
    json dims = json::array();
    for (std::size_t d = 0; d < g.dimension_count(); ++d) {
        json entry{{"values", g.values(d)}};
        if (!g.names().empty()) entry["name"] = g.names()[d];
        dims.push_back(entry);
    }
    j = json{{"dims", dims}};
}

void from_json(const json& j, ConfigGrid& g) {
    std::vector<std::vector<double>> dims;
    std::vector<std::string> names;
    bool any_name = false;
    for (const auto& d : j.at("dims")) {
        if (d.is_array()) {
            dims.push_back(d.get<std::vector<double>>());
            names.emplace_back();
            continue;
        }
        dims.push_back(d.at("values").get<std::vector<double>>());
        if (d.contains("name")) {
            names.push_back(d.at("name").get<std::string>());
            any_name = true;
        } else {
            names.emplace_back();
        }
    }
    g = ConfigGrid(std::move(dims), any_name ? std::move(names) : std::vector<std::string>{});
}

void to_json(json& j, const ObjectiveSpec& o) {
    j = json{{"id", o.id}, {"kind", o.kind == ObjectiveKind::controlled ? "controlled" : "free"}};
    if (o.alpha) j["alpha"] = *o.alpha;
}

void from_json(const json& j, ObjectiveSpec& o) {
    o.id = j.at("id").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "controlled") {
        o.kind = ObjectiveKind::controlled;
    } else if (kind == "free") {
        o.kind = ObjectiveKind::free;
    } else {
        throw std::invalid_argument("objective '" + o.id + "': unknown kind '" + kind + "'");
    }
    o.alpha.reset();
    if (j.contains("alpha")) o.alpha = j.at("alpha").get<double>();
}

void to_json(json& j, const CalibrationSpec& s) {
    j = json{{"objectives", s.objectives},
             {"delta", s.delta},
             {"split_fraction", s.split_fraction},
             {"front_budget", s.front_budget},
             {"pvalue_kind", std::string(to_string(s.pvalue_kind))},
             {"prune_front", s.prune_front},
             {"eps_steps", s.eps_steps},
             {"beta_step", s.beta_step}};
    if (s.sgt_corner) j["sgt_corner"] = *s.sgt_corner;
}

void from_json(const json& j, CalibrationSpec& s) {
    s = CalibrationSpec{};
    s.objectives = j.at("objectives").get<std::vector<ObjectiveSpec>>();
    s.delta = j.at("delta").get<double>();
    s.split_fraction = j.value("split_fraction", 0.5);
    s.front_budget = j.value("front_budget", std::size_t{1000});
    s.pvalue_kind = pvalue_kind_from_string(j.value("pvalue_kind", std::string("hoeffding_bentkus")));
    s.prune_front = j.value("prune_front", true);
    s.eps_steps = j.value("eps_steps", std::size_t{20});
    s.beta_step = j.value("beta_step", 0.01);
    if (j.contains("sgt_corner")) s.sgt_corner = j.at("sgt_corner").get<std::vector<std::size_t>>();
    s.validate();
}

void to_json(json& j, const Candidate& c) {
    j = json{{"grid_index", c.grid_index}, {"p_opt", c.p_opt}, {"free_values", c.free_values}};
}

void from_json(const json& j, Candidate& c) {
    c.grid_index = j.at("grid_index").get<std::size_t>();
    c.p_opt = j.at("p_opt").get<double>();
    c.free_values = j.at("free_values").get<std::vector<double>>();
}

void to_json(json& j, const TestOutcome& t) {
    json pv = json::array();
    for (const auto& [idx, p] : t.testing_pvalues) pv.push_back(json{{"grid_index", idx}, {"p", p}});
    json cfg = json::array();
    for (const auto& [idx, point] : t.configs) cfg.push_back(json{{"id", idx}, {"config", point}});
    j = json{{"method", t.method},
             {"ordered_candidates", t.ordered_candidates},
             {"rejected", t.rejected},
             {"selected", t.selected},
             {"stop_index", t.stop_index},
             {"testing_pvalues", pv},
             {"binding_objectives", t.binding_objectives},
             {"stopping_objective", t.stopping_objective},
             {"configs", cfg},
             {"notes", t.notes},
             {"abstained", t.abstained()}};
}

void from_json(const json& j, TestOutcome& t) {
    t = TestOutcome{};
    t.method = j.at("method").get<std::string>();
    t.ordered_candidates = j.at("ordered_candidates").get<std::vector<Candidate>>();
    t.rejected = j.at("rejected").get<std::vector<std::size_t>>();
    t.selected = j.at("selected").get<std::vector<std::size_t>>();
    t.stop_index = j.at("stop_index").get<std::size_t>();
    for (const auto& e : j.at("testing_pvalues"))
        t.testing_pvalues[e.at("grid_index").get<std::size_t>()] = e.at("p").get<double>();
    t.binding_objectives = j.at("binding_objectives").get<std::vector<std::string>>();
    t.stopping_objective = j.value("stopping_objective", std::string());
    for (const auto& e : j.at("configs"))
        t.configs[e.at("id").get<std::size_t>()] = e.at("config").get<ConfigPoint>();
    t.notes = j.at("notes").get<std::vector<std::string>>();
}

}  // namespace ptest
