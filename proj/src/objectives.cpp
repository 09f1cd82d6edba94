// SPDX-License-Identifier: Apache-2.0
#include "ptest/objectives.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace ptest {

double accuracy_reduction_loss(const ExampleRecord& rec) {
    return (rec.full_correct && !rec.pruned_correct) ? 1.0 : 0.0;
}

double empirical_risk(std::span<const double> losses) {
    if (losses.empty()) throw std::invalid_argument("empirical_risk: empty sequence");
    double s = 0.0;
    for (const double v : losses) s += v;
    return std::clamp(s / static_cast<double>(losses.size()), 0.0, 1.0);
}

double class_accuracy_loss(const ExampleRecord& rec, std::size_t cls, double alpha) {
    return rec.label == cls ? accuracy_reduction_loss(rec) : alpha;
}

double worst_class_empirical_risk(std::span<const ExampleRecord> recs, double alpha,
                                  std::size_t class_count) {
    if (recs.empty()) throw std::invalid_argument("worst_class_empirical_risk: empty sequence");
    if (class_count < 1) throw std::invalid_argument("worst_class_empirical_risk: class_count < 1");
    std::vector<double> reduction(class_count, 0.0);
    std::vector<double> in_class(class_count, 0.0);
    for (const auto& r : recs) {
        if (r.label >= class_count)
            throw std::invalid_argument("worst_class_empirical_risk: label " + std::to_string(r.label) +
                                        " out of range");
        reduction[r.label] += accuracy_reduction_loss(r);
        in_class[r.label] += 1.0;
    }
    const auto n = static_cast<double>(recs.size());
    double worst = 0.0;
    for (std::size_t y = 0; y < class_count; ++y) {
        const double risk = (reduction[y] + alpha * (n - in_class[y])) / n;
        worst = std::max(worst, risk);
    }
    return worst;
}

double abstention_loss(const ExampleRecord& rec, double lambda) {
    return rec.confidence < lambda ? 1.0 : 0.0;
}

double selective_loss(const ExampleRecord& rec, double lambda, double alpha, SelectiveBase base) {
    if (rec.confidence < lambda) return alpha;
    return base == SelectiveBase::cost ? rec.cost_ratio : accuracy_reduction_loss(rec);
}

double LossDefinition::operator()(const ExampleRecord& rec) const {
    switch (type) {
        case LossType::accuracy_reduction: return accuracy_reduction_loss(rec);
        case LossType::cost: return rec.cost_ratio;
        case LossType::class_accuracy_reduction: return class_accuracy_loss(rec, cls, alpha);
        case LossType::abstention: return abstention_loss(rec, lambda);
        case LossType::selective_cost: return selective_loss(rec, lambda, alpha, SelectiveBase::cost);
        case LossType::selective_accuracy: return selective_loss(rec, lambda, alpha, SelectiveBase::accuracy);
    }
    return 0.0;
}

std::string_view to_string(LossType type) {
    switch (type) {
        case LossType::accuracy_reduction: return "accuracy_reduction";
        case LossType::cost: return "cost";
        case LossType::class_accuracy_reduction: return "class_accuracy_reduction";
        case LossType::abstention: return "abstention";
        case LossType::selective_cost: return "selective_cost";
        case LossType::selective_accuracy: return "selective_accuracy";
    }
    return "?";
}

LossType loss_type_from_string(std::string_view name) {
    for (const auto t : {LossType::accuracy_reduction, LossType::cost, LossType::class_accuracy_reduction,
                         LossType::abstention, LossType::selective_cost, LossType::selective_accuracy})
        if (to_string(t) == name) return t;
    throw std::invalid_argument("unknown loss type '" + std::string(name) + "'");
}

void to_json(json& j, const LossDefinition& d) {
    j = json{{"id", d.id}, {"type", std::string(to_string(d.type))}};
    switch (d.type) {
        case LossType::class_accuracy_reduction:
            j["class"] = d.cls;
            j["alpha"] = d.alpha;
            break;
        case LossType::abstention: j["lambda"] = d.lambda; break;
        case LossType::selective_cost:
        case LossType::selective_accuracy:
            j["lambda"] = d.lambda;
            j["alpha"] = d.alpha;
            break;
        default: break;
    }
}

void from_json(const json& j, LossDefinition& d) {
    d = LossDefinition{};
    d.id = j.at("id").get<std::string>();
    d.type = loss_type_from_string(j.at("type").get<std::string>());
    d.cls = j.value("class", std::size_t{0});
    d.alpha = j.value("alpha", 0.0);
    d.lambda = j.value("lambda", 0.0);
    if (d.type == LossType::class_accuracy_reduction || d.type == LossType::selective_cost ||
        d.type == LossType::selective_accuracy) {
        if (!j.contains("alpha")) throw std::invalid_argument("loss '" + d.id + "' requires alpha");
        if (!(d.alpha >= 0.0 && d.alpha <= 1.0))
            throw std::invalid_argument("loss '" + d.id + "': alpha outside [0,1]");
    }
    if ((d.type == LossType::abstention || d.type == LossType::selective_cost ||
         d.type == LossType::selective_accuracy) &&
        !j.contains("lambda"))
        throw std::invalid_argument("loss '" + d.id + "' requires lambda");
}

}  // namespace ptest
