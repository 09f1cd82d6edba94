// SPDX-License-Identifier: Apache-2.0
#include "ptest/pareto.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ptest/pvalues.hpp"

namespace ptest {

bool strictly_dominates(std::span<const double> a, std::span<const double> b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] < b[i])) return false;
    return true;
}

bool weakly_dominates(std::span<const double> a, std::span<const double> b) {
    bool strict_somewhere = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strict_somewhere = true;
    }
    return strict_somewhere;
}

namespace {

std::vector<std::size_t> front_2d(std::span<const ObjectivePoint> points) {
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return points[a].values[0] < points[b].values[0];
    });
    std::vector<std::size_t> keep;
    double best_before = std::numeric_limits<double>::infinity();  // min y over strictly smaller x
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        double group_min = std::numeric_limits<double>::infinity();
        const double x = points[order[i]].values[0];
        while (j < order.size() && points[order[j]].values[0] == x) {
            const double y = points[order[j]].values[1];
            if (!(best_before < y)) keep.push_back(order[j]);
            group_min = std::min(group_min, y);
            ++j;
        }
        best_before = std::min(best_before, group_min);
        i = j;
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

std::vector<std::size_t> front_nd(std::span<const ObjectivePoint> points) {
    // Visiting candidates in ascending coordinate-sum order finds a dominator early.
    std::vector<std::size_t> by_sum(points.size());
    std::iota(by_sum.begin(), by_sum.end(), 0);
    std::vector<double> sums(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        sums[i] = std::accumulate(points[i].values.begin(), points[i].values.end(), 0.0);
    std::sort(by_sum.begin(), by_sum.end(), [&](std::size_t a, std::size_t b) { return sums[a] < sums[b]; });

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (const auto j : by_sum) {
            if (sums[j] >= sums[i]) break;  // a strict dominator has a strictly smaller sum
            if (strictly_dominates(points[j].values, points[i].values)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) keep.push_back(i);
    }
    return keep;
}

}  // namespace

std::vector<std::size_t> pareto_front_positions(std::span<const ObjectivePoint> points) {
    if (points.empty()) return {};
    const std::size_t dim = points.front().values.size();
    for (const auto& p : points)
        if (p.values.size() != dim) throw std::invalid_argument("pareto_front: inconsistent dimensionality");
    if (dim == 0) throw std::invalid_argument("pareto_front: zero-dimensional points");
    if (dim == 1) {
        const double best = std::min_element(points.begin(), points.end(), [](const auto& a, const auto& b) {
                                return a.values[0] < b.values[0];
                            })->values[0];
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < points.size(); ++i)
            if (points[i].values[0] == best) keep.push_back(i);
        return keep;
    }
    return dim == 2 ? front_2d(points) : front_nd(points);
}

std::vector<ObjectivePoint> pareto_front(std::span<const ObjectivePoint> points) {
    std::vector<ObjectivePoint> out;
    for (const auto i : pareto_front_positions(points)) out.push_back(points[i]);
    return out;
}

std::vector<Candidate> prune_front(std::span<const Candidate> front) {
    std::vector<std::vector<double>> reduced;
    reduced.reserve(front.size());
    for (const auto& c : front) {
        std::vector<double> v{c.p_opt};
        v.insert(v.end(), c.free_values.begin(), c.free_values.end());
        reduced.push_back(std::move(v));
    }
    std::vector<Candidate> out;
    if (!front.empty() && reduced.front().size() == 2) {
        // Lexicographic sweep: a point is weakly dominated iff some distinct
        // point earlier in (p, f) order has f <= its f.
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return reduced[a] < reduced[b]; });
        std::vector<bool> keep(front.size(), false);
        double best_f = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < order.size();) {
            std::size_t j = i;
            while (j < order.size() && reduced[order[j]] == reduced[order[i]]) ++j;
            const double f = reduced[order[i]][1];
            const bool dominated = best_f <= f;
            for (std::size_t t = i; t < j; ++t) keep[order[t]] = !dominated;
            best_f = std::min(best_f, f);
            i = j;
        }
        for (std::size_t i = 0; i < front.size(); ++i)
            if (keep[i]) out.push_back(front[i]);
        return out;
    }
    for (std::size_t i = 0; i < front.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < front.size() && !dominated; ++j)
            dominated = j != i && weakly_dominates(reduced[j], reduced[i]);
        if (!dominated) out.push_back(front[i]);
    }
    return out;
}

void sort_candidates(std::vector<Candidate>& candidates) {
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.p_opt != b.p_opt) return a.p_opt < b.p_opt;
        const double fa = a.free_values.empty() ? 0.0 : a.free_values.front();
        const double fb = b.free_values.empty() ? 0.0 : b.free_values.front();
        if (fa != fb) return fa > fb;
        return a.grid_index < b.grid_index;
    });
}

std::vector<Candidate> order_by_pvalue(std::span<const ObjectivePoint> front, std::span<const double> alphas,
                                       std::size_t m1, PValueKind kind, std::size_t budget) {
    const std::size_t c = alphas.size();
    std::vector<Candidate> out;
    out.reserve(front.size());
    std::vector<double> ps(c);
    for (const auto& pt : front) {
        if (pt.values.size() < c) throw std::invalid_argument("order_by_pvalue: point shorter than alphas");
        for (std::size_t i = 0; i < c; ++i) ps[i] = pvalue(kind, pt.values[i], alphas[i], m1);
        Candidate cand;
        cand.grid_index = pt.grid_index;
        cand.p_opt = combine_max(ps);
        cand.free_values.assign(pt.values.begin() + static_cast<std::ptrdiff_t>(c), pt.values.end());
        out.push_back(std::move(cand));
    }
    sort_candidates(out);
    if (out.size() > budget) out.resize(budget);
    return out;
}

}  // namespace ptest
