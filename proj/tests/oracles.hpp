#pragma once

// Independent reference implementations used by the tests. They are written
// for clarity, not speed, and share no code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "baas/mlcore.hpp"
#include "baas/planner.hpp"

namespace oracle {

inline double sse_of(const std::vector<double>& ys) {
    if (ys.empty()) return 0.0;
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());
    double s = 0.0;
    for (double y : ys) s += (y - mean) * (y - mean);
    return s;
}

// Exhaustive CART split search: every feature, every midpoint between
// consecutive distinct values, SSE recomputed from scratch for each candidate.
// Ties (within 1e-10 of the parent SSE) keep the lower feature, then the lower
// threshold, which is the enumeration order here.
inline std::optional<baas::ml::Split> best_split(const std::vector<baas::ml::Sample>& s, int min_leaf = 1) {
    std::vector<double> all;
    for (const auto& x : s) all.push_back(x.y);
    const double parent = sse_of(all);
    if (parent == 0.0) return std::nullopt;
    const double tol = 1e-10 * parent;
    std::optional<baas::ml::Split> best;
    double best_sse = 0.0;
    for (int f = 0; f < 3; ++f) {
        std::set<double> values;
        for (const auto& x : s) values.insert(x.x[static_cast<std::size_t>(f)]);
        std::vector<double> v(values.begin(), values.end());
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            const double thr = (v[i] + v[i + 1]) / 2.0;
            std::vector<double> l, r;
            for (const auto& x : s) (x.x[static_cast<std::size_t>(f)] <= thr ? l : r).push_back(x.y);
            if (static_cast<int>(l.size()) < min_leaf || static_cast<int>(r.size()) < min_leaf) continue;
            const double sse = sse_of(l) + sse_of(r);
            if (!best || sse < best_sse - tol) {
                best = baas::ml::Split{f, thr, parent - sse};
                best_sse = sse;
            }
        }
    }
    return best;
}

struct PlanAnswer {
    std::optional<std::pair<int, int>> pair;  // (n_c, n_p)
    double cost = 0.0;
};

// Brute force over every feasible cell: minimum cost, then fewer peers, then
// fewer cores.
inline PlanAnswer best_plan(const baas::plan::FeasibilityGrid& g, double w_c, double w_p) {
    PlanAnswer a;
    for (const auto& c : g.cells) {
        if (!c.feasible) continue;
        const double cost = w_c * c.n_c + w_p * c.n_p;
        const auto key = std::make_tuple(cost, c.n_p, c.n_c);
        if (!a.pair || key < std::make_tuple(a.cost, a.pair->second, a.pair->first)) {
            a.pair = std::pair{c.n_c, c.n_p};
            a.cost = cost;
        }
    }
    return a;
}

inline double smape(const std::vector<double>& a, const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = (std::abs(a[i]) + std::abs(p[i])) / 2.0;
        if (d > 0.0) s += std::abs(p[i] - a[i]) / d;
    }
    return 100.0 * s / static_cast<double>(a.size());
}

}  // namespace oracle
