#include "fairalloc/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairalloc/errors.hpp"

namespace fairalloc {

namespace {

void check_inputs(std::span<const double> demands, std::span<const double> weights, double budget,
                  std::span<const double> past) {
    if (weights.size() != demands.size() || past.size() != demands.size()) {
        throw InvalidInput("water-filling inputs differ in length");
    }
    if (!(budget >= 0.0) || !std::isfinite(budget)) {
        throw InvalidInput("water-filling budget must be finite and >= 0");
    }
    for (std::size_t i = 0; i < demands.size(); ++i) {
        if (!(demands[i] >= 0.0) || !std::isfinite(demands[i])) {
            throw InvalidInput("negative or non-finite demand for agent " + std::to_string(i));
        }
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
            throw InvalidInput("weights must be finite and > 0 (agent " + std::to_string(i) + ")");
        }
        if (!(past[i] >= 0.0) || !std::isfinite(past[i])) {
            throw InvalidInput("negative or non-finite past allocation for agent " + std::to_string(i));
        }
    }
}

// A breakpoint of the piecewise-linear map level -> total allocation.
// An agent starts receiving at past/w and saturates at (past + demand)/w.
struct Breakpoint {
    double level;
    std::size_t agent;
    bool saturates;
};

} // namespace

WaterfillResult waterfill(std::span<const double> demands, std::span<const double> weights,
                          double budget) {
    std::vector<double> zeros(demands.size(), 0.0);
    return waterfill_with_past(demands, weights, budget, zeros);
}

WaterfillResult waterfill_with_past(std::span<const double> demands, std::span<const double> weights,
                                    double budget, std::span<const double> past) {
    check_inputs(demands, weights, budget, past);
    const std::size_t n = demands.size();

    WaterfillResult result;
    result.allocations.assign(n, 0.0);

    double total_demand = 0.0;
    for (double x : demands) total_demand += x;

    if (budget >= total_demand) {
        std::copy(demands.begin(), demands.end(), result.allocations.begin());
        return result;
    }
    if (budget == 0.0) return result;

    std::vector<Breakpoint> points;
    points.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (demands[i] <= 0.0) continue;
        points.push_back({past[i] / weights[i], i, false});
        points.push_back({(past[i] + demands[i]) / weights[i], i, true});
    }
    std::stable_sort(points.begin(), points.end(),
                     [](const Breakpoint& a, const Breakpoint& b) { return a.level < b.level; });

    // Between breakpoints: total(level) = saturated + slope * level - active_past.
    double saturated = 0.0;
    double slope = 0.0;
    double active_past = 0.0;
    double level = points.back().level;
    for (const Breakpoint& p : points) {
        double at_point = saturated + slope * p.level - active_past;
        if (at_point >= budget && slope > 0.0) {
            level = (budget - saturated + active_past) / slope;
            break;
        }
        const std::size_t i = p.agent;
        if (p.saturates) {
            slope -= weights[i];
            active_past -= past[i];
            saturated += demands[i];
        } else {
            slope += weights[i];
            active_past += past[i];
        }
    }

    result.water_level = level;
    for (std::size_t i = 0; i < n; ++i) {
        if (demands[i] <= 0.0) continue;
        double fill = weights[i] * level - past[i];
        result.allocations[i] = std::clamp(fill, 0.0, demands[i]);
        if (fill > 0.0 && fill < demands[i]) result.binding_set.push_back(i);
    }
    return result;
}

} // namespace fairalloc
