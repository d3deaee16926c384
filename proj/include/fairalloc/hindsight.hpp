#pragma once

#include <vector>

#include "fairalloc/core.hpp"

namespace fairalloc {

/// Offline Eisenberg-Gale optimum for a realized episode.
struct HindsightSolution {
    /// Optimal per-agent totals over the horizon.
    std::vector<double> totals;
    /// One per-step realization of the totals (earliest demand served first).
    AllocationMatrix per_step;
    /// sum over agents with positive total demand of w_i log(total_i + epsilon).
    double log_nsw = 0.0;
};

/// Water-fills the per-agent total demands against the full budget.
HindsightSolution solve_hindsight(const Instance& instance, const DemandMatrix& demands);

/**
 * sum_{i: demand_totals_i > 0} w_i log(utility_i + epsilon).
 *
 * The shared log-NSW used for hindsight, policies and metrics so all three are
 * directly comparable.
 */
double log_nsw(const std::vector<double>& utilities, const std::vector<double>& demand_totals,
               const std::vector<double>& weights, double epsilon);

} // namespace fairalloc
