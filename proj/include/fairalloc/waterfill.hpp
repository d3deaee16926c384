#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fairalloc {

/**
 * Solution of a weighted water-filling problem.
 *
 * When the budget binds, every agent that is neither saturated (allocation ==
 * demand) nor suppressed by a large past allocation sits exactly at
 * past_i + allocation_i == w_i * water_level; those agents form binding_set.
 * water_level is empty when every demand is met in full (or nothing could be
 * allocated because the budget is zero).
 */
struct WaterfillResult {
    std::vector<double> allocations;
    std::optional<double> water_level;
    std::vector<std::size_t> binding_set;
};

/**
 * Weighted water-filling without history:
 *   max sum_i w_i log(A_i)  s.t.  0 <= A_i <= demand_i,  sum_i A_i <= budget.
 * Agents with zero demand get 0 and are left out of the objective.
 * Throws InvalidInput on negative or non-finite input, or length mismatch.
 */
WaterfillResult waterfill(std::span<const double> demands, std::span<const double> weights,
                          double budget);

/**
 * Weighted water-filling on top of existing allocations:
 *   max sum_i w_i log(past_i + C_i)  s.t.  0 <= C_i <= demand_i,  sum_i C_i <= budget.
 * Reduces to waterfill() when past is all zeros.
 */
WaterfillResult waterfill_with_past(std::span<const double> demands, std::span<const double> weights,
                                    double budget, std::span<const double> past);

} // namespace fairalloc
