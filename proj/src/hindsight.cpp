#include "fairalloc/hindsight.hpp"

#include <algorithm>
#include <cmath>

#include "fairalloc/waterfill.hpp"

namespace fairalloc {

double log_nsw(const std::vector<double>& utilities, const std::vector<double>& demand_totals,
               const std::vector<double>& weights, double epsilon) {
    if (utilities.size() != demand_totals.size() || weights.size() != utilities.size()) {
        throw InvalidInput("log_nsw inputs differ in length");
    }
    double value = 0.0;
    for (std::size_t i = 0; i < utilities.size(); ++i) {
        if (demand_totals[i] > 0.0) value += weights[i] * std::log(utilities[i] + epsilon);
    }
    return value;
}

HindsightSolution solve_hindsight(const Instance& instance, const DemandMatrix& demands) {
    instance.validate();
    if (demands.agents() != instance.num_agents || demands.steps() != instance.horizon) {
        throw InvalidInput("demand matrix does not match the instance dimensions");
    }

    const std::vector<double> demand_totals = demands.column_sums();
    WaterfillResult wf = waterfill(demand_totals, instance.weights, instance.budget);

    HindsightSolution sol;
    sol.totals = std::move(wf.allocations);
    sol.per_step = AllocationMatrix(demands.steps(), demands.agents());
    for (std::size_t i = 0; i < demands.agents(); ++i) {
        double left = sol.totals[i];
        for (std::size_t t = 0; t < demands.steps() && left > 0.0; ++t) {
            double a = std::min(demands(t, i), left);
            sol.per_step(t, i) = a;
            left -= a;
        }
    }
    sol.log_nsw = log_nsw(sol.totals, demand_totals, instance.weights, instance.epsilon);
    return sol;
}

} // namespace fairalloc
