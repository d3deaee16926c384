#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fairalloc/core.hpp"
#include "fairalloc/demand.hpp"
#include "fairalloc/policies.hpp"

namespace fairalloc {

/**
 * Running MDP reward bookkeeping.
 *
 * U_i^t = log(sum_{tau<=t} min(A_i^tau, X_i^tau) + eps), with the baseline
 * U_i^0 = log(eps). The step reward is
 * R_t = sum_{i: X_i^t > 0} w_i (U_i^t - U_i^{t-1}), so the rewards of an
 * episode telescope to sum_{i demanded} w_i (log(u_i + eps) - log(eps)).
 */
class RewardLedger {
public:
    RewardLedger(std::vector<double> weights, double epsilon);

    /// Records one step and returns its reward.
    double record(std::span<const double> demand, std::span<const double> allocation);

    const std::vector<double>& rewards() const { return rewards_; }
    const std::vector<double>& cumulative_utility() const { return utility_; }
    /// Current U_i values.
    std::vector<double> log_utilities() const;
    double total() const;
    double epsilon() const { return epsilon_; }

private:
    std::vector<double> weights_;
    double epsilon_;
    std::vector<double> utility_;
    std::vector<double> rewards_;
};

/// Appends one step to the ledger and returns R_t.
double step_reward(RewardLedger& ledger, std::span<const double> demand,
                   std::span<const double> allocation);

/// Sum of step rewards over the episode.
double episode_return(const DemandMatrix& demands, const AllocationMatrix& allocations,
                      std::span<const double> weights, double epsilon);

/// Finite demand distribution for one (step, agent): values with probabilities.
struct AtomSupport {
    std::vector<double> values;
    std::vector<double> probs;
};

/**
 * Small MDP with independent atom-valued demands and on-grid allocations.
 *
 * Allocations are multiples of grid_step and never exceed the current demand,
 * so the cumulative utility vector plus the step index is a sufficient state
 * (the remaining budget is the budget grid minus the allocated units).
 */
struct DiscreteMDP {
    /// support[t][i]
    std::vector<std::vector<AtomSupport>> support;
    double budget = 0.0;
    double grid_step = 0.0;
    std::vector<double> weights;
    double epsilon = kDefaultEpsilon;
    std::uint64_t max_state_actions = 10'000'000;

    std::size_t horizon() const { return support.size(); }
    std::size_t num_agents() const { return support.empty() ? 0 : support.front().size(); }
    /// Number of whole grid steps in the budget.
    std::size_t budget_units() const;
    /// Throws InvalidInput for malformed supports or a non-positive grid.
    void validate() const;
    /// Exact per-step means and stds of the atom distributions.
    MomentTable horizon_moments() const;
    Instance instance() const;

    /// Grid step defaults to budget / 40.
    static DiscreteMDP make(std::vector<std::vector<AtomSupport>> support, double budget,
                            std::vector<double> weights, double epsilon = kDefaultEpsilon);
};

/// Greatest number of grid units not exceeding `amount`, forgiving rounding noise.
std::size_t to_grid_units(double amount, double grid_step);

struct DPSolution {
    /// Optimal expected return from the initial state.
    double value = 0.0;
    /// Number of (state, demand outcome, action) triples enumerated.
    std::uint64_t state_action_count = 0;

    /// Optimal on-grid allocation for a state and the revealed demand.
    std::vector<double> action(std::size_t step, std::span<const double> cumulative_utility,
                               std::span<const double> demand) const;

    // Lookup tables; filled by dp_solve.
    std::size_t units = 0;
    double grid_step = 0.0;
    std::vector<std::vector<std::vector<double>>> atoms;   // [t][i] -> atom values
    std::vector<std::vector<std::vector<std::uint32_t>>> best; // [t][state] -> encoded action per outcome
};

/// Exact backward induction over the discretized state. Throws ResourceError over the cap.
DPSolution dp_solve(const DiscreteMDP& mdp);

/// Number of distinct demand paths over the horizon.
std::uint64_t demand_path_count(const DiscreteMDP& mdp);

/**
 * Expected episode return of a policy by enumerating every demand path.
 * With snap_to_grid each allocation is floored onto the allocation grid (and
 * capped at the demand) so the evaluated policy lives in the MDP's action set.
 */
double evaluate_policy_on_mdp(const DiscreteMDP& mdp, const PolicyConfig& policy,
                              bool snap_to_grid = true, std::uint64_t max_paths = 1'000'000);

/// Expected hindsight return (same units as episode_return) over every demand path.
double expected_hindsight_value(const DiscreteMDP& mdp, std::uint64_t max_paths = 1'000'000);

} // namespace fairalloc
