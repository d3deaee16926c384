#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fairalloc/errors.hpp"

namespace fairalloc {

/// Absolute tolerance used for every budget comparison.
inline constexpr double kFeasibilityTol = 1e-9;

/// Default log-domain guard.
inline constexpr double kDefaultEpsilon = 1e-6;

/**
 * One allocation round: N agents, T steps, a divisible budget B.
 *
 * Weights and epsilon enter the log-NSW objective
 * sum_i w_i log(u_i + epsilon).
 */
struct Instance {
    std::size_t num_agents = 0;
    std::size_t horizon = 0;
    double budget = 0.0;
    std::vector<double> weights;
    double epsilon = kDefaultEpsilon;

    /// Unit weights, default epsilon.
    static Instance uniform(std::size_t num_agents, std::size_t horizon, double budget,
                            double epsilon = kDefaultEpsilon);

    /// Throws InvalidInput if N < 1, T < 1, B < 0, any w_i <= 0 or epsilon <= 0.
    void validate() const;
};

/**
 * Dense step-by-agent table (row = step, column = agent).
 *
 * The tag parameter keeps demands and allocations from being mixed up at
 * call sites; both share the same storage layout.
 */
template <class Tag>
class StepAgentTable {
public:
    StepAgentTable() = default;
    StepAgentTable(std::size_t steps, std::size_t agents, double fill = 0.0)
        : steps_(steps), agents_(agents), values_(steps * agents, fill) {}

    /// Builds from nested rows; throws InvalidInput on ragged input.
    static StepAgentTable from_rows(const std::vector<std::vector<double>>& rows) {
        StepAgentTable out;
        out.steps_ = rows.size();
        out.agents_ = rows.empty() ? 0 : rows.front().size();
        out.values_.reserve(out.steps_ * out.agents_);
        for (const auto& row : rows) {
            if (row.size() != out.agents_) {
                throw InvalidInput("ragged rows: every step must list the same number of agents");
            }
            out.values_.insert(out.values_.end(), row.begin(), row.end());
        }
        return out;
    }

    std::size_t steps() const noexcept { return steps_; }
    std::size_t agents() const noexcept { return agents_; }

    double& operator()(std::size_t step, std::size_t agent) { return values_[step * agents_ + agent]; }
    double operator()(std::size_t step, std::size_t agent) const { return values_[step * agents_ + agent]; }

    std::span<double> row(std::size_t step) { return {values_.data() + step * agents_, agents_}; }
    std::span<const double> row(std::size_t step) const {
        return {values_.data() + step * agents_, agents_};
    }

    /// Sum over steps for one agent.
    double column_sum(std::size_t agent) const {
        double s = 0.0;
        for (std::size_t t = 0; t < steps_; ++t) s += (*this)(t, agent);
        return s;
    }

    /// Per-agent sums over all steps.
    std::vector<double> column_sums() const {
        std::vector<double> out(agents_, 0.0);
        for (std::size_t t = 0; t < steps_; ++t)
            for (std::size_t i = 0; i < agents_; ++i) out[i] += (*this)(t, i);
        return out;
    }

    double total() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s;
    }

    const std::vector<double>& data() const noexcept { return values_; }

    bool operator==(const StepAgentTable&) const = default;

private:
    std::size_t steps_ = 0;
    std::size_t agents_ = 0;
    std::vector<double> values_;
};

struct DemandTag;
struct AllocationTag;

/// Realized demands X_i^t.
using DemandMatrix = StepAgentTable<DemandTag>;
/// Per-step allocations A_i^t.
using AllocationMatrix = StepAgentTable<AllocationTag>;

/// Throws InvalidInput on negative/non-finite entries or an agent with no positive demand.
void validate_demands(const DemandMatrix& demands);

/// Throws FeasibilityError if any entry is negative or the total exceeds the budget.
void validate_allocations(const AllocationMatrix& allocations, double budget);

/// u(A_i, X_i) = sum_t min(A_i^t, X_i^t).
double total_utility(const AllocationMatrix& allocations, const DemandMatrix& demands,
                     std::size_t agent);

/// Per-agent utilities for all agents.
std::vector<double> utilities(const AllocationMatrix& allocations, const DemandMatrix& demands);

/// Bookkeeping for an episode in progress. Immutable; advance() returns a new state.
class EpisodeState {
public:
    /// State before the first step: t = 0 steps elapsed, full budget.
    static EpisodeState initial(const Instance& instance);

    /// Zero-based index of the step about to be allocated.
    std::size_t step() const noexcept { return step_; }
    double remaining_budget() const noexcept { return remaining_budget_; }
    double initial_budget() const noexcept { return initial_budget_; }
    std::span<const double> cumulative_allocations() const noexcept { return cumulative_allocations_; }
    std::span<const double> cumulative_demands() const noexcept { return cumulative_demands_; }
    double allocated_so_far() const noexcept { return allocated_so_far_; }
    std::size_t num_agents() const noexcept { return cumulative_allocations_.size(); }

    /**
     * Applies one step. The allocation may exceed the remaining budget by at
     * most kFeasibilityTol; the remaining budget is then clamped to 0.
     */
    EpisodeState advance(std::span<const double> step_allocation,
                         std::span<const double> step_demand) const;

private:
    std::size_t step_ = 0;
    double initial_budget_ = 0.0;
    double remaining_budget_ = 0.0;
    double allocated_so_far_ = 0.0;
    std::vector<double> cumulative_allocations_;
    std::vector<double> cumulative_demands_;
};

} // namespace fairalloc
