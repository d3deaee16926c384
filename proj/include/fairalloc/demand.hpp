#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairalloc/core.hpp"
#include "fairalloc/history.hpp"

namespace fairalloc {

struct ParameterTag;
/// Step-by-agent table of model parameters.
using ParameterTable = StepAgentTable<ParameterTag>;

enum class DemandKind { symmetric, nonsym_arrivals, nonsym_demands, empirical, deterministic };

std::string to_string(DemandKind kind);

/**
 * Independent compound Bernoulli-Normal demand process.
 *
 * At step t agent i arrives with probability arrival_prob(t, i) and then asks
 * for Normal(demand_mean(t, i), demand_std(t, i)^2), clamped at 0. Policies see
 * means scaled by (1 + noise_delta); the sampler always uses the true means.
 */
struct DemandModel {
    DemandKind kind = DemandKind::symmetric;
    ParameterTable arrival_prob;
    ParameterTable demand_mean;
    ParameterTable demand_std;
    double noise_delta = 0.0;
    std::uint64_t seed = 0;

    /// Agent labels (empirical models); empty otherwise.
    std::vector<std::string> agent_labels;
    /// Date that maps to step 0's phase (empirical models).
    std::optional<Date> phase_origin;

    std::size_t horizon() const { return arrival_prob.steps(); }
    std::size_t num_agents() const { return arrival_prob.agents(); }

    /// Throws InvalidInput when shapes differ, p is outside [0,1], or a std is negative.
    void validate() const;
};

/// Per-step moments E[X_i^tau] and std(X_i^tau) for steps first_step..T-1 (zero-based).
struct MomentTable {
    std::size_t first_step = 0;
    ParameterTable mean;
    ParameterTable stddev;

    std::size_t steps() const { return mean.steps(); }
    std::size_t agents() const { return mean.agents(); }
    /// Sum of means over all rows for one agent.
    double total_mean(std::size_t agent) const { return mean.column_sum(agent); }
};

/**
 * Moments for the steps after `revealed_steps` have been seen, i.e. absolute
 * zero-based steps revealed_steps..T-1. moments(model, 0) covers the horizon.
 * Means are the reported (noise-scaled) values; stds use the true means.
 */
MomentTable moments(const DemandModel& model, std::size_t revealed_steps);

/// sum_{t,i} p * mu with the true means; the reference for budget fractions.
double expected_total_demand(const DemandModel& model);

/// One raw draw for entry (step, agent), keyed by (seed, episode, agent, step, attempt).
double draw_entry(const DemandModel& model, std::uint64_t episode, std::size_t agent,
                  std::size_t step, std::uint64_t attempt = 0);

/// Maximum number of whole-row redraws before an arrival is forced.
inline constexpr int kMaxRowRedraws = 100;

/**
 * Samples a T x N realization. Deterministic in (model.seed, episode). An agent
 * whose row comes out all zero is redrawn up to kMaxRowRedraws times, after
 * which one arrival is forced at a uniformly chosen step.
 */
DemandMatrix sample_episode(const DemandModel& model, std::uint64_t episode = 0);

/// Seasonal sample moments from dated history; step t uses phase t mod period.
DemandModel fit_empirical(const History& history, std::size_t period, std::size_t horizon);
inline DemandModel fit_empirical(const History& history, std::size_t period) {
    return fit_empirical(history, period, period);
}

enum class SettingName { symmetric, ask_groups, demand_groups, deterministic };

std::string to_string(SettingName name);
SettingName parse_setting_name(const std::string& text);

struct SettingOptions {
    /// Every agent gets this mean instead of a Uniform(mean_low, mean_high) draw.
    std::optional<double> fixed_mean;
    double mean_low = 10.0;
    double mean_high = 100.0;
    /// sigma = std_ratio * mu.
    double std_ratio = 0.2;
    /// Base mean used by the group settings.
    double group_mean = 50.0;
};

/**
 * Builds one of the synthetic settings.
 *
 * symmetric: p = expected_arrivals / T for every agent and step, mu_i drawn
 *   once per model, sigma_i = std_ratio * mu_i.
 * ask_groups: agents split into thirds with p^t proportional to (T - t),
 *   to t, and constant; each row sums to expected_arrivals (p capped at 1).
 * demand_groups: constant p, thirds with mu^t proportional to (T - t), to t,
 *   and constant, all with the same total expected demand; sigma^t = std_ratio * mu^t.
 * deterministic: p = 1, sigma = 0, mu_i drawn as in symmetric.
 * Throws ConfigError for bad sizes or when the group settings get N % 3 != 0.
 */
DemandModel configure_setting(SettingName name, std::size_t num_agents, std::size_t horizon,
                              double expected_arrivals, std::uint64_t seed,
                              const SettingOptions& options = {});

} // namespace fairalloc
