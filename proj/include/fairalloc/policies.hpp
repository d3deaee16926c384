#pragma once

#include <span>
#include <string>
#include <vector>

#include "fairalloc/core.hpp"
#include "fairalloc/demand.hpp"

namespace fairalloc {

/**
 * What a policy knows about the steps after the current one.
 *
 * Row r of the per-step tables is the (r+1)-th step after the current step.
 * future_mean[i] is the column sum of future_per_step_mean.
 */
struct Forecast {
    std::vector<double> future_mean;
    ParameterTable future_per_step_mean;
    ParameterTable future_per_step_std;

    /// Steps strictly after `current_step` taken from a horizon-wide moment table.
    static Forecast from_moments(const MomentTable& horizon_moments, std::size_t current_step);
    /// Realized demands after `current_step`, with zero std (the oracle's view).
    static Forecast from_realized(const DemandMatrix& demands, std::size_t current_step);
    /// No future at all.
    static Forecast none(std::size_t num_agents);
};

enum class PolicyKind { saffe, saffe_d, saffe_oracle, hope_online, guarded_hope, greedy };

std::string to_string(PolicyKind kind);
PolicyKind parse_policy_kind(const std::string& text);

/// lambda(t) for SAFFE-D. `future_steps` is T - t, the number of steps after the current one.
struct LambdaSchedule {
    enum class Kind { constant, sqrt_decay };
    Kind kind = Kind::constant;
    double value = 0.0;

    double at(std::size_t future_steps) const;

    static LambdaSchedule constant(double value) { return {Kind::constant, value}; }
    static LambdaSchedule sqrt_decay(double value) { return {Kind::sqrt_decay, value}; }
    /// lambda(t) = sqrt((T - t) / xi), the schedule the gap bounds are stated for.
    static LambdaSchedule concentration(double xi);
};

std::string to_string(LambdaSchedule::Kind kind);
LambdaSchedule::Kind parse_lambda_kind(const std::string& text);

struct PolicyConfig {
    PolicyKind kind = PolicyKind::saffe;
    LambdaSchedule lambda;
    /// Envy bound L_T for guarded_hope, in (0, 1).
    double guardrail_lt = 0.5;
    double epsilon = kDefaultEpsilon;
    /// Display name; derived from the other fields when empty.
    std::string label;

    /// Throws ConfigError on a negative lambda or L_T outside (0, 1) for guarded_hope.
    void validate() const;
    std::string name() const;
};

/**
 * Y_i = X_i + sum over future steps of (mean - lambda * std)^+.
 * With lambda = 0 this is the current demand plus the expected future demand.
 */
std::vector<double> augmented_demand(std::span<const double> demand, const Forecast& forecast,
                                     double lambda_t);

/**
 * One SAFFE / SAFFE-D step: water-fill the augmented demands on top of the
 * cumulative allocations, then hand out the current-step share C_i * X_i / Y_i.
 */
std::vector<double> saffe_step(const EpisodeState& state, std::span<const double> demand,
                               const Forecast& forecast, std::span<const double> weights,
                               double lambda_t);

/// SAFFE with the realized future in place of expectations.
std::vector<double> saffe_oracle_step(const EpisodeState& state, std::span<const double> demand,
                                      const DemandMatrix& realized, std::span<const double> weights);

/// HOPE-Online is SAFFE with lambda = 0.
std::vector<double> hope_online_step(const EpisodeState& state, std::span<const double> demand,
                                     const Forecast& forecast, std::span<const double> weights);

/// Water-fill the current demands with whatever budget is left.
std::vector<double> greedy_step(const EpisodeState& state, std::span<const double> demand,
                                std::span<const double> weights);

/// Per-unit-of-demand allocation rates for the modified Guarded-HOPE.
struct Guardrails {
    std::vector<double> upper_rate;
    std::vector<double> lower_rate;
};

Guardrails guarded_hope_guardrails(const Instance& instance, const MomentTable& horizon_moments,
                                   double lt);

/**
 * One modified Guarded-HOPE step.
 *
 * (i) budget below the lower-guardrail need: split it equally among current
 *     demanders, capped at each demand;
 * (ii) budget covers the upper guardrail now plus the lower guardrail on the
 *     expected remaining demand with its confidence term: allocate X * upper;
 * otherwise allocate X * lower.
 */
std::vector<double> guarded_hope_step(const EpisodeState& state, std::span<const double> demand,
                                      const MomentTable& horizon_moments, const Guardrails& rails);

AllocationMatrix guarded_hope_run(const Instance& instance, const DemandMatrix& demands,
                                  const DemandModel& model, double lt);
AllocationMatrix guarded_hope_run(const Instance& instance, const DemandMatrix& demands,
                                  const MomentTable& horizon_moments, double lt);

/// A configured policy bound to an instance and the moments it may consult.
class OnlinePolicy {
public:
    OnlinePolicy(const Instance& instance, MomentTable horizon_moments, PolicyConfig config);

    /**
     * Allocation for step state.step(). Only saffe_oracle reads rows of
     * `demands` after the current step.
     */
    std::vector<double> allocate(const EpisodeState& state, const DemandMatrix& demands) const;

    const PolicyConfig& config() const { return config_; }

private:
    Instance instance_;
    MomentTable moments_;
    PolicyConfig config_;
    Guardrails rails_;
};

/// Runs a policy over a whole episode; validates feasibility at every step.
AllocationMatrix run_policy(const Instance& instance, const DemandMatrix& demands,
                            const DemandModel& model, const PolicyConfig& config);
AllocationMatrix run_policy(const Instance& instance, const DemandMatrix& demands,
                            const MomentTable& horizon_moments, const PolicyConfig& config);

} // namespace fairalloc
