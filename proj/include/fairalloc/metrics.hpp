#pragma once

#include <span>
#include <string>
#include <vector>

#include "fairalloc/core.hpp"
#include "fairalloc/demand.hpp"
#include "fairalloc/hindsight.hpp"

namespace fairalloc {

struct MetricsReport {
    double log_nsw = 0.0;
    double hindsight_log_nsw = 0.0;
    /// hindsight log-NSW minus policy log-NSW.
    double delta_log_nsw_raw = 0.0;
    /// delta_log_nsw_raw / |hindsight log-NSW| (the raw gap when hindsight is 0).
    double delta_log_nsw = 0.0;
    double utilization_pct = 0.0;
    double delta_a_mean = 0.0;
    double delta_a_max = 0.0;
    /// max_i |online total - hindsight total|, in allocation units.
    double delta_a_max_abs = 0.0;
    std::vector<double> per_agent_delta;
};

/**
 * Compares a policy's allocations with the hindsight solution on the same
 * realization. Per-agent gaps are normalized by the hindsight total and are
 * 0 for agents whose hindsight total is 0. Utilization is 100 when there was
 * nothing to hand out.
 */
MetricsReport compute_metrics(const Instance& instance, const DemandMatrix& demands,
                              const AllocationMatrix& allocations, const HindsightSolution& hindsight);

enum class BoundRegime { balanced, unbalanced };

std::string to_string(BoundRegime regime);
BoundRegime parse_bound_regime(const std::string& text);

/**
 * Closed-form high-probability bound on max_i |online total - hindsight total|
 * for SAFFE-D with the concentration schedule:
 *   balanced   2 T^{3/2} / sqrt(xi) * std
 *   unbalanced N T^{3/2} / sqrt(xi) * std
 * `std` is the largest per-step demand std in the model. In the balanced
 * regime unequal stds produce a warning on stderr.
 */
double theorem_bound(const Instance& instance, const DemandModel& model, double xi, BoundRegime regime);

struct GuardrailBands {
    std::vector<double> lower;
    std::vector<double> upper;
};

/**
 * Chebyshev band on each agent's total demand from the current step on:
 * X_i + sum_{future} E[X_i] -/+ sqrt(sum_{future} var_i / xi). The lower side is
 * clamped at X_i. `step` is the absolute zero-based current step; rows of
 * `horizon_moments` start at its first_step.
 */
GuardrailBands guardrail_bands(const MomentTable& horizon_moments, std::span<const double> current_demand,
                               std::size_t step, double xi);

} // namespace fairalloc
