#include "fairalloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace fairalloc {

MetricsReport compute_metrics(const Instance& instance, const DemandMatrix& demands,
                              const AllocationMatrix& allocations, const HindsightSolution& hindsight) {
    const std::size_t n = instance.num_agents;
    if (demands.agents() != n || allocations.agents() != n || hindsight.totals.size() != n) {
        throw InvalidInput("metrics inputs differ in agent count");
    }
    if (demands.steps() != allocations.steps()) throw InvalidInput("metrics inputs differ in step count");

    MetricsReport r;
    const std::vector<double> demand_totals = demands.column_sums();
    const std::vector<double> online = utilities(allocations, demands);
    r.log_nsw = log_nsw(online, demand_totals, instance.weights, instance.epsilon);
    r.hindsight_log_nsw = hindsight.log_nsw;
    r.delta_log_nsw_raw = r.hindsight_log_nsw - r.log_nsw;
    const double scale = std::abs(r.hindsight_log_nsw);
    r.delta_log_nsw = scale > 0.0 ? r.delta_log_nsw_raw / scale : r.delta_log_nsw_raw;

    double demand_sum = 0.0;
    for (double d : demand_totals) demand_sum += d;
    const double needed = std::min(instance.budget, demand_sum);
    r.utilization_pct = needed > 0.0 ? 100.0 * allocations.total() / needed : 100.0;

    // Gaps use allocated totals, which equal utilities for policies that never over-serve.
    const std::vector<double> online_totals = allocations.column_sums();
    r.per_agent_delta.assign(n, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double gap = std::abs(hindsight.totals[i] - online_totals[i]);
        r.delta_a_max_abs = std::max(r.delta_a_max_abs, gap);
        if (hindsight.totals[i] > 0.0) {
            r.per_agent_delta[i] = gap / hindsight.totals[i];
        } else if (demand_totals[i] > 0.0 && instance.budget > 0.0) {
            std::cerr << "warning: agent " << i << " has demand but a zero hindsight total\n";
        }
        sum += r.per_agent_delta[i];
        r.delta_a_max = std::max(r.delta_a_max, r.per_agent_delta[i]);
    }
    r.delta_a_mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
    return r;
}

std::string to_string(BoundRegime regime) {
    return regime == BoundRegime::balanced ? "balanced" : "unbalanced";
}

BoundRegime parse_bound_regime(const std::string& text) {
    if (text == "balanced") return BoundRegime::balanced;
    if (text == "unbalanced") return BoundRegime::unbalanced;
    throw ConfigError("unknown bound regime '" + text + "'");
}

double theorem_bound(const Instance& instance, const DemandModel& model, double xi, BoundRegime regime) {
    if (!(xi > 0.0 && xi <= 1.0)) throw InvalidInput("xi must lie in (0, 1]");
    const MomentTable m = moments(model, 0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double s : m.stddev.data()) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    if (regime == BoundRegime::balanced && hi - lo > 1e-12 * std::max(1.0, hi)) {
        std::cerr << "warning: balanced bound with unequal stds; using the largest (" << hi << ")\n";
    }
    const double t = static_cast<double>(instance.horizon);
    const double factor = regime == BoundRegime::balanced ? 2.0 : static_cast<double>(instance.num_agents);
    return factor * std::pow(t, 1.5) / std::sqrt(xi) * hi;
}

GuardrailBands guardrail_bands(const MomentTable& horizon_moments, std::span<const double> current_demand,
                               std::size_t step, double xi) {
    if (!(xi > 0.0 && xi <= 1.0)) throw InvalidInput("xi must lie in (0, 1]");
    const std::size_t n = current_demand.size();
    if (horizon_moments.agents() != n) throw InvalidInput("moments and demand differ in agent count");
    GuardrailBands b{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        double var = 0.0;
        for (std::size_t r = 0; r < horizon_moments.steps(); ++r) {
            if (horizon_moments.first_step + r <= step) continue;
            mean += horizon_moments.mean(r, i);
            var += horizon_moments.stddev(r, i) * horizon_moments.stddev(r, i);
        }
        const double half = std::sqrt(var / xi);
        b.upper[i] = current_demand[i] + mean + half;
        b.lower[i] = std::max(current_demand[i], current_demand[i] + mean - half);
    }
    return b;
}

} // namespace fairalloc
