#include "fairalloc/policies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fairalloc/waterfill.hpp"

namespace fairalloc {

std::string to_string(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::saffe: return "saffe";
    case PolicyKind::saffe_d: return "saffe_d";
    case PolicyKind::saffe_oracle: return "saffe_oracle";
    case PolicyKind::hope_online: return "hope_online";
    case PolicyKind::guarded_hope: return "guarded_hope";
    case PolicyKind::greedy: return "greedy";
    }
    return "unknown";
}

PolicyKind parse_policy_kind(const std::string& text) {
    for (PolicyKind k : {PolicyKind::saffe, PolicyKind::saffe_d, PolicyKind::saffe_oracle,
                         PolicyKind::hope_online, PolicyKind::guarded_hope, PolicyKind::greedy}) {
        if (to_string(k) == text) return k;
    }
    throw ConfigError("unknown policy kind '" + text + "'");
}

std::string to_string(LambdaSchedule::Kind kind) {
    return kind == LambdaSchedule::Kind::constant ? "constant" : "sqrt_decay";
}

LambdaSchedule::Kind parse_lambda_kind(const std::string& text) {
    if (text == "constant") return LambdaSchedule::Kind::constant;
    if (text == "sqrt_decay") return LambdaSchedule::Kind::sqrt_decay;
    throw ConfigError("unknown lambda schedule '" + text + "'");
}

double LambdaSchedule::at(std::size_t future_steps) const {
    if (kind == Kind::constant) return value;
    return value * std::sqrt(static_cast<double>(future_steps));
}

LambdaSchedule LambdaSchedule::concentration(double xi) {
    if (!(xi > 0.0 && xi <= 1.0)) throw ConfigError("xi must lie in (0, 1]");
    return sqrt_decay(1.0 / std::sqrt(xi));
}

void PolicyConfig::validate() const {
    if (!(lambda.value >= 0.0) || !std::isfinite(lambda.value)) {
        throw ConfigError("lambda must be finite and >= 0");
    }
    if (kind == PolicyKind::guarded_hope && !(guardrail_lt > 0.0 && guardrail_lt < 1.0)) {
        throw ConfigError("guarded_hope needs L_T in (0, 1)");
    }
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
}

std::string PolicyConfig::name() const {
    if (!label.empty()) return label;
    std::string out = to_string(kind);
    if (kind == PolicyKind::saffe_d) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "(%s=%g)", to_string(lambda.kind).c_str(), lambda.value);
        out += buf;
    } else if (kind == PolicyKind::guarded_hope) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "(lt=%g)", guardrail_lt);
        out += buf;
    }
    return out;
}

Forecast Forecast::from_moments(const MomentTable& horizon_moments, std::size_t current_step) {
    const std::size_t first = current_step + 1;
    if (first < horizon_moments.first_step) throw InvalidInput("moment table starts after the requested step");
    const std::size_t end = horizon_moments.first_step + horizon_moments.steps();
    const std::size_t rows = first >= end ? 0 : end - first;
    const std::size_t n = horizon_moments.agents();

    Forecast f;
    f.future_mean.assign(n, 0.0);
    f.future_per_step_mean = ParameterTable(rows, n);
    f.future_per_step_std = ParameterTable(rows, n);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t src = first - horizon_moments.first_step + r;
        for (std::size_t i = 0; i < n; ++i) {
            f.future_per_step_mean(r, i) = horizon_moments.mean(src, i);
            f.future_per_step_std(r, i) = horizon_moments.stddev(src, i);
            f.future_mean[i] += horizon_moments.mean(src, i);
        }
    }
    return f;
}

Forecast Forecast::from_realized(const DemandMatrix& demands, std::size_t current_step) {
    const std::size_t n = demands.agents();
    const std::size_t rows = current_step + 1 >= demands.steps() ? 0 : demands.steps() - current_step - 1;
    Forecast f;
    f.future_mean.assign(n, 0.0);
    f.future_per_step_mean = ParameterTable(rows, n);
    f.future_per_step_std = ParameterTable(rows, n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x = demands(current_step + 1 + r, i);
            f.future_per_step_mean(r, i) = x;
            f.future_mean[i] += x;
        }
    }
    return f;
}

Forecast Forecast::none(std::size_t num_agents) {
    Forecast f;
    f.future_mean.assign(num_agents, 0.0);
    f.future_per_step_mean = ParameterTable(0, num_agents);
    f.future_per_step_std = ParameterTable(0, num_agents);
    return f;
}

std::vector<double> augmented_demand(std::span<const double> demand, const Forecast& forecast,
                                     double lambda_t) {
    if (forecast.future_per_step_mean.agents() != demand.size() && forecast.future_per_step_mean.steps() > 0) {
        throw InvalidInput("forecast and demand differ in agent count");
    }
    std::vector<double> y(demand.begin(), demand.end());
    for (std::size_t r = 0; r < forecast.future_per_step_mean.steps(); ++r) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double discounted =
                forecast.future_per_step_mean(r, i) - lambda_t * forecast.future_per_step_std(r, i);
            y[i] += std::max(0.0, discounted);
        }
    }
    return y;
}

namespace {

// Rounding in the water-fill can leave the total a few ulps above the budget.
void fit_to_budget(std::vector<double>& allocation, double budget) {
    double sum = 0.0;
    for (double a : allocation) sum += a;
    if (sum > budget && sum > 0.0) {
        const double scale = budget / sum;
        for (double& a : allocation) a *= scale;
    }
}

} // namespace

std::vector<double> saffe_step(const EpisodeState& state, std::span<const double> demand,
                               const Forecast& forecast, std::span<const double> weights,
                               double lambda_t) {
    if (demand.size() != state.num_agents() || weights.size() != state.num_agents()) {
        throw InvalidInput("saffe_step inputs differ in agent count");
    }
    if (!(lambda_t >= 0.0)) throw InvalidInput("lambda must be >= 0");
    const std::vector<double> y = augmented_demand(demand, forecast, lambda_t);
    const WaterfillResult wf =
        waterfill_with_past(y, weights, state.remaining_budget(), state.cumulative_allocations());

    std::vector<double> allocation(demand.size(), 0.0);
    for (std::size_t i = 0; i < demand.size(); ++i) {
        if (y[i] > 0.0) allocation[i] = wf.allocations[i] * (demand[i] / y[i]);
    }
    fit_to_budget(allocation, state.remaining_budget());
    return allocation;
}

std::vector<double> saffe_oracle_step(const EpisodeState& state, std::span<const double> demand,
                                      const DemandMatrix& realized, std::span<const double> weights) {
    return saffe_step(state, demand, Forecast::from_realized(realized, state.step()), weights, 0.0);
}

std::vector<double> hope_online_step(const EpisodeState& state, std::span<const double> demand,
                                     const Forecast& forecast, std::span<const double> weights) {
    return saffe_step(state, demand, forecast, weights, 0.0);
}

std::vector<double> greedy_step(const EpisodeState& state, std::span<const double> demand,
                                std::span<const double> weights) {
    std::vector<double> allocation = waterfill(demand, weights, state.remaining_budget()).allocations;
    fit_to_budget(allocation, state.remaining_budget());
    return allocation;
}

Guardrails guarded_hope_guardrails(const Instance& instance, const MomentTable& horizon_moments,
                                   double lt) {
    if (!(lt > 0.0 && lt < 1.0)) throw ConfigError("guarded_hope needs L_T in (0, 1)");
    if (horizon_moments.first_step != 0 || horizon_moments.steps() != instance.horizon) {
        throw InvalidInput("guardrails need moments covering the whole horizon");
    }
    const std::size_t n = instance.num_agents;
    const double t_minus_1 = static_cast<double>(instance.horizon) - 1.0;

    std::vector<double> expected_total(n), conf_ratio(n), under(n), over(n);
    for (std::size_t i = 0; i < n; ++i) {
        expected_total[i] = horizon_moments.total_mean(i);
        const double conf = std::sqrt(std::max(
            0.0, horizon_moments.stddev(0, i) * horizon_moments.mean(0, i) * t_minus_1));
        conf_ratio[i] = expected_total[i] > 0.0 ? conf / expected_total[i] : 0.0;
        const double c = lt * (1.0 + conf_ratio[i]) - conf_ratio[i];
        under[i] = std::max(0.0, expected_total[i] * (1.0 - c));
        over[i] = std::max(0.0, expected_total[i] * (1.0 + conf_ratio[i]));
    }

    Guardrails rails;
    rails.upper_rate = waterfill(under, instance.weights, instance.budget).allocations;
    rails.lower_rate = waterfill(over, instance.weights, instance.budget).allocations;
    for (std::size_t i = 0; i < n; ++i) {
        rails.upper_rate[i] = under[i] > 0.0 ? rails.upper_rate[i] / under[i] : 0.0;
        rails.lower_rate[i] = over[i] > 0.0 ? rails.lower_rate[i] / over[i] : 0.0;
    }
    return rails;
}

std::vector<double> guarded_hope_step(const EpisodeState& state, std::span<const double> demand,
                                      const MomentTable& horizon_moments, const Guardrails& rails) {
    const std::size_t n = demand.size();
    const std::size_t t = state.step();
    const std::size_t horizon = horizon_moments.first_step + horizon_moments.steps();
    const double budget = state.remaining_budget();
    const double remaining_steps = static_cast<double>(horizon - t - 1);

    double lower_need = 0.0;
    double upper_need = 0.0;
    double reserve = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lower_need += demand[i] * rails.lower_rate[i];
        upper_need += demand[i] * rails.upper_rate[i];
        double expected_rest = 0.0;
        for (std::size_t s = t; s < horizon; ++s) expected_rest += horizon_moments.mean(s - horizon_moments.first_step, i);
        const std::size_t row = t - horizon_moments.first_step;
        const double conf = std::sqrt(std::max(
            0.0, horizon_moments.stddev(row, i) * horizon_moments.mean(row, i) * remaining_steps));
        reserve += rails.lower_rate[i] * (expected_rest + conf);
    }

    std::vector<double> allocation(n, 0.0);
    if (budget <= lower_need) {
        // Equal split among demanders, capped at demand, residue re-split.
        std::vector<double> unit(n, 1.0);
        allocation = waterfill(demand, unit, budget).allocations;
    } else if (budget >= upper_need + reserve) {
        for (std::size_t i = 0; i < n; ++i) allocation[i] = demand[i] > 0.0 ? demand[i] * rails.upper_rate[i] : 0.0;
    } else {
        for (std::size_t i = 0; i < n; ++i) allocation[i] = demand[i] > 0.0 ? demand[i] * rails.lower_rate[i] : 0.0;
    }
    fit_to_budget(allocation, budget);
    return allocation;
}

AllocationMatrix guarded_hope_run(const Instance& instance, const DemandMatrix& demands,
                                  const DemandModel& model, double lt) {
    return guarded_hope_run(instance, demands, moments(model, 0), lt);
}

AllocationMatrix guarded_hope_run(const Instance& instance, const DemandMatrix& demands,
                                  const MomentTable& horizon_moments, double lt) {
    PolicyConfig config;
    config.kind = PolicyKind::guarded_hope;
    config.guardrail_lt = lt;
    return run_policy(instance, demands, horizon_moments, config);
}

OnlinePolicy::OnlinePolicy(const Instance& instance, MomentTable horizon_moments, PolicyConfig config)
    : instance_(instance), moments_(std::move(horizon_moments)), config_(std::move(config)) {
    instance_.validate();
    config_.validate();
    if (moments_.first_step != 0 || moments_.steps() != instance_.horizon ||
        moments_.agents() != instance_.num_agents) {
        throw InvalidInput("policy moments must cover the whole horizon for every agent");
    }
    if (config_.kind == PolicyKind::guarded_hope) {
        rails_ = guarded_hope_guardrails(instance_, moments_, config_.guardrail_lt);
    }
}

std::vector<double> OnlinePolicy::allocate(const EpisodeState& state, const DemandMatrix& demands) const {
    const std::size_t t = state.step();
    if (t >= instance_.horizon) throw InvalidInput("episode already finished");
    const auto demand = demands.row(t);
    const std::size_t future_steps = instance_.horizon - t - 1;
    switch (config_.kind) {
    case PolicyKind::saffe:
    case PolicyKind::hope_online:
        return saffe_step(state, demand, Forecast::from_moments(moments_, t), instance_.weights, 0.0);
    case PolicyKind::saffe_d:
        return saffe_step(state, demand, Forecast::from_moments(moments_, t), instance_.weights,
                          config_.lambda.at(future_steps));
    case PolicyKind::saffe_oracle:
        return saffe_oracle_step(state, demand, demands, instance_.weights);
    case PolicyKind::guarded_hope:
        return guarded_hope_step(state, demand, moments_, rails_);
    case PolicyKind::greedy:
        return greedy_step(state, demand, instance_.weights);
    }
    return {};
}

AllocationMatrix run_policy(const Instance& instance, const DemandMatrix& demands,
                            const DemandModel& model, const PolicyConfig& config) {
    return run_policy(instance, demands, moments(model, 0), config);
}

AllocationMatrix run_policy(const Instance& instance, const DemandMatrix& demands,
                            const MomentTable& horizon_moments, const PolicyConfig& config) {
    if (demands.steps() != instance.horizon || demands.agents() != instance.num_agents) {
        throw InvalidInput("demand matrix does not match the instance dimensions");
    }
    const OnlinePolicy policy(instance, horizon_moments, config);
    AllocationMatrix out(instance.horizon, instance.num_agents);
    EpisodeState state = EpisodeState::initial(instance);
    for (std::size_t t = 0; t < instance.horizon; ++t) {
        const std::vector<double> a = policy.allocate(state, demands);
        state = state.advance(a, demands.row(t));
        std::copy(a.begin(), a.end(), out.row(t).begin());
    }
    return out;
}

} // namespace fairalloc
