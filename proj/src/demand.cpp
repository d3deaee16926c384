#include "fairalloc/demand.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "fairalloc/rng.hpp"

namespace fairalloc {

std::string to_string(DemandKind kind) {
    switch (kind) {
    case DemandKind::symmetric: return "symmetric";
    case DemandKind::nonsym_arrivals: return "nonsym_arrivals";
    case DemandKind::nonsym_demands: return "nonsym_demands";
    case DemandKind::empirical: return "empirical";
    case DemandKind::deterministic: return "deterministic";
    }
    return "unknown";
}

std::string to_string(SettingName name) {
    switch (name) {
    case SettingName::symmetric: return "symmetric";
    case SettingName::ask_groups: return "ask_groups";
    case SettingName::demand_groups: return "demand_groups";
    case SettingName::deterministic: return "deterministic";
    }
    return "unknown";
}

SettingName parse_setting_name(const std::string& text) {
    if (text == "symmetric") return SettingName::symmetric;
    if (text == "ask_groups") return SettingName::ask_groups;
    if (text == "demand_groups") return SettingName::demand_groups;
    if (text == "deterministic") return SettingName::deterministic;
    throw ConfigError("unknown setting '" + text + "'");
}

void DemandModel::validate() const {
    const std::size_t t = arrival_prob.steps();
    const std::size_t n = arrival_prob.agents();
    if (t == 0 || n == 0) throw InvalidInput("demand model has no steps or no agents");
    if (demand_mean.steps() != t || demand_mean.agents() != n || demand_std.steps() != t ||
        demand_std.agents() != n) {
        throw InvalidInput("demand model parameter tables differ in shape");
    }
    for (std::size_t s = 0; s < t; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            double p = arrival_prob(s, i);
            if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("arrival probability outside [0, 1]");
            if (!(demand_std(s, i) >= 0.0)) throw InvalidInput("negative demand std");
            if (!std::isfinite(demand_mean(s, i))) throw InvalidInput("non-finite demand mean");
        }
    }
    if (!(noise_delta > -1.0)) throw InvalidInput("noise delta must be > -1");
}

MomentTable moments(const DemandModel& model, std::size_t revealed_steps) {
    const std::size_t t_total = model.horizon();
    if (revealed_steps > t_total) throw InvalidInput("moments requested past the horizon");
    const std::size_t rows = t_total - revealed_steps;
    const std::size_t n = model.num_agents();

    MomentTable table;
    table.first_step = revealed_steps;
    table.mean = ParameterTable(rows, n);
    table.stddev = ParameterTable(rows, n);
    const double scale = 1.0 + model.noise_delta;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t s = revealed_steps + r;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = model.arrival_prob(s, i);
            const double mu = model.demand_mean(s, i);
            const double sigma = model.demand_std(s, i);
            table.mean(r, i) = p * scale * mu;
            double var = p * (sigma * sigma + mu * mu) - (p * mu) * (p * mu);
            table.stddev(r, i) = std::sqrt(std::max(0.0, var));
        }
    }
    return table;
}

double expected_total_demand(const DemandModel& model) {
    double total = 0.0;
    for (std::size_t s = 0; s < model.horizon(); ++s)
        for (std::size_t i = 0; i < model.num_agents(); ++i)
            total += model.arrival_prob(s, i) * model.demand_mean(s, i);
    return total;
}

namespace {

double normal_draw(KeyedRng& rng, double mean, double stddev) {
    if (stddev <= 0.0) return mean;
    std::normal_distribution<double> normal(mean, stddev);
    return normal(rng);
}

} // namespace

double draw_entry(const DemandModel& model, std::uint64_t episode, std::size_t agent,
                  std::size_t step, std::uint64_t attempt) {
    KeyedRng rng{model.seed, static_cast<std::uint64_t>(RngStream::demand), episode, agent, step,
                 attempt};
    const double p = model.arrival_prob(step, agent);
    if (p <= 0.0) return 0.0;
    if (p < 1.0 && rng.uniform() >= p) return 0.0;
    return std::max(0.0, normal_draw(rng, model.demand_mean(step, agent), model.demand_std(step, agent)));
}

DemandMatrix sample_episode(const DemandModel& model, std::uint64_t episode) {
    model.validate();
    const std::size_t t_total = model.horizon();
    const std::size_t n = model.num_agents();
    DemandMatrix out(t_total, n);

    for (std::size_t i = 0; i < n; ++i) {
        bool any = false;
        for (int attempt = 0; attempt <= kMaxRowRedraws && !any; ++attempt) {
            for (std::size_t s = 0; s < t_total; ++s) {
                out(s, i) = draw_entry(model, episode, i, s, static_cast<std::uint64_t>(attempt));
                any = any || out(s, i) > 0.0;
            }
        }
        if (any) continue;

        std::vector<std::size_t> candidates;
        for (std::size_t s = 0; s < t_total; ++s)
            if (model.demand_mean(s, i) > 0.0) candidates.push_back(s);
        if (candidates.empty()) {
            throw ConfigError("agent " + std::to_string(i) + " has no step with a positive demand mean");
        }
        KeyedRng rng{model.seed, static_cast<std::uint64_t>(RngStream::repair), episode, i};
        const std::size_t s = candidates[static_cast<std::size_t>(rng.uniform() * candidates.size())];
        double value = normal_draw(rng, model.demand_mean(s, i), model.demand_std(s, i));
        out(s, i) = value > 0.0 ? value : model.demand_mean(s, i);
    }
    return out;
}

DemandModel fit_empirical(const History& history, std::size_t period, std::size_t horizon) {
    if (history.empty()) throw EstimationError("cannot fit a demand model to an empty history");
    if (period < 1) throw ConfigError("seasonal period must be >= 1");
    if (horizon < 1) throw ConfigError("horizon must be >= 1");

    const Date origin = history.first_date();
    const std::size_t n = history.series.size();

    DemandModel model;
    model.kind = DemandKind::empirical;
    model.arrival_prob = ParameterTable(horizon, n, 1.0);
    model.demand_mean = ParameterTable(horizon, n);
    model.demand_std = ParameterTable(horizon, n);
    model.phase_origin = origin;

    std::vector<double> phase_mean(period);
    std::vector<double> phase_std(period);
    std::size_t agent = 0;
    for (const auto& [label, series] : history.series) {
        model.agent_labels.push_back(label);
        std::vector<std::vector<double>> by_phase(period);
        for (const auto& [date, value] : series) {
            auto offset = (date - origin).count();
            auto phase = static_cast<std::size_t>(offset % static_cast<long>(period));
            by_phase[phase].push_back(value);
        }
        for (std::size_t ph = 0; ph < period; ++ph) {
            const auto& obs = by_phase[ph];
            if (obs.size() < 2) {
                std::ostringstream msg;
                msg << "agent '" << label << "' has " << obs.size() << " observation(s) in phase " << ph
                    << "; need at least 2";
                throw EstimationError(msg.str());
            }
            double mean = 0.0;
            for (double v : obs) mean += v;
            mean /= static_cast<double>(obs.size());
            double ss = 0.0;
            for (double v : obs) ss += (v - mean) * (v - mean);
            phase_mean[ph] = mean;
            phase_std[ph] = std::sqrt(ss / static_cast<double>(obs.size() - 1));
        }
        for (std::size_t s = 0; s < horizon; ++s) {
            model.demand_mean(s, agent) = phase_mean[s % period];
            model.demand_std(s, agent) = phase_std[s % period];
        }
        ++agent;
    }
    return model;
}

DemandModel configure_setting(SettingName name, std::size_t num_agents, std::size_t horizon,
                              double expected_arrivals, std::uint64_t seed,
                              const SettingOptions& options) {
    if (num_agents < 1 || horizon < 1) throw ConfigError("setting needs N >= 1 and T >= 1");
    const double t_total = static_cast<double>(horizon);
    if (!(expected_arrivals > 0.0) || expected_arrivals > t_total) {
        throw ConfigError("expected arrivals must lie in (0, T]");
    }
    const bool grouped = name == SettingName::ask_groups || name == SettingName::demand_groups;
    if (grouped && num_agents % 3 != 0) {
        throw ConfigError("group settings need N divisible by 3 (got " + std::to_string(num_agents) + ")");
    }
    if (grouped && horizon < 2) throw ConfigError("group settings need T >= 2");

    DemandModel model;
    model.seed = seed;
    model.arrival_prob = ParameterTable(horizon, num_agents, expected_arrivals / t_total);
    model.demand_mean = ParameterTable(horizon, num_agents);
    model.demand_std = ParameterTable(horizon, num_agents);

    auto agent_mean = [&](std::size_t i) {
        if (options.fixed_mean) return *options.fixed_mean;
        KeyedRng rng{seed, static_cast<std::uint64_t>(RngStream::setting), i};
        return options.mean_low + (options.mean_high - options.mean_low) * rng.uniform();
    };
    // 1-based t: sum_t (T - t) = T(T-1)/2, sum_t t = T(T+1)/2.
    const double early_norm = t_total * (t_total - 1.0) / 2.0;
    const double late_norm = t_total * (t_total + 1.0) / 2.0;
    auto group_of = [&](std::size_t i) { return i / (num_agents / 3); };

    switch (name) {
    case SettingName::symmetric:
    case SettingName::deterministic: {
        const bool det = name == SettingName::deterministic;
        model.kind = det ? DemandKind::deterministic : DemandKind::symmetric;
        for (std::size_t i = 0; i < num_agents; ++i) {
            const double mu = agent_mean(i);
            for (std::size_t s = 0; s < horizon; ++s) {
                if (det) model.arrival_prob(s, i) = 1.0;
                model.demand_mean(s, i) = mu;
                model.demand_std(s, i) = det ? 0.0 : options.std_ratio * mu;
            }
        }
        break;
    }
    case SettingName::ask_groups: {
        model.kind = DemandKind::nonsym_arrivals;
        const double mu = options.group_mean;
        for (std::size_t i = 0; i < num_agents; ++i) {
            for (std::size_t s = 0; s < horizon; ++s) {
                const double t1 = static_cast<double>(s + 1);
                double p = expected_arrivals / t_total;
                if (group_of(i) == 0) p = expected_arrivals * (t_total - t1) / early_norm;
                if (group_of(i) == 1) p = expected_arrivals * t1 / late_norm;
                model.arrival_prob(s, i) = std::min(1.0, p);
                model.demand_mean(s, i) = mu;
                model.demand_std(s, i) = options.std_ratio * mu;
            }
        }
        break;
    }
    case SettingName::demand_groups: {
        model.kind = DemandKind::nonsym_demands;
        const double mu = options.group_mean;
        for (std::size_t i = 0; i < num_agents; ++i) {
            for (std::size_t s = 0; s < horizon; ++s) {
                const double t1 = static_cast<double>(s + 1);
                double m = mu;
                if (group_of(i) == 0) m = mu * t_total * (t_total - t1) / early_norm;
                if (group_of(i) == 1) m = mu * t_total * t1 / late_norm;
                model.demand_mean(s, i) = m;
                model.demand_std(s, i) = options.std_ratio * m;
            }
        }
        break;
    }
    }
    return model;
}

} // namespace fairalloc
