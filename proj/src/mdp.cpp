#include "fairalloc/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "fairalloc/hindsight.hpp"

namespace fairalloc {

RewardLedger::RewardLedger(std::vector<double> weights, double epsilon)
    : weights_(std::move(weights)), epsilon_(epsilon), utility_(weights_.size(), 0.0) {
    if (!(epsilon_ > 0.0)) throw InvalidInput("epsilon must be > 0");
}

double RewardLedger::record(std::span<const double> demand, std::span<const double> allocation) {
    if (demand.size() != weights_.size() || allocation.size() != weights_.size()) {
        throw InvalidInput("reward inputs differ in agent count");
    }
    double reward = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        const double before = utility_[i];
        utility_[i] += std::min(allocation[i], demand[i]);
        if (demand[i] > 0.0) {
            reward += weights_[i] * (std::log(utility_[i] + epsilon_) - std::log(before + epsilon_));
        }
    }
    rewards_.push_back(reward);
    return reward;
}

std::vector<double> RewardLedger::log_utilities() const {
    std::vector<double> u(utility_.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::log(utility_[i] + epsilon_);
    return u;
}

double RewardLedger::total() const {
    double s = 0.0;
    for (double r : rewards_) s += r;
    return s;
}

double step_reward(RewardLedger& ledger, std::span<const double> demand,
                   std::span<const double> allocation) {
    return ledger.record(demand, allocation);
}

double episode_return(const DemandMatrix& demands, const AllocationMatrix& allocations,
                      std::span<const double> weights, double epsilon) {
    if (demands.steps() != allocations.steps() || demands.agents() != allocations.agents()) {
        throw InvalidInput("allocation and demand matrices differ in shape");
    }
    RewardLedger ledger(std::vector<double>(weights.begin(), weights.end()), epsilon);
    for (std::size_t t = 0; t < demands.steps(); ++t) ledger.record(demands.row(t), allocations.row(t));
    return ledger.total();
}

std::size_t to_grid_units(double amount, double grid_step) {
    if (amount <= 0.0) return 0;
    return static_cast<std::size_t>(std::floor(amount / grid_step + 1e-7));
}

std::size_t DiscreteMDP::budget_units() const { return to_grid_units(budget, grid_step); }

void DiscreteMDP::validate() const {
    if (support.empty() || support.front().empty()) throw InvalidInput("MDP needs steps and agents");
    if (!(grid_step > 0.0)) throw InvalidInput("allocation grid step must be > 0");
    if (!(budget >= 0.0)) throw InvalidInput("budget must be >= 0");
    if (weights.size() != num_agents()) throw InvalidInput("weights must have one entry per agent");
    if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be > 0");
    for (const auto& step : support) {
        if (step.size() != num_agents()) throw InvalidInput("every step must list every agent");
        for (const AtomSupport& s : step) {
            if (s.values.empty() || s.values.size() != s.probs.size()) {
                throw InvalidInput("atom support needs matching non-empty values and probabilities");
            }
            double total = 0.0;
            for (std::size_t k = 0; k < s.values.size(); ++k) {
                if (!(s.values[k] >= 0.0) || !(s.probs[k] >= 0.0)) {
                    throw InvalidInput("atom values and probabilities must be >= 0");
                }
                total += s.probs[k];
            }
            if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("atom probabilities must sum to 1");
        }
    }
}

MomentTable DiscreteMDP::horizon_moments() const {
    MomentTable m;
    m.first_step = 0;
    m.mean = ParameterTable(horizon(), num_agents());
    m.stddev = ParameterTable(horizon(), num_agents());
    for (std::size_t t = 0; t < horizon(); ++t) {
        for (std::size_t i = 0; i < num_agents(); ++i) {
            const AtomSupport& s = support[t][i];
            double mean = 0.0;
            double second = 0.0;
            for (std::size_t k = 0; k < s.values.size(); ++k) {
                mean += s.probs[k] * s.values[k];
                second += s.probs[k] * s.values[k] * s.values[k];
            }
            m.mean(t, i) = mean;
            m.stddev(t, i) = std::sqrt(std::max(0.0, second - mean * mean));
        }
    }
    return m;
}

Instance DiscreteMDP::instance() const {
    Instance inst;
    inst.num_agents = num_agents();
    inst.horizon = horizon();
    inst.budget = budget;
    inst.weights = weights;
    inst.epsilon = epsilon;
    return inst;
}

DiscreteMDP DiscreteMDP::make(std::vector<std::vector<AtomSupport>> support, double budget,
                              std::vector<double> weights, double epsilon) {
    DiscreteMDP mdp;
    mdp.support = std::move(support);
    mdp.budget = budget;
    mdp.grid_step = budget > 0.0 ? budget / 40.0 : 1.0;
    mdp.weights = std::move(weights);
    mdp.epsilon = epsilon;
    return mdp;
}

namespace {

// Joint demand outcomes of one step: per-agent atom indices and their probability.
struct Outcome {
    std::vector<std::size_t> atom;
    std::vector<std::size_t> cap_units;
    std::vector<double> values;
    double prob = 1.0;
};

std::vector<Outcome> joint_outcomes(const DiscreteMDP& mdp, std::size_t t) {
    std::vector<Outcome> out{Outcome{}};
    for (std::size_t i = 0; i < mdp.num_agents(); ++i) {
        const AtomSupport& s = mdp.support[t][i];
        std::vector<Outcome> next;
        for (const Outcome& o : out) {
            for (std::size_t k = 0; k < s.values.size(); ++k) {
                Outcome e = o;
                e.atom.push_back(k);
                e.cap_units.push_back(to_grid_units(s.values[k], mdp.grid_step));
                e.values.push_back(s.values[k]);
                e.prob *= s.probs[k];
                next.push_back(std::move(e));
            }
        }
        out = std::move(next);
    }
    return out;
}

double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t j = 1; j <= k; ++j) r = r * static_cast<double>(n - k + j) / static_cast<double>(j);
    return r;
}

// Mixed-radix index helpers over (units+1)^N.
struct Radix {
    std::size_t base;
    std::size_t dims;

    std::size_t size() const {
        std::size_t s = 1;
        for (std::size_t d = 0; d < dims; ++d) s *= base;
        return s;
    }
    void decode(std::size_t index, std::vector<std::size_t>& digits) const {
        digits.resize(dims);
        for (std::size_t d = 0; d < dims; ++d) {
            digits[d] = index % base;
            index /= base;
        }
    }
    std::size_t encode(std::span<const std::size_t> digits) const {
        std::size_t index = 0;
        for (std::size_t d = dims; d-- > 0;) index = index * base + digits[d];
        return index;
    }
};

} // namespace

std::uint64_t demand_path_count(const DiscreteMDP& mdp) {
    double count = 1.0;
    for (std::size_t t = 0; t < mdp.horizon(); ++t) count *= static_cast<double>(joint_outcomes(mdp, t).size());
    if (count > static_cast<double>(std::numeric_limits<std::uint64_t>::max() / 2)) {
        return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(count);
}

DPSolution dp_solve(const DiscreteMDP& mdp) {
    mdp.validate();
    const std::size_t n = mdp.num_agents();
    const std::size_t horizon = mdp.horizon();
    const std::size_t units = mdp.budget_units();
    const Radix radix{units + 1, n};
    const std::size_t num_states = radix.size();

    std::vector<std::vector<Outcome>> outcomes(horizon);
    for (std::size_t t = 0; t < horizon; ++t) outcomes[t] = joint_outcomes(mdp, t);

    // Upper bound on the work: states with sum(u) <= units, times outcomes, times actions.
    const double feasible_states = binomial(units + n, n);
    double estimate = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        const double states = t == 0 ? 1.0 : feasible_states;
        for (const Outcome& o : outcomes[t]) {
            double actions = 1.0;
            for (std::size_t c : o.cap_units) actions *= static_cast<double>(std::min(c, units) + 1);
            estimate += states * std::min(actions, feasible_states);
        }
    }
    if (estimate > static_cast<double>(mdp.max_state_actions)) {
        throw ResourceError("DP would enumerate about " + std::to_string(static_cast<std::uint64_t>(estimate)) +
                            " state-action pairs, over the cap of " + std::to_string(mdp.max_state_actions));
    }

    std::vector<double> log_level(units + 1);
    for (std::size_t k = 0; k <= units; ++k) {
        log_level[k] = std::log(static_cast<double>(k) * mdp.grid_step + mdp.epsilon);
    }

    DPSolution sol;
    sol.units = units;
    sol.grid_step = mdp.grid_step;
    sol.atoms.resize(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        sol.atoms[t].resize(n);
        for (std::size_t i = 0; i < n; ++i) sol.atoms[t][i] = mdp.support[t][i].values;
    }
    sol.best.assign(horizon, {});

    const double unreachable = -std::numeric_limits<double>::infinity();
    std::vector<double> next_value(num_states, 0.0);
    std::vector<double> value(num_states, unreachable);
    std::vector<std::size_t> u, a(n), v(n);
    const Radix action_radix{units + 1, n};

    for (std::size_t t = horizon; t-- > 0;) {
        std::fill(value.begin(), value.end(), unreachable);
        sol.best[t].assign(num_states, {});
        for (std::size_t s = 0; s < num_states; ++s) {
            radix.decode(s, u);
            std::size_t used = 0;
            for (std::size_t d : u) used += d;
            if (used > units) continue;
            if (t == 0 && used != 0) continue;
            const std::size_t left = units - used;

            double expected = 0.0;
            auto& best_actions = sol.best[t][s];
            best_actions.assign(outcomes[t].size(), 0);
            for (std::size_t oi = 0; oi < outcomes[t].size(); ++oi) {
                const Outcome& o = outcomes[t][oi];
                double best = unreachable;
                std::size_t best_code = 0;
                // Odometer over 0 <= a_i <= cap_i with sum(a) <= left.
                std::fill(a.begin(), a.end(), 0);
                std::size_t spent = 0;
                while (true) {
                    double q = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        v[i] = u[i] + a[i];
                        if (o.values[i] > 0.0) q += mdp.weights[i] * (log_level[v[i]] - log_level[u[i]]);
                    }
                    q += next_value[radix.encode(v)];
                    ++sol.state_action_count;
                    if (q > best) {
                        best = q;
                        best_code = action_radix.encode(a);
                    }
                    std::size_t d = 0;
                    for (; d < n; ++d) {
                        if (a[d] < o.cap_units[d] && spent < left) {
                            ++a[d];
                            ++spent;
                            break;
                        }
                        spent -= a[d];
                        a[d] = 0;
                    }
                    if (d == n) break;
                }
                expected += o.prob * best;
                best_actions[oi] = static_cast<std::uint32_t>(best_code);
            }
            value[s] = expected;
        }
        std::swap(value, next_value);
    }
    sol.value = next_value[0];
    return sol;
}

std::vector<double> DPSolution::action(std::size_t step, std::span<const double> cumulative_utility,
                                       std::span<const double> demand) const {
    if (step >= best.size()) throw InvalidInput("step outside the solved horizon");
    const std::size_t n = atoms[step].size();
    if (cumulative_utility.size() != n || demand.size() != n) throw InvalidInput("state has the wrong agent count");
    const Radix radix{units + 1, n};

    std::vector<std::size_t> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = static_cast<std::size_t>(std::llround(cumulative_utility[i] / grid_step));
    }
    const auto& per_state = best[step][radix.encode(u)];
    if (per_state.empty()) throw InvalidInput("state is not reachable on the DP grid");

    // Outcome index: agent 0 varies slowest, matching joint_outcomes().
    std::size_t outcome = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& vals = atoms[step][i];
        std::size_t k = 0;
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < vals.size(); ++j) {
            if (std::abs(vals[j] - demand[i]) < gap) {
                gap = std::abs(vals[j] - demand[i]);
                k = j;
            }
        }
        outcome = outcome * vals.size() + k;
    }
    std::vector<std::size_t> a;
    radix.decode(per_state.at(outcome), a);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(a[i]) * grid_step;
    return out;
}

namespace {

// Calls visit(demands, probability) for every demand path.
void for_each_path(const DiscreteMDP& mdp, std::uint64_t max_paths,
                   const std::function<void(const DemandMatrix&, double)>& visit) {
    const std::uint64_t count = demand_path_count(mdp);
    if (count > max_paths) {
        throw ResourceError("demand support has " + std::to_string(count) + " paths, over the cap of " +
                            std::to_string(max_paths));
    }
    std::vector<std::vector<Outcome>> outcomes(mdp.horizon());
    for (std::size_t t = 0; t < mdp.horizon(); ++t) outcomes[t] = joint_outcomes(mdp, t);

    DemandMatrix path(mdp.horizon(), mdp.num_agents());
    std::function<void(std::size_t, double)> recurse = [&](std::size_t t, double prob) {
        if (t == mdp.horizon()) {
            visit(path, prob);
            return;
        }
        for (const Outcome& o : outcomes[t]) {
            for (std::size_t i = 0; i < mdp.num_agents(); ++i) path(t, i) = o.values[i];
            recurse(t + 1, prob * o.prob);
        }
    };
    recurse(0, 1.0);
}

} // namespace

double evaluate_policy_on_mdp(const DiscreteMDP& mdp, const PolicyConfig& policy_config,
                              bool snap_to_grid, std::uint64_t max_paths) {
    mdp.validate();
    const Instance instance = mdp.instance();
    const OnlinePolicy policy(instance, mdp.horizon_moments(), policy_config);
    const std::size_t units = mdp.budget_units();
    const std::size_t n = mdp.num_agents();

    double expected = 0.0;
    for_each_path(mdp, max_paths, [&](const DemandMatrix& demands, double prob) {
        AllocationMatrix alloc(mdp.horizon(), n);
        EpisodeState state = EpisodeState::initial(instance);
        std::size_t units_left = units;
        for (std::size_t t = 0; t < mdp.horizon(); ++t) {
            std::vector<double> a = policy.allocate(state, demands);
            if (snap_to_grid) {
                std::vector<std::size_t> k(n);
                std::size_t total = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    k[i] = std::min(to_grid_units(a[i], mdp.grid_step), to_grid_units(demands(t, i), mdp.grid_step));
                    total += k[i];
                }
                while (total > units_left) {
                    auto it = std::max_element(k.begin(), k.end());
                    --*it;
                    --total;
                }
                units_left -= total;
                for (std::size_t i = 0; i < n; ++i) a[i] = static_cast<double>(k[i]) * mdp.grid_step;
            }
            state = state.advance(a, demands.row(t));
            std::copy(a.begin(), a.end(), alloc.row(t).begin());
        }
        expected += prob * episode_return(demands, alloc, mdp.weights, mdp.epsilon);
    });
    return expected;
}

double expected_hindsight_value(const DiscreteMDP& mdp, std::uint64_t max_paths) {
    mdp.validate();
    const Instance instance = mdp.instance();
    double expected = 0.0;
    for_each_path(mdp, max_paths, [&](const DemandMatrix& demands, double prob) {
        const std::vector<double> totals = demands.column_sums();
        const std::vector<double> alloc = solve_hindsight(instance, demands).totals;
        double value = 0.0;
        for (std::size_t i = 0; i < totals.size(); ++i) {
            if (totals[i] > 0.0) {
                value += mdp.weights[i] * (std::log(alloc[i] + mdp.epsilon) - std::log(mdp.epsilon));
            }
        }
        expected += prob * value;
    });
    return expected;
}

} // namespace fairalloc
