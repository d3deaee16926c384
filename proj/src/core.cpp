#include "fairalloc/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fairalloc {

Instance Instance::uniform(std::size_t num_agents, std::size_t horizon, double budget,
                           double epsilon) {
    Instance inst;
    inst.num_agents = num_agents;
    inst.horizon = horizon;
    inst.budget = budget;
    inst.weights.assign(num_agents, 1.0);
    inst.epsilon = epsilon;
    return inst;
}

void Instance::validate() const {
    if (num_agents < 1) throw InvalidInput("instance needs at least one agent");
    if (horizon < 1) throw InvalidInput("instance needs a horizon of at least one step");
    if (!(budget >= 0.0) || !std::isfinite(budget)) throw InvalidInput("budget must be finite and >= 0");
    if (weights.size() != num_agents) throw InvalidInput("weights must have one entry per agent");
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInput("weights must be finite and > 0");
    }
    if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be > 0");
}

void validate_demands(const DemandMatrix& demands) {
    for (std::size_t t = 0; t < demands.steps(); ++t) {
        for (std::size_t i = 0; i < demands.agents(); ++i) {
            double x = demands(t, i);
            if (!(x >= 0.0) || !std::isfinite(x)) {
                std::ostringstream msg;
                msg << "demand at step " << t << ", agent " << i << " is negative or not finite";
                throw InvalidInput(msg.str());
            }
        }
    }
    for (std::size_t i = 0; i < demands.agents(); ++i) {
        bool any = false;
        for (std::size_t t = 0; t < demands.steps() && !any; ++t) any = demands(t, i) > 0.0;
        if (!any) {
            throw InvalidInput("agent " + std::to_string(i) + " has no positive demand over the horizon");
        }
    }
}

void validate_allocations(const AllocationMatrix& allocations, double budget) {
    double running = 0.0;
    for (std::size_t t = 0; t < allocations.steps(); ++t) {
        for (std::size_t i = 0; i < allocations.agents(); ++i) {
            double a = allocations(t, i);
            if (!(a >= 0.0) || !std::isfinite(a)) {
                throw FeasibilityError("negative or non-finite allocation at step " + std::to_string(t));
            }
            running += a;
        }
        if (running > budget + kFeasibilityTol) {
            throw FeasibilityError("cumulative allocation exceeds budget at step " + std::to_string(t));
        }
    }
}

namespace {

void require_same_shape(const AllocationMatrix& a, const DemandMatrix& x) {
    if (a.steps() != x.steps() || a.agents() != x.agents()) {
        throw InvalidInput("allocation and demand matrices differ in shape");
    }
}

} // namespace

double total_utility(const AllocationMatrix& allocations, const DemandMatrix& demands,
                     std::size_t agent) {
    require_same_shape(allocations, demands);
    if (agent >= demands.agents()) throw InvalidInput("agent index out of range");
    double u = 0.0;
    for (std::size_t t = 0; t < demands.steps(); ++t) {
        u += std::min(allocations(t, agent), demands(t, agent));
    }
    return u;
}

std::vector<double> utilities(const AllocationMatrix& allocations, const DemandMatrix& demands) {
    require_same_shape(allocations, demands);
    std::vector<double> u(demands.agents(), 0.0);
    for (std::size_t t = 0; t < demands.steps(); ++t)
        for (std::size_t i = 0; i < demands.agents(); ++i)
            u[i] += std::min(allocations(t, i), demands(t, i));
    return u;
}

EpisodeState EpisodeState::initial(const Instance& instance) {
    EpisodeState s;
    s.step_ = 0;
    s.initial_budget_ = instance.budget;
    s.remaining_budget_ = instance.budget;
    s.cumulative_allocations_.assign(instance.num_agents, 0.0);
    s.cumulative_demands_.assign(instance.num_agents, 0.0);
    return s;
}

EpisodeState EpisodeState::advance(std::span<const double> step_allocation,
                                   std::span<const double> step_demand) const {
    if (step_allocation.size() != num_agents() || step_demand.size() != num_agents()) {
        throw InvalidInput("step vectors must have one entry per agent");
    }
    double spent = 0.0;
    for (double a : step_allocation) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw FeasibilityError("negative or non-finite allocation at step " + std::to_string(step_));
        }
        spent += a;
    }
    if (spent > remaining_budget_ + kFeasibilityTol) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "allocation of " << spent << " exceeds remaining budget " << remaining_budget_
            << " at step " << step_;
        throw FeasibilityError(msg.str());
    }

    EpisodeState next = *this;
    next.step_ = step_ + 1;
    next.allocated_so_far_ = allocated_so_far_ + spent;
    next.remaining_budget_ = std::max(0.0, initial_budget_ - next.allocated_so_far_);
    for (std::size_t i = 0; i < num_agents(); ++i) {
        next.cumulative_allocations_[i] += step_allocation[i];
        next.cumulative_demands_[i] += step_demand[i];
    }
    return next;
}

} // namespace fairalloc
