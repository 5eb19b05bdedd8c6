#pragma once

/**
 * Perfect-foresight optimal dispatch for one day over the discrete action
 * grid, under exactly the environment's step semantics. These plans know the
 * whole day in advance, so they lower-bound the cost of any causal policy
 * restricted to the same action set; they are not attainable by one.
 */

#include <cstddef>
#include <vector>

#include "softtree/hems_env.hpp"

namespace softtree {

struct PlanResult {
    double total_cost = 0.0;            // replayed through simulate_step
    std::vector<ActionIndex> actions;   // one per step
    std::vector<double> energy;         // kWh, length actions.size() + 1
    // DP only: value-function estimate at the start and the a-priori bound
    // T * lambda_max * e_grid / eta on its discretization error.
    double value_estimate = 0.0;
    double error_bound = 0.0;
};

inline constexpr double kExhaustiveLimit = 1e7;

// Enumerates all A^horizon sequences; ties go to the lexicographically
// smallest sequence. Throws ValidationError when A^horizon exceeds
// kExhaustiveLimit (use dp_optimal instead).
PlanResult exhaustive_optimal(const ProfileDay& day, std::size_t horizon, const EnvConfig& cfg,
                              double e0 = 0.0);

// Backward induction over (hour, energy rounded to e_grid kWh), then a
// forward pass on the exact energy that picks, at each hour, the action
// minimizing stage cost + value of the rounded successor.
PlanResult dp_optimal(const ProfileDay& day, const EnvConfig& cfg, double e_grid,
                      std::size_t horizon = 24, double e0 = 0.0);

// Cost of replaying `actions` from e0. Returns the total and fills `energy`
// when non-null.
double replay_plan(const ProfileDay& day, const std::vector<ActionIndex>& actions,
                   const EnvConfig& cfg, double e0 = 0.0, std::vector<double>* energy = nullptr);

}  // namespace softtree
