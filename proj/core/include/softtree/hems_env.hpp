#pragma once

/**
 * Home energy management environment: one battery behind the meter of a
 * household with PV, day-ahead consumption prices and a capacity tariff.
 *
 * Sign conventions: battery power u > 0 charges, u < 0 discharges; PV power
 * is nonpositive; aggregate power P_agg = P_con + P_pv + u, negative means
 * injection into the grid. The per-step cost (the MDP's reward signal, lower
 * is better) is energy cost plus capacity cost.
 */

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "softtree/ddt.hpp"
#include "softtree/observation.hpp"
#include "softtree/profiles.hpp"

namespace softtree {

struct BatteryConfig {
    double e_max = 10.0;   // kWh
    double p_max = 4.0;    // kW
    double eta_rt = 0.9;   // round trip
    std::vector<double> action_grid{-1.0, -0.5, 0.0, 0.5, 1.0};

    // Symmetric split of the round-trip efficiency.
    double eta_one_way() const;

    bool operator==(const BatteryConfig&) const = default;
};

struct TariffConfig {
    double lambda_cap = 0.02;      // EUR per kW per step
    double p_agg_min = 4.0;        // kW
    double injection_ratio = 0.3;  // lambda_inj = ratio * lambda_con

    bool operator==(const TariffConfig&) const = default;
};

struct EnvConfig {
    BatteryConfig battery;
    TariffConfig tariff;
    double dt = 1.0;  // hours per step

    bool operator==(const EnvConfig&) const = default;
};

void validate(const BatteryConfig& cfg);
void validate(const TariffConfig& cfg);
void validate(const EnvConfig& cfg);

struct BatteryStep {
    double e_next;     // kWh
    double u_applied;  // kW, possibly clipped
};

// Linear battery model; requests that would leave [0, e_max] are clipped to
// the largest feasible magnitude.
BatteryStep battery_step(double e, double u_power, const BatteryConfig& cfg, double dt);

double aggregate_power(double p_con, double p_pv, double u_applied);

double energy_cost(double p_agg, double lambda_con, double lambda_inj, double dt);

double capacity_cost(double p_agg, const TariffConfig& tariff);

struct StepDiagnostics {
    double p_agg = 0.0;
    double c_eng = 0.0;
    double c_cap = 0.0;
    double u_applied = 0.0;
};

struct StepResult {
    Observation next_obs{};
    double cost = 0.0;
    bool done = false;
    StepDiagnostics diagnostics;
};

struct StepOutcome {
    double e_next = 0.0;
    double cost = 0.0;
    StepDiagnostics diagnostics;
};

// One transition of the battery/tariff model at hour t of `day` with
// requested battery power u_power (kW). HemsEnv::step and the oracles share
// this function, so they agree on semantics exactly.
StepOutcome simulate_step(const ProfileDay& day, std::size_t t, double e, double u_power,
                          const EnvConfig& cfg);

// Continuous normalized action u_norm in [-1, 1] (used by the rule-based
// controller).
struct ContinuousAction {
    double u_norm = 0.0;
};

using EnvAction = std::variant<ActionIndex, ContinuousAction>;

// Single-owner episodic environment over a shared, immutable profile set.
class HemsEnv {
public:
    HemsEnv(EnvConfig cfg, std::shared_ptr<const ProfileSet> profiles);

    Observation reset(std::size_t day_index, double e0);
    StepResult step(EnvAction action);

    // Writes one JSON line of diagnostics per step while set. Pass nullptr to
    // disable.
    void set_trace(std::ostream* sink) { trace_ = sink; }

    const EnvConfig& config() const { return cfg_; }
    const ProfileSet& profiles() const { return *profiles_; }
    std::size_t horizon() const { return kHoursPerDay; }
    std::size_t t() const { return t_; }
    double energy() const { return e_; }
    bool done() const { return t_ >= horizon(); }
    std::size_t day_index() const { return day_; }

    // Observation at step t (clamped to the last hour once the episode ends).
    Observation observe() const;

private:
    EnvConfig cfg_;
    std::shared_ptr<const ProfileSet> profiles_;
    std::size_t day_ = 0;
    std::size_t t_ = 0;
    double e_ = 0.0;
    bool started_ = false;
    std::ostream* trace_ = nullptr;
};

// Maps an action to battery power in kW.
double action_to_power(const EnvAction& action, const BatteryConfig& cfg);

}  // namespace softtree
