#include "softtree/hems_env.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <json.hpp>

#include "softtree/error.hpp"

namespace softtree {

double BatteryConfig::eta_one_way() const { return std::sqrt(eta_rt); }

void validate(const BatteryConfig& cfg) {
    // e_max = 0 is accepted as a degenerate "no battery" configuration.
    if (!(cfg.e_max >= 0.0) || !std::isfinite(cfg.e_max)) throw ValidationError("battery.e_max must be >= 0");
    if (!(cfg.p_max > 0.0) || !std::isfinite(cfg.p_max)) throw ValidationError("battery.p_max must be > 0");
    if (!(cfg.eta_rt > 0.0 && cfg.eta_rt <= 1.0)) throw ValidationError("battery.eta_rt must lie in (0, 1]");
    const auto& g = cfg.action_grid;
    if (g.size() < 2) throw ValidationError("battery.action_grid needs at least two actions");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!std::isfinite(g[i]) || g[i] < -1.0 || g[i] > 1.0)
            throw ValidationError("battery.action_grid entries must lie in [-1, 1]");
        if (i > 0 && !(g[i] > g[i - 1]))
            throw ValidationError("battery.action_grid must be strictly increasing");
        if (g[i] != -g[g.size() - 1 - i])
            throw ValidationError("battery.action_grid must be symmetric about 0");
    }
    if (std::find(g.begin(), g.end(), 0.0) == g.end())
        throw ValidationError("battery.action_grid must contain 0");
}

void validate(const TariffConfig& cfg) {
    if (!(cfg.lambda_cap >= 0.0) || !std::isfinite(cfg.lambda_cap)) throw ValidationError("tariff.lambda_cap must be >= 0");
    if (!(cfg.p_agg_min >= 0.0) || !std::isfinite(cfg.p_agg_min)) throw ValidationError("tariff.p_agg_min must be >= 0");
    if (!(cfg.injection_ratio >= 0.0 && cfg.injection_ratio <= 1.0))
        throw ValidationError("tariff.injection_ratio must lie in [0, 1]");
}

void validate(const EnvConfig& cfg) {
    validate(cfg.battery);
    validate(cfg.tariff);
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ValidationError("dt must be > 0");
}

BatteryStep battery_step(double e, double u_power, const BatteryConfig& cfg, double dt) {
    if (!(e >= 0.0 && e <= cfg.e_max)) {
        throw ContractViolation("battery energy " + std::to_string(e) + " kWh outside [0, " +
                                std::to_string(cfg.e_max) + "]");
    }
    const double eta = cfg.eta_one_way();
    if (u_power >= 0.0) {
        const double e_next = e + eta * u_power * dt;
        if (e_next > cfg.e_max) return {cfg.e_max, (cfg.e_max - e) / (eta * dt)};
        return {e_next, u_power};
    }
    const double e_next = e + u_power * dt / eta;
    if (e_next < 0.0) return {0.0, -e * eta / dt};
    return {e_next, u_power};
}

double aggregate_power(double p_con, double p_pv, double u_applied) { return p_con + p_pv + u_applied; }

double energy_cost(double p_agg, double lambda_con, double lambda_inj, double dt) {
    return (p_agg >= 0.0 ? lambda_con : lambda_inj) * p_agg * dt;
}

double capacity_cost(double p_agg, const TariffConfig& tariff) {
    return tariff.lambda_cap * std::max(p_agg, tariff.p_agg_min);
}

double action_to_power(const EnvAction& action, const BatteryConfig& cfg) {
    if (const auto* idx = std::get_if<ActionIndex>(&action)) {
        if (*idx >= cfg.action_grid.size()) {
            throw ValidationError("action index " + std::to_string(*idx) + " outside the action grid");
        }
        return cfg.action_grid[*idx] * cfg.p_max;
    }
    const double u = std::get<ContinuousAction>(action).u_norm;
    if (!(u >= -1.0 && u <= 1.0)) throw ValidationError("continuous action must lie in [-1, 1]");
    return u * cfg.p_max;
}

StepOutcome simulate_step(const ProfileDay& day, std::size_t t, double e, double u_power,
                          const EnvConfig& cfg) {
    const auto bat = battery_step(e, u_power, cfg.battery, cfg.dt);
    StepOutcome out;
    out.e_next = bat.e_next;
    auto& d = out.diagnostics;
    d.u_applied = bat.u_applied;
    d.p_agg = aggregate_power(day.p_con[t], day.p_pv[t], bat.u_applied);
    const double price = day.lambda_con[t];
    d.c_eng = energy_cost(d.p_agg, price, cfg.tariff.injection_ratio * price, cfg.dt);
    d.c_cap = capacity_cost(d.p_agg, cfg.tariff);
    out.cost = d.c_eng + d.c_cap;
    return out;
}

HemsEnv::HemsEnv(EnvConfig cfg, std::shared_ptr<const ProfileSet> profiles)
    : cfg_(std::move(cfg)), profiles_(std::move(profiles)) {
    validate(cfg_);
    if (!profiles_ || profiles_->days.empty()) throw ValidationError("environment needs a nonempty profile set");
}

Observation HemsEnv::reset(std::size_t day_index, double e0) {
    if (day_index >= profiles_->days.size()) {
        throw ValidationError("day index " + std::to_string(day_index) + " out of range (" +
                              std::to_string(profiles_->days.size()) + " days)");
    }
    if (!(e0 >= 0.0 && e0 <= cfg_.battery.e_max)) {
        throw ValidationError("initial energy must lie in [0, e_max]");
    }
    day_ = day_index;
    t_ = 0;
    e_ = e0;
    started_ = true;
    return observe();
}

Observation HemsEnv::observe() const {
    const auto& day = profiles_->days[day_];
    const std::size_t h = std::min(t_, horizon() - 1);
    const double soc = cfg_.battery.e_max > 0.0 ? e_ / cfg_.battery.e_max : 0.0;
    return {day.lambda_con[h], soc, day.p_con[h], day.p_pv[h]};
}

StepResult HemsEnv::step(EnvAction action) {
    if (!started_) throw ContractViolation("step called before reset");
    if (done()) throw ContractViolation("step called on a finished episode");

    const double u = action_to_power(action, cfg_.battery);
    const auto out = simulate_step(profiles_->days[day_], t_, e_, u, cfg_);

    StepResult r;
    r.cost = out.cost;
    r.diagnostics = out.diagnostics;
    const auto& d = r.diagnostics;

    if (trace_) {
        nlohmann::json line = {{"day", day_},        {"t", t_},           {"e", e_},
                               {"u_request", u},     {"u_applied", d.u_applied},
                               {"p_agg", d.p_agg},   {"c_eng", d.c_eng},  {"c_cap", d.c_cap},
                               {"cost", r.cost}};
        *trace_ << line.dump() << '\n';
    }

    e_ = out.e_next;
    ++t_;
    r.done = done();
    r.next_obs = observe();
    return r;
}

}  // namespace softtree
