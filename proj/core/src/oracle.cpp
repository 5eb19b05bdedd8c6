#include "softtree/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "softtree/error.hpp"

namespace softtree {

namespace {

void check_horizon(const ProfileDay& day, std::size_t horizon) {
    validate(day);
    if (horizon == 0 || horizon > day.lambda_con.size()) {
        throw ValidationError("horizon must lie in [1, " + std::to_string(day.lambda_con.size()) + "]");
    }
}

struct Search {
    const ProfileDay& day;
    const EnvConfig& cfg;
    std::size_t horizon;
    std::size_t n_actions;
    std::vector<ActionIndex> current;
    std::vector<ActionIndex> best;
    double best_cost = std::numeric_limits<double>::infinity();

    void run(std::size_t t, double e, double cost_so_far) {
        if (t == horizon) {
            if (cost_so_far < best_cost) {
                best_cost = cost_so_far;
                best = current;
            }
            return;
        }
        for (std::size_t a = 0; a < n_actions; ++a) {
            const double u = cfg.battery.action_grid[a] * cfg.battery.p_max;
            const auto out = simulate_step(day, t, e, u, cfg);
            current[t] = a;
            run(t + 1, out.e_next, cost_so_far + out.cost);
        }
    }
};

}  // namespace

double replay_plan(const ProfileDay& day, const std::vector<ActionIndex>& actions,
                   const EnvConfig& cfg, double e0, std::vector<double>* energy) {
    double e = e0;
    double total = 0.0;
    if (energy) energy->assign(1, e0);
    for (std::size_t t = 0; t < actions.size(); ++t) {
        const auto out = simulate_step(day, t, e, action_to_power(actions[t], cfg.battery), cfg);
        total += out.cost;
        e = out.e_next;
        if (energy) energy->push_back(e);
    }
    return total;
}

PlanResult exhaustive_optimal(const ProfileDay& day, std::size_t horizon, const EnvConfig& cfg,
                              double e0) {
    validate(cfg);
    check_horizon(day, horizon);
    const std::size_t n_actions = cfg.battery.action_grid.size();
    const double combos = std::pow(static_cast<double>(n_actions), static_cast<double>(horizon));
    if (combos > kExhaustiveLimit) {
        throw ValidationError("exhaustive search over " + std::to_string(n_actions) + "^" +
                              std::to_string(horizon) + " sequences exceeds the 1e7 guard; use dp_optimal");
    }
    if (!(e0 >= 0.0 && e0 <= cfg.battery.e_max)) throw ValidationError("initial energy must lie in [0, e_max]");

    Search s{day, cfg, horizon, n_actions, std::vector<ActionIndex>(horizon, 0), {}};
    s.run(0, e0, 0.0);

    PlanResult plan;
    plan.actions = std::move(s.best);
    plan.total_cost = replay_plan(day, plan.actions, cfg, e0, &plan.energy);
    plan.value_estimate = plan.total_cost;
    return plan;
}

PlanResult dp_optimal(const ProfileDay& day, const EnvConfig& cfg, double e_grid, std::size_t horizon,
                      double e0) {
    validate(cfg);
    check_horizon(day, horizon);
    if (!(e_grid > 0.0) || !std::isfinite(e_grid)) throw ValidationError("e_grid must be > 0");
    if (!(e0 >= 0.0 && e0 <= cfg.battery.e_max)) throw ValidationError("initial energy must lie in [0, e_max]");

    const double e_max = cfg.battery.e_max;
    const std::size_t steps = static_cast<std::size_t>(std::llround(e_max / e_grid));
    const std::size_t n_levels = steps + 1;
    const double spacing = steps > 0 ? e_max / static_cast<double>(steps) : 0.0;
    auto level_of = [&](double e) -> std::size_t {
        if (steps == 0) return 0;
        const auto k = static_cast<long long>(std::llround(e / spacing));
        return static_cast<std::size_t>(std::clamp<long long>(k, 0, static_cast<long long>(steps)));
    };

    const std::size_t n_actions = cfg.battery.action_grid.size();
    std::vector<double> power(n_actions);
    for (std::size_t a = 0; a < n_actions; ++a) power[a] = cfg.battery.action_grid[a] * cfg.battery.p_max;

    // value[t][k]: optimal cost-to-go from hour t at energy level k.
    std::vector<std::vector<double>> value(horizon + 1, std::vector<double>(n_levels, 0.0));
    for (std::size_t t = horizon; t-- > 0;) {
        for (std::size_t k = 0; k < n_levels; ++k) {
            const double e = std::min(static_cast<double>(k) * spacing, e_max);
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < n_actions; ++a) {
                const auto out = simulate_step(day, t, e, power[a], cfg);
                best = std::min(best, out.cost + value[t + 1][level_of(out.e_next)]);
            }
            value[t][k] = best;
        }
    }

    PlanResult plan;
    plan.actions.reserve(horizon);
    double e = e0;
    for (std::size_t t = 0; t < horizon; ++t) {
        double best = std::numeric_limits<double>::infinity();
        ActionIndex best_a = 0;
        for (std::size_t a = 0; a < n_actions; ++a) {
            const auto out = simulate_step(day, t, e, power[a], cfg);
            const double v = out.cost + value[t + 1][level_of(out.e_next)];
            if (v < best) {
                best = v;
                best_a = a;
            }
        }
        plan.actions.push_back(best_a);
        e = simulate_step(day, t, e, power[best_a], cfg).e_next;
    }
    plan.total_cost = replay_plan(day, plan.actions, cfg, e0, &plan.energy);
    plan.value_estimate = value[0][level_of(e0)];

    double lambda_max = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) lambda_max = std::max(lambda_max, day.lambda_con[t]);
    plan.error_bound = static_cast<double>(horizon) * lambda_max * (spacing / cfg.battery.eta_one_way());
    return plan;
}

}  // namespace softtree
