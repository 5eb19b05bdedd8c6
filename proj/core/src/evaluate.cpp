#include <numeric>

#include "softtree/agents.hpp"
#include "softtree/error.hpp"

namespace softtree {

Policy crisp_policy(CrispTree crisp, NormStats norm) {
    return [crisp = std::move(crisp), norm](const Observation& raw) -> EnvAction {
        const auto x = norm_apply(norm, raw);
        return infer_crisp(crisp, x);
    };
}

Policy soft_greedy_policy(ActorParams actor, NormStats norm) {
    return [actor = std::move(actor), norm](const Observation& raw) -> EnvAction {
        const auto x = norm_apply(norm, raw);
        return argmax(actor_probs(actor, x));
    };
}

Policy rbc_policy(BatteryConfig battery, double dt) {
    return [battery = std::move(battery), dt](const Observation& raw) -> EnvAction {
        const double e = raw[kSoc] * battery.e_max;
        return ContinuousAction{rbc_action(raw[kLoad], raw[kPv], e, battery, dt)};
    };
}

Policy constant_policy(ActionIndex action) {
    return [action](const Observation&) -> EnvAction { return action; };
}

EvalReport evaluate(const Policy& policy, const EnvConfig& env_cfg,
                    std::shared_ptr<const ProfileSet> profiles, const std::vector<std::size_t>& days,
                    double e0, bool keep_trace, std::ostream* jsonl_trace) {
    if (days.empty()) throw ValidationError("evaluation needs at least one day");
    HemsEnv env(env_cfg, std::move(profiles));
    env.set_trace(jsonl_trace);
    EvalReport report;
    report.days = days;
    report.day_costs.reserve(days.size());
    for (auto d : days) {
        Observation raw = env.reset(d, e0);
        double total = 0.0;
        while (!env.done()) {
            const double e = env.energy();
            const std::size_t t = env.t();
            const auto r = env.step(policy(raw));
            total += r.cost;
            if (keep_trace) {
                report.trace.push_back({d, t, e, r.diagnostics.u_applied, r.diagnostics.p_agg, r.cost});
            }
            raw = r.next_obs;
        }
        report.day_costs.push_back(total);
    }
    report.mean_cost = std::accumulate(report.day_costs.begin(), report.day_costs.end(), 0.0) /
                       static_cast<double>(report.day_costs.size());
    return report;
}

}  // namespace softtree
