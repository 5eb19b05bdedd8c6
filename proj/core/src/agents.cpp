#include "softtree/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "softtree/error.hpp"
#include "softtree/log.hpp"

namespace softtree {

namespace {

constexpr std::uint64_t kCriticSeedOffset = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kReplaySeedOffset = 0xD1B54A32D192ED03ULL;
constexpr std::uint64_t kExploreSeedOffset = 0x94D049BB133111EBULL;

void softmax_inplace(std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    double total = 0.0;
    for (double& x : v) {
        x = std::exp(x - m);
        total += x;
    }
    for (double& x : v) x /= total;
}

// Adds scale * d(upstream . softmax(mlp(x)))/d(params) into grads.
void accumulate_mlp_actor(const MlpParams& actor, std::span<const double> x,
                          std::span<const double> upstream, double scale, MlpGradients& grads) {
    MlpCache cache;
    auto p = mlp_forward(actor, x, cache);
    softmax_inplace(p);
    double mean = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) mean += p[k] * upstream[k];
    std::vector<double> dlogits(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) dlogits[k] = p[k] * (upstream[k] - mean);
    accumulate_mlp_backward(actor, cache, dlogits, scale, grads);
}

}  // namespace

void validate(const AgentConfig& c) {
    if (c.depth < 1 || c.depth > 8) throw ValidationError("agent.depth must lie in [1, 8]");
    if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw ValidationError("agent.gamma must lie in [0, 1]");
    if (!(c.tau > 0.0 && c.tau <= 1.0)) throw ValidationError("agent.tau must lie in (0, 1]");
    if (!(c.actor_lr > 0.0)) throw ValidationError("agent.actor_lr must be > 0");
    if (!(c.critic_lr > 0.0)) throw ValidationError("agent.critic_lr must be > 0");
    if (c.batch_size == 0) throw ValidationError("agent.batch_size must be positive");
    if (c.buffer_capacity < c.batch_size) throw ValidationError("agent.buffer_capacity must be >= batch_size");
    if (c.updates_per_step == 0) throw ValidationError("agent.updates_per_step must be positive");
    if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) throw ValidationError("agent.epsilon must lie in [0, 1]");
    if (!(c.input_range > 0.0 && std::isfinite(c.input_range)))
        throw ValidationError("agent.input_range must be > 0");
    if (!(c.train_e0_fraction >= 0.0 && c.train_e0_fraction <= 1.0))
        throw ValidationError("agent.train_e0_fraction must lie in [0, 1]");
    if (c.eval_interval == 0) throw ValidationError("agent.eval_interval must be positive");
    for (auto w : c.critic_hidden) {
        if (w == 0) throw ValidationError("agent.critic_hidden widths must be positive");
    }
    for (auto w : c.actor_hidden) {
        if (w == 0) throw ValidationError("agent.actor_hidden widths must be positive");
    }
}

ActionDistribution mlp_actor_probs(const MlpParams& actor, std::span<const double> x) {
    auto p = mlp_forward(actor, x);
    softmax_inplace(p);
    return p;
}

ActionDistribution actor_probs(const ActorParams& actor, std::span<const double> x) {
    if (const auto* tree = std::get_if<TreeParams>(&actor)) return forward_soft(*tree, x);
    return mlp_actor_probs(std::get<MlpParams>(actor), x);
}

std::vector<double> critic_target(std::span<const Transition> batch, const MlpParams& target_critic,
                                  const ProbabilityFn& target_actor, double gamma) {
    if (batch.empty()) throw ValidationError("critic target needs a nonempty batch");
    std::vector<double> y(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& tr = batch[i];
        y[i] = tr.c;
        if (tr.done) continue;
        const auto q = mlp_forward(target_critic, tr.x_next);
        const auto p = target_actor(tr.x_next);
        if (p.size() != q.size()) throw ValidationError("actor and critic disagree on the action count");
        double expectation = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) expectation += p[k] * q[k];
        y[i] += gamma * expectation;
    }
    return y;
}

std::vector<double> critic_target(std::span<const Transition> batch, const MlpParams& target_critic,
                                  const TreeParams& target_actor, double gamma) {
    return critic_target(
        batch, target_critic,
        [&](std::span<const double> x) { return forward_soft(target_actor, x); }, gamma);
}

CriticUpdateStats critic_update(std::span<const Transition> batch, std::span<const double> targets,
                                MlpParams& critic, OptimizerState& optimizer) {
    if (batch.size() != targets.size() || batch.empty()) {
        throw ValidationError("critic update needs one target per transition");
    }
    MlpGradients grads = zeros_like(critic);
    MlpCache cache;
    std::vector<double> upstream(critic.output_width(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto q = mlp_forward(critic, batch[i].x, cache);
        const auto u = batch[i].u;
        if (u >= q.size()) throw ValidationError("transition action outside the critic's outputs");
        const double err = q[u] - targets[i];
        loss += err * err * inv_n;
        std::fill(upstream.begin(), upstream.end(), 0.0);
        upstream[u] = 2.0 * err;
        accumulate_mlp_backward(critic, cache, upstream, inv_n, grads);
    }
    if (!std::isfinite(loss)) {
        std::ostringstream dump;
        dump << "critic loss is not finite; targets:";
        for (double t : targets) dump << ' ' << t;
        throw TrainingDiverged(dump.str());
    }
    adam_step(critic, grads, optimizer);
    return {loss};
}

double expected_cost(std::span<const Transition> batch, const ActorParams& actor,
                     const MlpParams& critic) {
    if (batch.empty()) throw ValidationError("expected cost needs a nonempty batch");
    double total = 0.0;
    for (const auto& tr : batch) {
        const auto q = mlp_forward(critic, tr.x);
        const auto p = actor_probs(actor, tr.x);
        for (std::size_t k = 0; k < q.size(); ++k) total += p[k] * q[k];
    }
    return total / static_cast<double>(batch.size());
}

TreeGradients actor_gradient(std::span<const Transition> batch, const TreeParams& actor,
                             const MlpParams& critic) {
    if (critic.output_width() != static_cast<std::size_t>(actor.n_actions)) {
        throw ValidationError("actor and critic disagree on the action count");
    }
    TreeGradients g = zeros_like(actor);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const auto& tr : batch) {
        const auto q = mlp_forward(critic, tr.x);
        accumulate_backward(actor, tr.x, q, inv_n, g);
    }
    return g;
}

MlpGradients actor_gradient(std::span<const Transition> batch, const MlpParams& actor,
                            const MlpParams& critic) {
    if (critic.output_width() != actor.output_width()) {
        throw ValidationError("actor and critic disagree on the action count");
    }
    MlpGradients g = zeros_like(actor);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const auto& tr : batch) {
        const auto q = mlp_forward(critic, tr.x);
        accumulate_mlp_actor(actor, tr.x, q, inv_n, g);
    }
    return g;
}

ActorUpdateStats actor_update(std::span<const Transition> batch, TreeParams& actor,
                              const MlpParams& critic, OptimizerState& optimizer) {
    ActorUpdateStats s{expected_cost(batch, ActorParams{actor}, critic)};
    const auto g = actor_gradient(batch, actor, critic);
    adam_step(actor, g, optimizer);
    return s;
}

ActorUpdateStats actor_update(std::span<const Transition> batch, MlpParams& actor,
                              const MlpParams& critic, OptimizerState& optimizer) {
    ActorUpdateStats s{expected_cost(batch, ActorParams{actor}, critic)};
    const auto g = actor_gradient(batch, actor, critic);
    adam_step(actor, g, optimizer);
    return s;
}

ActionIndex sample_action(std::span<const double> p, double epsilon, std::mt19937_64& rng) {
    const double n = static_cast<double>(p.size());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double r = unit(rng);
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        acc += (1.0 - epsilon) * p[k] + epsilon / n;
        if (r < acc) return k;
    }
    // Rounding left r above the accumulated mass: fall back to the last
    // action with nonzero probability.
    for (std::size_t k = p.size(); k-- > 0;) {
        if ((1.0 - epsilon) * p[k] + epsilon / n > 0.0) return k;
    }
    return p.size() - 1;
}

ActionIndex select_action(const TreeParams& actor, std::span<const double> x, SelectMode mode,
                          std::mt19937_64& rng, double epsilon) {
    if (mode == SelectMode::greedy) return infer_crisp(crispify(actor), x);
    return sample_action(forward_soft(actor, x), epsilon, rng);
}

double rbc_action(double p_con, double p_pv, double e, const BatteryConfig& cfg, double dt) {
    const double eta = cfg.eta_one_way();
    const double net = p_con + p_pv;
    if (net < 0.0) {
        const double headroom = (cfg.e_max - e) / (eta * dt);
        const double charge = std::max(0.0, std::min({-net, cfg.p_max, headroom}));
        return charge / cfg.p_max;
    }
    if (net > 0.0) {
        const double available = e * eta / dt;
        const double discharge = std::max(0.0, std::min({net, cfg.p_max, available}));
        return -discharge / cfg.p_max;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace {

template <typename Params>
struct ActorOps;

template <>
struct ActorOps<TreeParams> {
    static TreeParams init(const AgentConfig& cfg, int n_actions, std::uint64_t seed) {
        // Center thresholds in the stretched input range so splits start unsaturated.
        TreeParams t = init_tree(cfg.depth, static_cast<int>(kFeatureCount), n_actions, seed);
        for (double& phi : t.phi) phi += 0.5 * cfg.input_range;
        return t;
    }
    static Policy greedy(const TreeParams& a, const NormStats& norm) {
        return crisp_policy(crispify(a), norm);
    }
    // softmax(beta).x stays inside [0, input_range], so a threshold outside it
    // is a constant split; project it back after each step.
    static void update(std::span<const Transition> batch, TreeParams& a, const MlpParams& critic,
                       OptimizerState& opt, double input_range) {
        actor_update(batch, a, critic, opt);
        for (double& phi : a.phi) phi = std::clamp(phi, 0.0, input_range);
    }
};

template <>
struct ActorOps<MlpParams> {
    static MlpParams init(const AgentConfig& cfg, int n_actions, std::uint64_t seed) {
        std::vector<std::size_t> widths{kFeatureCount};
        widths.insert(widths.end(), cfg.actor_hidden.begin(), cfg.actor_hidden.end());
        widths.push_back(static_cast<std::size_t>(n_actions));
        return init_mlp(widths, seed);
    }
    static Policy greedy(const MlpParams& a, const NormStats& norm) {
        return soft_greedy_policy(ActorParams{a}, norm);
    }
    static void update(std::span<const Transition> batch, MlpParams& a, const MlpParams& critic,
                       OptimizerState& opt, double) {
        actor_update(batch, a, critic, opt);
    }
};

template <typename Params>
TrainResult train_impl(const AgentConfig& cfg, const EnvConfig& env_cfg,
                       std::shared_ptr<const ProfileSet> profiles, const NormStats& unit_norm,
                       std::uint64_t seed) {
    using Ops = ActorOps<Params>;
    const NormStats norm = norm_rescale(unit_norm, cfg.input_range);
    const int n_actions = static_cast<int>(env_cfg.battery.action_grid.size());

    Params actor = Ops::init(cfg, n_actions, seed);
    Params target_actor = actor;

    std::vector<std::size_t> critic_widths{kFeatureCount};
    critic_widths.insert(critic_widths.end(), cfg.critic_hidden.begin(), cfg.critic_hidden.end());
    critic_widths.push_back(static_cast<std::size_t>(n_actions));
    MlpParams critic = init_mlp(critic_widths, seed ^ kCriticSeedOffset);
    MlpParams target_critic = critic;

    OptimizerState actor_opt;
    actor_opt.config.learning_rate = cfg.actor_lr;
    OptimizerState critic_opt;
    critic_opt.config.learning_rate = cfg.critic_lr;

    ReplayBuffer replay(cfg.buffer_capacity, seed ^ kReplaySeedOffset);
    std::mt19937_64 rng(seed ^ kExploreSeedOffset);

    HemsEnv env(env_cfg, profiles);
    const auto& train_days = profiles->train_days;
    const auto& eval_days = profiles->eval_days;
    std::uniform_int_distribution<std::size_t> pick_day(0, train_days.size() - 1);
    const double e0_train = cfg.train_e0_fraction * env_cfg.battery.e_max;
    const std::size_t ready = std::max(cfg.warmup, cfg.batch_size);

    TrainResult result{ActorParams{actor}, ActorParams{actor}, critic, norm, {}, seed};
    double best_select = std::numeric_limits<double>::infinity();

    for (std::size_t episode = 1; episode <= cfg.episodes; ++episode) {
        Observation raw = env.reset(train_days[pick_day(rng)], e0_train);
        double episode_cost = 0.0;
        while (!env.done()) {
            const Observation x = norm_apply(norm, raw);
            ActionIndex u;
            if (cfg.exploration == ExplorationMode::soft) {
                u = sample_action(actor_probs(ActorParams{actor}, x), cfg.epsilon, rng);
            } else {
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                if (unit(rng) < cfg.epsilon) {
                    std::uniform_int_distribution<std::size_t> any(0, n_actions - 1);
                    u = any(rng);
                } else {
                    u = std::get<ActionIndex>(Ops::greedy(actor, norm)(raw));
                }
            }
            const auto step = env.step(u);
            episode_cost += step.cost;
            replay.push({x, u, step.cost, norm_apply(norm, step.next_obs), step.done});
            raw = step.next_obs;

            if (replay.size() < ready) continue;
            for (std::size_t k = 0; k < cfg.updates_per_step; ++k) {
                const auto batch = replay.sample(cfg.batch_size);
                const auto targets = critic_target(
                    batch, target_critic,
                    [&](std::span<const double> xn) {
                        return actor_probs(ActorParams{target_actor}, xn);
                    },
                    cfg.gamma);
                critic_update(batch, targets, critic, critic_opt);
                Ops::update(batch, actor, critic, actor_opt, cfg.input_range);
                polyak_update(target_critic, critic, cfg.tau);
                polyak_update(target_actor, actor, cfg.tau);
            }
        }

        if (episode % cfg.eval_interval == 0 || episode == cfg.episodes) {
            CurveRecord rec;
            rec.episode = episode;
            rec.train_cost = episode_cost;
            const auto greedy = Ops::greedy(actor, norm);
            rec.eval_cost = evaluate(greedy, env_cfg, profiles, eval_days).mean_cost;
            rec.eval_soft_cost =
                evaluate(soft_greedy_policy(ActorParams{actor}, norm), env_cfg, profiles, eval_days)
                    .mean_cost;
            rec.select_cost = evaluate(greedy, env_cfg, profiles, train_days).mean_cost;
            if (rec.select_cost < best_select) {
                best_select = rec.select_cost;
                result.best_actor = ActorParams{actor};
            }
            logger().debug("seed {} episode {} train {:.4f} eval {:.4f} select {:.4f}", seed,
                           episode, rec.train_cost, rec.eval_cost, rec.select_cost);
            result.curve.push_back(rec);
        }
    }

    result.actor = ActorParams{std::move(actor)};
    result.critic = std::move(critic);
    return result;
}

}  // namespace

TrainResult train(const AgentConfig& cfg, const EnvConfig& env_cfg,
                  std::shared_ptr<const ProfileSet> profiles, const NormStats& norm,
                  std::uint64_t seed) {
    validate(cfg);
    validate(env_cfg);
    if (!profiles || profiles->train_days.empty() || profiles->eval_days.empty()) {
        throw ValidationError("training needs at least one train day and one eval day");
    }
    if (cfg.actor == ActorKind::ddt) return train_impl<TreeParams>(cfg, env_cfg, profiles, norm, seed);
    return train_impl<MlpParams>(cfg, env_cfg, profiles, norm, seed);
}

}  // namespace softtree
