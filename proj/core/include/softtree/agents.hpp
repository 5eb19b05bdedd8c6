#pragma once

/**
 * Discrete-actor DDPG.
 *
 * The critic maps a normalized observation to one cost-to-go estimate per
 * discrete action. Because the actor emits a full distribution over the
 * action set, both the critic target and the actor objective use the exact
 * expectation over actions instead of a sampled action:
 *
 *   target_i = c_i + gamma * sum_k p(u_k | x_{i+1}) Q^-(x_{i+1})[k]   (0 if done)
 *   J_actor  = mean_i sum_k p(u_k | x_i) Q(x_i)[k]                    (minimized)
 *
 * Q estimates cost, so everything here is minimized; there is no reward sign
 * flip anywhere.
 */

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "softtree/ddt.hpp"
#include "softtree/hems_env.hpp"
#include "softtree/mlp.hpp"
#include "softtree/optim.hpp"
#include "softtree/profiles.hpp"
#include "softtree/replay.hpp"

namespace softtree {

enum class ActorKind { ddt, mlp };
enum class ExplorationMode { soft, epsilon_greedy };

struct AgentConfig {
    ActorKind actor = ActorKind::ddt;
    int depth = 2;
    std::vector<std::size_t> actor_hidden{64, 64};   // mlp actor only
    std::vector<std::size_t> critic_hidden{64, 64};
    double gamma = 0.99;
    double tau = 0.005;
    double actor_lr = 1e-2;
    double critic_lr = 1e-3;
    std::size_t batch_size = 64;
    std::size_t buffer_capacity = 50000;
    std::size_t episodes = 1000;
    std::size_t warmup = 500;
    std::size_t updates_per_step = 1;
    ExplorationMode exploration = ExplorationMode::soft;
    double epsilon = 0.05;
    // Actor and critic see features min-max scaled to [0, input_range].
    double input_range = 10.0;
    double train_e0_fraction = 0.0;
    std::size_t eval_interval = 10;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};

    bool operator==(const AgentConfig&) const = default;
};

void validate(const AgentConfig& cfg);

// Parameters of either actor family.
using ActorParams = std::variant<TreeParams, MlpParams>;

// Action distribution of an actor at a normalized observation. The MLP actor
// applies a standard softmax to its outputs.
ActionDistribution actor_probs(const ActorParams& actor, std::span<const double> x);
ActionDistribution mlp_actor_probs(const MlpParams& actor, std::span<const double> x);

// ---------------------------------------------------------------------------
// Update rules
// ---------------------------------------------------------------------------

using ProbabilityFn = std::function<ActionDistribution(std::span<const double>)>;

std::vector<double> critic_target(std::span<const Transition> batch, const MlpParams& target_critic,
                                  const ProbabilityFn& target_actor, double gamma);
std::vector<double> critic_target(std::span<const Transition> batch, const MlpParams& target_critic,
                                  const TreeParams& target_actor, double gamma);

struct CriticUpdateStats {
    double loss = 0.0;  // mean squared TD error before the step
};

// One squared-loss regression step of Q(x_i)[u_i] toward `targets`.
CriticUpdateStats critic_update(std::span<const Transition> batch, std::span<const double> targets,
                                MlpParams& critic, OptimizerState& optimizer);

struct ActorUpdateStats {
    double expected_cost = 0.0;  // batch mean of sum_k p_k Q_k before the step
};

// Batch mean of sum_k p(u_k|x_i) Q(x_i)[k] for the current actor.
double expected_cost(std::span<const Transition> batch, const ActorParams& actor,
                     const MlpParams& critic);

// Gradient of expected_cost with respect to the actor parameters.
TreeGradients actor_gradient(std::span<const Transition> batch, const TreeParams& actor,
                             const MlpParams& critic);
MlpGradients actor_gradient(std::span<const Transition> batch, const MlpParams& actor,
                            const MlpParams& critic);

// One Adam step descending expected_cost; the critic is read only.
ActorUpdateStats actor_update(std::span<const Transition> batch, TreeParams& actor,
                              const MlpParams& critic, OptimizerState& optimizer);
ActorUpdateStats actor_update(std::span<const Transition> batch, MlpParams& actor,
                              const MlpParams& critic, OptimizerState& optimizer);

enum class SelectMode { explore, greedy };

// Samples from (1 - epsilon) * p + epsilon / A.
ActionIndex sample_action(std::span<const double> p, double epsilon, std::mt19937_64& rng);

// explore: sample the soft tree's distribution with an epsilon-uniform floor.
// greedy: crisp inference; rng is not touched.
ActionIndex select_action(const TreeParams& actor, std::span<const double> x, SelectMode mode,
                          std::mt19937_64& rng, double epsilon = 0.05);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct CurveRecord {
    std::size_t episode = 0;
    double train_cost = 0.0;       // exploration episode cost
    double eval_cost = 0.0;        // greedy (crisp for trees) mean over eval days
    double eval_soft_cost = 0.0;   // argmax of the soft distribution, eval days
    double select_cost = 0.0;      // greedy mean over train days
    bool operator==(const CurveRecord&) const = default;
};

struct TrainResult {
    ActorParams actor;       // after the final episode
    ActorParams best_actor;  // lowest greedy cost on the training days
    MlpParams critic;
    NormStats input_norm;    // observation transform the networks were trained on
    std::vector<CurveRecord> curve;
    std::uint64_t seed = 0;
};

// Runs one seeded training job. `norm` maps to [0, 1] (see norm_fit); it is
// stretched by cfg.input_range before use. The profile set's train split
// drives episodes and checkpoint selection; its eval split is only reported.
TrainResult train(const AgentConfig& cfg, const EnvConfig& env_cfg,
                  std::shared_ptr<const ProfileSet> profiles, const NormStats& norm,
                  std::uint64_t seed);

// ---------------------------------------------------------------------------
// Baseline and evaluation
// ---------------------------------------------------------------------------

// Self-consumption rule: charge from PV surplus, discharge to cover residual
// load, each limited by p_max and by what the battery can absorb or deliver
// this step. Returns u / p_max.
double rbc_action(double p_con, double p_pv, double e, const BatteryConfig& cfg, double dt = 1.0);

// Maps a raw observation to an environment action.
using Policy = std::function<EnvAction(const Observation& raw)>;

Policy crisp_policy(CrispTree crisp, NormStats norm);
Policy soft_greedy_policy(ActorParams actor, NormStats norm);
Policy rbc_policy(BatteryConfig battery, double dt = 1.0);
Policy constant_policy(ActionIndex action);

struct StepRecord {
    std::size_t day = 0;
    std::size_t t = 0;
    double e = 0.0;
    double u_applied = 0.0;
    double p_agg = 0.0;
    double cost = 0.0;
};

struct EvalReport {
    double mean_cost = 0.0;
    std::vector<std::size_t> days;
    std::vector<double> day_costs;
    std::vector<StepRecord> trace;  // filled when requested
};

// Deterministic rollouts from e0 on each listed day.
EvalReport evaluate(const Policy& policy, const EnvConfig& env_cfg,
                    std::shared_ptr<const ProfileSet> profiles, const std::vector<std::size_t>& days,
                    double e0 = 0.0, bool keep_trace = false, std::ostream* jsonl_trace = nullptr);

}  // namespace softtree
