#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <vector>

#include "softtree/agents.hpp"
#include "softtree/ddt.hpp"
#include "softtree/hems_env.hpp"
#include "softtree/mlp.hpp"
#include "softtree/optim.hpp"
#include "softtree/oracle.hpp"
#include "softtree/profiles.hpp"

namespace {

using namespace softtree;

std::vector<double> random_input(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<double> x(n);
    for (auto& v : x) v = u(rng);
    return x;
}

std::vector<Transition> random_batch(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<Transition> batch(n);
    for (auto& t : batch) {
        for (auto& v : t.x) v = u(rng);
        for (auto& v : t.x_next) v = u(rng);
        t.u = rng() % 5;
        t.c = u(rng) / 10.0;
    }
    return batch;
}

void BM_ForwardSoft(benchmark::State& state) {
    const auto tree = init_tree(static_cast<int>(state.range(0)), 4, 5, 1);
    const auto x = random_input(4, 2);
    for (auto _ : state) benchmark::DoNotOptimize(forward_soft(tree, x));
}
BENCHMARK(BM_ForwardSoft)->DenseRange(1, 3);

void BM_TreeBackward(benchmark::State& state) {
    const auto tree = init_tree(static_cast<int>(state.range(0)), 4, 5, 1);
    const auto x = random_input(4, 2);
    const std::vector<double> upstream{0.1, -0.2, 0.3, 0.0, 0.5};
    for (auto _ : state) benchmark::DoNotOptimize(backward(tree, x, upstream));
}
BENCHMARK(BM_TreeBackward)->DenseRange(1, 3);

void BM_MlpForward(benchmark::State& state) {
    const auto net = init_mlp({4, 64, 64, 5}, 1);
    const auto x = random_input(4, 2);
    MlpCache cache;
    for (auto _ : state) benchmark::DoNotOptimize(mlp_forward(net, x, cache));
}
BENCHMARK(BM_MlpForward);

void BM_MlpBackward(benchmark::State& state) {
    const auto net = init_mlp({4, 64, 64, 5}, 1);
    const auto x = random_input(4, 2);
    MlpCache cache;
    mlp_forward(net, x, cache);
    const std::vector<double> upstream{0.1, -0.2, 0.3, 0.0, 0.5};
    for (auto _ : state) benchmark::DoNotOptimize(mlp_backward(net, cache, upstream));
}
BENCHMARK(BM_MlpBackward);

void BM_CriticUpdate(benchmark::State& state) {
    auto critic = init_mlp({4, 64, 64, 5}, 1);
    const auto target_critic = critic;
    const auto actor = init_tree(2, 4, 5, 3);
    const auto batch = random_batch(64, 4);
    OptimizerState opt;
    opt.config.learning_rate = 1e-4;
    for (auto _ : state) {
        const auto y = critic_target(batch, target_critic, actor, 0.99);
        benchmark::DoNotOptimize(critic_update(batch, y, critic, opt));
    }
}
BENCHMARK(BM_CriticUpdate);

void BM_ActorUpdate(benchmark::State& state) {
    const auto critic = init_mlp({4, 64, 64, 5}, 1);
    auto actor = init_tree(static_cast<int>(state.range(0)), 4, 5, 3);
    const auto batch = random_batch(64, 4);
    OptimizerState opt;
    opt.config.learning_rate = 1e-4;
    for (auto _ : state) benchmark::DoNotOptimize(actor_update(batch, actor, critic, opt));
}
BENCHMARK(BM_ActorUpdate)->DenseRange(2, 3);

void BM_EnvEpisode(benchmark::State& state) {
    auto ps = std::make_shared<ProfileSet>(synthesize(SynthesisConfig{}, 1, 0));
    HemsEnv env(EnvConfig{}, ps);
    for (auto _ : state) {
        env.reset(0, 0.0);
        double total = 0.0;
        for (std::size_t t = 0; t < kHoursPerDay; ++t) total += env.step(ActionIndex{t % 5}).cost;
        benchmark::DoNotOptimize(total);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kHoursPerDay));
}
BENCHMARK(BM_EnvEpisode);

void BM_DpOptimal(benchmark::State& state) {
    const auto ps = synthesize(SynthesisConfig{}, 1, 0);
    const double grid = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(dp_optimal(ps.days[0], EnvConfig{}, grid));
}
BENCHMARK(BM_DpOptimal)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
