#pragma once

#include <concepts>
#include <cstdint>
#include <span>
#include <vector>

namespace softtree {

// Anything exposing its trainable values as a list of flat buffers.
template <typename P>
concept ParameterSet = requires(P& p, const P& cp) {
    { p.buffers() } -> std::same_as<std::vector<std::span<double>>>;
    { cp.buffers() } -> std::same_as<std::vector<std::span<const double>>>;
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Moment accumulators for one parameter set. Shapes are fixed on the first
// step (or by the shaped constructor).
struct OptimizerState {
    AdamConfig config;
    std::int64_t step = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
};

namespace detail {

void adam_update(std::vector<std::span<double>> params,
                 const std::vector<std::span<const double>>& grads, OptimizerState& state);

void polyak_update(std::vector<std::span<double>> target,
                   const std::vector<std::span<const double>>& online, double tau);

}  // namespace detail

// Bias-corrected adaptive-moment step, in place.
template <ParameterSet P>
void adam_step(P& params, const P& grads, OptimizerState& state) {
    detail::adam_update(params.buffers(), grads.buffers(), state);
}

// target <- tau * online + (1 - tau) * target, in place.
template <ParameterSet P>
void polyak_update(P& target, const P& online, double tau) {
    detail::polyak_update(target.buffers(), online.buffers(), tau);
}

}  // namespace softtree
