#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace softtree {

enum class Activation { relu, identity };

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;  // out x in, row-major
    std::vector<double> biases;   // out
    Activation activation = Activation::identity;

    bool operator==(const DenseLayer&) const = default;
};

// Dense feed-forward network: rectifier on hidden layers, identity on the
// output layer.
struct MlpParams {
    std::vector<DenseLayer> layers;

    std::size_t input_width() const { return layers.front().in; }
    std::size_t output_width() const { return layers.back().out; }

    std::vector<std::span<double>> buffers();
    std::vector<std::span<const double>> buffers() const;

    bool operator==(const MlpParams&) const = default;
};

using MlpGradients = MlpParams;

// Activations recorded by mlp_forward for use by mlp_backward.
struct MlpCache {
    std::vector<std::vector<double>> inputs;  // input to each layer
    std::vector<std::vector<double>> pre;     // pre-activation of each layer
};

// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
MlpParams init_mlp(const std::vector<std::size_t>& widths, std::uint64_t seed);

MlpParams zeros_like(const MlpParams& like);

void validate(const MlpParams& net);

std::vector<double> mlp_forward(const MlpParams& net, std::span<const double> x);
std::vector<double> mlp_forward(const MlpParams& net, std::span<const double> x, MlpCache& cache);

// Gradient of L = upstream . output with respect to every parameter, given
// the cache from the matching forward call.
MlpGradients mlp_backward(const MlpParams& net, const MlpCache& cache,
                          std::span<const double> upstream);

// Adds scale * gradient into `grads`. When `input_grad` is non-empty it
// receives dL/dx.
void accumulate_mlp_backward(const MlpParams& net, const MlpCache& cache,
                             std::span<const double> upstream, double scale,
                             MlpGradients& grads, std::span<double> input_grad = {});

}  // namespace softtree
