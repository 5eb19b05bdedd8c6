#include "softtree/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "softtree/error.hpp"

namespace softtree {

std::vector<std::span<double>> MlpParams::buffers() {
    std::vector<std::span<double>> out;
    out.reserve(2 * layers.size());
    for (auto& l : layers) {
        out.emplace_back(l.weights);
        out.emplace_back(l.biases);
    }
    return out;
}

std::vector<std::span<const double>> MlpParams::buffers() const {
    std::vector<std::span<const double>> out;
    out.reserve(2 * layers.size());
    for (const auto& l : layers) {
        out.emplace_back(l.weights);
        out.emplace_back(l.biases);
    }
    return out;
}

MlpParams init_mlp(const std::vector<std::size_t>& widths, std::uint64_t seed) {
    if (widths.size() < 2) throw ValidationError("network needs at least input and output widths");
    for (auto w : widths) {
        if (w == 0) throw ValidationError("network layer width must be positive");
    }
    std::mt19937_64 rng(seed);
    MlpParams net;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        DenseLayer l;
        l.in = widths[k];
        l.out = widths[k + 1];
        l.activation = (k + 2 == widths.size()) ? Activation::identity : Activation::relu;
        const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
        std::uniform_real_distribution<double> u(-limit, limit);
        l.weights.resize(l.in * l.out);
        for (double& v : l.weights) v = u(rng);
        l.biases.assign(l.out, 0.0);
        net.layers.push_back(std::move(l));
    }
    return net;
}

MlpParams zeros_like(const MlpParams& like) {
    MlpParams z = like;
    for (auto buf : z.buffers()) std::fill(buf.begin(), buf.end(), 0.0);
    return z;
}

void validate(const MlpParams& net) {
    if (net.layers.empty()) throw ValidationError("network has no layers");
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const auto& l = net.layers[k];
        if (l.weights.size() != l.in * l.out || l.biases.size() != l.out) {
            throw ValidationError("layer " + std::to_string(k) + " arrays do not match its shape");
        }
        if (k > 0 && net.layers[k - 1].out != l.in) {
            throw ValidationError("layer " + std::to_string(k) + " input width does not chain");
        }
    }
    for (auto buf : net.buffers()) {
        for (double v : buf) {
            if (!std::isfinite(v)) throw ValidationError("network parameter is not finite");
        }
    }
}

std::vector<double> mlp_forward(const MlpParams& net, std::span<const double> x, MlpCache& cache) {
    if (x.size() != net.input_width()) {
        throw ValidationError("network input has " + std::to_string(x.size()) +
                              " entries, expected " + std::to_string(net.input_width()));
    }
    const std::size_t n = net.layers.size();
    cache.inputs.resize(n);
    cache.pre.resize(n);
    std::vector<double> h(x.begin(), x.end());
    for (std::size_t k = 0; k < n; ++k) {
        const auto& l = net.layers[k];
        cache.inputs[k] = h;
        auto& z = cache.pre[k];
        z.assign(l.biases.begin(), l.biases.end());
        const double* wr = l.weights.data();
        for (std::size_t o = 0; o < l.out; ++o, wr += l.in) {
            double s = 0.0;
            for (std::size_t i = 0; i < l.in; ++i) s += wr[i] * h[i];
            z[o] += s;
        }
        h = z;
        if (l.activation == Activation::relu) {
            for (double& v : h) v = v > 0.0 ? v : 0.0;
        }
    }
    return h;
}

std::vector<double> mlp_forward(const MlpParams& net, std::span<const double> x) {
    MlpCache scratch;
    return mlp_forward(net, x, scratch);
}

void accumulate_mlp_backward(const MlpParams& net, const MlpCache& cache,
                             std::span<const double> upstream, double scale,
                             MlpGradients& grads, std::span<double> input_grad) {
    const std::size_t n = net.layers.size();
    if (cache.inputs.size() != n || cache.pre.size() != n) {
        throw ContractViolation("network cache is missing or from a different network");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (cache.inputs[k].size() != net.layers[k].in || cache.pre[k].size() != net.layers[k].out) {
            throw ContractViolation("network cache does not match layer " + std::to_string(k));
        }
    }
    if (upstream.size() != net.output_width()) {
        throw ValidationError("upstream gradient has length " + std::to_string(upstream.size()) +
                              ", network outputs " + std::to_string(net.output_width()));
    }
    if (grads.layers.size() != n) throw ValidationError("gradient buffer does not match network");
    if (!input_grad.empty() && input_grad.size() != net.input_width()) {
        throw ValidationError("input gradient buffer has the wrong size");
    }

    std::vector<double> delta(upstream.begin(), upstream.end());
    std::vector<double> below;
    for (std::size_t k = n; k-- > 0;) {
        const auto& l = net.layers[k];
        auto& g = grads.layers[k];
        if (l.activation == Activation::relu) {
            for (std::size_t o = 0; o < l.out; ++o) {
                if (cache.pre[k][o] <= 0.0) delta[o] = 0.0;
            }
        }
        const auto& in = cache.inputs[k];
        const bool need_below = k > 0 || !input_grad.empty();
        if (need_below) below.assign(l.in, 0.0);
        const double* wr = l.weights.data();
        double* gr = g.weights.data();
        for (std::size_t o = 0; o < l.out; ++o, wr += l.in, gr += l.in) {
            const double d = delta[o];
            if (d == 0.0) continue;
            const double ds = d * scale;
            g.biases[o] += ds;
            for (std::size_t i = 0; i < l.in; ++i) gr[i] += ds * in[i];
            if (need_below) {
                for (std::size_t i = 0; i < l.in; ++i) below[i] += d * wr[i];
            }
        }
        if (need_below) delta.swap(below);
    }
    if (!input_grad.empty()) {
        for (std::size_t i = 0; i < input_grad.size(); ++i) input_grad[i] += scale * delta[i];
    }
}

MlpGradients mlp_backward(const MlpParams& net, const MlpCache& cache,
                          std::span<const double> upstream) {
    MlpGradients g = zeros_like(net);
    accumulate_mlp_backward(net, cache, upstream, 1.0, g);
    return g;
}

}  // namespace softtree
