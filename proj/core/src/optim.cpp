#include "softtree/optim.hpp"

#include <cmath>

#include "softtree/error.hpp"

namespace softtree::detail {

void adam_update(std::vector<std::span<double>> params,
                 const std::vector<std::span<const double>>& grads, OptimizerState& state) {
    if (params.size() != grads.size()) throw ValidationError("gradient shape does not match parameters");
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (params[b].size() != grads[b].size()) {
            throw ValidationError("gradient shape does not match parameters");
        }
    }
    if (state.first_moment.empty()) {
        for (const auto& p : params) {
            state.first_moment.emplace_back(p.size(), 0.0);
            state.second_moment.emplace_back(p.size(), 0.0);
        }
    }
    if (state.first_moment.size() != params.size()) {
        throw ValidationError("optimizer state does not match parameters");
    }
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (state.first_moment[b].size() != params[b].size()) {
            throw ValidationError("optimizer state does not match parameters");
        }
    }

    const auto& c = state.config;
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto& m = state.first_moment[b];
        auto& v = state.second_moment[b];
        auto p = params[b];
        const auto g = grads[b];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            p[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
        }
    }
}

void polyak_update(std::vector<std::span<double>> target,
                   const std::vector<std::span<const double>>& online, double tau) {
    if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in (0, 1]");
    if (target.size() != online.size()) throw ValidationError("target and online shapes differ");
    for (std::size_t b = 0; b < target.size(); ++b) {
        if (target[b].size() != online[b].size()) {
            throw ValidationError("target and online shapes differ");
        }
        auto t = target[b];
        const auto o = online[b];
        if (tau == 1.0) {
            std::copy(o.begin(), o.end(), t.begin());
            continue;
        }
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = tau * o[i] + (1.0 - tau) * t[i];
    }
}

}  // namespace softtree::detail
