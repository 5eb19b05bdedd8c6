#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gradcheck.hpp"
#include "softtree/error.hpp"
#include "softtree/mlp.hpp"

using namespace softtree;

namespace {

// Inputs whose hidden pre-activations all sit at least `margin` from the
// rectifier kink, so central differences are smooth.
std::vector<double> smooth_input(const MlpParams& net, std::mt19937_64& rng, double margin = 1e-3) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (;;) {
        std::vector<double> x(net.input_width());
        for (auto& v : x) v = u(rng);
        MlpCache cache;
        mlp_forward(net, x, cache);
        bool ok = true;
        for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l)
            for (double z : cache.pre[l]) ok = ok && std::abs(z) > margin;
        if (ok) return x;
    }
}

}  // namespace

TEST_CASE("init_mlp shapes, activations and init range") {
    const auto net = init_mlp({4, 64, 64, 5}, 3);
    REQUIRE(net.layers.size() == 3);
    CHECK(net.input_width() == 4);
    CHECK(net.output_width() == 5);
    CHECK(net.layers[0].activation == Activation::relu);
    CHECK(net.layers[1].activation == Activation::relu);
    CHECK(net.layers[2].activation == Activation::identity);
    const double bound = std::sqrt(6.0 / (64 + 64));
    for (double w : net.layers[1].weights) CHECK(std::abs(w) <= bound);
    for (double b : net.layers[1].biases) CHECK(b == 0.0);
    CHECK(init_mlp({4, 64, 64, 5}, 3) == net);
    CHECK_FALSE(init_mlp({4, 64, 64, 5}, 4) == net);
    CHECK_THROWS_AS(init_mlp({4}, 1), ValidationError);
    CHECK_THROWS_AS(init_mlp({4, 0, 5}, 1), ValidationError);
}

TEST_CASE("mlp_forward on a hand-built network") {
    MlpParams net;
    net.layers.push_back({2, 2, {1.0, -1.0, 0.5, 0.5}, {0.0, -1.0}, Activation::relu});
    net.layers.push_back({2, 1, {2.0, 3.0}, {0.25}, Activation::identity});
    // hidden = relu(1*1 - 1*2, 0.5*1 + 0.5*2 - 1) = (0, 0.5); out = 1.5 + 0.25
    const auto y = mlp_forward(net, std::vector<double>{1.0, 2.0});
    REQUIRE(y.size() == 1);
    CHECK(y[0] == doctest::Approx(1.75).epsilon(1e-15));
    CHECK_THROWS_AS(mlp_forward(net, std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("mlp_backward matches finite differences") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto net = init_mlp({4, 16, 16, 5}, rng());
        const auto x = smooth_input(net, rng);
        std::vector<double> up(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto& v : up) v = u(rng);
        MlpCache cache;
        mlp_forward(net, x, cache);
        const auto g = mlp_backward(net, cache, up);
        const auto numeric = testing::numeric_gradient<MlpParams>(net, [&](const MlpParams& p) {
            const auto y = mlp_forward(p, x);
            return std::inner_product(y.begin(), y.end(), up.begin(), 0.0);
        });
        CHECK(testing::max_relative_error(g, numeric) <= testing::kRelTol);
    }
}

TEST_CASE("input gradient matches finite differences") {
    std::mt19937_64 rng(12);
    const auto net = init_mlp({4, 8, 3}, 5);
    const auto x = smooth_input(net, rng);
    const std::vector<double> up{0.3, -0.7, 1.1};
    MlpCache cache;
    mlp_forward(net, x, cache);
    auto grads = zeros_like(net);
    std::vector<double> dx(4, 0.0);
    accumulate_mlp_backward(net, cache, up, 1.0, grads, dx);
    for (std::size_t k = 0; k < 4; ++k) {
        auto xp = x, xm = x;
        xp[k] += testing::kFdStep;
        xm[k] -= testing::kFdStep;
        const auto yp = mlp_forward(net, xp);
        const auto ym = mlp_forward(net, xm);
        const double numeric = (std::inner_product(yp.begin(), yp.end(), up.begin(), 0.0) -
                                std::inner_product(ym.begin(), ym.end(), up.begin(), 0.0)) /
                               (2.0 * testing::kFdStep);
        CHECK(testing::relative_error(dx[k], numeric) <= testing::kRelTol);
    }
}

TEST_CASE("accumulate_mlp_backward scales and adds") {
    const auto net = init_mlp({4, 8, 3}, 9);
    const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
    const std::vector<double> up{1.0, 0.0, -1.0};
    MlpCache cache;
    mlp_forward(net, x, cache);
    const auto once = mlp_backward(net, cache, up);
    auto twice = zeros_like(net);
    accumulate_mlp_backward(net, cache, up, 0.5, twice);
    accumulate_mlp_backward(net, cache, up, 1.5, twice);
    const auto a = once.buffers();
    const auto b = twice.buffers();
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < a[i].size(); ++k) CHECK(b[i][k] == doctest::Approx(2.0 * a[i][k]));
}

TEST_CASE("backward rejects a cache from another shape") {
    const auto net = init_mlp({4, 8, 3}, 1);
    const auto other = init_mlp({4, 6, 3}, 1);
    MlpCache cache;
    mlp_forward(other, std::vector<double>{0, 0, 0, 0}, cache);
    CHECK_THROWS_AS(mlp_backward(net, cache, std::vector<double>{1, 1, 1}), ContractViolation);
}
