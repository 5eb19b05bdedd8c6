#include <doctest.h>

#include <cmath>

#include "softtree/ddt.hpp"
#include "softtree/error.hpp"
#include "softtree/mlp.hpp"
#include "softtree/optim.hpp"

using namespace softtree;

static_assert(ParameterSet<TreeParams>);
static_assert(ParameterSet<MlpParams>);

TEST_CASE("first Adam step moves each parameter by about the learning rate") {
    auto t = init_tree(1, 2, 2, 0);
    const auto before = t;
    auto g = zeros_like(t);
    for (auto buf : g.buffers())
        for (double& v : buf) v = 0.5;
    g.phi[0] = -2.0;
    OptimizerState opt;
    opt.config.learning_rate = 0.1;
    adam_step(t, g, opt);
    CHECK(opt.step == 1);
    // Bias-corrected moments give |step| = lr * |g| / (|g| + eps).
    CHECK(t.phi[0] - before.phi[0] == doctest::Approx(0.1 * 2.0 / (2.0 + 1e-8)).epsilon(1e-12));
    CHECK(before.beta[0] - t.beta[0] == doctest::Approx(0.099999998).epsilon(1e-8));
}

TEST_CASE("zero gradient leaves parameters unchanged") {
    auto net = init_mlp({3, 4, 2}, 1);
    const auto before = net;
    OptimizerState opt;
    for (int i = 0; i < 3; ++i) adam_step(net, zeros_like(net), opt);
    CHECK(net == before);
}

TEST_CASE("Adam minimizes a quadratic") {
    auto t = init_tree(1, 1, 2, 4);
    OptimizerState opt;
    opt.config.learning_rate = 0.05;
    for (int i = 0; i < 2000; ++i) {
        auto g = t;  // gradient of 0.5 * |theta|^2
        adam_step(t, g, opt);
    }
    for (auto buf : t.buffers())
        for (double v : buf) CHECK(std::abs(v) < 1e-2);
}

TEST_CASE("Adam rejects a shape change") {
    auto a = init_mlp({3, 4, 2}, 1);
    OptimizerState opt;
    adam_step(a, zeros_like(a), opt);
    auto b = init_mlp({3, 5, 2}, 1);
    CHECK_THROWS_AS(adam_step(b, zeros_like(b), opt), ValidationError);
}

TEST_CASE("polyak update") {
    auto target = zeros_like(init_tree(1, 1, 2, 0));
    auto online = target;
    for (auto buf : online.buffers())
        for (double& v : buf) v = 1.0;

    const double tau = 0.005;
    for (int n = 1; n <= 200; ++n) {
        polyak_update(target, online, tau);
        if (n == 1 || n == 10 || n == 200) {
            const double expected = 1.0 - std::pow(1.0 - tau, n);
            for (auto buf : target.buffers())
                for (double v : buf) CHECK(v == doctest::Approx(expected).epsilon(1e-12));
        }
    }

    polyak_update(target, online, 1.0);
    CHECK(target == online);

    CHECK_THROWS_AS(polyak_update(target, online, 0.0), ValidationError);
    CHECK_THROWS_AS(polyak_update(target, online, 1.5), ValidationError);
}
