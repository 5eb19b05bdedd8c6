#include <doctest.h>

#include <cmath>
#include <random>

#include "softtree/agents.hpp"
#include "softtree/error.hpp"
#include "softtree/oracle.hpp"

using namespace softtree;

namespace {

ProfileDay random_day(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ProfileDay d;
    d.date = "r";
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        d.lambda_con.push_back(0.05 + 0.4 * u(rng));
        d.p_con.push_back(3.0 * u(rng));
        d.p_pv.push_back(-2.0 * u(rng));
    }
    return d;
}

ProfileDay flat_day(double price, double load, double pv) {
    ProfileDay d;
    d.date = "flat";
    d.lambda_con.assign(kHoursPerDay, price);
    d.p_con.assign(kHoursPerDay, load);
    d.p_pv.assign(kHoursPerDay, pv);
    return d;
}

double passthrough_cost(const ProfileDay& d, const EnvConfig& cfg, std::size_t h = kHoursPerDay) {
    double c = 0.0;
    for (std::size_t t = 0; t < h; ++t) c += simulate_step(d, t, 0.0, 0.0, cfg).cost;
    return c;
}

}  // namespace

TEST_CASE("exhaustive: one flat step picks idle") {
    EnvConfig cfg;
    cfg.tariff.lambda_cap = 0.0;
    const auto plan = exhaustive_optimal(flat_day(0.2, 1.0, 0.0), 1, cfg);
    REQUIRE(plan.actions.size() == 1);
    // Discharging from empty ties with idle; the lowest index among the
    // tied actions wins.
    CHECK(plan.actions[0] == 0);
    CHECK(plan.energy[1] == 0.0);
    CHECK(plan.total_cost == doctest::Approx(0.2));
    CHECK(replay_plan(flat_day(0.2, 1.0, 0.0), {2}, cfg) == doctest::Approx(0.2));
    CHECK(replay_plan(flat_day(0.2, 1.0, 0.0), {3}, cfg) > plan.total_cost);
}

TEST_CASE("exhaustive: zero prices cost the capacity floor") {
    const EnvConfig cfg;
    const auto plan = exhaustive_optimal(flat_day(0.0, 1.0, -0.5), 6, cfg);
    CHECK(plan.total_cost == doctest::Approx(0.02 * 4.0 * 6).epsilon(1e-12));
    CHECK(dp_optimal(flat_day(0.0, 1.0, -0.5), cfg, 0.01).total_cost ==
          doctest::Approx(1.92).epsilon(1e-12));
}

TEST_CASE("exhaustive search beats every sequence") {
    std::mt19937_64 rng(3);
    const auto day = random_day(rng);
    const EnvConfig cfg;
    const std::size_t h = 6;
    const auto plan = exhaustive_optimal(day, h, cfg);
    CHECK(plan.actions.size() == h);
    CHECK(plan.energy.size() == h + 1);
    std::vector<ActionIndex> seq(h, 0);
    std::size_t count = 0;
    for (;;) {
        ++count;
        CHECK(plan.total_cost <= replay_plan(day, seq, cfg) + 1e-12);
        std::size_t k = 0;
        while (k < h && ++seq[k] == 5) seq[k++] = 0;
        if (k == h) break;
    }
    CHECK(count == 15625);
}

TEST_CASE("exhaustive guard") {
    CHECK_THROWS_AS(exhaustive_optimal(flat_day(0.1, 1, 0), 11, EnvConfig{}), ValidationError);
    CHECK_THROWS_AS(exhaustive_optimal(flat_day(0.1, 1, 0), 0, EnvConfig{}), ValidationError);
}

TEST_CASE("dp agrees with exhaustive on short horizons") {
    std::mt19937_64 rng(17);
    const EnvConfig cfg;
    for (int trial = 0; trial < 20; ++trial) {
        const auto day = random_day(rng);
        const double e0 = trial % 2 ? 0.0 : 10.0 * std::uniform_real_distribution<double>(0, 1)(rng);
        const auto ex = exhaustive_optimal(day, 6, cfg, e0);
        const auto dp = dp_optimal(day, cfg, 0.01, 6, e0);
        CHECK(std::abs(dp.total_cost - ex.total_cost) <= 0.01);
        CHECK(dp.total_cost >= ex.total_cost - 1e-9);
    }
}

TEST_CASE("plans replay to their reported cost") {
    std::mt19937_64 rng(21);
    const EnvConfig cfg;
    for (int trial = 0; trial < 5; ++trial) {
        const auto day = random_day(rng);
        const auto dp = dp_optimal(day, cfg, 0.01);
        std::vector<double> energy;
        CHECK(std::abs(replay_plan(day, dp.actions, cfg, 0.0, &energy) - dp.total_cost) <= 1e-9);
        CHECK(energy == dp.energy);
        CHECK(dp.error_bound > 0.0);
        CHECK(std::abs(dp.value_estimate - dp.total_cost) <= dp.error_bound + 1e-9);

        HemsEnv env(cfg, std::make_shared<ProfileSet>(ProfileSet{{day}, {0}, {0}}));
        env.reset(0, 0.0);
        double total = 0.0;
        for (auto a : dp.actions) total += env.step(a).cost;
        CHECK(std::abs(total - dp.total_cost) <= 1e-9);
    }
}

TEST_CASE("zero-capacity battery reduces to passthrough") {
    std::mt19937_64 rng(4);
    const auto day = random_day(rng);
    EnvConfig cfg;
    cfg.battery.e_max = 0.0;
    CHECK(dp_optimal(day, cfg, 0.01).total_cost == doctest::Approx(passthrough_cost(day, cfg)).epsilon(1e-12));
    CHECK_THROWS_AS(dp_optimal(day, cfg, 0.0), ValidationError);
}

TEST_CASE("wider price spread never shrinks the battery's advantage") {
    const EnvConfig cfg;
    auto day = flat_day(0.2, 1.5, 0.0);
    double previous = 0.0;
    for (double spread : {0.0, 0.05, 0.1, 0.2}) {
        for (std::size_t h = 17; h < 21; ++h) day.lambda_con[h] = 0.2 + spread;
        for (std::size_t h = 1; h < 5; ++h) day.lambda_con[h] = 0.2 - spread / 2;
        const double advantage = passthrough_cost(day, cfg) - dp_optimal(day, cfg, 0.01).total_cost;
        CHECK(advantage >= previous - 1e-9);
        previous = advantage;
    }
    CHECK(previous > 0.0);
}

TEST_CASE("oracle <= rbc <= passthrough on synthetic days") {
    const EnvConfig cfg;
    auto ps = std::make_shared<ProfileSet>(synthesize(SynthesisConfig{}, 20, 8));
    std::vector<std::size_t> all(ps->days.size());
    for (std::size_t d = 0; d < all.size(); ++d) all[d] = d;
    const auto rbc = evaluate(rbc_policy(cfg.battery), cfg, ps, all);
    for (std::size_t d = 0; d < all.size(); ++d) {
        const double opt = dp_optimal(ps->days[d], cfg, 0.01).total_cost;
        CHECK(opt <= rbc.day_costs[d] + 1e-9);
        CHECK(rbc.day_costs[d] <= passthrough_cost(ps->days[d], cfg) + 1e-9);
    }
}
