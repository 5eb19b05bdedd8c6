#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "softtree/checkpoint.hpp"
#include "softtree/error.hpp"

using namespace softtree;
using nlohmann::json;

TEST_CASE("tree checkpoint round trip") {
    const auto tree = init_tree(3, 4, 5, 12);
    NormStats norm;
    norm.shift = {0.05, 0.0, 0.1, -1.5};
    norm.scale = {0.04, 0.1, 0.3, 0.15};
    TreeContext ctx{norm, {{0.05, 0.45}, {0.0, 1.0}, {0.1, 3.1}, {-1.5, 0.0}}, {-1, -0.5, 0, 0.5, 1}};

    const auto j = tree_to_json(tree, ctx);
    CHECK(j.at("format") == "softtree.tree");
    CHECK(j.at("version") == kCheckpointVersion);
    CHECK(j.at("beta").size() == 7);
    CHECK(j.at("w").size() == 8);

    TreeContext back_ctx;
    const auto back = tree_from_json(json::parse(j.dump()), &back_ctx);
    CHECK(back == tree);
    REQUIRE(back_ctx.norm.has_value());
    CHECK(*back_ctx.norm == norm);
    CHECK(back_ctx.observed_ranges == ctx.observed_ranges);
    CHECK(back_ctx.action_grid == ctx.action_grid);

    // Same input, same bytes.
    CHECK(tree_to_json(tree, ctx).dump(2) == j.dump(2));
}

TEST_CASE("tree checkpoint rejects malformed input") {
    auto j = tree_to_json(init_tree(2, 4, 5, 1));
    auto bad = j;
    bad["version"] = 99;
    CHECK_THROWS_AS(tree_from_json(bad), ParseError);
    bad = j;
    bad["format"] = "softtree.mlp";
    CHECK_THROWS_AS(tree_from_json(bad), ParseError);
    bad = j;
    bad["phi"] = json::array({0.0});
    CHECK_THROWS_AS(tree_from_json(bad), ParseError);
    bad = j;
    bad["w"][0] = json::array({0.0, 1.0});
    CHECK_THROWS_AS(tree_from_json(bad), ParseError);
    bad = j;
    bad.erase("beta");
    CHECK_THROWS_AS(tree_from_json(bad), ParseError);
    bad = j;
    bad["depth"] = "two";
    CHECK_THROWS_AS(tree_from_json(bad), ParseError);
    CHECK_THROWS_AS(tree_from_json(json::array()), ParseError);
}

TEST_CASE("network checkpoint round trip") {
    const auto net = init_mlp({4, 6, 5}, 3);
    const auto j = mlp_to_json(net);
    CHECK(mlp_from_json(json::parse(j.dump())) == net);
    auto bad = j;
    bad["layers"][0]["activation"] = "tanh";
    CHECK_THROWS_AS(mlp_from_json(bad), ParseError);
    bad = j;
    bad["layers"][1]["in"] = 7;
    CHECK_THROWS_AS(mlp_from_json(bad), ParseError);
}

TEST_CASE("actor dispatch") {
    const ActorParams tree = init_tree(2, 4, 5, 1);
    const ActorParams net = init_mlp({4, 3, 5}, 1);
    CHECK(actor_from_json(actor_to_json(tree)) == tree);
    CHECK(actor_from_json(actor_to_json(net)) == net);

    NormStats norm;
    norm.scale = {2, 2, 2, 2};
    TreeContext ctx{norm, {}, {-1, 0, 1}};
    TreeContext back;
    CHECK(actor_from_json(actor_to_json(net, ctx), &back) == net);
    REQUIRE(back.norm.has_value());
    CHECK(*back.norm == norm);
    CHECK(back.action_grid == ctx.action_grid);
}

TEST_CASE("normalization serialization") {
    NormStats s;
    s.shift = {1, 2, 3, 4};
    s.scale = {0.5, 1, 2, 4};
    CHECK(norm_from_json(norm_to_json(s)) == s);
    auto bad = norm_to_json(s);
    bad["scale"][2] = 0.0;
    CHECK_THROWS_AS(norm_from_json(bad), ParseError);
}

TEST_CASE("report serialization") {
    PlanResult plan;
    plan.total_cost = 1.5;
    plan.actions = {0, 4};
    plan.energy = {0, 0, 3.79};
    const auto pj = plan_to_json(plan);
    CHECK(pj.at("actions") == json::array({0, 4}));
    CHECK(pj.at("total_cost") == 1.5);

    EvalReport r;
    r.mean_cost = 2.0;
    r.days = {1, 2};
    r.day_costs = {1.0, 3.0};
    CHECK_FALSE(eval_to_json(r).contains("trace"));
    r.trace.push_back({1, 0, 0.0, 0.5, 1.2, 0.3});
    CHECK(eval_to_json(r).at("trace").size() == 1);

    CurveRecord c{10, 5.0, 4.0, 4.5, 3.9};
    const auto cj = curve_record_to_json(c);
    CHECK(cj.at("episode") == 10);
    CHECK(cj.at("select_cost") == 3.9);
}

TEST_CASE("json files") {
    const auto dir = std::filesystem::temp_directory_path() / "softtree_test_checkpoint";
    std::filesystem::create_directories(dir);
    const auto path = dir / "tree.json";
    const auto j = tree_to_json(init_tree(2, 4, 5, 2));
    write_json(j, path);
    CHECK(read_json(path) == j);

    std::ofstream(dir / "broken.json") << "{\"format\": ";
    CHECK_THROWS_AS(read_json(dir / "broken.json"), ParseError);
    CHECK_THROWS_AS(read_json(dir / "missing.json"), ParseError);
    std::filesystem::remove_all(dir);
}
