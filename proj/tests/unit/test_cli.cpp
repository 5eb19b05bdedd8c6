#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "softtree/error.hpp"
#include "softtree_cli/commands.hpp"
#include "softtree_cli/run_config.hpp"

using namespace softtree;
using namespace softtree::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> problems_of(const json& doc) {
    try {
        parse_run_config(doc);
    } catch (const ConfigError& e) {
        return e.problems();
    }
    return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
    return std::any_of(problems.begin(), problems.end(),
                       [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Small enough to run every command in seconds.
json tiny_config(const fs::path& out) {
    return {{"synthesis", {{"days", 5}, {"seed", 3}}},
            {"agent",
             {{"episodes", 4},
              {"warmup", 24},
              {"batch_size", 16},
              {"critic_hidden", {8}},
              {"actor_hidden", {8}},
              {"eval_interval", 2}}},
            {"seeds", {0, 1}},
            {"compare", {{"depths", {2}}, {"mlp_actor", true}}},
            {"output_dir", out.string()}};
}

// Every JSON and CSV file under `root` except the timing sidecars.
std::map<std::string, std::string> deterministic_outputs(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file() || e.path().filename() == "meta.json") continue;
        files[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
    }
    return files;
}

void run_all(const RunConfig& cfg) {
    std::ostringstream sink;
    const std::vector<std::string> argv;
    for (const char* c : {"synth", "train", "eval", "oracle", "compare"}) run_command(c, cfg, {}, argv, sink);
    CommandOptions opts;
    opts.raw_units = true;
    run_command("export", cfg, opts, argv, sink);
    opts.format = "dot";
    opts.seed = 1;
    run_command("export", cfg, opts, argv, sink);
}

}  // namespace

TEST_CASE("empty configuration yields defaults") {
    const auto cfg = parse_run_config(json::object());
    CHECK(cfg.env == EnvConfig{});
    CHECK(cfg.agent == AgentConfig{});
    CHECK(cfg.synthesis.days == 37);
    CHECK_FALSE(cfg.csv_path.has_value());
    CHECK(cfg.output_dir == "softtree-out");
}

TEST_CASE("configuration errors are reported together") {
    const json doc = {{"bogus", 1},
                      {"battery", {{"e_max", -1.0}}},
                      {"agent", {{"depht", 2}, {"gamma", "high"}, {"exploration", "greedy"}}},
                      {"split", {{"train_fraction", 0.0}}},
                      {"seeds", {-1}}};
    const auto problems = problems_of(doc);
    CHECK(mentions(problems, "unknown key 'bogus'"));
    CHECK(mentions(problems, "unknown key 'agent.depht'"));
    CHECK(mentions(problems, "agent.gamma must be a number"));
    CHECK(mentions(problems, "agent.exploration must be one of"));
    CHECK(mentions(problems, "seeds must be an array of integers"));
    CHECK(mentions(problems, "e_max"));
    CHECK(mentions(problems, "split.train_fraction"));
    CHECK(problems.size() == 7);
}

TEST_CASE("section types and exclusive data sources") {
    CHECK(mentions(problems_of({{"agent", 3}}), "agent must be an object"));
    CHECK(mentions(problems_of(json::array()), "configuration must be an object"));
    const auto p = problems_of({{"synthesis", {{"days", 2}}}, {"csv_path", "/nonexistent/x.csv"}});
    CHECK(mentions(p, "mutually exclusive"));
    CHECK(mentions(p, "csv_path does not name a readable file"));
    CHECK(mentions(problems_of({{"agent", {{"input_range", 0.0}}}}), "input_range"));
    CHECK(mentions(problems_of({{"agent", {{"batch_size", 1.5}}}}), "agent.batch_size must be an integer"));
    CHECK(mentions(problems_of({{"compare", {{"mlp_actor_lr", 0.0}}}}), "compare.mlp_actor_lr"));
}

TEST_CASE("resolved configuration round trips") {
    json doc = tiny_config("x");
    doc["battery"] = {{"e_max", 8.0}};
    doc["split"] = {{"shuffle_seed", 4}};
    const auto cfg = parse_run_config(doc);
    const auto resolved = run_config_to_json(cfg);
    CHECK(run_config_to_json(parse_run_config(resolved)) == resolved);
    CHECK(resolved.at("battery").at("e_max") == 8.0);
    CHECK(resolved.at("seeds") == json::array({0, 1}));
    CHECK(resolved.at("compare").at("mlp_actor_lr") == 1e-3);
}

TEST_CASE("relative csv paths resolve against the configuration file") {
    const auto dir = fresh_dir("softtree_cli_csv");
    write_csv(synthesize(SynthesisConfig{}, 2, 1), dir / "days.csv");
    std::ofstream(dir / "run.json") << R"({"csv_path": "days.csv"})";
    const auto cfg = load_run_config(dir / "run.json");
    REQUIRE(cfg.csv_path.has_value());
    CHECK(load_profiles(cfg)->size() == 2);

    std::ofstream(dir / "broken.json") << "{";
    CHECK_THROWS_AS(load_run_config(dir / "broken.json"), ParseError);
    fs::remove_all(dir);
}

TEST_CASE("error records are single-line json with exit codes") {
    const auto rec = describe_error(ConfigError({"a bad", "b worse"}));
    CHECK(rec.exit_code == 2);
    CHECK(rec.line.find('\n') == std::string::npos);
    const auto j = json::parse(rec.line);
    CHECK(j.at("error") == "config");
    CHECK(j.at("problems").size() == 2);
    CHECK(describe_error(ParseError("x\ny")).exit_code == 3);
    CHECK(describe_error(ParseError("x\ny")).line.find('\n') == std::string::npos);
    CHECK(describe_error(TrainingDiverged("nan")).exit_code == 4);
    CHECK(describe_error(Error("io", "disk")).exit_code == 5);
    CHECK(describe_error(std::runtime_error("boom")).exit_code == 1);
    CHECK(json::parse(usage_error("bad flag").line).at("error") == "usage");
}

TEST_CASE("export flags unreachable leaves and raw thresholds") {
    // Root splits on price; its left child asks for a lower price, which the
    // root has already excluded.
    TreeParams t = init_tree(2, 4, 5, 0);
    std::fill(t.beta.begin(), t.beta.end(), 0.0);
    t.beta_row(0)[kPrice] = 50.0;
    t.beta_row(1)[kPrice] = 50.0;
    t.beta_row(2)[kLoad] = 50.0;
    t.phi = {5.0, 2.0, 5.0};
    NormStats norm;
    norm.shift = {0.1, 0.0, 0.0, -2.0};
    norm.scale = {0.04, 0.1, 0.3, 0.2};  // [0, 10] after scaling
    TreeContext ctx{norm, {{0.1, 0.5}, {0.0, 1.0}, {0.0, 3.0}, {-2.0, 0.0}}, {-1, -0.5, 0, 0.5, 1}};

    const auto report = export_checkpoint(t, ctx, ExportFormat::text, true);
    CHECK(report.decision_nodes == 3);
    const auto crisp = crispify(t);
    std::vector<FeatureBounds> box{{0, 10}, {0, 10}, {0, 10}, {0, 10}};
    CHECK(report.unreachable_leaves == analyze_reachability(crisp, box));
    CHECK(report.unreachable_leaves == std::vector<std::size_t>{1});
    REQUIRE(report.thresholds.size() == 3);
    CHECK(report.thresholds[0] == doctest::Approx(0.1 + 0.04 * crisp.decision_nodes[0].threshold));
    CHECK(report.inside_observed_range == std::vector<bool>{true, true, true});
    CHECK(report.rendering.find("price") != std::string::npos);
    CHECK(report.rendering.find("u=") != std::string::npos);

    CHECK_THROWS_AS(export_checkpoint(t, TreeContext{}, ExportFormat::text, true), ValidationError);
    const auto bare = export_checkpoint(t, TreeContext{}, ExportFormat::dot, false);
    CHECK(bare.inside_observed_range.empty());
    CHECK(bare.unreachable_leaves == std::vector<std::size_t>{1});
}

TEST_CASE("commands run end to end and re-run byte-identically") {
    const auto a = fresh_dir("softtree_cli_a");
    const auto b = fresh_dir("softtree_cli_b");
    auto doc = tiny_config(a);
    run_all(parse_run_config(doc));
    doc["output_dir"] = b.string();
    run_all(parse_run_config(doc));

    for (const char* f : {"synth/profiles.csv", "train/seed-0/checkpoint.json", "train/seed-1/curve.jsonl",
                          "train/summary.json", "eval/seed-0/report.json", "eval/seed-0/trace.jsonl",
                          "oracle/day-0.json", "compare/compare.json", "compare/table.txt",
                          "export/seed-0/tree.txt", "export/seed-0/reachability.json",
                          "export/seed-1/tree.dot", "train/meta.json"}) {
        CHECK_MESSAGE(fs::exists(a / f), f);
    }
    const auto outputs = deterministic_outputs(a);
    CHECK(outputs.size() > 20);
    CHECK(outputs == deterministic_outputs(b));

    const auto meta = read_json(a / "train" / "meta.json");
    CHECK(meta.at("command") == "train");
    CHECK(meta.contains("started_utc"));
    CHECK(meta.at("config").at("seeds") == json::array({0, 1}));

    // Oracle lower-bounds every arm.
    const auto cmp = read_json(a / "compare" / "compare.json");
    double oracle = 0.0;
    for (const auto& arm : cmp.at("arms")) {
        if (arm.at("arm") == "oracle") oracle = arm.at("mean").get<double>();
    }
    CHECK(oracle > 0.0);
    std::vector<std::string> names;
    for (const auto& arm : cmp.at("arms")) {
        names.push_back(arm.at("arm").get<std::string>());
        for (const auto& c : arm.at("per_seed")) CHECK(oracle <= c.get<double>() + 1e-9);
    }
    CHECK(names == std::vector<std::string>{"rbc", "ddt_d2", "ddpg_mlp", "oracle"});

    const auto eval = read_json(a / "eval" / "seed-0" / "report.json");
    CHECK(eval.at("policy") == "crisp_tree");
    CHECK(eval.at("baselines").at("oracle").get<double>() <= eval.at("mean_cost").get<double>() + 1e-9);

    // Network checkpoints evaluate through their stored normalization.
    std::ostringstream sink;
    CommandOptions opts;
    opts.checkpoint = a / "compare" / "ddpg_mlp" / "seed-0" / "checkpoint.json";
    run_command("eval", parse_run_config(tiny_config(a)), opts, {}, sink);
    CHECK(read_json(a / "eval" / "checkpoint" / "report.json").at("policy") == "network_argmax");
    CHECK_THROWS_AS(run_command("export", parse_run_config(tiny_config(a)), opts, {}, sink), ValidationError);

    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("command preconditions") {
    const auto dir = fresh_dir("softtree_cli_pre");
    const auto cfg = parse_run_config(tiny_config(dir));
    std::ostringstream sink;
    CHECK_THROWS_AS(run_command("eval", cfg, {}, {}, sink), ParseError);
    CommandOptions opts;
    opts.day = 99;
    CHECK_THROWS_AS(run_command("oracle", cfg, opts, {}, sink), ValidationError);
    CHECK_THROWS_AS(run_command("fly", cfg, {}, {}, sink), ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("binary exit-code contract") {
    const auto dir = fresh_dir("softtree_cli_bin");
    const std::string bin = SOFTTREE_CLI_BINARY;
    auto run = [&](const std::string& args) {
        const auto err = dir / "stderr.txt";
        const int status = std::system((bin + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " +
                                        err.string())
                                           .c_str());
        return std::make_pair(WEXITSTATUS(status), slurp(err));
    };

    std::ofstream(dir / "bad.json") << R"({"agent": {"depth": 0, "colour": 1}, "tariff": []})";
    auto [code, err] = run("train --config " + (dir / "bad.json").string());
    CHECK(code == 2);
    CHECK(std::count(err.begin(), err.end(), '\n') == 1);
    const auto j = json::parse(err);
    CHECK(j.at("error") == "config");
    CHECK(j.at("problems").size() == 3);

    std::tie(code, err) = run("fly");
    CHECK(code == 2);
    CHECK(json::parse(err).at("error") == "usage");

    std::tie(code, err) = run("eval --out " + (dir / "empty").string());
    CHECK(code == 3);
    CHECK(json::parse(err).at("error") == "parse");

    std::tie(code, err) = run("oracle --day 2 --out " + (dir / "ok").string());
    CHECK(code == 0);
    CHECK(err.empty());
    CHECK(fs::exists(dir / "ok" / "oracle" / "day-2.json"));
    fs::remove_all(dir);
}
