#include "softtree_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "softtree/log.hpp"
#include "softtree/oracle.hpp"

#ifndef SOFTTREE_VERSION
#define SOFTTREE_VERSION "unknown"
#endif

namespace softtree::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::uint64_t> selected_seeds(const RunConfig& cfg, const CommandOptions& opts) {
    if (opts.seed) return {*opts.seed};
    return cfg.agent.seeds;
}

fs::path ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("io", "cannot create directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("io", "cannot write " + path.string());
    return out;
}

std::string seed_dir(std::uint64_t seed) { return "seed-" + std::to_string(seed); }

std::vector<std::string> action_labels(const std::vector<double>& grid, int n_actions) {
    std::vector<std::string> labels;
    if (grid.size() == static_cast<std::size_t>(n_actions)) {
        for (double u : grid) {
            std::ostringstream s;
            s << "u=" << (u > 0 ? "+" : "") << u;
            labels.push_back(s.str());
        }
    } else {
        for (int k = 0; k < n_actions; ++k) labels.push_back("a" + std::to_string(k));
    }
    return labels;
}

Policy policy_for(const ActorParams& actor, const NormStats& norm) {
    if (const auto* tree = std::get_if<TreeParams>(&actor)) return crisp_policy(crispify(*tree), norm);
    return soft_greedy_policy(actor, norm);
}

double oracle_mean(const RunConfig& cfg, const ProfileSet& ps, const std::vector<std::size_t>& days) {
    double sum = 0.0;
    for (auto d : days) sum += dp_optimal(ps.days.at(d), cfg.env, cfg.oracle.e_grid, kHoursPerDay, cfg.e0).total_cost;
    return sum / static_cast<double>(days.size());
}

struct TrainedModel {
    TrainResult result;
    double train_cost = 0.0;  // best actor, greedy, train split
    double eval_cost = 0.0;   // best actor, greedy, eval split
};

// Trains one seed and writes its checkpoints and curve into `dir`.
TrainedModel train_and_save(const RunConfig& cfg, const AgentConfig& agent,
                            std::shared_ptr<const ProfileSet> ps, const NormStats& unit_norm,
                            std::uint64_t seed, const fs::path& dir) {
    ensure_dir(dir);
    TrainedModel m{train(agent, cfg.env, ps, unit_norm, seed)};
    const TreeContext ctx{m.result.input_norm, observed_ranges(*ps), cfg.env.battery.action_grid};
    write_json(actor_to_json(m.result.best_actor, ctx), dir / "checkpoint.json");
    write_json(actor_to_json(m.result.actor, ctx), dir / "final.json");
    write_json(mlp_to_json(m.result.critic), dir / "critic.json");
    auto curve = open_output(dir / "curve.jsonl");
    for (const auto& r : m.result.curve) curve << curve_record_to_json(r).dump() << '\n';

    const auto policy = policy_for(m.result.best_actor, m.result.input_norm);
    m.train_cost = evaluate(policy, cfg.env, ps, ps->train_days, cfg.e0).mean_cost;
    m.eval_cost = evaluate(policy, cfg.env, ps, ps->eval_days, cfg.e0).mean_cost;
    return m;
}

struct LoadedCheckpoint {
    ActorParams actor;
    TreeContext context;
    std::string label;
};

LoadedCheckpoint load_checkpoint(const RunConfig& cfg, const CommandOptions& opts) {
    LoadedCheckpoint c;
    fs::path path;
    if (opts.checkpoint) {
        path = *opts.checkpoint;
        c.label = path.stem().string();
    } else {
        const auto seed = selected_seeds(cfg, opts).front();
        path = output_root(cfg, opts) / "train" / seed_dir(seed) / "checkpoint.json";
        c.label = seed_dir(seed);
    }
    c.actor = actor_from_json(read_json(path), &c.context);
    return c;
}

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Summary {
    double mean = 0.0, std = 0.0, min = 0.0, max = 0.0;
};

Summary summarize(const std::vector<double>& v) {
    Summary s;
    if (v.empty()) return s;
    s.min = *std::min_element(v.begin(), v.end());
    s.max = *std::max_element(v.begin(), v.end());
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    for (double x : v) s.std += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(s.std / static_cast<double>(v.size()));
    return s;
}

}  // namespace

fs::path output_root(const RunConfig& cfg, const CommandOptions& opts) {
    return opts.out.value_or(cfg.output_dir);
}

std::shared_ptr<ProfileSet> load_profiles(const RunConfig& cfg) {
    auto ps = std::make_shared<ProfileSet>(
        cfg.csv_path ? load_csv(*cfg.csv_path)
                     : synthesize(cfg.synthesis.params, cfg.synthesis.days, cfg.synthesis.seed));
    assign_split(*ps, cfg.split.train_fraction, cfg.split.shuffle_seed);
    return ps;
}

void cmd_synth(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
    const auto ps = synthesize(cfg.synthesis.params, cfg.synthesis.days, cfg.synthesis.seed);
    const auto path = ensure_dir(output_root(cfg, opts) / "synth") / "profiles.csv";
    write_csv(ps, path);
    out << "wrote " << ps.size() << " days to " << path.string() << '\n';
}

void cmd_train(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
    const auto ps = load_profiles(cfg);
    const auto norm = norm_fit(*ps);
    const auto root = output_root(cfg, opts) / "train";
    json seeds = json::array();
    for (auto seed : selected_seeds(cfg, opts)) {
        logger().info("train: seed {} ({} episodes)", seed, cfg.agent.episodes);
        const auto m = train_and_save(cfg, cfg.agent, ps, norm, seed, root / seed_dir(seed));
        seeds.push_back({{"seed", seed},
                         {"checkpoint", seed_dir(seed) + "/checkpoint.json"},
                         {"train_mean_cost", m.train_cost},
                         {"eval_mean_cost", m.eval_cost}});
        out << "seed " << seed << ": train " << m.train_cost << " eval " << m.eval_cost << '\n';
    }
    write_json({{"train_days", ps->train_days}, {"eval_days", ps->eval_days}, {"seeds", seeds}},
               root / "summary.json");
}

void cmd_eval(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
    const auto ps = load_profiles(cfg);
    const auto ckpt = load_checkpoint(cfg, opts);
    if (!ckpt.context.norm) throw ParseError("checkpoint has no normalization; cannot evaluate");
    const auto dir = ensure_dir(output_root(cfg, opts) / "eval" / ckpt.label);

    auto trace = open_output(dir / "trace.jsonl");
    const auto report = evaluate(policy_for(ckpt.actor, *ckpt.context.norm), cfg.env, ps, ps->eval_days,
                                 cfg.e0, false, &trace);
    const double rbc = evaluate(rbc_policy(cfg.env.battery, cfg.env.dt), cfg.env, ps, ps->eval_days, cfg.e0).mean_cost;
    const double oracle = oracle_mean(cfg, *ps, ps->eval_days);

    auto j = eval_to_json(report);
    j["policy"] = std::holds_alternative<TreeParams>(ckpt.actor) ? "crisp_tree" : "network_argmax";
    j["baselines"] = {{"rbc", rbc}, {"oracle", oracle}};
    write_json(j, dir / "report.json");
    out << "eval " << ckpt.label << ": mean " << report.mean_cost << " (rbc " << rbc << ", oracle " << oracle
        << ")\n";
}

json ExportReport::to_json() const {
    json nodes = json::array();
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        json n = {{"node", i}, {"threshold", thresholds[i]}};
        if (!inside_observed_range.empty()) n["inside_observed_range"] = static_cast<bool>(inside_observed_range[i]);
        nodes.push_back(n);
    }
    return {{"decision_nodes", decision_nodes}, {"thresholds", nodes}, {"unreachable_leaves", unreachable_leaves}};
}

ExportReport export_checkpoint(const TreeParams& tree, const TreeContext& context, ExportFormat format,
                               bool raw_units) {
    const auto crisp = crispify(tree);
    if (raw_units && !context.norm) throw ValidationError("--raw-units needs a checkpoint with normalization");
    const bool ranges_known = context.norm && context.observed_ranges.size() == kFeatureCount &&
                              tree.n_features == static_cast<int>(kFeatureCount);

    ExportOptions options;
    options.feature_names = feature_names();
    options.feature_names.resize(static_cast<std::size_t>(tree.n_features), "x");
    options.action_labels = action_labels(context.action_grid, tree.n_actions);
    if (raw_units) {
        const NormStats norm = *context.norm;
        options.threshold_to_raw = [norm](std::size_t f, double t) { return norm_invert(norm, f, t); };
    }

    ExportReport report;
    report.rendering = export_tree(crisp, options, format);
    report.decision_nodes = crisp.decision_nodes.size();

    std::vector<FeatureBounds> bounds(static_cast<std::size_t>(tree.n_features),
                                      {-std::numeric_limits<double>::infinity(),
                                       std::numeric_limits<double>::infinity()});
    if (ranges_known) {
        Observation lo{}, hi{};
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            lo[f] = context.observed_ranges[f].first;
            hi[f] = context.observed_ranges[f].second;
        }
        const auto nlo = norm_apply(*context.norm, lo);
        const auto nhi = norm_apply(*context.norm, hi);
        for (std::size_t f = 0; f < kFeatureCount; ++f) bounds[f] = {nlo[f], nhi[f]};
    }
    report.unreachable_leaves = analyze_reachability(crisp, bounds);

    for (const auto& node : crisp.decision_nodes) {
        const double raw = context.norm ? norm_invert(*context.norm, node.feature_index, node.threshold)
                                        : node.threshold;
        report.thresholds.push_back(raw);
        if (ranges_known) {
            const auto [lo, hi] = context.observed_ranges[node.feature_index];
            report.inside_observed_range.push_back(raw >= lo && raw <= hi);
        }
    }
    return report;
}

void cmd_export(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
    const auto ckpt = load_checkpoint(cfg, opts);
    const auto* tree = std::get_if<TreeParams>(&ckpt.actor);
    if (!tree) throw ValidationError("export needs a tree checkpoint");
    const auto format = parse_export_format(opts.format.value_or("text"));
    const auto report = export_checkpoint(*tree, ckpt.context, format, opts.raw_units);

    const auto dir = ensure_dir(output_root(cfg, opts) / "export" / ckpt.label);
    open_output(dir / (format == ExportFormat::dot ? "tree.dot" : "tree.txt")) << report.rendering;
    auto j = report.to_json();
    j["threshold_units"] = ckpt.context.norm ? "raw" : "normalized";
    write_json(j, dir / "reachability.json");
    out << report.rendering;
    if (!report.unreachable_leaves.empty()) {
        out << "unreachable leaves:";
        for (auto l : report.unreachable_leaves) out << ' ' << l;
        out << '\n';
    }
}

void cmd_oracle(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
    const auto ps = load_profiles(cfg);
    const std::size_t day = opts.day.value_or(0);
    if (day >= ps->size())
        throw ValidationError("--day " + std::to_string(day) + " out of range (have " + std::to_string(ps->size()) +
                              " days)");
    const auto plan = dp_optimal(ps->days[day], cfg.env, cfg.oracle.e_grid, kHoursPerDay, cfg.e0);
    const double rbc = evaluate(rbc_policy(cfg.env.battery, cfg.env.dt), cfg.env, ps, {day}, cfg.e0).mean_cost;

    auto j = plan_to_json(plan);
    j["day"] = day;
    j["date"] = ps->days[day].date;
    j["e_grid"] = cfg.oracle.e_grid;
    j["rbc_cost"] = rbc;
    const auto dir = ensure_dir(output_root(cfg, opts) / "oracle");
    write_json(j, dir / ("day-" + std::to_string(day) + ".json"));
    out << "day " << day << " (" << ps->days[day].date << "): oracle " << plan.total_cost << ", rbc " << rbc
        << '\n';
}

void cmd_compare(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
    const auto ps = load_profiles(cfg);
    const auto norm = norm_fit(*ps);
    const auto seeds = selected_seeds(cfg, opts);
    const auto root = ensure_dir(output_root(cfg, opts) / "compare");

    struct Arm {
        std::string name;
        std::vector<double> costs;
    };
    std::vector<Arm> arms;

    const double rbc = evaluate(rbc_policy(cfg.env.battery, cfg.env.dt), cfg.env, ps, ps->eval_days, cfg.e0).mean_cost;
    arms.push_back({"rbc", std::vector<double>(seeds.size(), rbc)});

    auto trained_arm = [&](const std::string& name, AgentConfig agent) {
        Arm arm{name, {}};
        for (auto seed : seeds) {
            logger().info("compare: {} seed {}", name, seed);
            arm.costs.push_back(train_and_save(cfg, agent, ps, norm, seed, root / name / seed_dir(seed)).eval_cost);
        }
        arms.push_back(std::move(arm));
    };
    for (int depth : cfg.compare.depths) {
        AgentConfig agent = cfg.agent;
        agent.actor = ActorKind::ddt;
        agent.depth = depth;
        trained_arm("ddt_d" + std::to_string(depth), agent);
    }
    if (cfg.compare.mlp_actor) {
        AgentConfig agent = cfg.agent;
        agent.actor = ActorKind::mlp;
        agent.actor_lr = cfg.compare.mlp_actor_lr;
        trained_arm("ddpg_mlp", agent);
    }
    const double oracle = oracle_mean(cfg, *ps, ps->eval_days);
    arms.push_back({"oracle", std::vector<double>(seeds.size(), oracle)});

    json rows = json::array();
    std::ostringstream table;
    table << std::left << std::setw(10) << "arm" << std::right << std::setw(10) << "mean" << std::setw(10) << "std"
          << std::setw(10) << "min" << std::setw(10) << "max" << std::setw(12) << "vs_rbc" << '\n';
    table << std::fixed << std::setprecision(4);
    for (const auto& arm : arms) {
        const auto s = summarize(arm.costs);
        const double improvement = 1.0 - s.mean / rbc;
        rows.push_back({{"arm", arm.name},
                        {"per_seed", arm.costs},
                        {"mean", s.mean},
                        {"std", s.std},
                        {"min", s.min},
                        {"max", s.max},
                        {"improvement_vs_rbc", improvement}});
        table << std::left << std::setw(10) << arm.name << std::right << std::setw(10) << s.mean << std::setw(10)
              << s.std << std::setw(10) << s.min << std::setw(10) << s.max << std::setw(11)
              << 100.0 * improvement << "%\n";
    }
    write_json({{"seeds", seeds}, {"eval_days", ps->eval_days}, {"arms", rows}}, root / "compare.json");
    open_output(root / "table.txt") << table.str();
    out << table.str();
}

void run_command(const std::string& command, const RunConfig& cfg, const CommandOptions& opts,
                 const std::vector<std::string>& argv, std::ostream& out) {
    using Fn = void (*)(const RunConfig&, const CommandOptions&, std::ostream&);
    static const std::vector<std::pair<std::string, Fn>> commands{
        {"synth", cmd_synth}, {"train", cmd_train},   {"eval", cmd_eval},
        {"export", cmd_export}, {"oracle", cmd_oracle}, {"compare", cmd_compare}};
    const auto it = std::find_if(commands.begin(), commands.end(), [&](const auto& c) { return c.first == command; });
    if (it == commands.end()) throw ValidationError("unknown command '" + command + "'");

    const auto started = std::chrono::system_clock::now();
    const auto t0 = std::chrono::steady_clock::now();
    it->second(cfg, opts, out);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto dir = ensure_dir(output_root(cfg, opts) / command);
    write_json({{"command", command},
                {"argv", argv},
                {"version", SOFTTREE_VERSION},
                {"started_utc", utc_timestamp(started)},
                {"finished_utc", utc_timestamp(std::chrono::system_clock::now())},
                {"wall_seconds", seconds},
                {"config", run_config_to_json(cfg)}},
               dir / "meta.json");
}

ErrorRecord describe_error(const std::exception& e) {
    json j;
    int code = 1;
    if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) {
        j = {{"error", "config"}, {"message", "invalid configuration"}, {"problems", ce->problems()}};
        code = 2;
    } else if (const auto* se = dynamic_cast<const Error*>(&e)) {
        j = {{"error", se->kind()}, {"message", se->what()}};
        if (se->kind() == "validation") code = 2;
        else if (se->kind() == "parse") code = 3;
        else if (se->kind() == "diverged") code = 4;
        else if (se->kind() == "io") code = 5;
    } else {
        j = {{"error", "internal"}, {"message", e.what()}};
    }
    return {code, j.dump()};
}

ErrorRecord usage_error(const std::string& message) {
    return {2, json{{"error", "usage"}, {"message", message}}.dump()};
}

}  // namespace softtree::cli
