#include <iostream>

#include <CLI11.hpp>

#include "softtree/log.hpp"
#include "softtree_cli/commands.hpp"

int main(int argc, char** argv) {
    using namespace softtree::cli;

    CLI::App app{"Differentiable decision tree policies for home battery dispatch"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    CommandOptions opts;
    std::uint64_t seed = 0;
    std::string out_dir, checkpoint, format;
    std::size_t day = 0;

    app.add_option("--config", config_path, "RunConfig JSON file (defaults when omitted)");
    auto* seed_opt = app.add_option("--seed", seed, "Run a single seed instead of the configured list");
    auto* out_opt = app.add_option("--out", out_dir, "Output root (overrides output_dir)");
    auto* ckpt_opt = app.add_option("--checkpoint", checkpoint, "Checkpoint for eval/export");
    auto* format_opt = app.add_option("--format", format, "Export format: text|dot");
    auto* day_opt = app.add_option("--day", day, "Day index for oracle");
    app.add_flag("--raw-units", opts.raw_units, "Print export thresholds in raw units");

    app.add_subcommand("synth", "Write a synthetic profile CSV");
    app.add_subcommand("train", "Train one agent per seed");
    app.add_subcommand("eval", "Evaluate a checkpoint on the eval split");
    app.add_subcommand("export", "Render a tree checkpoint and its reachability");
    app.add_subcommand("oracle", "Perfect-foresight plan for one day");
    app.add_subcommand("compare", "RBC, tree, network and oracle costs over seeds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        const auto rec = usage_error(e.what());
        std::cerr << rec.line << '\n';
        return rec.exit_code;
    }

    if (*seed_opt) opts.seed = seed;
    if (*out_opt) opts.out = out_dir;
    if (*ckpt_opt) opts.checkpoint = checkpoint;
    if (*format_opt) opts.format = format;
    if (*day_opt) opts.day = day;

    try {
        softtree::init_logging();
        const RunConfig cfg = config_path.empty() ? parse_run_config(nlohmann::json::object())
                                                  : load_run_config(config_path);
        const std::vector<std::string> args(argv + 1, argv + argc);
        run_command(app.get_subcommands().front()->get_name(), cfg, opts, args, std::cout);
    } catch (const std::exception& e) {
        const auto rec = describe_error(e);
        std::cerr << rec.line << '\n';
        return rec.exit_code;
    }
    return 0;
}
