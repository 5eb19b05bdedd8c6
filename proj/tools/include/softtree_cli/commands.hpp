#pragma once

/**
 * Subcommands of the softtree tool. Each writes only below the output root
 * (--out, else the configured output_dir) and prints a short summary to
 * `out`. Machine outputs are JSON or JSON lines and depend only on the
 * configuration and seeds; wall-clock data goes to a separate meta.json.
 *
 *   synth    <root>/synth/profiles.csv
 *   train    <root>/train/seed-<s>/{checkpoint,final,critic}.json, curve.jsonl
 *            <root>/train/summary.json
 *   eval     <root>/eval/<label>/report.json, trace.jsonl
 *   export   <root>/export/<label>/tree.{txt,dot}, reachability.json
 *   oracle   <root>/oracle/day-<k>.json
 *   compare  <root>/compare/compare.json, table.txt, <arm>/seed-<s>/...
 */

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "softtree/agents.hpp"
#include "softtree/checkpoint.hpp"
#include "softtree/tree_export.hpp"
#include "softtree_cli/run_config.hpp"

namespace softtree::cli {

struct CommandOptions {
    std::optional<std::uint64_t> seed;               // restricts to one seed
    std::optional<std::filesystem::path> out;        // overrides output_dir
    std::optional<std::filesystem::path> checkpoint; // eval/export input
    std::optional<std::string> format;               // export: text|dot
    std::optional<std::size_t> day;                  // oracle: day index
    bool raw_units = false;                          // export thresholds in raw units
};

std::filesystem::path output_root(const RunConfig& cfg, const CommandOptions& opts);

// Profiles named by the configuration, split per `split`.
std::shared_ptr<ProfileSet> load_profiles(const RunConfig& cfg);

void cmd_synth(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
void cmd_train(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
void cmd_eval(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
void cmd_export(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
void cmd_oracle(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
void cmd_compare(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);

// Runs `command` by name and writes <root>/<command>/meta.json with timing,
// arguments and the resolved configuration. Throws ValidationError for an
// unknown command name.
void run_command(const std::string& command, const RunConfig& cfg, const CommandOptions& opts,
                 const std::vector<std::string>& argv, std::ostream& out);

// Crisp-tree summary produced by export.
struct ExportReport {
    std::string rendering;
    std::size_t decision_nodes = 0;
    std::vector<std::size_t> unreachable_leaves;
    // Per decision node: threshold in raw units when a normalization is
    // known, and whether it lies inside the observed range of its feature.
    std::vector<double> thresholds;
    std::vector<bool> inside_observed_range;
    nlohmann::json to_json() const;
};

ExportReport export_checkpoint(const TreeParams& tree, const TreeContext& context, ExportFormat format,
                               bool raw_units);

// Maps a process-terminating exception to an exit code and a single-line
// JSON error record.
struct ErrorRecord {
    int exit_code = 1;
    std::string line;
};
ErrorRecord describe_error(const std::exception& e);
ErrorRecord usage_error(const std::string& message);

}  // namespace softtree::cli
