#pragma once

/**
 * Run configuration for the softtree command-line tool.
 *
 * Every field is optional; missing fields keep the defaults below. Layout:
 *
 *   {
 *     "battery":   {"e_max", "p_max", "eta_rt", "action_grid"},
 *     "tariff":    {"lambda_cap", "p_agg_min", "injection_ratio"},
 *     "dt": 1.0,
 *     "synthesis": {"days", "seed", <SynthesisConfig fields>},
 *     "csv_path":  "profiles.csv",          (mutually exclusive with synthesis)
 *     "split":     {"train_fraction", "shuffle_seed"},
 *     "agent":     {<AgentConfig fields except seeds>},
 *     "seeds":     [0, 1, 2, 3, 4],
 *     "e0": 0.0,
 *     "oracle":    {"e_grid"},
 *     "compare":   {"depths", "mlp_actor"},
 *     "output_dir": "softtree-out"
 *   }
 *
 * Unknown keys are rejected. Parsing collects every problem before failing.
 */

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "softtree/agents.hpp"
#include "softtree/error.hpp"
#include "softtree/hems_env.hpp"
#include "softtree/profiles.hpp"

namespace softtree::cli {

struct SynthesisSource {
    SynthesisConfig params;
    std::size_t days = 37;
    std::uint64_t seed = 0;
};

struct SplitConfig {
    double train_fraction = 0.8;
    std::optional<std::uint64_t> shuffle_seed;
};

struct OracleConfig {
    double e_grid = 0.01;  // kWh
};

struct CompareConfig {
    std::vector<int> depths{2, 3};
    bool mlp_actor = true;
    double mlp_actor_lr = 1e-3;  // the network actor diverges at the tree's 1e-2
};

struct RunConfig {
    EnvConfig env;
    SynthesisSource synthesis;
    std::optional<std::filesystem::path> csv_path;
    SplitConfig split;
    AgentConfig agent;  // agent.seeds holds the top-level "seeds"
    double e0 = 0.0;
    OracleConfig oracle;
    CompareConfig compare;
    std::filesystem::path output_dir = "softtree-out";
};

// Carries every problem found in a configuration document.
class ConfigError : public ValidationError {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

// Relative csv paths are resolved against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

// Reads and parses a JSON file. Throws ParseError on malformed JSON and
// ConfigError on invalid content.
RunConfig load_run_config(const std::filesystem::path& path);

// Fully resolved configuration, every field present.
nlohmann::json run_config_to_json(const RunConfig& cfg);

}  // namespace softtree::cli
