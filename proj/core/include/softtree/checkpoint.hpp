#pragma once

/**
 * Versioned JSON serialization of trained models and reports.
 *
 * Tree checkpoint (format "softtree.tree", version 1):
 *   {"format": "softtree.tree", "version": 1, "depth": d, "n_features": F,
 *    "n_actions": A, "beta": [[F reals] x (2^d-1)], "phi": [2^d-1 reals],
 *    "w": [[A reals] x 2^d],
 *    "normalization": {"shift": [4], "scale": [4]},      (optional)
 *    "observed_ranges": [[lo, hi] x 4],                    (optional)
 *    "action_grid": [A reals]}                             (optional)
 *
 * Network checkpoint (format "softtree.mlp", version 1):
 *   {"format": "softtree.mlp", "version": 1,
 *    "layers": [{"in": i, "out": o, "activation": "relu"|"identity",
 *                "weights": [o*i reals, row-major], "biases": [o reals]}]}
 *
 * An actor network carries the same optional normalization, observed_ranges
 * and action_grid fields as a tree.
 */

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "softtree/agents.hpp"
#include "softtree/ddt.hpp"
#include "softtree/mlp.hpp"
#include "softtree/oracle.hpp"
#include "softtree/profiles.hpp"

namespace softtree {

inline constexpr int kCheckpointVersion = 1;

// Metadata carried with a tree so it can be rendered in raw units without
// the original data.
struct TreeContext {
    std::optional<NormStats> norm;
    std::vector<std::pair<double, double>> observed_ranges;
    std::vector<double> action_grid;
};

nlohmann::json tree_to_json(const TreeParams& tree, const TreeContext& context = {});
TreeParams tree_from_json(const nlohmann::json& j, TreeContext* context = nullptr);

nlohmann::json mlp_to_json(const MlpParams& net);
MlpParams mlp_from_json(const nlohmann::json& j);

// Dispatches on the "format" field. Context is read and written for both
// families.
nlohmann::json actor_to_json(const ActorParams& actor, const TreeContext& context = {});
ActorParams actor_from_json(const nlohmann::json& j, TreeContext* context = nullptr);

nlohmann::json norm_to_json(const NormStats& s);
NormStats norm_from_json(const nlohmann::json& j);

nlohmann::json plan_to_json(const PlanResult& plan);
nlohmann::json eval_to_json(const EvalReport& report);
nlohmann::json curve_record_to_json(const CurveRecord& r);

// Writes `j` with two-space indentation and a trailing newline.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace softtree
