#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "softtree/ddt.hpp"

namespace softtree {

enum class ExportFormat { text, dot };

// Parses "text" or "dot"; throws ValidationError otherwise.
ExportFormat parse_export_format(std::string_view token);

struct ExportOptions {
    std::vector<std::string> feature_names;  // size n_features
    std::vector<std::string> action_labels;  // size n_actions
    // Maps (feature index, normalized threshold) to the value printed. Leave
    // empty to print thresholds in normalized units.
    std::function<double(std::size_t, double)> threshold_to_raw;
    int precision = 4;
};

// Renders the crisp tree as indented if/else pseudocode (two spaces per
// level) or as a Graphviz digraph. Output is deterministic.
std::string export_tree(const CrispTree& crisp, const ExportOptions& options,
                        ExportFormat format);

struct FeatureBounds {
    double lo = 0.0;
    double hi = 1.0;
};

// Leaves (0-based, left to right) whose path constraints cannot be satisfied
// by any input inside `bounds`. Sorted ascending.
std::vector<std::size_t> analyze_reachability(const CrispTree& crisp,
                                              const std::vector<FeatureBounds>& bounds);

}  // namespace softtree
