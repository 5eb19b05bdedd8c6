#pragma once

/**
 * Differentiable decision trees (soft decision trees).
 *
 * A complete binary tree of depth d has 2^d - 1 decision nodes and 2^d leaves,
 * stored in level order. Node ids in rendered output are 1-based (root = 1,
 * children of i are 2i and 2i+1); storage indices used by the accessors below
 * are 0-based. Leaves are numbered 0..2^d-1 from left to right.
 *
 * Decision node i routes left with probability
 *     p_left = sigmoid(softmax(beta_i) . x - phi_i)
 * and leaf j emits the action distribution softmax(-w_j). The tree output is
 * the sum over leaves of (product of edge probabilities on the root-to-leaf
 * path) times the leaf distribution.
 */

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace softtree {

using ActionIndex = std::size_t;

// Probability vector over the discrete action set.
using ActionDistribution = std::vector<double>;

struct TreeParams {
    int depth = 0;
    int n_features = 0;
    int n_actions = 0;
    std::vector<double> beta;  // (2^d - 1) x n_features, row-major
    std::vector<double> phi;   // 2^d - 1
    std::vector<double> w;     // 2^d x n_actions, row-major

    std::size_t n_decision() const { return phi.size(); }
    std::size_t n_leaves() const { return n_decision() + 1; }

    std::span<double> beta_row(std::size_t node) {
        return {beta.data() + node * n_features, static_cast<std::size_t>(n_features)};
    }
    std::span<const double> beta_row(std::size_t node) const {
        return {beta.data() + node * n_features, static_cast<std::size_t>(n_features)};
    }
    std::span<double> leaf_w(std::size_t leaf) {
        return {w.data() + leaf * n_actions, static_cast<std::size_t>(n_actions)};
    }
    std::span<const double> leaf_w(std::size_t leaf) const {
        return {w.data() + leaf * n_actions, static_cast<std::size_t>(n_actions)};
    }

    // Flat views used by the optimizer and by Polyak averaging.
    std::vector<std::span<double>> buffers() { return {beta, phi, w}; }
    std::vector<std::span<const double>> buffers() const { return {beta, phi, w}; }

    bool operator==(const TreeParams&) const = default;
};

// Gradients mirror the parameter layout exactly.
using TreeGradients = TreeParams;

// Zero-filled tree with the same shape as `like`.
TreeParams zeros_like(const TreeParams& like);

// Throws ValidationError unless the vectors match the declared shape and all
// values are finite.
void validate(const TreeParams& tree);

// ---------------------------------------------------------------------------
// Soft tree
// ---------------------------------------------------------------------------

// Uniform [-0.5, 0.5] initialization of every parameter from a
// std::mt19937_64 seeded with `seed`.
TreeParams init_tree(int depth, int n_features, int n_actions, std::uint64_t seed);

double sigmoid(double z);

// softmax(beta) for one decision node.
std::vector<double> normalized_weights(std::span<const double> beta);

// p_left for a single decision node.
double decision_prob(std::span<const double> beta, double phi, std::span<const double> x);

// softmax(-w), computed with max subtraction.
ActionDistribution leaf_distribution(std::span<const double> w);

// p_left for every decision node, in storage order.
std::vector<double> decision_probs(const TreeParams& tree, std::span<const double> x);

// Product of edge probabilities for each leaf; sums to one.
std::vector<double> path_probabilities(const TreeParams& tree, std::span<const double> x);

ActionDistribution forward_soft(const TreeParams& tree, std::span<const double> x);

// Literal depth-2 evaluation through the 2x2 path-probability matrix product.
// Reference implementation for differential testing of forward_soft.
ActionDistribution forward_depth2(const TreeParams& tree, std::span<const double> x);

// Gradient of L = upstream . forward_soft(tree, x) with respect to every
// parameter.
TreeGradients backward(const TreeParams& tree, std::span<const double> x,
                       std::span<const double> upstream);

// Same as backward() but adds into `grads` (scaled by `scale`) instead of
// allocating. Used by batched actor updates.
void accumulate_backward(const TreeParams& tree, std::span<const double> x,
                         std::span<const double> upstream, double scale,
                         TreeGradients& grads);

// ---------------------------------------------------------------------------
// Crisp tree
// ---------------------------------------------------------------------------

struct CrispNode {
    std::size_t feature_index = 0;
    double threshold = 0.0;  // normalized-feature units
    bool operator==(const CrispNode&) const = default;
};

struct CrispLeaf {
    ActionIndex action_index = 0;
    double probability = 1.0;  // probability of action_index under the soft leaf
    bool operator==(const CrispLeaf&) const = default;
};

struct CrispTree {
    int depth = 0;
    int n_features = 0;
    int n_actions = 0;
    std::vector<CrispNode> decision_nodes;
    std::vector<CrispLeaf> leaves;

    bool operator==(const CrispTree&) const = default;
};

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> v);

CrispTree crispify(const TreeParams& tree);

// Goes left iff x[feature] >= threshold.
std::size_t reach_leaf(const CrispTree& crisp, std::span<const double> x);

ActionIndex infer_crisp(const CrispTree& crisp, std::span<const double> x);

}  // namespace softtree
