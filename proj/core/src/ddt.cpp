#include "softtree/ddt.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "softtree/error.hpp"

namespace softtree {

namespace {

void check_input(const TreeParams& tree, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(tree.n_features)) {
        throw ValidationError("observation has " + std::to_string(x.size()) +
                              " features, tree expects " + std::to_string(tree.n_features));
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Per-node forward quantities shared by forward_soft and backward.
struct NodeState {
    std::vector<double> p_left;              // per decision node
    std::vector<std::vector<double>> wnorm;  // softmax(beta) per node
    std::vector<double> mix;                 // softmax(beta) . x per node
};

NodeState evaluate_nodes(const TreeParams& tree, std::span<const double> x) {
    NodeState s;
    const std::size_t n = tree.n_decision();
    s.p_left.resize(n);
    s.wnorm.resize(n);
    s.mix.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.wnorm[i] = normalized_weights(tree.beta_row(i));
        s.mix[i] = dot(s.wnorm[i], x);
        s.p_left[i] = sigmoid(s.mix[i] - tree.phi[i]);
    }
    return s;
}

// Reach probability for every node of the full tree (decision nodes first,
// then leaves), 0-based level order.
std::vector<double> reach_probabilities(const std::vector<double>& p_left) {
    const std::size_t n_dec = p_left.size();
    std::vector<double> reach(2 * n_dec + 1, 0.0);
    reach[0] = 1.0;
    for (std::size_t i = 0; i < n_dec; ++i) {
        reach[2 * i + 1] = reach[i] * p_left[i];
        reach[2 * i + 2] = reach[i] * (1.0 - p_left[i]);
    }
    return reach;
}

}  // namespace

TreeParams zeros_like(const TreeParams& like) {
    TreeParams z;
    z.depth = like.depth;
    z.n_features = like.n_features;
    z.n_actions = like.n_actions;
    z.beta.assign(like.beta.size(), 0.0);
    z.phi.assign(like.phi.size(), 0.0);
    z.w.assign(like.w.size(), 0.0);
    return z;
}

void validate(const TreeParams& tree) {
    if (tree.depth < 1 || tree.n_features < 1 || tree.n_actions < 2) {
        throw ValidationError("tree needs depth >= 1, n_features >= 1, n_actions >= 2");
    }
    if (tree.depth > 20) throw ValidationError("tree depth above 20 is not supported");
    const std::size_t n_dec = (std::size_t{1} << tree.depth) - 1;
    if (tree.phi.size() != n_dec || tree.beta.size() != n_dec * tree.n_features ||
        tree.w.size() != (n_dec + 1) * tree.n_actions) {
        throw ValidationError("tree parameter arrays do not match depth " +
                              std::to_string(tree.depth));
    }
    for (auto buf : tree.buffers()) {
        for (double v : buf) {
            if (!std::isfinite(v)) throw ValidationError("tree parameter is not finite");
        }
    }
}

TreeParams init_tree(int depth, int n_features, int n_actions, std::uint64_t seed) {
    if (depth < 1) throw ValidationError("depth must be >= 1");
    if (depth > 20) throw ValidationError("depth above 20 is not supported");
    if (n_features < 1) throw ValidationError("n_features must be >= 1");
    if (n_actions < 2) throw ValidationError("n_actions must be >= 2");

    TreeParams t;
    t.depth = depth;
    t.n_features = n_features;
    t.n_actions = n_actions;
    const std::size_t n_dec = (std::size_t{1} << depth) - 1;
    t.beta.resize(n_dec * n_features);
    t.phi.resize(n_dec);
    t.w.resize((n_dec + 1) * n_actions);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (auto buf : t.buffers()) {
        for (double& v : buf) v = u(rng);
    }
    return t;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> normalized_weights(std::span<const double> beta) {
    std::vector<double> out(beta.size());
    const double m = *std::max_element(beta.begin(), beta.end());
    double total = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k) {
        out[k] = std::exp(beta[k] - m);
        total += out[k];
    }
    for (double& v : out) v /= total;
    return out;
}

double decision_prob(std::span<const double> beta, double phi, std::span<const double> x) {
    if (beta.size() != x.size()) {
        throw ValidationError("feature weights have length " + std::to_string(beta.size()) +
                              " but observation has " + std::to_string(x.size()));
    }
    if (beta.empty()) throw ValidationError("decision node has no feature weights");
    return sigmoid(dot(normalized_weights(beta), x) - phi);
}

ActionDistribution leaf_distribution(std::span<const double> w) {
    if (w.empty()) throw ValidationError("leaf has no action weights");
    for (double v : w) {
        if (!std::isfinite(v)) throw ValidationError("leaf weight is not finite");
    }
    // softmax(-w): the largest logit is -min(w).
    const double top = -*std::min_element(w.begin(), w.end());
    ActionDistribution p(w.size());
    double total = 0.0;
    for (std::size_t m = 0; m < w.size(); ++m) {
        p[m] = std::exp(-w[m] - top);
        total += p[m];
    }
    for (double& v : p) v /= total;
    return p;
}

std::vector<double> decision_probs(const TreeParams& tree, std::span<const double> x) {
    check_input(tree, x);
    return evaluate_nodes(tree, x).p_left;
}

std::vector<double> path_probabilities(const TreeParams& tree, std::span<const double> x) {
    const auto reach = reach_probabilities(decision_probs(tree, x));
    const std::size_t n_dec = tree.n_decision();
    return {reach.begin() + static_cast<std::ptrdiff_t>(n_dec), reach.end()};
}

ActionDistribution forward_soft(const TreeParams& tree, std::span<const double> x) {
    const auto paths = path_probabilities(tree, x);
    ActionDistribution out(tree.n_actions, 0.0);
    for (std::size_t j = 0; j < paths.size(); ++j) {
        const auto q = leaf_distribution(tree.leaf_w(j));
        for (int a = 0; a < tree.n_actions; ++a) out[a] += paths[j] * q[a];
    }
    return out;
}

ActionDistribution forward_depth2(const TreeParams& tree, std::span<const double> x) {
    if (tree.depth != 2) {
        throw ValidationError("forward_depth2 requires a depth-2 tree, got depth " +
                              std::to_string(tree.depth));
    }
    check_input(tree, x);
    double p[3];
    for (std::size_t i = 0; i < 3; ++i) p[i] = decision_prob(tree.beta_row(i), tree.phi[i], x);

    // [p1 0; 0 1-p1] * [p2 1-p2; p3 1-p3]
    const double lhs[2][2] = {{p[0], 0.0}, {0.0, 1.0 - p[0]}};
    const double rhs[2][2] = {{p[1], 1.0 - p[1]}, {p[2], 1.0 - p[2]}};
    double path[2][2] = {};
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            for (int k = 0; k < 2; ++k) path[r][c] += lhs[r][k] * rhs[k][c];

    ActionDistribution out(tree.n_actions, 0.0);
    const double weight[4] = {path[0][0], path[0][1], path[1][0], path[1][1]};
    for (std::size_t leaf = 0; leaf < 4; ++leaf) {
        const auto q = leaf_distribution(tree.leaf_w(leaf));
        for (int a = 0; a < tree.n_actions; ++a) out[a] += weight[leaf] * q[a];
    }
    return out;
}

void accumulate_backward(const TreeParams& tree, std::span<const double> x,
                         std::span<const double> upstream, double scale,
                         TreeGradients& grads) {
    check_input(tree, x);
    if (upstream.size() != static_cast<std::size_t>(tree.n_actions)) {
        throw ValidationError("upstream gradient has length " + std::to_string(upstream.size()) +
                              ", tree has " + std::to_string(tree.n_actions) + " actions");
    }
    if (grads.beta.size() != tree.beta.size() || grads.phi.size() != tree.phi.size() ||
        grads.w.size() != tree.w.size()) {
        throw ValidationError("gradient buffer does not match tree shape");
    }

    const std::size_t n_dec = tree.n_decision();
    const std::size_t n_leaf = tree.n_leaves();
    const auto nodes = evaluate_nodes(tree, x);
    const auto reach = reach_probabilities(nodes.p_left);

    // value[k]: upstream . (conditional output of the subtree rooted at k)
    std::vector<double> value(2 * n_dec + 1);
    for (std::size_t j = 0; j < n_leaf; ++j) {
        const auto q = leaf_distribution(tree.leaf_w(j));
        const double s = dot(upstream, q);
        value[n_dec + j] = s;
        const double r = reach[n_dec + j] * scale;
        auto gw = grads.leaf_w(j);
        for (int m = 0; m < tree.n_actions; ++m) gw[m] += -r * q[m] * (upstream[m] - s);
    }
    for (std::size_t i = n_dec; i-- > 0;) {
        const double p = nodes.p_left[i];
        const double vl = value[2 * i + 1];
        const double vr = value[2 * i + 2];
        value[i] = p * vl + (1.0 - p) * vr;

        const double dz = scale * reach[i] * (vl - vr) * p * (1.0 - p);
        grads.phi[i] -= dz;
        auto gb = grads.beta_row(i);
        const auto& wn = nodes.wnorm[i];
        for (int k = 0; k < tree.n_features; ++k) gb[k] += dz * wn[k] * (x[k] - nodes.mix[i]);
    }
}

TreeGradients backward(const TreeParams& tree, std::span<const double> x,
                       std::span<const double> upstream) {
    TreeGradients g = zeros_like(tree);
    accumulate_backward(tree, x, upstream, 1.0, g);
    return g;
}

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

CrispTree crispify(const TreeParams& tree) {
    CrispTree c;
    c.depth = tree.depth;
    c.n_features = tree.n_features;
    c.n_actions = tree.n_actions;
    c.decision_nodes.reserve(tree.n_decision());
    for (std::size_t i = 0; i < tree.n_decision(); ++i) {
        const auto wn = normalized_weights(tree.beta_row(i));
        c.decision_nodes.push_back({argmax(wn), tree.phi[i]});
    }
    c.leaves.reserve(tree.n_leaves());
    for (std::size_t j = 0; j < tree.n_leaves(); ++j) {
        const auto q = leaf_distribution(tree.leaf_w(j));
        const auto a = argmax(q);
        c.leaves.push_back({a, q[a]});
    }
    return c;
}

std::size_t reach_leaf(const CrispTree& crisp, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(crisp.n_features)) {
        throw ValidationError("observation has " + std::to_string(x.size()) +
                              " features, tree expects " + std::to_string(crisp.n_features));
    }
    const std::size_t n_dec = crisp.decision_nodes.size();
    std::size_t node = 0;
    while (node < n_dec) {
        const auto& d = crisp.decision_nodes[node];
        node = x[d.feature_index] >= d.threshold ? 2 * node + 1 : 2 * node + 2;
    }
    return node - n_dec;
}

ActionIndex infer_crisp(const CrispTree& crisp, std::span<const double> x) {
    return crisp.leaves[reach_leaf(crisp, x)].action_index;
}

}  // namespace softtree
