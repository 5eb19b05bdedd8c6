#include "softtree/tree_export.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "softtree/error.hpp"

namespace softtree {

namespace {

class Renderer {
public:
    Renderer(const CrispTree& crisp, const ExportOptions& opt) : crisp_(crisp), opt_(opt) {}

    std::string text() {
        out_ << "# crisp decision tree, depth " << crisp_.depth << '\n';
        out_ << "# thresholds in "
             << (opt_.threshold_to_raw ? "raw feature units" : "normalized feature units")
             << "; left branch taken when feature >= threshold\n";
        text_node(0, 0, false);
        return out_.str();
    }

    std::string dot() {
        const std::size_t n_dec = crisp_.decision_nodes.size();
        out_ << "digraph ddt {\n";
        out_ << "  node [fontname=\"Helvetica\"];\n";
        for (std::size_t i = 0; i < n_dec; ++i) {
            out_ << "  n" << i + 1 << " [shape=box, style=rounded, label=\""
                 << escape(condition(i)) << "\"];\n";
        }
        for (std::size_t j = 0; j < crisp_.leaves.size(); ++j) {
            out_ << "  n" << n_dec + j + 1 << " [shape=box, label=\"" << escape(leaf_label(j))
                 << "\"];\n";
        }
        for (std::size_t i = 0; i < n_dec; ++i) {
            out_ << "  n" << i + 1 << " -> n" << 2 * i + 2 << " [label=\"yes\"];\n";
            out_ << "  n" << i + 1 << " -> n" << 2 * i + 3 << " [label=\"no\"];\n";
        }
        out_ << "}\n";
        return out_.str();
    }

private:
    void text_node(std::size_t node, int indent, bool as_else_if) {
        const std::size_t n_dec = crisp_.decision_nodes.size();
        const std::string pad(2 * static_cast<std::size_t>(indent), ' ');
        if (node >= n_dec) {
            out_ << pad << "action " << leaf_label(node - n_dec) << '\n';
            return;
        }
        out_ << (as_else_if ? "" : pad) << "if " << condition(node) << ":\n";
        text_node(2 * node + 1, indent + 1, false);
        const std::size_t right = 2 * node + 2;
        if (right < n_dec) {
            out_ << pad << "else ";
            text_node(right, indent, true);
        } else {
            out_ << pad << "else:\n";
            text_node(right, indent + 1, false);
        }
    }

    std::string condition(std::size_t node) const {
        const auto& d = crisp_.decision_nodes[node];
        const double t =
            opt_.threshold_to_raw ? opt_.threshold_to_raw(d.feature_index, d.threshold) : d.threshold;
        std::ostringstream s;
        s << opt_.feature_names[d.feature_index] << " ≥ " << std::fixed
          << std::setprecision(opt_.precision) << t;
        return s.str();
    }

    std::string leaf_label(std::size_t leaf) const {
        const auto& l = crisp_.leaves[leaf];
        std::ostringstream s;
        s << opt_.action_labels[l.action_index] << " (p=" << std::fixed << std::setprecision(2)
          << l.probability << ")";
        return s.str();
    }

    static std::string escape(const std::string& in) {
        std::string out;
        for (char c : in) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        return out;
    }

    const CrispTree& crisp_;
    const ExportOptions& opt_;
    std::ostringstream out_;
};

struct Interval {
    double lo;
    bool lo_open;
    double hi;
    bool hi_open;

    bool empty() const { return lo > hi || (lo == hi && (lo_open || hi_open)); }
};

void propagate(const CrispTree& crisp, std::size_t node, std::vector<Interval> box,
               std::vector<std::size_t>& unreachable) {
    const std::size_t n_dec = crisp.decision_nodes.size();
    for (const auto& iv : box) {
        if (iv.empty()) {
            // Every leaf under this node is dead.
            std::size_t first = node, last = node;
            while (first < n_dec) {
                first = 2 * first + 1;
                last = 2 * last + 2;
            }
            for (std::size_t k = first; k <= last; ++k) unreachable.push_back(k - n_dec);
            return;
        }
    }
    if (node >= n_dec) return;

    const auto& d = crisp.decision_nodes[node];
    auto left = box;
    {
        // x >= t
        auto& iv = left[d.feature_index];
        if (d.threshold > iv.lo) {
            iv.lo = d.threshold;
            iv.lo_open = false;
        }
    }
    auto& right = box;
    {
        // x < t
        auto& iv = right[d.feature_index];
        if (d.threshold < iv.hi) {
            iv.hi = d.threshold;
            iv.hi_open = true;
        } else if (d.threshold == iv.hi) {
            iv.hi_open = true;
        }
    }
    propagate(crisp, 2 * node + 1, std::move(left), unreachable);
    propagate(crisp, 2 * node + 2, std::move(right), unreachable);
}

}  // namespace

ExportFormat parse_export_format(std::string_view token) {
    if (token == "text") return ExportFormat::text;
    if (token == "dot") return ExportFormat::dot;
    throw ValidationError("unknown export format '" + std::string(token) +
                          "' (expected text or dot)");
}

std::string export_tree(const CrispTree& crisp, const ExportOptions& options,
                        ExportFormat format) {
    if (options.feature_names.size() != static_cast<std::size_t>(crisp.n_features)) {
        throw ValidationError("export needs " + std::to_string(crisp.n_features) +
                              " feature names");
    }
    if (options.action_labels.size() != static_cast<std::size_t>(crisp.n_actions)) {
        throw ValidationError("export needs " + std::to_string(crisp.n_actions) +
                              " action labels");
    }
    Renderer r(crisp, options);
    return format == ExportFormat::text ? r.text() : r.dot();
}

std::vector<std::size_t> analyze_reachability(const CrispTree& crisp,
                                              const std::vector<FeatureBounds>& bounds) {
    if (bounds.size() != static_cast<std::size_t>(crisp.n_features)) {
        throw ValidationError("reachability needs one bound per feature");
    }
    std::vector<Interval> box;
    box.reserve(bounds.size());
    for (const auto& b : bounds) {
        if (b.lo > b.hi) throw ValidationError("feature bound has lo > hi");
        box.push_back({b.lo, false, b.hi, false});
    }
    std::vector<std::size_t> unreachable;
    propagate(crisp, 0, std::move(box), unreachable);
    std::sort(unreachable.begin(), unreachable.end());
    return unreachable;
}

}  // namespace softtree
