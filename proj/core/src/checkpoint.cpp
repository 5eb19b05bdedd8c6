#include "softtree/checkpoint.hpp"

#include <fstream>

#include "softtree/error.hpp"

namespace softtree {

using nlohmann::json;

namespace {

void check_header(const json& j, const char* format) {
    if (!j.is_object() || !j.contains("format") || j.at("format") != format) {
        throw ParseError(std::string("not a ") + format + " checkpoint");
    }
    if (!j.contains("version") || j.at("version") != kCheckpointVersion) {
        throw ParseError(std::string(format) + " checkpoint has unsupported version");
    }
}

template <typename F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

void write_context(const TreeContext& context, json& out) {
    if (context.norm) out["normalization"] = norm_to_json(*context.norm);
    if (!context.observed_ranges.empty()) {
        json r = json::array();
        for (const auto& [lo, hi] : context.observed_ranges) r.push_back({lo, hi});
        out["observed_ranges"] = r;
    }
    if (!context.action_grid.empty()) out["action_grid"] = context.action_grid;
}

TreeContext read_context(const json& j) {
    return guarded("checkpoint context", [&] {
        TreeContext context;
        if (j.contains("normalization")) context.norm = norm_from_json(j.at("normalization"));
        if (j.contains("observed_ranges")) {
            for (const auto& r : j.at("observed_ranges"))
                context.observed_ranges.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());
        }
        if (j.contains("action_grid")) context.action_grid = j.at("action_grid").get<std::vector<double>>();
        return context;
    });
}

}  // namespace

json tree_to_json(const TreeParams& tree, const TreeContext& context) {
    validate(tree);
    json beta = json::array();
    for (std::size_t i = 0; i < tree.n_decision(); ++i) {
        const auto row = tree.beta_row(i);
        beta.push_back(std::vector<double>(row.begin(), row.end()));
    }
    json w = json::array();
    for (std::size_t j = 0; j < tree.n_leaves(); ++j) {
        const auto row = tree.leaf_w(j);
        w.push_back(std::vector<double>(row.begin(), row.end()));
    }
    json out = {{"format", "softtree.tree"}, {"version", kCheckpointVersion},
                {"depth", tree.depth},       {"n_features", tree.n_features},
                {"n_actions", tree.n_actions}, {"beta", beta},
                {"phi", tree.phi},           {"w", w}};
    write_context(context, out);
    return out;
}

TreeParams tree_from_json(const json& j, TreeContext* context) {
    check_header(j, "softtree.tree");
    return guarded("tree checkpoint", [&] {
        TreeParams t;
        t.depth = j.at("depth").get<int>();
        t.n_features = j.at("n_features").get<int>();
        t.n_actions = j.at("n_actions").get<int>();
        for (const auto& row : j.at("beta")) {
            const auto v = row.get<std::vector<double>>();
            if (v.size() != static_cast<std::size_t>(t.n_features))
                throw ParseError("tree checkpoint: beta row has the wrong length");
            t.beta.insert(t.beta.end(), v.begin(), v.end());
        }
        t.phi = j.at("phi").get<std::vector<double>>();
        for (const auto& row : j.at("w")) {
            const auto v = row.get<std::vector<double>>();
            if (v.size() != static_cast<std::size_t>(t.n_actions))
                throw ParseError("tree checkpoint: leaf row has the wrong length");
            t.w.insert(t.w.end(), v.begin(), v.end());
        }
        try {
            validate(t);
        } catch (const ValidationError& e) {
            throw ParseError(std::string("tree checkpoint: ") + e.what());
        }
        if (context) *context = read_context(j);
        return t;
    });
}

json mlp_to_json(const MlpParams& net) {
    validate(net);
    json layers = json::array();
    for (const auto& l : net.layers) {
        layers.push_back({{"in", l.in},
                          {"out", l.out},
                          {"activation", l.activation == Activation::relu ? "relu" : "identity"},
                          {"weights", l.weights},
                          {"biases", l.biases}});
    }
    return {{"format", "softtree.mlp"}, {"version", kCheckpointVersion}, {"layers", layers}};
}

MlpParams mlp_from_json(const json& j) {
    check_header(j, "softtree.mlp");
    return guarded("network checkpoint", [&] {
        MlpParams net;
        for (const auto& lj : j.at("layers")) {
            DenseLayer l;
            l.in = lj.at("in").get<std::size_t>();
            l.out = lj.at("out").get<std::size_t>();
            const auto act = lj.at("activation").get<std::string>();
            if (act == "relu") l.activation = Activation::relu;
            else if (act == "identity") l.activation = Activation::identity;
            else throw ParseError("network checkpoint: unknown activation '" + act + "'");
            l.weights = lj.at("weights").get<std::vector<double>>();
            l.biases = lj.at("biases").get<std::vector<double>>();
            net.layers.push_back(std::move(l));
        }
        try {
            validate(net);
        } catch (const ValidationError& e) {
            throw ParseError(std::string("network checkpoint: ") + e.what());
        }
        return net;
    });
}

json actor_to_json(const ActorParams& actor, const TreeContext& context) {
    if (const auto* t = std::get_if<TreeParams>(&actor)) return tree_to_json(*t, context);
    auto out = mlp_to_json(std::get<MlpParams>(actor));
    write_context(context, out);
    return out;
}

ActorParams actor_from_json(const json& j, TreeContext* context) {
    if (j.is_object() && j.value("format", "") == "softtree.mlp") {
        auto net = mlp_from_json(j);
        if (context) *context = read_context(j);
        return net;
    }
    return tree_from_json(j, context);
}

json norm_to_json(const NormStats& s) { return {{"shift", s.shift}, {"scale", s.scale}}; }

NormStats norm_from_json(const json& j) {
    return guarded("normalization", [&] {
        NormStats s;
        s.shift = j.at("shift").get<Observation>();
        s.scale = j.at("scale").get<Observation>();
        for (double v : s.scale) {
            if (!(v > 0.0)) throw ParseError("normalization scale must be > 0");
        }
        return s;
    });
}

json plan_to_json(const PlanResult& plan) {
    return {{"total_cost", plan.total_cost},
            {"actions", plan.actions},
            {"energy", plan.energy},
            {"value_estimate", plan.value_estimate},
            {"error_bound", plan.error_bound}};
}

json eval_to_json(const EvalReport& r) {
    json out = {{"mean_cost", r.mean_cost}, {"days", r.days}, {"day_costs", r.day_costs}};
    if (!r.trace.empty()) {
        json trace = json::array();
        for (const auto& s : r.trace) {
            trace.push_back({{"day", s.day},
                             {"t", s.t},
                             {"e", s.e},
                             {"u_applied", s.u_applied},
                             {"p_agg", s.p_agg},
                             {"cost", s.cost}});
        }
        out["trace"] = trace;
    }
    return out;
}

json curve_record_to_json(const CurveRecord& r) {
    return {{"episode", r.episode},
            {"train_cost", r.train_cost},
            {"eval_cost", r.eval_cost},
            {"eval_soft_cost", r.eval_soft_cost},
            {"select_cost", r.select_cost}};
}

void write_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("io", "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace softtree
