#include "softtree_cli/run_config.hpp"

#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

namespace softtree::cli {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items) {
    std::ostringstream s;
    for (std::size_t i = 0; i < items.size(); ++i) s << (i ? "; " : "") << items[i];
    return s.str();
}

// Reads one JSON object, recording type problems and unknown keys instead of
// throwing.
class Section {
public:
    Section(const json& doc, std::string path, std::vector<std::string>& problems)
        : path_(std::move(path)), problems_(problems) {
        if (doc.is_object()) {
            doc_ = &doc;
        } else {
            problems_.push_back(label() + " must be an object");
        }
    }

    ~Section() {
        if (!doc_) return;
        for (const auto& [key, value] : doc_->items()) {
            if (!seen_.count(key)) problems_.push_back("unknown key '" + qualified(key) + "'");
        }
    }

    Section(const Section&) = delete;
    Section& operator=(const Section&) = delete;

    // Returns the child value if present and marks the key as known.
    const json* find(const std::string& key) {
        seen_.insert(key);
        if (!doc_ || !doc_->contains(key)) return nullptr;
        return &doc_->at(key);
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (v->is_number()) out = v->get<double>();
            else problem(key, "must be a number");
        }
    }

    template <typename Int>
    void integer(const std::string& key, Int& out) {
        if (const json* v = find(key)) {
            if (!read_integer(*v, out)) problem(key, "must be an integer in range");
        }
    }

    template <typename Int>
    void optional_integer(const std::string& key, std::optional<Int>& out) {
        if (const json* v = find(key)) {
            if (v->is_null()) {
                out.reset();
                return;
            }
            Int x{};
            if (read_integer(*v, x)) out = x;
            else problem(key, "must be an integer in range or null");
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (v->is_boolean()) out = v->get<bool>();
            else problem(key, "must be true or false");
        }
    }

    void numbers(const std::string& key, std::vector<double>& out) {
        if (const json* v = find(key)) {
            std::vector<double> tmp;
            bool ok = v->is_array();
            if (ok) {
                for (const auto& e : *v) {
                    if (!e.is_number()) ok = false;
                    else tmp.push_back(e.get<double>());
                }
            }
            if (ok) out = std::move(tmp);
            else problem(key, "must be an array of numbers");
        }
    }

    template <typename Int>
    void integers(const std::string& key, std::vector<Int>& out) {
        if (const json* v = find(key)) {
            std::vector<Int> tmp;
            bool ok = v->is_array();
            if (ok) {
                for (const auto& e : *v) {
                    Int x{};
                    if (!read_integer(e, x)) ok = false;
                    else tmp.push_back(x);
                }
            }
            if (ok) out = std::move(tmp);
            else problem(key, "must be an array of integers in range");
        }
    }

    template <typename Enum>
    void choice(const std::string& key, Enum& out, const std::map<std::string, Enum>& options) {
        if (const json* v = find(key)) {
            if (v->is_string()) {
                const auto it = options.find(v->get<std::string>());
                if (it != options.end()) {
                    out = it->second;
                    return;
                }
            }
            std::string names;
            for (const auto& [name, value] : options) names += (names.empty() ? "" : "|") + name;
            problem(key, "must be one of " + names);
        }
    }

    void problem(const std::string& key, const std::string& what) {
        problems_.push_back(qualified(key) + " " + what);
    }

    std::string qualified(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    std::string label() const { return path_.empty() ? "configuration" : path_; }

    template <typename Int>
    static bool read_integer(const json& v, Int& out) {
        if (v.is_number_unsigned()) {
            const auto x = v.get<std::uint64_t>();
            if (x > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) return false;
            out = static_cast<Int>(x);
            return true;
        }
        if (v.is_number_integer()) {
            const auto x = v.get<std::int64_t>();
            if constexpr (std::is_unsigned_v<Int>) {
                if (x < 0) return false;
            } else {
                if (x < std::numeric_limits<Int>::min() || x > std::numeric_limits<Int>::max())
                    return false;
            }
            out = static_cast<Int>(x);
            return true;
        }
        return false;
    }

    const json* doc_ = nullptr;
    std::string path_;
    std::vector<std::string>& problems_;
    std::set<std::string> seen_;
};

const std::map<std::string, ActorKind> kActorKinds{{"ddt", ActorKind::ddt}, {"mlp", ActorKind::mlp}};
const std::map<std::string, ExplorationMode> kExplorationModes{
    {"soft", ExplorationMode::soft}, {"epsilon_greedy", ExplorationMode::epsilon_greedy}};

void read_synthesis(Section& s, SynthesisSource& out) {
    s.integer("days", out.days);
    s.integer("seed", out.seed);
    auto& p = out.params;
    s.number("price_base", p.price_base);
    s.number("price_morning_peak", p.price_morning_peak);
    s.number("price_evening_peak", p.price_evening_peak);
    s.number("price_solar_dip", p.price_solar_dip);
    s.number("price_noise", p.price_noise);
    s.number("price_day_spread", p.price_day_spread);
    s.number("price_mean_min", p.price_mean_min);
    s.number("price_mean_max", p.price_mean_max);
    s.number("load_base", p.load_base);
    s.number("load_morning_peak", p.load_morning_peak);
    s.number("load_evening_peak", p.load_evening_peak);
    s.number("load_noise", p.load_noise);
    s.number("load_day_spread", p.load_day_spread);
    s.number("pv_peak", p.pv_peak);
    s.number("sunrise_hour", p.sunrise_hour);
    s.number("sunset_hour", p.sunset_hour);
    s.number("cloudiness_min", p.cloudiness_min);
}

void read_agent(Section& s, AgentConfig& a) {
    s.choice("actor", a.actor, kActorKinds);
    s.integer("depth", a.depth);
    s.integers("actor_hidden", a.actor_hidden);
    s.integers("critic_hidden", a.critic_hidden);
    s.number("gamma", a.gamma);
    s.number("tau", a.tau);
    s.number("actor_lr", a.actor_lr);
    s.number("critic_lr", a.critic_lr);
    s.integer("batch_size", a.batch_size);
    s.integer("buffer_capacity", a.buffer_capacity);
    s.integer("episodes", a.episodes);
    s.integer("warmup", a.warmup);
    s.integer("updates_per_step", a.updates_per_step);
    s.choice("exploration", a.exploration, kExplorationModes);
    s.number("epsilon", a.epsilon);
    s.number("input_range", a.input_range);
    s.number("train_e0_fraction", a.train_e0_fraction);
    s.integer("eval_interval", a.eval_interval);
}

template <typename F>
void check(std::vector<std::string>& problems, F&& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        problems.push_back(e.what());
    }
}

template <typename Map, typename Value>
std::string name_of(const Map& options, Value v) {
    for (const auto& [name, value] : options) {
        if (value == v) return name;
    }
    return "?";
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : ValidationError("invalid configuration: " + join(problems)), problems_(std::move(problems)) {}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    std::vector<std::string> problems;
    {
        Section root(doc, "", problems);
        if (const json* v = root.find("battery")) {
            Section s(*v, "battery", problems);
            s.number("e_max", cfg.env.battery.e_max);
            s.number("p_max", cfg.env.battery.p_max);
            s.number("eta_rt", cfg.env.battery.eta_rt);
            s.numbers("action_grid", cfg.env.battery.action_grid);
        }
        if (const json* v = root.find("tariff")) {
            Section s(*v, "tariff", problems);
            s.number("lambda_cap", cfg.env.tariff.lambda_cap);
            s.number("p_agg_min", cfg.env.tariff.p_agg_min);
            s.number("injection_ratio", cfg.env.tariff.injection_ratio);
        }
        root.number("dt", cfg.env.dt);
        const json* synthesis = root.find("synthesis");
        if (synthesis) {
            Section s(*synthesis, "synthesis", problems);
            read_synthesis(s, cfg.synthesis);
        }
        if (const json* v = root.find("csv_path")) {
            if (!v->is_string() || v->get<std::string>().empty()) {
                root.problem("csv_path", "must be a nonempty string");
            } else {
                std::filesystem::path p = v->get<std::string>();
                if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
                cfg.csv_path = p;
                if (!std::filesystem::is_regular_file(p))
                    root.problem("csv_path", "does not name a readable file: " + p.string());
            }
            if (synthesis) problems.push_back("synthesis and csv_path are mutually exclusive");
        }
        if (const json* v = root.find("split")) {
            Section s(*v, "split", problems);
            s.number("train_fraction", cfg.split.train_fraction);
            s.optional_integer("shuffle_seed", cfg.split.shuffle_seed);
        }
        if (const json* v = root.find("agent")) {
            Section s(*v, "agent", problems);
            read_agent(s, cfg.agent);
        }
        root.integers("seeds", cfg.agent.seeds);
        root.number("e0", cfg.e0);
        if (const json* v = root.find("oracle")) {
            Section s(*v, "oracle", problems);
            s.number("e_grid", cfg.oracle.e_grid);
        }
        if (const json* v = root.find("compare")) {
            Section s(*v, "compare", problems);
            s.integers("depths", cfg.compare.depths);
            s.boolean("mlp_actor", cfg.compare.mlp_actor);
            s.number("mlp_actor_lr", cfg.compare.mlp_actor_lr);
        }
        if (const json* v = root.find("output_dir")) {
            if (v->is_string() && !v->get<std::string>().empty()) cfg.output_dir = v->get<std::string>();
            else root.problem("output_dir", "must be a nonempty string");
        }
    }

    check(problems, [&] { validate(cfg.env); });
    check(problems, [&] { validate(cfg.synthesis.params); });
    check(problems, [&] { validate(cfg.agent); });
    if (cfg.synthesis.days == 0) problems.push_back("synthesis.days must be positive");
    if (!(cfg.split.train_fraction > 0.0 && cfg.split.train_fraction <= 1.0))
        problems.push_back("split.train_fraction must lie in (0, 1]");
    if (cfg.agent.seeds.empty()) problems.push_back("seeds must not be empty");
    if (cfg.env.battery.e_max >= 0.0 && !(cfg.e0 >= 0.0 && cfg.e0 <= cfg.env.battery.e_max))
        problems.push_back("e0 must lie in [0, battery.e_max]");
    if (!(cfg.oracle.e_grid > 0.0)) problems.push_back("oracle.e_grid must be > 0");
    if (!(cfg.compare.mlp_actor_lr > 0.0)) problems.push_back("compare.mlp_actor_lr must be > 0");
    for (int d : cfg.compare.depths) {
        if (d < 1 || d > 8) {
            problems.push_back("compare.depths entries must lie in [1, 8]");
            break;
        }
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open configuration " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("configuration " + path.string() + ": " + e.what());
    }
    return parse_run_config(doc, path.parent_path());
}

json run_config_to_json(const RunConfig& cfg) {
    const auto& b = cfg.env.battery;
    const auto& t = cfg.env.tariff;
    const auto& p = cfg.synthesis.params;
    const auto& a = cfg.agent;
    json out;
    out["battery"] = {{"e_max", b.e_max}, {"p_max", b.p_max}, {"eta_rt", b.eta_rt}, {"action_grid", b.action_grid}};
    out["tariff"] = {{"lambda_cap", t.lambda_cap},
                     {"p_agg_min", t.p_agg_min},
                     {"injection_ratio", t.injection_ratio}};
    out["dt"] = cfg.env.dt;
    if (cfg.csv_path) {
        out["csv_path"] = cfg.csv_path->generic_string();
    } else {
        out["synthesis"] = {{"days", cfg.synthesis.days},
                            {"seed", cfg.synthesis.seed},
                            {"price_base", p.price_base},
                            {"price_morning_peak", p.price_morning_peak},
                            {"price_evening_peak", p.price_evening_peak},
                            {"price_solar_dip", p.price_solar_dip},
                            {"price_noise", p.price_noise},
                            {"price_day_spread", p.price_day_spread},
                            {"price_mean_min", p.price_mean_min},
                            {"price_mean_max", p.price_mean_max},
                            {"load_base", p.load_base},
                            {"load_morning_peak", p.load_morning_peak},
                            {"load_evening_peak", p.load_evening_peak},
                            {"load_noise", p.load_noise},
                            {"load_day_spread", p.load_day_spread},
                            {"pv_peak", p.pv_peak},
                            {"sunrise_hour", p.sunrise_hour},
                            {"sunset_hour", p.sunset_hour},
                            {"cloudiness_min", p.cloudiness_min}};
    }
    out["split"] = {{"train_fraction", cfg.split.train_fraction},
                    {"shuffle_seed", cfg.split.shuffle_seed ? json(*cfg.split.shuffle_seed) : json(nullptr)}};
    out["agent"] = {{"actor", name_of(kActorKinds, a.actor)},
                    {"depth", a.depth},
                    {"actor_hidden", a.actor_hidden},
                    {"critic_hidden", a.critic_hidden},
                    {"gamma", a.gamma},
                    {"tau", a.tau},
                    {"actor_lr", a.actor_lr},
                    {"critic_lr", a.critic_lr},
                    {"batch_size", a.batch_size},
                    {"buffer_capacity", a.buffer_capacity},
                    {"episodes", a.episodes},
                    {"warmup", a.warmup},
                    {"updates_per_step", a.updates_per_step},
                    {"exploration", name_of(kExplorationModes, a.exploration)},
                    {"epsilon", a.epsilon},
                    {"input_range", a.input_range},
                    {"train_e0_fraction", a.train_e0_fraction},
                    {"eval_interval", a.eval_interval}};
    out["seeds"] = a.seeds;
    out["e0"] = cfg.e0;
    out["oracle"] = {{"e_grid", cfg.oracle.e_grid}};
    out["compare"] = {{"depths", cfg.compare.depths},
                      {"mlp_actor", cfg.compare.mlp_actor},
                      {"mlp_actor_lr", cfg.compare.mlp_actor_lr}};
    out["output_dir"] = cfg.output_dir.generic_string();
    return out;
}

}  // namespace softtree::cli
