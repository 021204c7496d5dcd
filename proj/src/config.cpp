#include "pushgrasp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pg {

namespace {

const std::vector<ConfigEntry>& schema_table() {
    static const std::vector<ConfigEntry> entries = {
        {"variant", "vpg",
         "policy variant: vpg | vpg-noreward | vpg-myopic | vpg-nodepth | grasping-only | "
         "pg-reactive"},
        {"seed", "0", "master random seed"},
        {"steps", "2500", "training steps"},
        {"out_dir", "out", "output directory"},
        {"workspace_side", "0.448", "workspace square side in meters"},
        {"resolution", "64", "heightmap pixels per side"},
        {"rotations", "16", "number of rotated views (k)"},
        {"n_objects", "10", "objects dropped per training episode"},
        {"gamma", "0.5", "future reward discount"},
        {"epsilon_start", "0.5", "initial exploration rate"},
        {"epsilon_end", "0.1", "final exploration rate"},
        {"epsilon_anneal_steps", "2500", "steps to anneal epsilon over"},
        {"tau", "-1", "change-detection threshold; -1 selects the resolution default"},
        {"learning_rate", "1e-4", "SGD learning rate during training"},
        {"test_learning_rate", "1e-5", "SGD learning rate during test episodes"},
        {"momentum", "0.9", "SGD momentum"},
        {"weight_decay", "0.03125", "L2 weight decay"},
        {"replay_alpha", "1.0", "rank-based replay power-law exponent"},
        {"push_reward", "true", "reward 0.5 for pushes that change the scene"},
        {"include_depth", "true", "feed the height channel to the networks"},
        {"target_lag", "1", "gradient steps between target network refreshes"},
        {"no_change_limit", "10", "consecutive no-change actions ending a test episode"},
        {"max_test_actions", "200", "hard cap on test episode length"},
        {"push_length", "0.10", "push stroke length in meters"},
        {"pusher_radius", "0.01", "pusher tip radius in meters"},
        {"grasp_max_opening", "0.07", "jaw opening in meters"},
        {"grasp_min_closure", "0.002", "minimum graspable width in meters"},
        {"jaw_width", "0.02", "jaw footprint width in meters"},
        {"jaw_thickness", "0.01", "jaw footprint thickness in meters"},
        {"grasp_normal_tol", "0.5235987755982988",
         "max angle between a jaw contact normal and the closing axis (radians)"},
        {"checkpoint_every", "500", "steps between checkpoints (0 disables)"},
        {"workers", "1", "worker threads for rotation fan-out and benchmark runs"},
        {"bench_runs", "10", "benchmark episodes per scenario"},
    };
    return entries;
}

const std::map<std::string, std::map<std::string, std::string>>& variant_presets() {
    static const std::map<std::string, std::map<std::string, std::string>> presets = {
        {"vpg", {}},
        {"vpg-noreward", {{"push_reward", "false"}}},
        {"vpg-myopic", {{"gamma", "0.2"}}},
        {"vpg-nodepth", {{"include_depth", "false"}}},
        {"grasping-only", {}},
        {"pg-reactive", {{"epsilon_start", "0.75"}, {"epsilon_end", "0.25"}}},
    };
    return presets;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig() {
    for (const auto& entry : schema_table()) values_[entry.key] = entry.default_value;
}

const std::vector<ConfigEntry>& RunConfig::schema() { return schema_table(); }

void RunConfig::set(const std::string& key, const std::string& value) {
    if (values_.find(key) == values_.end())
        throw std::invalid_argument("unknown config key: " + key);
    if (key == "variant" && variant_presets().find(value) == variant_presets().end())
        throw std::invalid_argument("unknown variant: " + value);
    explicit_[key] = value;
}

void RunConfig::load_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key=value");
        try {
            set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": " +
                                        e.what());
        }
    }
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    load_text(buf.str());
}

std::map<std::string, std::string> RunConfig::effective() const {
    std::map<std::string, std::string> out = values_;
    auto variant_it = explicit_.find("variant");
    std::string variant = variant_it != explicit_.end() ? variant_it->second : out["variant"];
    for (const auto& [key, value] : variant_presets().at(variant)) out[key] = value;
    for (const auto& [key, value] : explicit_) out[key] = value;
    return out;
}

std::string RunConfig::get(const std::string& key) const {
    auto eff = effective();
    auto it = eff.find(key);
    if (it == eff.end()) throw std::invalid_argument("unknown config key: " + key);
    return it->second;
}

double RunConfig::get_double(const std::string& key) const {
    std::string v = get(key);
    size_t pos = 0;
    double parsed = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("bad numeric value for " + key + ": " + v);
    return parsed;
}

long RunConfig::get_long(const std::string& key) const {
    std::string v = get(key);
    size_t pos = 0;
    long parsed = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("bad integer value for " + key + ": " + v);
    return parsed;
}

bool RunConfig::get_bool(const std::string& key) const {
    std::string v = get(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("bad boolean value for " + key + ": " + v);
}

std::string RunConfig::echo() const {
    std::ostringstream os;
    for (const auto& [key, value] : effective()) os << key << "=" << value << "\n";
    return os.str();
}

EnvConfig RunConfig::env_config() const {
    EnvConfig env;
    env.n_objects = static_cast<int>(get_long("n_objects"));
    env.workspace_side = get_double("workspace_side");
    env.resolution = static_cast<int>(get_long("resolution"));
    env.push_proto.push_length = get_double("push_length");
    env.push_proto.pusher_radius = get_double("pusher_radius");
    env.grasp_proto.max_opening = get_double("grasp_max_opening");
    env.grasp_proto.min_closure = get_double("grasp_min_closure");
    env.grasp_proto.jaw_width = get_double("jaw_width");
    env.grasp_proto.jaw_thickness = get_double("jaw_thickness");
    env.grasp_proto.normal_tolerance = get_double("grasp_normal_tol");
    return env;
}

AgentConfig RunConfig::agent_config() const {
    AgentConfig cfg;
    cfg.gamma = get_double("gamma");
    cfg.epsilon_start = get_double("epsilon_start");
    cfg.epsilon_end = get_double("epsilon_end");
    cfg.epsilon_anneal_steps = get_long("epsilon_anneal_steps");
    cfg.rotations = static_cast<int>(get_long("rotations"));
    cfg.tau = get_double("tau");
    cfg.learning_rate = get_double("learning_rate");
    cfg.test_learning_rate = get_double("test_learning_rate");
    cfg.momentum = get_double("momentum");
    cfg.weight_decay = get_double("weight_decay");
    cfg.replay_alpha = get_double("replay_alpha");
    cfg.push_reward = get_bool("push_reward");
    cfg.include_depth = get_bool("include_depth");
    cfg.target_lag = static_cast<int>(get_long("target_lag"));
    cfg.no_change_limit = static_cast<int>(get_long("no_change_limit"));
    cfg.max_test_actions = static_cast<int>(get_long("max_test_actions"));
    cfg.workers = static_cast<int>(get_long("workers"));
    return cfg;
}

std::string RunConfig::learner_kind() const {
    std::string variant = get("variant");
    if (variant == "grasping-only" || variant == "pg-reactive") return variant;
    return "vpg";
}

}  // namespace pg
