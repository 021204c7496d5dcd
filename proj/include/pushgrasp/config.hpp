#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pushgrasp/agent.hpp"

namespace pg {

struct ConfigEntry {
    std::string key;
    std::string default_value;
    std::string doc;
};

/// Flat key=value run configuration. Precedence: explicit sets (CLI over
/// file) > variant presets > defaults. Unknown keys are rejected.
class RunConfig {
public:
    RunConfig();

    static const std::vector<ConfigEntry>& schema();

    /// Throws std::invalid_argument for unknown keys or unparsable values.
    void set(const std::string& key, const std::string& value);
    /// key=value lines; '#' comments. Throws with a line number on bad input.
    void load_file(const std::string& path);
    void load_text(const std::string& text);

    std::string get(const std::string& key) const;
    double get_double(const std::string& key) const;
    long get_long(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    /// Effective values, one "key=value" per line, sorted by key.
    std::string echo() const;

    EnvConfig env_config() const;
    AgentConfig agent_config() const;
    /// "vpg", "grasping-only", or "pg-reactive", derived from the variant.
    std::string learner_kind() const;

private:
    std::map<std::string, std::string> effective() const;

    std::map<std::string, std::string> values_;   // defaults
    std::map<std::string, std::string> explicit_;  // file + CLI overrides
};

}  // namespace pg
