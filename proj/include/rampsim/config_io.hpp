#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rampsim/scenario.hpp"

namespace rampsim {

/// Scenario files are `key = value` lines. Nested parameter groups use dotted
/// keys (`network.merge_point_s`, `krauss.tau_s`, ...). `#` starts a comment.
/// Points and intervals are written as two comma-separated numbers.
/// Unknown keys, duplicate keys and unparsable values raise ConfigError.
ScenarioConfig parse_config(std::istream& in, ScenarioConfig base = {});
ScenarioConfig parse_config_text(std::string_view text, ScenarioConfig base = {});
ScenarioConfig load_config(const std::string& path, ScenarioConfig base = {});

/// Applies a single `key = value` assignment.
void set_config_value(ScenarioConfig& config, std::string_view key, std::string_view value);

/// Writes every key with full round-trip precision.
void write_config(std::ostream& out, const ScenarioConfig& config);
std::string config_to_string(const ScenarioConfig& config);

std::vector<std::string> config_keys();

}  // namespace rampsim
