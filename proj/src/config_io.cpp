#include "rampsim/config_io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace rampsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc{} || result.ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("invalid number for '" + std::string(key) + "': '" + std::string(text) + "'");
  }
  return value;
}

template <typename Int>
Int parse_integer(std::string_view key, std::string_view text) {
  text = trim(text);
  Int value{};
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc{} || result.ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("invalid integer for '" + std::string(key) + "': '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "on" || text == "1") return true;
  if (text == "false" || text == "off" || text == "0") return false;
  throw ConfigError("invalid boolean for '" + std::string(key) + "': '" + std::string(text) + "'");
}

std::pair<double, double> parse_pair(std::string_view key, std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) {
    throw ConfigError("expected two comma-separated numbers for '" + std::string(key) + "'");
  }
  return {parse_double(key, text.substr(0, comma)), parse_double(key, text.substr(comma + 1))};
}

struct Field {
  std::string key;
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, std::string_view)> set;
};

template <typename Access>
Field real(std::string key, Access access) {
  return {key,
          [access](const ScenarioConfig& c) { return format_double(access(const_cast<ScenarioConfig&>(c))); },
          [access, key](ScenarioConfig& c, std::string_view v) { access(c) = parse_double(key, v); }};
}

template <typename Access>
Field integer(std::string key, Access access) {
  return {key,
          [access](const ScenarioConfig& c) { return std::to_string(access(const_cast<ScenarioConfig&>(c))); },
          [access, key](ScenarioConfig& c, std::string_view v) {
            using T = std::remove_reference_t<decltype(access(c))>;
            access(c) = parse_integer<T>(key, v);
          }};
}

template <typename Access>
Field point(std::string key, Access access) {
  return {key,
          [access](const ScenarioConfig& c) {
            const Vec2 p = access(const_cast<ScenarioConfig&>(c));
            return format_double(p.x) + "," + format_double(p.y);
          },
          [access, key](ScenarioConfig& c, std::string_view v) {
            const auto [x, y] = parse_pair(key, v);
            access(c) = Vec2{x, y};
          }};
}

template <typename Access>
Field interval(std::string key, Access access) {
  return {key,
          [access](const ScenarioConfig& c) {
            const Interval i = access(const_cast<ScenarioConfig&>(c));
            return format_double(i.start) + "," + format_double(i.end);
          },
          [access, key](ScenarioConfig& c, std::string_view v) {
            const auto [a, b] = parse_pair(key, v);
            access(c) = Interval{a, b};
          }};
}

#define RS_FIELD(kind, key, member) kind(key, [](ScenarioConfig& c) -> auto& { return c.member; })

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(RS_FIELD(integer, "network.mainline_lane_count", network.mainline_lane_count));
    f.push_back(RS_FIELD(integer, "network.ramp_lane_count", network.ramp_lane_count));
    f.push_back(RS_FIELD(real, "network.merge_point_s", network.merge_point_s));
    f.push_back(RS_FIELD(real, "network.mainline_length_m", network.mainline_length_m));
    f.push_back(RS_FIELD(real, "network.ramp_length_m", network.ramp_length_m));
    f.push_back(RS_FIELD(interval, "network.control_zone", network.control_zone));
    f.push_back(RS_FIELD(interval, "network.buffer_zone", network.buffer_zone));
    f.push_back(RS_FIELD(point, "network.rsu_position", network.rsu_position));
    f.push_back(RS_FIELD(point, "network.attacker_position", network.attacker_position));
    f.push_back(RS_FIELD(real, "network.rsu_range_m", network.rsu_range_m));
    f.push_back(RS_FIELD(real, "network.attacker_range_m", network.attacker_range_m));
    f.push_back(RS_FIELD(real, "network.speed_limit_mps", network.speed_limit_mps));
    f.push_back(RS_FIELD(real, "network.lane_width_m", network.lane_width_m));
    f.push_back(RS_FIELD(real, "network.ramp_angle_deg", network.ramp_angle_deg));
    f.push_back(RS_FIELD(real, "network.merge_window_m", network.merge_window_m));

    f.push_back(RS_FIELD(real, "penetration_rate", penetration_rate));
    f.push_back(RS_FIELD(real, "attack_ratio", attack_ratio));
    f.push_back(RS_FIELD(real, "v2c_ratio", v2c_ratio));
    f.push_back({"attack_strategy",
                 [](const ScenarioConfig& c) { return std::string(to_string(c.attack_strategy)); },
                 [](ScenarioConfig& c, std::string_view v) {
                   const auto parsed = parse_attack_strategy(trim(v));
                   if (!parsed) throw ConfigError("invalid attack_strategy: '" + std::string(v) + "'");
                   c.attack_strategy = *parsed;
                 }});
    f.push_back({"defense_enabled",
                 [](const ScenarioConfig& c) { return std::string(c.defense_enabled ? "true" : "false"); },
                 [](ScenarioConfig& c, std::string_view v) { c.defense_enabled = parse_bool("defense_enabled", v); }});
    f.push_back(RS_FIELD(real, "capacity_pcu_hr_ln", capacity_pcu_hr_ln));
    f.push_back(RS_FIELD(real, "demand_ratio_hwy_to_ramp", demand_ratio_hwy_to_ramp));
    f.push_back(RS_FIELD(real, "sim_duration_s", sim_duration_s));
    f.push_back(RS_FIELD(real, "time_step_s", time_step_s));
    f.push_back(RS_FIELD(integer, "seed", seed));
    f.push_back(RS_FIELD(real, "vehicle_length_m", vehicle_length_m));
    f.push_back({"accel_bounds",
                 [](const ScenarioConfig& c) {
                   return format_double(c.accel_min_mps2) + "," + format_double(c.accel_max_mps2);
                 },
                 [](ScenarioConfig& c, std::string_view v) {
                   const auto [lo, hi] = parse_pair("accel_bounds", v);
                   c.accel_min_mps2 = lo;
                   c.accel_max_mps2 = hi;
                 }});

    f.push_back(RS_FIELD(real, "krauss.tau_s", krauss.tau_s));
    f.push_back(RS_FIELD(real, "krauss.tau_b_s", krauss.tau_b_s));
    f.push_back(RS_FIELD(real, "krauss.decel_mps2", krauss.decel_mps2));
    f.push_back(RS_FIELD(real, "krauss.min_gap_m", krauss.min_gap_m));
    f.push_back(RS_FIELD(real, "krauss.eta_max_mps", krauss.eta_max_mps));
    f.push_back(RS_FIELD(real, "krauss.cav_eta_max_mps", krauss.cav_eta_max_mps));
    f.push_back(RS_FIELD(real, "krauss.comfortable_decel_mps2", krauss.comfortable_decel_mps2));

    f.push_back(RS_FIELD(real, "lane_change.hysteresis_mps", lane_change.hysteresis_mps));
    f.push_back(RS_FIELD(real, "lane_change.cooldown_s", lane_change.cooldown_s));

    f.push_back(RS_FIELD(real, "channel.tx_power_dbm", channel.tx_power_dbm));
    f.push_back(RS_FIELD(real, "channel.thermal_noise_dbm", channel.thermal_noise_dbm));
    f.push_back(RS_FIELD(real, "channel.path_loss_exponent", channel.path_loss_exponent));
    f.push_back(RS_FIELD(real, "channel.ref_loss_db", channel.ref_loss_db));
    f.push_back(RS_FIELD(real, "channel.shadowing_sigma_db", channel.shadowing_sigma_db));
    f.push_back(RS_FIELD(real, "channel.rssi_smoothing_alpha", channel.rssi_smoothing_alpha));
    f.push_back(RS_FIELD(real, "channel.data_rate_mbps", channel.data_rate_mbps));

    f.push_back(RS_FIELD(real, "position_noise.step_sigma_m", position_noise.step_sigma_m));
    f.push_back(RS_FIELD(real, "position_noise.cap_m", position_noise.cap_m));

    f.push_back(RS_FIELD(real, "controller.k_d", controller.k_d));
    f.push_back(RS_FIELD(real, "controller.k_v", controller.k_v));
    f.push_back(RS_FIELD(real, "controller.safe_gap_m", controller.safe_gap_m));
    f.push_back(RS_FIELD(real, "controller.time_gap_s", controller.time_gap_s));
    f.push_back(RS_FIELD(real, "controller.string_split_gap_m", controller.string_split_gap_m));
    f.push_back(RS_FIELD(real, "controller.advisory_hold_s", controller.advisory_hold_s));
    f.push_back({"controller.echo_check",
                 [](const ScenarioConfig& c) { return std::string(c.controller.echo_check ? "true" : "false"); },
                 [](ScenarioConfig& c, std::string_view v) {
                   c.controller.echo_check = parse_bool("controller.echo_check", v);
                 }});
    f.push_back(RS_FIELD(real, "controller.echo_position_tolerance_m", controller.echo_position_tolerance_m));
    f.push_back(RS_FIELD(real, "controller.echo_speed_tolerance_mps", controller.echo_speed_tolerance_mps));

    f.push_back(RS_FIELD(real, "attack.drift_accel_mps2", attack.drift_accel_mps2));

    f.push_back({"defense.threshold_tau_sq",
                 [](const ScenarioConfig& c) {
                   return c.defense.threshold_tau_sq ? format_double(*c.defense.threshold_tau_sq)
                                                     : std::string("calibrate");
                 },
                 [](ScenarioConfig& c, std::string_view v) {
                   if (trim(v) == "calibrate") {
                     c.defense.threshold_tau_sq.reset();
                   } else {
                     c.defense.threshold_tau_sq = parse_double("defense.threshold_tau_sq", v);
                   }
                 }});
    f.push_back(RS_FIELD(real, "defense.safety_factor", defense.safety_factor));
    f.push_back(RS_FIELD(integer, "defense.calibration_runs", defense.calibration_runs));
    f.push_back(RS_FIELD(integer, "defense.min_string_size", defense.min_string_size));
    return f;
  }();
  return table;
}

#undef RS_FIELD

}  // namespace

void set_config_value(ScenarioConfig& config, std::string_view key, std::string_view value) {
  for (const auto& field : fields()) {
    if (field.key == key) {
      field.set(config, trim(value));
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

ScenarioConfig parse_config(std::istream& in, ScenarioConfig base) {
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(view.substr(0, eq)));
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    try {
      set_config_value(base, key, view.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

ScenarioConfig parse_config_text(std::string_view text, ScenarioConfig base) {
  std::istringstream in{std::string(text)};
  return parse_config(in, std::move(base));
}

ScenarioConfig load_config(const std::string& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

void write_config(std::ostream& out, const ScenarioConfig& config) {
  for (const auto& field : fields()) out << field.key << " = " << field.get(config) << '\n';
}

std::string config_to_string(const ScenarioConfig& config) {
  std::ostringstream out;
  write_config(out, config);
  return out.str();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& field : fields()) keys.push_back(field.key);
  return keys;
}

}  // namespace rampsim
