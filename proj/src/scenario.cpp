#include "rampsim/scenario.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace rampsim {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

bool is_fraction(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void validate(const ScenarioConfig& c) {
  const auto& n = c.network;
  require(n.mainline_lane_count == 2, "network.mainline_lane_count must be 2");
  require(n.ramp_lane_count == 1, "network.ramp_lane_count must be 1");
  require(n.mainline_length_m > n.merge_point_s && n.merge_point_s > 0.0,
          "network.merge_point_s must lie inside the mainline");
  require(n.ramp_length_m > 0.0 && n.ramp_length_m <= n.merge_point_s,
          "network.ramp_length_m must be positive and fit upstream of the merge point");
  require(n.control_zone.end == n.merge_point_s, "network.control_zone must end at the merge point");
  require(n.control_zone.start < n.control_zone.end, "network.control_zone is empty");
  require(n.buffer_zone.start < n.buffer_zone.end && n.buffer_zone.end <= n.control_zone.start,
          "network.buffer_zone must lie upstream of the control zone");
  require(n.speed_limit_mps > 0.0, "network.speed_limit_mps must be positive");
  require(n.merge_window_m > 0.0 && n.merge_window_m <= n.ramp_length_m,
          "network.merge_window_m must be within the ramp");
  require(n.rsu_range_m > 0.0 && n.attacker_range_m > 0.0, "ranges must be positive");
  const Vec2 merge_xy{n.merge_point_s, 0.0};
  require(distance(merge_xy, n.rsu_position) <= n.rsu_range_m, "merge point must be inside RSU range");

  require(is_fraction(c.penetration_rate), "penetration_rate must be in [0,1]");
  require(is_fraction(c.attack_ratio), "attack_ratio must be in [0,1]");
  require(is_fraction(c.v2c_ratio), "v2c_ratio must be in [0,1]");
  require(!(c.penetration_rate == 0.0 && c.attack_ratio > 0.0),
          "attack_ratio > 0 requires a nonzero penetration_rate");
  require(c.time_step_s > 0.0, "time_step_s must be positive");
  require(c.sim_duration_s >= 0.0, "sim_duration_s must be non-negative");
  require(c.accel_min_mps2 < 0.0 && c.accel_max_mps2 > 0.0, "accel bounds must satisfy a_min < 0 < a_max");
  require(c.vehicle_length_m > 0.0, "vehicle_length_m must be positive");
  require(c.capacity_pcu_hr_ln > 0.0 && c.demand_ratio_hwy_to_ramp > 0.0,
          "capacity and demand ratio must be positive");

  require(c.krauss.tau_s > 0.0, "krauss.tau_s must be positive");
  require(c.krauss.decel_mps2 > 0.0, "krauss.decel_mps2 must be positive");
  require(c.krauss.eta_max_mps >= 0.0 && c.krauss.cav_eta_max_mps >= 0.0,
          "krauss perturbation bounds must be non-negative");
  require(c.krauss.min_gap_m >= 0.0, "krauss.min_gap_m must be non-negative");
  require(c.krauss.comfortable_decel_mps2 > 0.0, "krauss.comfortable_decel_mps2 must be positive");

  require(c.channel.path_loss_exponent > 0.0, "channel.path_loss_exponent must be positive");
  require(c.channel.shadowing_sigma_db >= 0.0, "channel.shadowing_sigma_db must be non-negative");
  require(c.channel.rssi_smoothing_alpha > 0.0 && c.channel.rssi_smoothing_alpha <= 1.0,
          "channel.rssi_smoothing_alpha must be in (0,1]");
  require(c.position_noise.step_sigma_m >= 0.0 && c.position_noise.cap_m >= 0.0,
          "position noise parameters must be non-negative");
  require(c.controller.string_split_gap_m > 0.0, "controller.string_split_gap_m must be positive");
  require(c.controller.advisory_hold_s >= 0.0, "controller.advisory_hold_s must be non-negative");
  require(c.controller.echo_position_tolerance_m >= 0.0 && c.controller.echo_speed_tolerance_mps >= 0.0,
          "controller echo tolerances must be non-negative");
  require(c.attack.drift_accel_mps2 < 0.0, "attack.drift_accel_mps2 must be negative");
  if (c.defense.threshold_tau_sq) {
    require(*c.defense.threshold_tau_sq >= 0.0, "defense.threshold_tau_sq must be non-negative");
  }
  require(c.defense.safety_factor > 0.0, "defense.safety_factor must be positive");
  require(c.defense.min_string_size >= 2, "defense.min_string_size must be at least 2");
  require(c.defense.calibration_runs >= 1, "defense.calibration_runs must be at least 1");

  if (c.attack_strategy != AttackStrategy::None && c.attack_ratio > 0.0) {
    // The attacker is only useful where both coverages overlap somewhere.
    const double d = distance(n.rsu_position, n.attacker_position);
    require(d < n.rsu_range_m + n.attacker_range_m, "attacker coverage does not overlap RSU coverage");
  }
}

DemandRates demand_rates(const ScenarioConfig& config) {
  constexpr double kHwyPerLanePerV2c = 3000.0;  // 900 veh/h/ln at V2C 0.3
  const double hwy = kHwyPerLanePerV2c * config.v2c_ratio;
  return {hwy, hwy / config.demand_ratio_hwy_to_ramp};
}

std::vector<ArrivalEvent> generate_arrivals(const ScenarioConfig& config, std::mt19937_64& rng) {
  const DemandRates rates = demand_rates(config);
  if ((rates.hwy_rate_per_lane <= 0.0 || rates.ramp_rate <= 0.0) &&
      (config.penetration_rate > 0.0 || config.attack_ratio > 0.0)) {
    throw ConfigError("zero demand is inconsistent with a nonzero penetration or attack ratio");
  }

  std::vector<ArrivalEvent> events;
  const std::array<std::pair<Origin, double>, 3> origins{{
      {Origin::MainlineLane0, rates.hwy_rate_per_lane},
      {Origin::MainlineLane1, rates.hwy_rate_per_lane},
      {Origin::Ramp, rates.ramp_rate},
  }};

  // Each origin draws from its own sub-stream so the schedule of one origin
  // does not depend on how many events another produced.
  const std::uint64_t base = rng();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < origins.size(); ++k) {
    const auto [origin, rate] = origins[k];
    if (rate <= 0.0) continue;
    std::mt19937_64 local(derive_seed(base, stream::kArrivals, k));
    std::exponential_distribution<double> gap(rate / 3600.0);
    double t = gap(local);
    while (t < config.sim_duration_s) {
      const bool cav = unit(local) < config.penetration_rate;
      const bool attacked = unit(local) < config.attack_ratio;
      VehicleClass cls = VehicleClass::Legacy;
      if (cav) {
        cls = (attacked && config.attack_strategy != AttackStrategy::None) ? VehicleClass::AttackedCav
                                                                            : VehicleClass::Cav;
      }
      events.push_back({t, origin, cls});
      t += gap(local);
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const ArrivalEvent& a, const ArrivalEvent& b) {
    return a.depart_time_s < b.depart_time_s;
  });
  return events;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finaliser over a mixed key
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ stream) ^ index);
}

}  // namespace rampsim
