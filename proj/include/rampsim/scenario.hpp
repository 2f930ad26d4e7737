#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rampsim/types.hpp"

namespace rampsim {

/// Closed interval of the mainline-aligned longitudinal coordinate.
struct Interval {
  double start = 0.0;
  double end = 0.0;

  bool contains(double s) const { return s >= start && s <= end; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Two-lane mainline with a single-lane on-ramp joining the rightmost lane.
///
/// Every lane uses the same longitudinal coordinate `s`, aligned with the
/// mainline: ramp positions run from `merge_point_s - ramp_length_m` up to
/// `merge_point_s`. Zones are expressed in that coordinate and apply to both
/// approaches.
struct RoadNetwork {
  int mainline_lane_count = 2;
  int ramp_lane_count = 1;
  double merge_point_s = 1000.0;
  double mainline_length_m = 1500.0;
  double ramp_length_m = 400.0;
  Interval control_zone{500.0, 1000.0};
  Interval buffer_zone{200.0, 500.0};
  Vec2 rsu_position{1000.0, 12.0};
  Vec2 attacker_position{950.0, 12.0};
  double rsu_range_m = 500.0;
  double attacker_range_m = 400.0;
  double speed_limit_mps = 29.0;
  double lane_width_m = 3.5;
  double ramp_angle_deg = 5.0;
  /// Length of the ramp's final stretch (acceleration lane) on which a ramp
  /// vehicle may move into the rightmost mainline lane.
  double merge_window_m = 150.0;

  friend bool operator==(const RoadNetwork&, const RoadNetwork&) = default;
};

struct KraussParams {
  double tau_s = 1.0;
  /// Fixed deceleration time; a value <= 0 selects the speed-based form
  /// mean_speed / decel_mps2.
  double tau_b_s = 0.0;
  double decel_mps2 = 4.0;
  double min_gap_m = 2.5;
  double eta_max_mps = 0.5;
  /// Perturbation bound for automated vehicles driving without an advisory.
  double cav_eta_max_mps = 0.0;
  double comfortable_decel_mps2 = 2.5;

  friend bool operator==(const KraussParams&, const KraussParams&) = default;
};

struct LaneChangeParams {
  double hysteresis_mps = 2.0;
  double cooldown_s = 2.0;

  friend bool operator==(const LaneChangeParams&, const LaneChangeParams&) = default;
};

struct ChannelParams {
  double tx_power_dbm = 13.010299956639813;  // 20 mW
  double thermal_noise_dbm = -90.0;
  double path_loss_exponent = 2.0;
  double ref_loss_db = 47.86;
  double shadowing_sigma_db = 0.1;
  /// Weight of the newest sample in the per-sender RSSI average; 1 disables smoothing.
  double rssi_smoothing_alpha = 1.0;
  /// Recorded as run metadata only.
  double data_rate_mbps = 6.0;

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

struct PositionNoiseParams {
  double step_sigma_m = 0.1;
  double cap_m = 2.0;

  friend bool operator==(const PositionNoiseParams&, const PositionNoiseParams&) = default;
};

struct ControllerParams {
  double k_d = 0.1;
  double k_v = 0.6;
  double safe_gap_m = 15.0;
  /// Speed-proportional part of the safe gap term: safe_gap_m + time_gap_s * v_self.
  double time_gap_s = 1.0;
  double string_split_gap_m = 100.0;
  double advisory_hold_s = 0.5;
  /// Each advisory echoes the sender state it was computed from. A vehicle
  /// ignores advice whose echo disagrees with its own position or speed by
  /// more than these tolerances.
  bool echo_check = true;
  double echo_position_tolerance_m = 10.0;
  double echo_speed_tolerance_mps = 2.0;

  friend bool operator==(const ControllerParams&, const ControllerParams&) = default;
};

struct AttackParams {
  double drift_accel_mps2 = -2.5;

  friend bool operator==(const AttackParams&, const AttackParams&) = default;
};

struct DefenseParams {
  /// Absent means the threshold has to be calibrated from benign runs.
  std::optional<double> threshold_tau_sq;
  double safety_factor = 4.0;
  int calibration_runs = 3;
  int min_string_size = 2;

  friend bool operator==(const DefenseParams&, const DefenseParams&) = default;
};

struct ScenarioConfig {
  RoadNetwork network;
  double penetration_rate = 0.5;
  double attack_ratio = 0.0;
  double v2c_ratio = 0.3;
  AttackStrategy attack_strategy = AttackStrategy::None;
  bool defense_enabled = false;
  double capacity_pcu_hr_ln = 2000.0;
  double demand_ratio_hwy_to_ramp = 3.0;
  double sim_duration_s = 1200.0;
  double time_step_s = 0.1;
  std::uint64_t seed = 1;
  double vehicle_length_m = 5.0;
  double accel_min_mps2 = -4.0;
  double accel_max_mps2 = 3.0;
  KraussParams krauss;
  LaneChangeParams lane_change;
  ChannelParams channel;
  PositionNoiseParams position_noise;
  ControllerParams controller;
  AttackParams attack;
  DefenseParams defense;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct ArrivalEvent {
  double depart_time_s = 0.0;
  Origin origin = Origin::MainlineLane0;
  VehicleClass vehicle_class = VehicleClass::Legacy;
};

struct DemandRates {
  double hwy_rate_per_lane = 0.0;  // veh/h
  double ramp_rate = 0.0;          // veh/h
};

/// Throws ConfigError describing the first violated constraint.
void validate(const ScenarioConfig& config);

/// Mainline demand is anchored at 900 veh/h/ln for V2C 0.3 and scales
/// linearly; the ramp receives 1/demand_ratio of the per-lane mainline rate.
DemandRates demand_rates(const ScenarioConfig& config);

/// Poisson arrivals per origin, merged and sorted by departure time.
/// Class assignment draws both Bernoulli variates for every vehicle so the
/// stream stays aligned across attack settings.
std::vector<ArrivalEvent> generate_arrivals(const ScenarioConfig& config, std::mt19937_64& rng);

/// Independent sub-stream seed for a (seed, stream, index) triple.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

namespace stream {
inline constexpr std::uint64_t kArrivals = 1;
inline constexpr std::uint64_t kDynamics = 2;
inline constexpr std::uint64_t kPositionNoise = 3;
inline constexpr std::uint64_t kShadowing = 4;
}  // namespace stream

}  // namespace rampsim
