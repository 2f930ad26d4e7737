#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rampsim/scenario.hpp"

namespace rampsim {

inline constexpr double kMetersPerMile = 1609.344;

/// One row of the per-tick trajectory log.
struct TraceRecord {
  double t = 0.0;
  int vehicle_id = 0;
  VehicleClass cls = VehicleClass::Legacy;
  Lane lane = Lane::Mainline0;
  double s = 0.0;
  double v = 0.0;
  double a = 0.0;
  bool controlled = false;
  bool under_attack = false;
};

struct TravelTotals {
  double vmt_miles = 0.0;
  double vht_hours = 0.0;
};

struct Volatility {
  double s_dev = 0.0;   // sample standard deviation, n - 1 denominator
  double d_mean = 0.0;  // mean absolute deviation about the mean
};

/// VMT / VHT in mph. Throws std::domain_error when vht_hours <= 0.
double efficiency(double vmt_miles, double vht_hours);

/// Sums v dt (miles) and dt (hours) over every vehicle-tick in the log.
TravelTotals accumulate_vmt_vht(std::span<const TraceRecord> log, double dt);

/// Throws std::domain_error for fewer than two samples.
Volatility volatility(std::span<const double> samples);

struct RunMetrics {
  double penetration_rate = 0.0;
  double attack_ratio = 0.0;
  double v2c_ratio = 0.0;
  AttackStrategy strategy = AttackStrategy::None;
  bool defense = false;
  std::uint64_t seed = 0;

  double vmt_miles = 0.0;
  double vht_hours = 0.0;
  /// Zero for a run in which no vehicle ever entered the network.
  double efficiency_mph = 0.0;
  double velocity_mean_abs_dev_mps = 0.0;
  double velocity_std_dev_mps = 0.0;
  double accel_mean_abs_dev = 0.0;
  double accel_std_dev = 0.0;
  std::int64_t vehicles_completed = 0;
  std::int64_t vehicles_blocked = 0;
  double blocked_wait_hours = 0.0;
  std::int64_t emergency_brakes = 0;
  std::int64_t defense_removals = 0;
  /// Advisories a vehicle discarded because their echoed state was not its own.
  std::int64_t advisories_rejected = 0;
  double tau_sq = 0.0;
};

/// Streaming counterpart of accumulate_vmt_vht + volatility for a live run.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(double dt) : dt_(dt) {}

  void add(const TraceRecord& record);
  TravelTotals totals() const { return {vmt_m_ / kMetersPerMile, vht_s_ / 3600.0}; }
  /// Fills the travel and volatility fields of `metrics`.
  void finish(RunMetrics& metrics) const;

 private:
  double dt_;
  double vmt_m_ = 0.0;
  double vht_s_ = 0.0;
  std::vector<double> speeds_;
  std::vector<double> accels_;
};

// ---------------------------------------------------------------------------
// Files

/// t,vehicle_id,class,lane,s,v,a,controlled,under_attack
void write_trajectory_header(std::ostream& out);
void write_trajectory_record(std::ostream& out, const TraceRecord& record);
/// Parses a trajectory log written by the functions above. Throws
/// std::runtime_error on a malformed header or row.
std::vector<TraceRecord> read_trajectory(std::istream& in);

/// Per-vehicle (t, distance to merge) polylines for the rightmost lane and the
/// ramp, grouped by vehicle in id order.
void time_space_export(std::span<const TraceRecord> log, double merge_point_s, std::ostream& out);

struct StopWaveParams {
  double slow_speed_mps = 5.0;
  int min_vehicles = 3;
  double window_s = 10.0;
};

/// Number of episodes in which at least `min_vehicles` distinct vehicles on the
/// merge corridor drop below `slow_speed_mps` in overlapping time windows.
int count_stop_waves(std::span<const TraceRecord> log, const StopWaveParams& params = {});

void write_results_header(std::ostream& out);
void write_results_row(std::ostream& out, const RunMetrics& m, const std::string& status = "ok");

}  // namespace rampsim
