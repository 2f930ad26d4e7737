#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "rampsim/attacks.hpp"
#include "rampsim/controller.hpp"
#include "rampsim/defense.hpp"
#include "rampsim/metrics.hpp"
#include "rampsim/traffic.hpp"
#include "rampsim/v2x.hpp"

namespace rampsim {

/// Optional per-run output streams. Null streams are skipped.
struct SimulationLogs {
  std::ostream* trajectory = nullptr;
  std::ostream* bsm = nullptr;
  std::ostream* advisory = nullptr;
  std::ostream* defense = nullptr;
};

/// One complete run: world, channel, attacker, RSU controller and defense.
///
/// Each tick collects BSMs from the current state, lets the attacker rewrite
/// the ones it intercepts, sequences the senders into strings, optionally
/// filters every string, issues advisories and then advances the world.
/// Before adopting an advisory a vehicle compares the state echoed in it
/// with its own (controller.echo_check); a mismatch discards the advisory
/// and any older one it still holds.
class Simulation {
 public:
  /// Throws ConfigError for an invalid config, or when the defense is enabled
  /// without a threshold.
  explicit Simulation(const ScenarioConfig& config, SimulationLogs logs = {});
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  void step();
  /// Steps until the configured duration has elapsed and returns the metrics.
  RunMetrics run();
  bool finished() const { return world_.finished(); }

  RunMetrics metrics() const;
  const ScenarioConfig& config() const { return config_; }
  const WorldState& world() const { return world_; }

  /// Receptions and advice of the most recent tick.
  const std::vector<Reception>& last_receptions() const { return receptions_; }
  const std::vector<VehicleString>& last_strings() const { return strings_; }
  const std::vector<Advice>& last_advice() const { return advice_; }
  /// Advisories handed to the world in the most recent tick.
  const AdvisoryMap& held_advisories() const { return held_map_; }
  /// Ids whose BSM reached the RSU spoofed in the most recent tick.
  const std::set<int>& spoofed_senders() const { return spoofed_; }

  std::int64_t defense_removals() const { return defense_removals_; }
  std::int64_t defense_log_rows() const { return defense_rows_; }
  std::int64_t advisories_rejected() const { return rejected_; }

  /// Called with the MSE of every string of at least the defense's minimum
  /// size, every tick, before any filtering.
  void set_string_mse_observer(std::function<void(double)> observer) { mse_observer_ = std::move(observer); }

 private:
  struct Held {
    double advisory = 0.0;
    double issued_at = 0.0;
  };

  std::vector<VehicleString> filter_strings(std::vector<VehicleString> strings);
  bool echo_matches(const Advice& advice) const;
  void log_tick();

  ScenarioConfig config_;
  SimulationLogs logs_;
  WorldState world_;
  V2xChannel channel_;
  std::unique_ptr<Attacker> attacker_;
  MetricsAccumulator accumulator_;

  std::vector<Reception> receptions_;
  std::vector<VehicleString> strings_;
  std::vector<Advice> advice_;
  std::vector<char> accepted_;
  std::map<int, Held> held_;
  AdvisoryMap held_map_;
  std::set<int> spoofed_;
  std::int64_t defense_removals_ = 0;
  std::int64_t defense_rows_ = 0;
  std::int64_t rejected_ = 0;
  std::function<void(double)> mse_observer_;
};

struct RunOutputs {
  bool trajectory = true;
  /// bsm.csv, advisory.csv and defense.csv.
  bool detailed = false;
};

/// Runs `config` once with its files written into `output_dir` (created if
/// needed): metrics.csv and config.txt always, the logs selected by `outputs`.
RunMetrics run_scenario(const ScenarioConfig& config, const std::string& output_dir, RunOutputs outputs = {});

/// Benign runs of `config` (attack forced off, defense off) over the given
/// seeds; collects every string MSE and derives the threshold.
CalibrationResult calibrate_threshold(const ScenarioConfig& config, std::span<const std::uint64_t> seeds);

void write_calibration(std::ostream& out, const CalibrationResult& result);
/// Reads the tau_sq entry of a calibration file. Throws ConfigError.
double read_calibration_tau_sq(const std::string& path);

}  // namespace rampsim
