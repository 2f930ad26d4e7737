#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rampsim/metrics.hpp"
#include "rampsim/scenario.hpp"

namespace rampsim {

/// Experiment grid. Cells with zero penetration run only without attack and
/// without defense; cells with zero attack ratio carry no strategy.
struct GridSpec {
  std::vector<double> penetration_rates{0.0, 0.2, 0.5, 1.0};
  std::vector<double> v2c_ratios{0.3, 0.6, 0.9};
  std::vector<double> attack_ratios{0.0, 0.1, 0.25, 0.5};
  std::vector<AttackStrategy> strategies{AttackStrategy::EmergencyStop};
  std::vector<bool> defense{false};
  int seeds_per_cell = 5;
};

/// Distinct cell configurations derived from `base`, in enumeration order
/// (v2c, penetration, attack ratio, strategy, defense). Seeds are left as in base.
std::vector<ScenarioConfig> enumerate_cells(const GridSpec& grid, const ScenarioConfig& base);

/// Directory-safe name of a cell, e.g. `v2c0.3_pen0.5_att0.25_emergency_stop_def-off`.
std::string cell_name(const ScenarioConfig& cell);

struct GridOptions {
  /// Empty: compute only, write nothing.
  std::string output_dir;
  int jobs = 1;
  bool trajectories = false;
  bool detailed_logs = false;
};

struct RunRecord {
  std::size_t cell = 0;
  RunMetrics metrics;
  /// "ok", "invariant_violation" or "error".
  std::string status = "ok";
  std::string message;
};

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct CellAggregate {
  ScenarioConfig config;
  std::string name;
  int runs_ok = 0;
  MeanStderr efficiency_mph;
  MeanStderr vmt_miles;
  MeanStderr vht_hours;
  MeanStderr velocity_std_dev_mps;
  MeanStderr velocity_mean_abs_dev_mps;
  MeanStderr accel_std_dev;
  MeanStderr accel_mean_abs_dev;
  MeanStderr vehicles_completed;
  MeanStderr vehicles_blocked;
};

struct GridResult {
  std::vector<ScenarioConfig> cells;
  /// Cell-major, seed-minor.
  std::vector<RunRecord> runs;
  std::vector<CellAggregate> aggregates;
  /// Threshold used by defended cells, if any.
  std::optional<double> tau_sq;
};

/// Runs every cell for seeds base.seed + k, k < seeds_per_cell, on up to
/// `jobs` threads. A failing run is recorded and the grid continues. When a
/// defended cell exists and base has no threshold, one is calibrated from
/// base first. Output tables do not depend on `jobs`.
GridResult run_grid(const GridSpec& grid, const ScenarioConfig& base, const GridOptions& options = {});

void write_results_table(std::ostream& out, const GridResult& result);
void write_aggregate_table(std::ostream& out, const GridResult& result);

}  // namespace rampsim
