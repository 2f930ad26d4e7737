// rampsim: run single scenarios, experiment grids and defense calibration.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rampsim/config_io.hpp"
#include "rampsim/grid.hpp"
#include "rampsim/simulation.hpp"

namespace {

using namespace rampsim;

constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> attack;
  std::optional<std::string> defense;
  std::optional<double> penetration;
  std::optional<double> v2c;
  std::optional<double> attack_ratio;
  std::string calibration_path;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "Scenario file (key = value lines)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Base random seed");
  cmd->add_option("--calibration", f.calibration_path, "Calibration file whose tau_sq the defense uses")
      ->check(CLI::ExistingFile);
}

void add_cell_overrides(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--attack", f.attack, "Attack strategy")->check(CLI::IsMember({"none", "stop", "drift"}));
  cmd->add_option("--defense", f.defense, "Defense filter")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--penetration", f.penetration, "CAV penetration rate")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--v2c", f.v2c, "Volume-to-capacity ratio")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--attack-ratio", f.attack_ratio, "Fraction of CAVs under attack")->check(CLI::Range(0.0, 1.0));
}

ScenarioConfig base_config(const CommonFlags& f) {
  ScenarioConfig c = f.config_path.empty() ? ScenarioConfig{} : load_config(f.config_path);
  if (f.seed) c.seed = *f.seed;
  if (!f.calibration_path.empty()) c.defense.threshold_tau_sq = read_calibration_tau_sq(f.calibration_path);
  return c;
}

void apply_cell_overrides(ScenarioConfig& c, const CommonFlags& f) {
  if (f.attack) c.attack_strategy = *parse_attack_strategy(*f.attack);
  if (f.defense) c.defense_enabled = *f.defense == "on";
  if (f.penetration) c.penetration_rate = *f.penetration;
  if (f.v2c) c.v2c_ratio = *f.v2c;
  if (f.attack_ratio) c.attack_ratio = *f.attack_ratio;
}

std::vector<std::uint64_t> calibration_seeds(const ScenarioConfig& c, int runs) {
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < runs; ++k) seeds.push_back(c.seed + static_cast<std::uint64_t>(k));
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative on-ramp merging simulator with BSM spoofing attacks and an RSSI/MSE defense"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string run_out = "run_out";
  bool run_no_trajectory = false;
  bool run_logs = false;
  auto* run = app.add_subcommand("run", "Run one scenario and write its logs and metrics");
  add_common(run, run_flags);
  add_cell_overrides(run, run_flags);
  run->add_option("--out", run_out, "Output directory");
  run->add_flag("--no-trajectory", run_no_trajectory, "Skip the per-tick trajectory log");
  run->add_flag("--logs", run_logs, "Also write BSM, advisory and defense logs");

  CommonFlags grid_flags;
  std::string grid_out = "grid_out";
  int jobs = 1;
  int seeds_per_cell = GridSpec{}.seeds_per_cell;
  std::vector<double> grid_pen, grid_v2c, grid_att;
  std::vector<std::string> grid_attack;
  std::vector<std::string> grid_defense;
  bool grid_traj = false;
  bool grid_logs = false;
  auto* grid = app.add_subcommand("grid", "Run an experiment grid (39 cells by default)");
  add_common(grid, grid_flags);
  grid->add_option("--out", grid_out, "Output directory");
  grid->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  grid->add_option("--seeds-per-cell", seeds_per_cell, "Replicates per cell")->check(CLI::PositiveNumber);
  grid->add_option("--penetration", grid_pen, "Penetration rates")->delimiter(',')->check(CLI::Range(0.0, 1.0));
  grid->add_option("--v2c", grid_v2c, "V2C ratios")->delimiter(',')->check(CLI::Range(0.0, 1.0));
  grid->add_option("--attack-ratio", grid_att, "Attack ratios")->delimiter(',')->check(CLI::Range(0.0, 1.0));
  grid->add_option("--attack", grid_attack, "Attack strategies")
      ->delimiter(',')
      ->check(CLI::IsMember({"stop", "drift"}));
  grid->add_option("--defense", grid_defense, "Defense settings")->delimiter(',')->check(CLI::IsMember({"on", "off"}));
  grid->add_flag("--trajectories", grid_traj, "Write a trajectory log for every run");
  grid->add_flag("--logs", grid_logs, "Write BSM, advisory and defense logs for every run");

  CommonFlags cal_flags;
  std::string cal_out = "calibration.txt";
  std::optional<int> cal_runs;
  auto* cal = app.add_subcommand("calibrate", "Estimate the defense threshold from benign runs");
  add_common(cal, cal_flags);
  add_cell_overrides(cal, cal_flags);
  cal->add_option("--out", cal_out, "Calibration file to write");
  cal->add_option("--runs", cal_runs, "Benign runs (default defense.calibration_runs)")->check(CLI::PositiveNumber);

  auto* print = app.add_subcommand("print-default-config", "Print every configuration key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*print) {
      write_config(std::cout, ScenarioConfig{});
      return 0;
    }

    if (*run) {
      ScenarioConfig c = base_config(run_flags);
      apply_cell_overrides(c, run_flags);
      validate(c);
      if (c.defense_enabled && !c.defense.threshold_tau_sq) {
        const CalibrationResult r = calibrate_threshold(c, calibration_seeds(c, c.defense.calibration_runs));
        std::cerr << "calibrated tau_sq = " << r.tau_sq << " from " << r.num_strings << " strings\n";
        c.defense.threshold_tau_sq = r.tau_sq;
      }
      const RunMetrics m = run_scenario(c, run_out, {!run_no_trajectory, run_logs});
      write_results_header(std::cout);
      write_results_row(std::cout, m);
      return 0;
    }

    if (*grid) {
      const ScenarioConfig base = base_config(grid_flags);
      GridSpec spec;
      spec.seeds_per_cell = seeds_per_cell;
      if (!grid_pen.empty()) spec.penetration_rates = grid_pen;
      if (!grid_v2c.empty()) spec.v2c_ratios = grid_v2c;
      if (!grid_att.empty()) spec.attack_ratios = grid_att;
      if (!grid_attack.empty()) {
        spec.strategies.clear();
        for (const auto& s : grid_attack) spec.strategies.push_back(*parse_attack_strategy(s));
      }
      if (!grid_defense.empty()) {
        spec.defense.clear();
        for (const auto& d : grid_defense) spec.defense.push_back(d == "on");
      }
      const GridResult result = run_grid(spec, base, {grid_out, jobs, grid_traj, grid_logs});
      int invariant_failures = 0;
      int other_failures = 0;
      for (const auto& r : result.runs) {
        if (r.status == "invariant_violation") ++invariant_failures;
        if (r.status == "error") ++other_failures;
        if (r.status != "ok") std::cerr << cell_name(result.cells[r.cell]) << " seed " << r.metrics.seed << ": " << r.message << '\n';
      }
      std::cout << result.cells.size() << " cells, " << result.runs.size() << " runs written to " << grid_out << '\n';
      write_aggregate_table(std::cout, result);
      if (invariant_failures > 0) return kExitInvariant;
      return other_failures > 0 ? kExitConfig : 0;
    }

    if (*cal) {
      ScenarioConfig c = base_config(cal_flags);
      apply_cell_overrides(c, cal_flags);
      validate(c);
      const int runs = cal_runs.value_or(c.defense.calibration_runs);
      const CalibrationResult r = calibrate_threshold(c, calibration_seeds(c, runs));
      std::ofstream out(cal_out);
      if (!out) throw ConfigError("cannot write " + cal_out);
      write_calibration(out, r);
      write_calibration(std::cout, r);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
