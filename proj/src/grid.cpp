#include "rampsim/grid.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

#include "json.hpp"

#include "rampsim/config_io.hpp"
#include "rampsim/simulation.hpp"

namespace rampsim {

namespace {

constexpr std::uint64_t kCalibrationSeedOffset = 1'000'000;

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr m;
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() >= 2) {
    double sq = 0.0;
    for (double x : xs) sq += (x - m.mean) * (x - m.mean);
    m.stderr_ = std::sqrt(sq / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
  }
  return m;
}

RunRecord run_one(const ScenarioConfig& config, std::size_t cell, const GridOptions& options,
                  const std::filesystem::path& cell_dir) {
  RunRecord rec;
  rec.cell = cell;
  try {
    if (options.output_dir.empty()) {
      Simulation sim(config);
      rec.metrics = sim.run();
    } else {
      const auto dir = cell_dir / ("seed" + std::to_string(config.seed));
      rec.metrics = run_scenario(config, dir.string(), {options.trajectories, options.detailed_logs});
    }
  } catch (const InvariantViolation& e) {
    rec.status = "invariant_violation";
    rec.message = e.what();
  } catch (const std::exception& e) {
    rec.status = "error";
    rec.message = e.what();
  }
  if (rec.status != "ok") {
    rec.metrics = RunMetrics{};
    rec.metrics.penetration_rate = config.penetration_rate;
    rec.metrics.attack_ratio = config.attack_ratio;
    rec.metrics.v2c_ratio = config.v2c_ratio;
    rec.metrics.strategy = config.attack_strategy;
    rec.metrics.defense = config.defense_enabled;
    rec.metrics.seed = config.seed;
  }
  return rec;
}

CellAggregate aggregate(const ScenarioConfig& cell, const std::vector<const RunRecord*>& runs) {
  CellAggregate a;
  a.config = cell;
  a.name = cell_name(cell);
  std::vector<double> eff, vmt, vht, vsd, vmad, asd, amad, done, blocked;
  for (const RunRecord* r : runs) {
    if (r->status != "ok") continue;
    ++a.runs_ok;
    const RunMetrics& m = r->metrics;
    eff.push_back(m.efficiency_mph);
    vmt.push_back(m.vmt_miles);
    vht.push_back(m.vht_hours);
    vsd.push_back(m.velocity_std_dev_mps);
    vmad.push_back(m.velocity_mean_abs_dev_mps);
    asd.push_back(m.accel_std_dev);
    amad.push_back(m.accel_mean_abs_dev);
    done.push_back(static_cast<double>(m.vehicles_completed));
    blocked.push_back(static_cast<double>(m.vehicles_blocked));
  }
  a.efficiency_mph = mean_stderr(eff);
  a.vmt_miles = mean_stderr(vmt);
  a.vht_hours = mean_stderr(vht);
  a.velocity_std_dev_mps = mean_stderr(vsd);
  a.velocity_mean_abs_dev_mps = mean_stderr(vmad);
  a.accel_std_dev = mean_stderr(asd);
  a.accel_mean_abs_dev = mean_stderr(amad);
  a.vehicles_completed = mean_stderr(done);
  a.vehicles_blocked = mean_stderr(blocked);
  return a;
}

}  // namespace

std::vector<ScenarioConfig> enumerate_cells(const GridSpec& grid, const ScenarioConfig& base) {
  std::vector<ScenarioConfig> cells;
  auto push = [&](double v2c, double pen, double att, AttackStrategy strategy, bool defense) {
    ScenarioConfig c = base;
    c.v2c_ratio = v2c;
    c.penetration_rate = pen;
    c.attack_ratio = att;
    c.attack_strategy = strategy;
    c.defense_enabled = defense;
    for (const auto& existing : cells) {
      if (existing == c) return;
    }
    cells.push_back(std::move(c));
  };
  for (double v2c : grid.v2c_ratios) {
    for (double pen : grid.penetration_rates) {
      if (pen == 0.0) {
        push(v2c, 0.0, 0.0, AttackStrategy::None, false);
        continue;
      }
      for (double att : grid.attack_ratios) {
        for (bool defense : grid.defense) {
          if (att == 0.0) {
            push(v2c, pen, 0.0, AttackStrategy::None, defense);
            continue;
          }
          for (AttackStrategy s : grid.strategies) push(v2c, pen, att, s, defense);
        }
      }
    }
  }
  return cells;
}

std::string cell_name(const ScenarioConfig& c) {
  return "v2c" + short_number(c.v2c_ratio) + "_pen" + short_number(c.penetration_rate) + "_att" +
         short_number(c.attack_ratio) + "_" + std::string(to_string(c.attack_strategy)) + "_def-" +
         (c.defense_enabled ? "on" : "off");
}

GridResult run_grid(const GridSpec& grid, const ScenarioConfig& base, const GridOptions& options) {
  namespace fs = std::filesystem;
  if (grid.seeds_per_cell < 1) throw ConfigError("seeds_per_cell must be at least 1");

  GridResult result;
  result.cells = enumerate_cells(grid, base);
  for (const auto& c : result.cells) validate(c);

  bool any_defense = false;
  for (const auto& c : result.cells) any_defense = any_defense || c.defense_enabled;
  std::optional<double> tau_sq = base.defense.threshold_tau_sq;
  std::optional<CalibrationResult> calibration;
  if (any_defense && !tau_sq) {
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < base.defense.calibration_runs; ++k) {
      seeds.push_back(base.seed + kCalibrationSeedOffset + static_cast<std::uint64_t>(k));
    }
    calibration = calibrate_threshold(base, seeds);
    tau_sq = calibration->tau_sq;
  }
  if (any_defense) result.tau_sq = tau_sq;

  struct Job {
    ScenarioConfig config;
    std::size_t cell;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    for (int k = 0; k < grid.seeds_per_cell; ++k) {
      ScenarioConfig c = result.cells[i];
      c.seed = base.seed + static_cast<std::uint64_t>(k);
      if (c.defense_enabled) c.defense.threshold_tau_sq = tau_sq;
      jobs.push_back({std::move(c), i});
    }
  }

  const fs::path root(options.output_dir);
  if (!options.output_dir.empty()) fs::create_directories(root);

  result.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const fs::path cell_dir = root / cell_name(result.cells[jobs[j].cell]);
      result.runs[j] = run_one(jobs[j].config, jobs[j].cell, options, cell_dir);
    }
  };
  const int threads = std::max(1, std::min<int>(options.jobs, static_cast<int>(jobs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    std::vector<const RunRecord*> runs;
    for (const auto& r : result.runs) {
      if (r.cell == i) runs.push_back(&r);
    }
    result.aggregates.push_back(aggregate(result.cells[i], runs));
  }

  if (!options.output_dir.empty()) {
    {
      std::ofstream f(root / "results.csv");
      write_results_table(f, result);
    }
    {
      std::ofstream f(root / "aggregate.csv");
      write_aggregate_table(f, result);
    }
    if (calibration) {
      std::ofstream f(root / "calibration.txt");
      write_calibration(f, *calibration);
    }

    nlohmann::ordered_json manifest;
    manifest["results"] = "results.csv";
    manifest["aggregate"] = "aggregate.csv";
    if (calibration) manifest["calibration"] = "calibration.txt";
    manifest["seeds_per_cell"] = grid.seeds_per_cell;
    manifest["seeds"] = nlohmann::json::array();
    for (int k = 0; k < grid.seeds_per_cell; ++k) manifest["seeds"].push_back(base.seed + static_cast<std::uint64_t>(k));
    manifest["volatility_pool"] = "all vehicle-ticks network-wide";
    if (tau_sq) manifest["tau_sq"] = *tau_sq;
    manifest["base_config"] = config_to_string(base);
    auto& cells = manifest["cells"] = nlohmann::json::array();
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
      const auto& c = result.cells[i];
      nlohmann::ordered_json cell;
      cell["name"] = cell_name(c);
      cell["penetration_rate"] = c.penetration_rate;
      cell["v2c_ratio"] = c.v2c_ratio;
      cell["attack_ratio"] = c.attack_ratio;
      cell["attack_strategy"] = std::string(to_string(c.attack_strategy));
      cell["defense"] = c.defense_enabled;
      auto& runs = cell["runs"] = nlohmann::json::array();
      for (const auto& r : result.runs) {
        if (r.cell != i) continue;
        nlohmann::ordered_json run;
        const std::string dir = cell_name(c) + "/seed" + std::to_string(r.metrics.seed);
        run["seed"] = r.metrics.seed;
        run["status"] = r.status;
        if (!r.message.empty()) run["message"] = r.message;
        auto& files = run["files"] = nlohmann::json::array();
        if (r.status == "ok") {
          files.push_back(dir + "/config.txt");
          files.push_back(dir + "/metrics.csv");
          if (options.trajectories) files.push_back(dir + "/trajectory.csv");
          if (options.detailed_logs) {
            files.push_back(dir + "/bsm.csv");
            files.push_back(dir + "/advisory.csv");
            files.push_back(dir + "/defense.csv");
          }
        }
        runs.push_back(std::move(run));
      }
      cells.push_back(std::move(cell));
    }
    std::ofstream f(root / "manifest.json");
    f << manifest.dump(2) << '\n';
  }
  return result;
}

void write_results_table(std::ostream& out, const GridResult& result) {
  write_results_header(out);
  for (const auto& r : result.runs) write_results_row(out, r.metrics, r.status);
}

void write_aggregate_table(std::ostream& out, const GridResult& result) {
  out << "cell,penetration_rate,attack_ratio,v2c_ratio,attack_strategy,defense,runs_ok";
  for (const char* name : {"efficiency_mph", "vmt_mile", "vht_hour", "velocity_std_dev_mps",
                           "velocity_mean_abs_dev_mps", "accel_std_dev_mps2", "accel_mean_abs_dev_mps2",
                           "vehicles_completed", "vehicles_blocked"}) {
    out << ',' << name << "_mean," << name << "_stderr";
  }
  out << '\n';
  char buf[64];
  for (const auto& a : result.aggregates) {
    const auto& c = a.config;
    out << a.name << ',' << short_number(c.penetration_rate) << ',' << short_number(c.attack_ratio) << ','
        << short_number(c.v2c_ratio) << ',' << to_string(c.attack_strategy) << ','
        << (c.defense_enabled ? "on" : "off") << ',' << a.runs_ok;
    for (const MeanStderr& m : {a.efficiency_mph, a.vmt_miles, a.vht_hours, a.velocity_std_dev_mps,
                                a.velocity_mean_abs_dev_mps, a.accel_std_dev, a.accel_mean_abs_dev,
                                a.vehicles_completed, a.vehicles_blocked}) {
      std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", m.mean, m.stderr_);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace rampsim
