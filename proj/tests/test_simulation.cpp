#include "doctest.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rampsim/config_io.hpp"
#include "rampsim/grid.hpp"
#include "rampsim/simulation.hpp"

using namespace rampsim;
namespace fs = std::filesystem;

namespace {

ScenarioConfig short_run(double seconds = 240.0) {
  ScenarioConfig c;
  c.sim_duration_s = seconds;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rampsim_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(RAMPSIM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("default benchmark cell completes quickly and reports metrics") {
  ScenarioConfig c;
  const auto start = std::chrono::steady_clock::now();
  Simulation sim(c);
  const RunMetrics m = sim.run();
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(elapsed < 60.0);
  CHECK(m.efficiency_mph > 0.0);
  CHECK(m.vehicles_completed > 0);
  std::ostringstream row;
  write_results_row(row, m);
  CHECK(row.str().find("ok") != std::string::npos);
}

TEST_CASE("zero penetration never involves the RSU") {
  ScenarioConfig c = short_run();
  c.penetration_rate = 0.0;
  Simulation sim(c);
  while (!sim.finished()) {
    sim.step();
    REQUIRE(sim.last_receptions().empty());
    REQUIRE(sim.last_advice().empty());
  }
  CHECK(sim.defense_log_rows() == 0);
}

TEST_CASE("attacked runs with the defense on log filter decisions") {
  ScenarioConfig c = short_run();
  c.attack_ratio = 0.5;
  c.attack_strategy = AttackStrategy::EmergencyStop;
  c.defense_enabled = true;
  c.defense.threshold_tau_sq = 40.0;
  std::ostringstream defense;
  Simulation sim(c, {nullptr, nullptr, nullptr, &defense});
  const RunMetrics m = sim.run();
  CHECK(sim.defense_log_rows() > 0);
  CHECK(m.defense_removals > 0);
  const std::string rows = defense.str();
  CHECK(std::count(rows.begin(), rows.end(), '\n') > 1);
}

TEST_CASE("defense without a threshold is a configuration error") {
  ScenarioConfig c = short_run();
  c.defense_enabled = true;
  CHECK_THROWS_AS(Simulation{c}, ConfigError);
}

TEST_CASE("the attacker only rewrites messages") {
  ScenarioConfig c = short_run(400.0);
  c.attack_ratio = 0.5;
  c.attack_strategy = AttackStrategy::EmergencyStop;
  Simulation sim(c);
  int spoofed_seen = 0;
  while (!sim.finished()) {
    sim.step();
    for (const auto& r : sim.last_receptions()) {
      const VehicleState* v = nullptr;
      for (const auto& s : sim.world().last_tick_states()) {
        if (s.id == r.bsm.sender_id) v = &s;
      }
      REQUIRE(v != nullptr);
      if (r.spoofed) {
        ++spoofed_seen;
        CHECK(v->cls == VehicleClass::AttackedCav);
      }
      CHECK(r.bsm.signature_valid);
    }
  }
  CHECK(spoofed_seen > 0);
}

TEST_CASE("runs are reproducible") {
  ScenarioConfig c = short_run();
  c.attack_ratio = 0.25;
  c.attack_strategy = AttackStrategy::PositionDrift;
  std::ostringstream a, b;
  Simulation(c, {&a}).run();
  Simulation(c, {&b}).run();
  CHECK(a.str() == b.str());
  CHECK(a.str().size() > 1000);
}

TEST_CASE("calibration") {
  ScenarioConfig quiet = short_run();
  quiet.channel.shadowing_sigma_db = 0.0;
  quiet.position_noise.step_sigma_m = 0.0;
  const std::uint64_t seeds[] = {1, 2};
  CHECK(calibrate_threshold(quiet, seeds).raw_mean == doctest::Approx(0.0).epsilon(1e-9));

  const ScenarioConfig noisy = short_run();
  const auto r1 = calibrate_threshold(noisy, seeds);
  const auto r2 = calibrate_threshold(noisy, seeds);
  CHECK(r1.tau_sq > 0.0);
  CHECK(r1.tau_sq == r2.tau_sq);
  CHECK(r1.num_strings > 0);

  const fs::path dir = scratch("calibration");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "calibration.txt");
    write_calibration(f, r1);
  }
  CHECK(read_calibration_tau_sq((dir / "calibration.txt").string()) == r1.tau_sq);
  {
    std::ofstream f(dir / "broken.txt");
    f << "raw_mean = 1\n";
  }
  CHECK_THROWS_AS(read_calibration_tau_sq((dir / "broken.txt").string()), ConfigError);
}

TEST_CASE("grid enumeration") {
  CHECK(enumerate_cells(GridSpec{}, ScenarioConfig{}).size() == 39);
  GridSpec two;
  two.strategies = {AttackStrategy::EmergencyStop, AttackStrategy::PositionDrift};
  two.defense = {false, true};
  const auto cells = enumerate_cells(two, ScenarioConfig{});
  // pen 0: 1 cell; each other pen: att 0 x 2 defense + 3 att x 2 strategies x 2 defense
  CHECK(cells.size() == 3 * (1 + 3 * (2 + 12)));
  CHECK(cell_name(cells[0]) == "v2c0.3_pen0_att0_none_def-off");
}

TEST_CASE("a single-cell grid is a plain run") {
  ScenarioConfig base = short_run();
  base.seed = 17;
  GridSpec spec;
  spec.penetration_rates = {0.5};
  spec.v2c_ratios = {0.3};
  spec.attack_ratios = {0.0};
  spec.seeds_per_cell = 1;
  const GridResult g = run_grid(spec, base);
  REQUIRE(g.runs.size() == 1);
  const RunMetrics direct = Simulation(base).run();
  CHECK(g.runs[0].metrics.efficiency_mph == direct.efficiency_mph);
  CHECK(g.runs[0].metrics.velocity_std_dev_mps == direct.velocity_std_dev_mps);
}

TEST_CASE("grid files do not depend on the job count") {
  ScenarioConfig base = short_run(120.0);
  GridSpec spec;
  spec.penetration_rates = {0.0, 0.5};
  spec.v2c_ratios = {0.3};
  spec.attack_ratios = {0.0, 0.5};
  spec.defense = {false, true};
  spec.seeds_per_cell = 2;
  base.defense.calibration_runs = 1;

  const fs::path one = scratch("grid_j1");
  const fs::path four = scratch("grid_j4");
  const GridResult a = run_grid(spec, base, {one.string(), 1, false, false});
  run_grid(spec, base, {four.string(), 4, false, false});
  CHECK(a.tau_sq.has_value());
  for (const char* f : {"results.csv", "aggregate.csv", "manifest.json", "calibration.txt"}) {
    CHECK(slurp(one / f) == slurp(four / f));
  }
  const std::string results = slurp(one / "results.csv");
  CHECK(std::count(results.begin(), results.end(), '\n') == 1 + static_cast<long>(a.runs.size()));
}

TEST_CASE("calibrated threshold reaches defended cells verbatim") {
  ScenarioConfig base = short_run(120.0);
  base.defense.threshold_tau_sq = 123.5;
  GridSpec spec;
  spec.penetration_rates = {0.5};
  spec.v2c_ratios = {0.3};
  spec.attack_ratios = {0.5};
  spec.defense = {true};
  spec.seeds_per_cell = 1;
  const GridResult g = run_grid(spec, base);
  REQUIRE(g.runs.size() == 1);
  CHECK(g.runs[0].metrics.tau_sq == 123.5);
}

TEST_CASE("command line") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  CHECK(cli("print-default-config") == 0);
  CHECK(cli("--bogus") == 1);
  CHECK(cli("run --penetration 2") == 1);

  {
    std::ofstream f(dir / "bad.cfg");
    f << "no_such_key = 3\n";
  }
  CHECK(cli("run --config " + (dir / "bad.cfg").string() + " --out " + (dir / "x").string()) == 1);

  {
    std::ofstream f(dir / "short.cfg");
    f << "sim_duration_s = 60\n";
  }
  const std::string cfg = " --config " + (dir / "short.cfg").string();
  CHECK(cli("run" + cfg + " --attack stop --attack-ratio 0.5 --logs --out " + (dir / "run").string()) == 0);
  for (const char* f : {"config.txt", "metrics.csv", "trajectory.csv", "bsm.csv", "advisory.csv", "defense.csv"}) {
    CHECK(fs::exists(dir / "run" / f));
  }
  CHECK(load_config((dir / "run" / "config.txt").string()).sim_duration_s == 60.0);

  CHECK(cli("calibrate" + cfg + " --runs 1 --out " + (dir / "cal.txt").string()) == 0);
  CHECK(fs::exists(dir / "cal.txt"));
  CHECK(cli("grid" + cfg + " --penetration 0.5 --v2c 0.3 --attack-ratio 0,0.5 --defense on --seeds-per-cell 1" +
            " --calibration " + (dir / "cal.txt").string() + " --out " + (dir / "grid").string()) == 0);
  CHECK(fs::exists(dir / "grid" / "manifest.json"));
}

TEST_CASE("benign vehicles accept their advisories") {
  ScenarioConfig c = short_run(300.0);
  Simulation sim(c);
  const RunMetrics m = sim.run();
  CHECK(m.advisories_rejected == 0);
}

TEST_CASE("stop-attacked vehicles reject advice computed from their frozen report") {
  ScenarioConfig c = short_run(300.0);
  c.attack_ratio = 1.0;
  c.attack_strategy = AttackStrategy::EmergencyStop;
  Simulation sim(c);
  std::int64_t victim_rejections = 0;
  while (!sim.finished()) {
    const std::int64_t before = sim.advisories_rejected();
    sim.step();
    if (sim.advisories_rejected() > before) {
      for (const auto& a : sim.last_advice()) {
        if (sim.held_advisories().count(a.vehicle_id) == 0 && sim.spoofed_senders().count(a.vehicle_id)) {
          ++victim_rejections;
        }
      }
    }
  }
  CHECK(victim_rejections > 0);

  ScenarioConfig obedient = c;
  obedient.controller.echo_check = false;
  CHECK(Simulation(obedient).run().advisories_rejected == 0);
}
