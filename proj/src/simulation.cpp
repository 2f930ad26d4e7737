#include "rampsim/simulation.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rampsim/config_io.hpp"

namespace rampsim {

namespace {

std::vector<ArrivalEvent> arrivals_for(const ScenarioConfig& config) {
  validate(config);
  std::mt19937_64 rng(derive_seed(config.seed, stream::kArrivals));
  return generate_arrivals(config, rng);
}

std::string format_double(double value) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, r.ptr);
}

}  // namespace

Simulation::Simulation(const ScenarioConfig& config, SimulationLogs logs)
    : config_(config),
      logs_(logs),
      world_(config, arrivals_for(config)),
      channel_(config),
      accumulator_(config.time_step_s) {
  if (config_.defense_enabled && !config_.defense.threshold_tau_sq) {
    throw ConfigError("defense enabled but no threshold: calibrate first or set defense.threshold_tau_sq");
  }
  if (config_.attack_strategy != AttackStrategy::None) {
    attacker_ = std::make_unique<Attacker>(config_.attack_strategy, config_.attack.drift_accel_mps2,
                                           world_.geometry());
  }
  if (logs_.trajectory) write_trajectory_header(*logs_.trajectory);
  if (logs_.bsm) *logs_.bsm << "t,sender_id,spoofed,declared_x,declared_y,declared_speed,rssi_dbm,coarse_distance_m\n";
  if (logs_.advisory) *logs_.advisory << "t,vehicle_id,string_id,position_in_string,advisory_mps,accepted\n";
  if (logs_.defense) *logs_.defense << "t,string_id,pre_mse,post_mse,removed_ids,iterations\n";
}

Simulation::~Simulation() = default;

std::vector<VehicleString> Simulation::filter_strings(std::vector<VehicleString> strings) {
  const auto min_size = static_cast<std::size_t>(config_.defense.min_string_size);
  const Vec2 rsu = config_.network.rsu_position;

  if (mse_observer_) {
    for (const auto& s : strings) {
      if (s.size() >= min_size) mse_observer_(string_mse(s.receptions(), rsu));
    }
  }
  if (!config_.defense_enabled) return strings;

  const double tau_sq = *config_.defense.threshold_tau_sq;
  std::vector<VehicleString> out;
  for (std::size_t sid = 0; sid < strings.size(); ++sid) {
    if (strings[sid].size() < min_size) {
      out.push_back(std::move(strings[sid]));
      continue;
    }
    const FilterResult f = filter_string(strings[sid].receptions(), rsu, tau_sq);
    if (logs_.defense) {
      std::string removed;
      for (std::size_t k = 0; k < f.removed.size(); ++k) {
        if (k) removed += ';';
        removed += std::to_string(f.removed[k]);
      }
      char buf[160];
      const int n = std::snprintf(buf, sizeof(buf), "%.1f,%zu,%.6g,%.6g,", world_.clock(), sid, f.pre_mse,
                                  f.post_mse);
      logs_.defense->write(buf, n);
      *logs_.defense << removed << ',' << f.iterations << '\n';
    }
    ++defense_rows_;
    defense_removals_ += static_cast<std::int64_t>(f.removed.size());
    if (f.removed.empty()) {
      out.push_back(std::move(strings[sid]));
      continue;
    }
    // Removing a member can open a gap wide enough to split the string.
    for (auto& piece : sequence_vehicles(f.kept, world_.geometry(), config_.controller.string_split_gap_m)) {
      out.push_back(std::move(piece));
    }
  }
  return out;
}

bool Simulation::echo_matches(const Advice& advice) const {
  const ControllerParams& c = config_.controller;
  if (!c.echo_check) return true;
  const VehicleState* v = world_.find(advice.vehicle_id);
  if (!v) return false;
  const double own_distance = world_.geometry().distance_to_merge(v->s);
  return std::abs(own_distance - advice.reference_distance_to_merge_m) <= c.echo_position_tolerance_m &&
         std::abs(v->v - advice.reference_speed_mps) <= c.echo_speed_tolerance_mps;
}

void Simulation::step() {
  receptions_ = channel_.collect_receptions(world_, attacker_.get());
  spoofed_.clear();
  for (const auto& r : receptions_) {
    if (r.spoofed) spoofed_.insert(r.bsm.sender_id);
  }

  strings_ = filter_strings(
      sequence_vehicles(receptions_, world_.geometry(), config_.controller.string_split_gap_m));
  advice_ = advise(strings_, config_);

  const double now = world_.clock();
  accepted_.assign(advice_.size(), 0);
  for (std::size_t k = 0; k < advice_.size(); ++k) {
    const Advice& a = advice_[k];
    if (echo_matches(a)) {
      accepted_[k] = 1;
      held_[a.vehicle_id] = {a.advisory_mps, now};
    } else {
      held_.erase(a.vehicle_id);
      ++rejected_;
    }
  }
  held_map_.clear();
  for (auto it = held_.begin(); it != held_.end();) {
    if (now - it->second.issued_at > config_.controller.advisory_hold_s + 1e-9) {
      it = held_.erase(it);
    } else {
      held_map_.emplace(it->first, it->second.advisory);
      ++it;
    }
  }

  if (logs_.bsm) {
    char buf[192];
    for (const auto& r : receptions_) {
      const int n = std::snprintf(buf, sizeof(buf), "%.1f,%d,%d,%.3f,%.3f,%.3f,%.3f,%.3f\n", now, r.bsm.sender_id,
                                  r.spoofed ? 1 : 0, r.bsm.pos.x, r.bsm.pos.y, r.bsm.speed, r.rssi_dbm,
                                  r.coarse_distance_m);
      logs_.bsm->write(buf, n);
    }
  }
  if (logs_.advisory) {
    char buf[128];
    for (std::size_t k = 0; k < advice_.size(); ++k) {
      const Advice& a = advice_[k];
      const int n = std::snprintf(buf, sizeof(buf), "%.1f,%d,%d,%d,%.4f,%d\n", now, a.vehicle_id, a.string_id,
                                  a.position_in_string, a.advisory_mps, static_cast<int>(accepted_[k]));
      logs_.advisory->write(buf, n);
    }
  }

  world_step(world_, held_map_);
  log_tick();
}

void Simulation::log_tick() {
  const double t = world_.clock();
  for (const auto& v : world_.last_tick_states()) {
    const TraceRecord r{t, v.id, v.cls, v.lane, v.s, v.v, v.a, v.controlled, spoofed_.count(v.id) != 0};
    accumulator_.add(r);
    if (logs_.trajectory) write_trajectory_record(*logs_.trajectory, r);
  }
}

RunMetrics Simulation::run() {
  while (!finished()) step();
  return metrics();
}

RunMetrics Simulation::metrics() const {
  RunMetrics m;
  m.penetration_rate = config_.penetration_rate;
  m.attack_ratio = config_.attack_ratio;
  m.v2c_ratio = config_.v2c_ratio;
  m.strategy = config_.attack_strategy;
  m.defense = config_.defense_enabled;
  m.seed = config_.seed;
  accumulator_.finish(m);
  m.vehicles_completed = static_cast<std::int64_t>(world_.departed().size());
  m.vehicles_blocked = world_.blocked();
  m.blocked_wait_hours = world_.blocked_wait_s() / 3600.0;
  m.emergency_brakes = world_.emergency_brakes();
  m.defense_removals = defense_removals_;
  m.advisories_rejected = rejected_;
  m.tau_sq = config_.defense.threshold_tau_sq.value_or(0.0);
  return m;
}

RunMetrics run_scenario(const ScenarioConfig& config, const std::string& output_dir, RunOutputs outputs) {
  namespace fs = std::filesystem;
  const fs::path dir(output_dir);
  fs::create_directories(dir);

  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("config.txt");
    write_config(f, config);
  }

  std::ofstream trajectory;
  std::ofstream bsm;
  std::ofstream advisory;
  std::ofstream defense;
  SimulationLogs logs;
  if (outputs.trajectory) {
    trajectory = open("trajectory.csv");
    logs.trajectory = &trajectory;
  }
  if (outputs.detailed) {
    bsm = open("bsm.csv");
    advisory = open("advisory.csv");
    defense = open("defense.csv");
    logs.bsm = &bsm;
    logs.advisory = &advisory;
    logs.defense = &defense;
  }

  Simulation sim(config, logs);
  const RunMetrics m = sim.run();
  auto f = open("metrics.csv");
  write_results_header(f);
  write_results_row(f, m);
  return m;
}

CalibrationResult calibrate_threshold(const ScenarioConfig& config, std::span<const std::uint64_t> seeds) {
  std::vector<double> samples;
  for (std::uint64_t seed : seeds) {
    ScenarioConfig c = config;
    c.seed = seed;
    c.attack_ratio = 0.0;
    c.attack_strategy = AttackStrategy::None;
    c.defense_enabled = false;
    Simulation sim(c);
    sim.set_string_mse_observer([&](double mse) { samples.push_back(mse); });
    sim.run();
  }
  return calibrate_from_samples(samples, config.defense.safety_factor);
}

void write_calibration(std::ostream& out, const CalibrationResult& c) {
  out << "tau_sq = " << format_double(c.tau_sq) << '\n'
      << "raw_mean = " << format_double(c.raw_mean) << '\n'
      << "safety_factor = " << format_double(c.safety_factor) << '\n'
      << "num_strings = " << c.num_strings << '\n'
      << "p50 = " << format_double(c.p50) << '\n'
      << "p90 = " << format_double(c.p90) << '\n'
      << "p95 = " << format_double(c.p95) << '\n'
      << "p99 = " << format_double(c.p99) << '\n';
}

double read_calibration_tau_sq(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration file " + path);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
    };
    trim(key);
    trim(value);
    if (key != "tau_sq") continue;
    double tau = 0.0;
    const auto r = std::from_chars(value.data(), value.data() + value.size(), tau);
    if (r.ec != std::errc{} || r.ptr != value.data() + value.size() || tau < 0.0) {
      throw ConfigError(path + ": bad tau_sq '" + value + "'");
    }
    return tau;
  }
  throw ConfigError(path + ": no tau_sq entry");
}

}  // namespace rampsim
