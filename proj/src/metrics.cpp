#include "rampsim/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rampsim {

double efficiency(double vmt_miles, double vht_hours) {
  if (!(vht_hours > 0.0)) throw std::domain_error("efficiency is undefined for zero vehicle-hours");
  return vmt_miles / vht_hours;
}

TravelTotals accumulate_vmt_vht(std::span<const TraceRecord> log, double dt) {
  MetricsAccumulator acc(dt);
  for (const auto& r : log) acc.add(r);
  return acc.totals();
}

Volatility volatility(std::span<const double> samples) {
  if (samples.size() < 2) throw std::domain_error("volatility needs at least two samples");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double sq = 0.0;
  double abs = 0.0;
  for (double x : samples) {
    sq += (x - mean) * (x - mean);
    abs += std::abs(x - mean);
  }
  return {std::sqrt(sq / (n - 1.0)), abs / n};
}

void MetricsAccumulator::add(const TraceRecord& r) {
  vmt_m_ += r.v * dt_;
  vht_s_ += dt_;
  speeds_.push_back(r.v);
  accels_.push_back(r.a);
}

void MetricsAccumulator::finish(RunMetrics& m) const {
  const TravelTotals t = totals();
  m.vmt_miles = t.vmt_miles;
  m.vht_hours = t.vht_hours;
  m.efficiency_mph = t.vht_hours > 0.0 ? efficiency(t.vmt_miles, t.vht_hours) : 0.0;
  if (speeds_.size() >= 2) {
    const Volatility v = volatility(speeds_);
    const Volatility a = volatility(accels_);
    m.velocity_std_dev_mps = v.s_dev;
    m.velocity_mean_abs_dev_mps = v.d_mean;
    m.accel_std_dev = a.s_dev;
    m.accel_mean_abs_dev = a.d_mean;
  }
}

// ---------------------------------------------------------------------------
// Files

namespace {

constexpr const char* kTrajectoryHeader = "t,vehicle_id,class,lane,s,v,a,controlled,under_attack";

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double to_double(std::string_view text, int line_no) {
  double value = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size()) {
    throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": bad number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

void write_trajectory_header(std::ostream& out) { out << kTrajectoryHeader << '\n'; }

void write_trajectory_record(std::ostream& out, const TraceRecord& r) {
  char buf[192];
  const int n = std::snprintf(buf, sizeof(buf), "%.1f,%d,%s,%s,%.3f,%.3f,%.3f,%d,%d\n", r.t, r.vehicle_id,
                              std::string(to_string(r.cls)).c_str(), std::string(to_string(r.lane)).c_str(), r.s,
                              r.v, r.a, r.controlled ? 1 : 0, r.under_attack ? 1 : 0);
  out.write(buf, n);
}

std::vector<TraceRecord> read_trajectory(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader) {
    throw std::runtime_error("trajectory log: missing or unexpected header");
  }
  std::vector<TraceRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": expected 9 fields");
    TraceRecord r;
    r.t = to_double(f[0], line_no);
    r.vehicle_id = static_cast<int>(to_double(f[1], line_no));
    const auto cls = parse_vehicle_class(f[2]);
    const auto lane = parse_lane(f[3]);
    if (!cls || !lane) throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": bad class or lane");
    r.cls = *cls;
    r.lane = *lane;
    r.s = to_double(f[4], line_no);
    r.v = to_double(f[5], line_no);
    r.a = to_double(f[6], line_no);
    if (r.v < 0.0) throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": negative speed");
    r.controlled = f[7] == "1";
    r.under_attack = f[8] == "1";
    out.push_back(r);
  }
  return out;
}

void time_space_export(std::span<const TraceRecord> log, double merge_point_s, std::ostream& out) {
  out << "vehicle_id,class,ever_attacked,lane,t,distance_to_merge_m\n";
  std::map<int, std::vector<const TraceRecord*>> by_vehicle;
  std::set<int> attacked;
  for (const auto& r : log) {
    if (r.under_attack) attacked.insert(r.vehicle_id);
    if (r.lane == Lane::Mainline1) continue;
    by_vehicle[r.vehicle_id].push_back(&r);
  }
  char buf[160];
  for (const auto& [id, points] : by_vehicle) {
    const int flag = attacked.count(id) ? 1 : 0;
    for (const TraceRecord* r : points) {
      const int n = std::snprintf(buf, sizeof(buf), "%d,%s,%d,%s,%.1f,%.3f\n", id,
                                  std::string(to_string(r->cls)).c_str(), flag,
                                  std::string(to_string(r->lane)).c_str(), r->t, merge_point_s - r->s);
      out.write(buf, n);
    }
  }
}

int count_stop_waves(std::span<const TraceRecord> log, const StopWaveParams& params) {
  struct Slow {
    double start;
    double end;
    int vehicle;
  };
  // Slow intervals per vehicle on the corridor.
  std::map<int, std::vector<const TraceRecord*>> by_vehicle;
  for (const auto& r : log) {
    if (r.lane != Lane::Mainline1) by_vehicle[r.vehicle_id].push_back(&r);
  }
  std::vector<Slow> slow;
  for (auto& [id, points] : by_vehicle) {
    std::sort(points.begin(), points.end(), [](auto* a, auto* b) { return a->t < b->t; });
    bool in_slow = false;
    double start = 0.0;
    double last = 0.0;
    for (const TraceRecord* r : points) {
      if (r->v < params.slow_speed_mps) {
        if (!in_slow) start = r->t;
        in_slow = true;
        last = r->t;
      } else if (in_slow) {
        slow.push_back({start, last, id});
        in_slow = false;
      }
    }
    if (in_slow) slow.push_back({start, last, id});
  }
  std::sort(slow.begin(), slow.end(), [](const Slow& a, const Slow& b) {
    return a.start != b.start ? a.start < b.start : a.vehicle < b.vehicle;
  });

  int episodes = 0;
  std::size_t i = 0;
  while (i < slow.size()) {
    double horizon = slow[i].end + params.window_s;
    std::set<int> vehicles{slow[i].vehicle};
    std::size_t j = i + 1;
    while (j < slow.size() && slow[j].start <= horizon) {
      vehicles.insert(slow[j].vehicle);
      horizon = std::max(horizon, slow[j].end + params.window_s);
      ++j;
    }
    if (static_cast<int>(vehicles.size()) >= params.min_vehicles) ++episodes;
    i = j;
  }
  return episodes;
}

void write_results_header(std::ostream& out) {
  out << "penetration_rate,attack_ratio,v2c_ratio,attack_strategy,defense,seed,"
         "vmt_mile,vht_hour,efficiency_mph,velocity_std_dev_mps,velocity_mean_abs_dev_mps,"
         "accel_std_dev_mps2,accel_mean_abs_dev_mps2,vehicles_completed,vehicles_blocked,"
         "blocked_wait_hour,emergency_brakes,defense_removals,advisories_rejected,tau_sq,status\n";
}

void write_results_row(std::ostream& out, const RunMetrics& m, const std::string& status) {
  char buf[512];
  const int n = std::snprintf(
      buf, sizeof(buf), "%g,%g,%g,%s,%s,%llu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%lld,%lld,%.6f,%lld,%lld,%lld,%.6g,%s\n",
      m.penetration_rate, m.attack_ratio, m.v2c_ratio, std::string(to_string(m.strategy)).c_str(),
      m.defense ? "on" : "off", static_cast<unsigned long long>(m.seed), m.vmt_miles, m.vht_hours, m.efficiency_mph,
      m.velocity_std_dev_mps, m.velocity_mean_abs_dev_mps, m.accel_std_dev, m.accel_mean_abs_dev,
      static_cast<long long>(m.vehicles_completed), static_cast<long long>(m.vehicles_blocked), m.blocked_wait_hours,
      static_cast<long long>(m.emergency_brakes), static_cast<long long>(m.defense_removals),
      static_cast<long long>(m.advisories_rejected), m.tau_sq,
      status.c_str());
  out.write(buf, n);
}

}  // namespace rampsim
