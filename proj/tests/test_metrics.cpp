#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rampsim/metrics.hpp"
#include "rampsim/simulation.hpp"

using namespace rampsim;

namespace {

std::vector<TraceRecord> cruise(int id, double v, double seconds, double dt) {
  std::vector<TraceRecord> log;
  const int ticks = static_cast<int>(std::lround(seconds / dt));
  for (int k = 1; k <= ticks; ++k) log.push_back({k * dt, id, VehicleClass::Cav, Lane::Mainline0, v * k * dt, v, 0.0});
  return log;
}

}  // namespace

TEST_CASE("efficiency") {
  CHECK(efficiency(26.0, 2.4) == doctest::Approx(10.9).epsilon(0.2 / 10.9));
  CHECK(efficiency(26.0, 2.4) == doctest::Approx(10.833333333333334).epsilon(1e-12));
  CHECK(efficiency(0.0, 1.0) == 0.0);
  CHECK(efficiency(30.0, 1.5) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK_THROWS_AS(efficiency(1.0, 0.0), std::domain_error);
}

TEST_CASE("VMT and VHT from a log") {
  const double dt = 0.1;
  const auto one = cruise(1, 20.0, 100.0, dt);
  const auto t1 = accumulate_vmt_vht(one, dt);
  CHECK(t1.vmt_miles == doctest::Approx(2000.0 / kMetersPerMile).epsilon(1e-9));
  CHECK(t1.vmt_miles == doctest::Approx(1.2427).epsilon(1e-4));
  CHECK(t1.vht_hours == doctest::Approx(100.0 / 3600.0).epsilon(1e-9));
  CHECK(efficiency(t1.vmt_miles, t1.vht_hours) == doctest::Approx(44.74).epsilon(1e-3));

  const auto empty = accumulate_vmt_vht(std::vector<TraceRecord>{}, dt);
  CHECK(empty.vmt_miles == 0.0);
  CHECK(empty.vht_hours == 0.0);

  auto two = one;
  const auto other = cruise(2, 20.0, 100.0, dt);
  two.insert(two.end(), other.begin(), other.end());
  const auto t2 = accumulate_vmt_vht(two, dt);
  CHECK(t2.vmt_miles == doctest::Approx(2.0 * t1.vmt_miles).epsilon(1e-12));
  CHECK(t2.vht_hours == doctest::Approx(2.0 * t1.vht_hours).epsilon(1e-12));
}

TEST_CASE("volatility") {
  const std::vector<double> s{1.0, 2.0, 3.0};
  auto v = volatility(s);
  CHECK(v.s_dev == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v.d_mean == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  v = volatility(std::vector<double>(7, 4.25));
  CHECK(v.s_dev == 0.0);
  CHECK(v.d_mean == 0.0);

  for (double c : {-3.0, 0.5, 12.0}) {
    v = volatility(std::vector<double>{10.0, 10.0 + c});
    CHECK(v.s_dev == doctest::Approx(std::abs(c) / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(v.d_mean == doctest::Approx(std::abs(c) / 2.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(volatility(std::vector<double>{1.0}), std::domain_error);
}

TEST_CASE("streaming accumulator agrees with the batch functions") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> speed(20.0, 4.0), accel(0.0, 1.0);
  MetricsAccumulator acc(0.1);
  std::vector<TraceRecord> log;
  std::vector<double> vs, as;
  for (int i = 0; i < 5000; ++i) {
    TraceRecord r{0.1 * i, i % 13, VehicleClass::Legacy, Lane::Mainline0, 0.0, std::abs(speed(rng)), accel(rng)};
    acc.add(r);
    log.push_back(r);
    vs.push_back(r.v);
    as.push_back(r.a);
  }
  RunMetrics m;
  acc.finish(m);
  const auto totals = accumulate_vmt_vht(log, 0.1);
  CHECK(m.vmt_miles == doctest::Approx(totals.vmt_miles).epsilon(1e-12));
  CHECK(m.vht_hours == doctest::Approx(totals.vht_hours).epsilon(1e-12));
  CHECK(m.velocity_std_dev_mps == doctest::Approx(volatility(vs).s_dev).epsilon(1e-9));
  CHECK(m.velocity_mean_abs_dev_mps == doctest::Approx(volatility(vs).d_mean).epsilon(1e-9));
  CHECK(m.accel_std_dev == doctest::Approx(volatility(as).s_dev).epsilon(1e-9));
  CHECK(m.accel_mean_abs_dev == doctest::Approx(volatility(as).d_mean).epsilon(1e-9));

  RunMetrics none;
  MetricsAccumulator(0.1).finish(none);
  CHECK(none.efficiency_mph == 0.0);
}

TEST_CASE("trajectory logs round-trip and reject garbage") {
  std::ostringstream out;
  write_trajectory_header(out);
  const TraceRecord r{12.3, 42, VehicleClass::AttackedCav, Lane::Ramp, 812.125, 17.5, -1.25, true, true};
  write_trajectory_record(out, r);
  std::istringstream in(out.str());
  const auto back = read_trajectory(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0].t == doctest::Approx(12.3));
  CHECK(back[0].vehicle_id == 42);
  CHECK(back[0].cls == VehicleClass::AttackedCav);
  CHECK(back[0].lane == Lane::Ramp);
  CHECK(back[0].s == doctest::Approx(812.125));
  CHECK(back[0].under_attack);

  for (const char* bad : {"wrong,header\n", "t,vehicle_id,class,lane,s,v,a,controlled,under_attack\n1,2,cav\n",
                          "t,vehicle_id,class,lane,s,v,a,controlled,under_attack\n1,2,bus,ramp,1,1,0,0,0\n",
                          "t,vehicle_id,class,lane,s,v,a,controlled,under_attack\n1,2,cav,ramp,1,-1,0,0,0\n"}) {
    std::istringstream bad_in(bad);
    CHECK_THROWS_AS(read_trajectory(bad_in), std::runtime_error);
  }
}

TEST_CASE("time-space export") {
  std::ostringstream empty;
  time_space_export(std::vector<TraceRecord>{}, 1000.0, empty);
  CHECK(empty.str() == "vehicle_id,class,ever_attacked,lane,t,distance_to_merge_m\n");

  const auto log = cruise(3, 29.0, 10.0, 0.1);
  std::ostringstream out;
  time_space_export(log, 1000.0, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  double t0 = 0, d0 = 0, t1 = 0, d1 = 0;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto c4 = line.rfind(',');
    const auto c3 = line.rfind(',', c4 - 1);
    const double t = std::stod(line.substr(c3 + 1, c4 - c3 - 1));
    const double d = std::stod(line.substr(c4 + 1));
    if (rows == 0) { t0 = t; d0 = d; }
    t1 = t;
    d1 = d;
    ++rows;
  }
  CHECK(rows == 100);
  CHECK((d0 - d1) / (t1 - t0) == doctest::Approx(29.0).epsilon(1e-3));
}

TEST_CASE("stop-wave detector") {
  std::vector<TraceRecord> log;
  // Three vehicles slowing one after another, 4 s apart.
  for (int veh = 0; veh < 3; ++veh) {
    for (int k = 0; k < 600; ++k) {
      const double t = 0.1 * k;
      const bool slow = t >= 10.0 + 4.0 * veh && t < 18.0 + 4.0 * veh;
      log.push_back({t, veh, VehicleClass::Legacy, Lane::Mainline0, 0.0, slow ? 1.0 : 20.0, 0.0});
    }
  }
  CHECK(count_stop_waves(log) == 1);
  CHECK(count_stop_waves(cruise(1, 25.0, 60.0, 0.1)) == 0);

  ScenarioConfig c;
  c.v2c_ratio = 0.9;
  c.penetration_rate = 0.0;
  c.sim_duration_s = 600.0;
  std::ostringstream traj;
  Simulation sim(c, {&traj});
  sim.run();
  std::istringstream in(traj.str());
  CHECK(count_stop_waves(read_trajectory(in)) >= 1);
}
