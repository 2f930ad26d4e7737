#include "doctest.h"

#include <random>

#include "rampsim/traffic.hpp"

using namespace rampsim;

namespace {

VehicleState car(double s, double v, Lane lane = Lane::Mainline0, VehicleClass cls = VehicleClass::Legacy) {
  VehicleState x;
  x.s = s;
  x.v = v;
  x.lane = lane;
  x.cls = cls;
  return x;
}

MotionLimits limits() { return {29.0, -4.0, 3.0, 0.1}; }

ScenarioConfig quiet_config() {
  ScenarioConfig c;
  c.krauss.eta_max_mps = 0.0;
  return c;
}

}  // namespace

TEST_CASE("Krauss safe speed") {
  CHECK(krauss_safe_speed(20.0, 50.0, 30.0, 1.0, 1.0) == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(krauss_safe_speed(17.5, 30.0, 30.0, 1.0, 1.0) == doctest::Approx(17.5).epsilon(1e-12));
  // -5 before the clamp
  CHECK(krauss_safe_speed(0.0, 0.0, 10.0, 1.0, 1.0) == 0.0);
}

TEST_CASE("Krauss step without a leader") {
  KraussParams p;
  auto self = car(100.0, 20.0);
  auto step = krauss_step(self, nullptr, p, limits(), 0.0);
  CHECK(step.v_next == doctest::Approx(20.3).epsilon(1e-12));
  CHECK(step.s_next == doctest::Approx(102.03).epsilon(1e-12));

  // The perturbation alone never brakes harder than a_min.
  self.v = 29.0;
  for (double eta : {0.0, 0.2, 0.4}) {
    step = krauss_step(self, nullptr, p, limits(), eta);
    CHECK(step.v_next == doctest::Approx(29.0 - eta).epsilon(1e-12));
  }
  CHECK(krauss_step(self, nullptr, p, limits(), 0.5).v_next == doctest::Approx(28.6).epsilon(1e-12));
}

TEST_CASE("Krauss step at standstill behind a blocker") {
  KraussParams p;
  const auto leader = car(105.0 + p.min_gap_m, 0.0);
  const auto self = car(100.0, 0.0);
  const auto step = krauss_step(self, &leader, p, limits(), 0.3);
  CHECK(step.v_next == 0.0);
  CHECK(step.s_next == 100.0);
}

TEST_CASE("Krauss random step stays within its perturbation band") {
  KraussParams p;
  std::mt19937_64 rng(5);
  const auto self = car(0.0, 29.0);
  for (int i = 0; i < 200; ++i) {
    const auto step = krauss_step(self, nullptr, p, limits(), rng);
    CHECK(step.v_next <= 29.0);
    CHECK(step.v_next >= 29.0 - p.eta_max_mps - 1e-12);
  }
}

TEST_CASE("stop-safe speed keeps a follower behind a braking leader") {
  const double dt = 0.1;
  for (double gap : {0.5, 5.0, 20.0, 60.0}) {
    for (double vl : {0.0, 10.0, 25.0}) {
      const double v = stop_safe_speed(gap, vl, 4.0, dt);
      CHECK(brake_distance(v, 4.0, dt) <= gap + brake_distance(std::max(0.0, vl - 0.4), 4.0, dt) + 1e-9);
    }
  }
  CHECK(brake_distance(0.0, 4.0, 0.1) == 0.0);
}

TEST_CASE("gatekeeper takes the lower speed") {
  CHECK(gatekeeper(10.0, 12.0) == 10.0);
  CHECK(gatekeeper(12.0, 10.0) == 10.0);
  CHECK(gatekeeper(7.5, 7.5) == 7.5);
}

TEST_CASE("merge gap acceptance") {
  GapAcceptance g = gap_acceptance(ScenarioConfig{});
  const auto mover = car(800.0, 10.0, Lane::Ramp);
  CHECK(merge_decision(mover, nullptr, nullptr, g));

  for (double v : {0.0, 10.0, 29.0}) {
    const auto close_leader = car(800.0 + 5.0 + 2.0, v);
    CHECK_FALSE(merge_decision(mover, &close_leader, nullptr, g));
  }

  const auto fast_follower = car(800.0 - 5.0 - 10.0, 25.0);
  CHECK_FALSE(merge_decision(mover, nullptr, &fast_follower, g));

  const auto distant_follower = car(600.0, 10.0);
  CHECK(merge_decision(mover, nullptr, &distant_follower, g));
}

TEST_CASE("discretionary lane changes") {
  const ScenarioConfig c = quiet_config();

  SUBCASE("no incentive on an empty road") {
    WorldState w(c, {});
    const int id = w.add_vehicle(car(300.0, 25.0));
    CHECK_FALSE(discretionary_lane_change(*w.find(id), w).has_value());
  }
  SUBCASE("slow leader, empty left lane") {
    WorldState w(c, {});
    w.add_vehicle(car(340.0, 5.0));
    const int id = w.add_vehicle(car(300.0, 25.0));
    const auto target = discretionary_lane_change(*w.find(id), w);
    REQUIRE(target.has_value());
    CHECK(*target == Lane::Mainline1);
  }
  SUBCASE("left lane attractive but its follower is 1 m behind") {
    WorldState w(c, {});
    w.add_vehicle(car(340.0, 5.0));
    const int id = w.add_vehicle(car(300.0, 25.0));
    w.add_vehicle(car(300.0 - 5.0 - 1.0, 25.0, Lane::Mainline1));
    CHECK_FALSE(discretionary_lane_change(*w.find(id), w).has_value());
  }
}

TEST_CASE("empty world only advances the clock") {
  WorldState w(quiet_config(), {});
  world_step(w, {});
  CHECK(w.clock() == doctest::Approx(0.1));
  CHECK(w.vehicles().empty());
  CHECK(w.last_tick_states().empty());
}

TEST_CASE("a lone vehicle follows the free-flow Krauss trajectory") {
  const ScenarioConfig c = quiet_config();
  WorldState w(c, {});
  const int id = w.add_vehicle(car(100.0, 10.0));
  VehicleState ref = *w.find(id);
  for (int i = 0; i < 50; ++i) {
    world_step(w, {});
    const auto step = krauss_step(ref, nullptr, c.krauss, motion_limits(c), 0.0);
    ref.v = step.v_next;
    ref.s = step.s_next;
    const VehicleState* v = w.find(id);
    REQUIRE(v != nullptr);
    CHECK(v->v == doctest::Approx(ref.v).epsilon(1e-12));
    CHECK(v->s == doctest::Approx(ref.s).epsilon(1e-12));
  }
}

TEST_CASE("gatekeeper binds for a controlled follower of a stopped leader") {
  const ScenarioConfig c = quiet_config();
  WorldState w(c, {});
  w.add_vehicle(car(760.0, 0.0, Lane::Mainline0, VehicleClass::Cav));
  const int id = w.add_vehicle(car(700.0, 20.0, Lane::Mainline0, VehicleClass::Cav));
  const VehicleState before = *w.find(id);
  REQUIRE(before.controlled);
  const VehicleState leader = *w.leader(Lane::Mainline0, before.s, id);

  world_step(w, {{id, 50.0}});
  const double v_safe = krauss_safe_speed(c.krauss, before.v, leader.v, leader.s - leader.length - before.s);
  const double floor = before.v + c.accel_min_mps2 * c.time_step_s;
  CHECK(w.find(id)->v == doctest::Approx(std::max(v_safe, floor)).epsilon(1e-12));
  CHECK(w.find(id)->v < 20.0);
}

TEST_CASE("advisories to uncontrolled vehicles are ignored") {
  const ScenarioConfig c = quiet_config();
  WorldState a(c, {}), b(c, {});
  const int id = a.add_vehicle(car(100.0, 20.0));
  b.add_vehicle(car(100.0, 20.0));
  world_step(a, {{id, 0.0}});
  world_step(b, {});
  CHECK(a.find(id)->v == b.find(id)->v);
}

TEST_CASE("worlds with demand keep order and conserve vehicles") {
  ScenarioConfig c;
  c.v2c_ratio = 0.9;
  c.penetration_rate = 0.5;
  c.sim_duration_s = 300.0;
  std::mt19937_64 rng(derive_seed(c.seed, stream::kArrivals));
  WorldState w(c, generate_arrivals(c, rng));
  while (!w.finished()) {
    world_step(w, {});
    CHECK(w.arrivals_due() == w.spawned() + w.blocked());
    CHECK(static_cast<std::size_t>(w.spawned()) == w.departed().size() + w.vehicles().size());
  }
  CHECK(w.merges() > 0);
  CHECK(w.departed().size() > 0);
}
