#include "doctest.h"

#include "rampsim/attacks.hpp"

using namespace rampsim;

namespace {

Bsm message(double t, double x, double speed, int id = 7) {
  Bsm b;
  b.sender_id = id;
  b.timestamp_s = t;
  b.pos = {x, 5.0};
  b.speed = speed;
  b.accel = 1.25;
  return b;
}

const Vec2 kEast{1.0, 0.0};

}  // namespace

TEST_CASE("emergency stop freezes the entrance position and zeroes speed") {
  SpoofTarget target;
  Bsm out = emergency_stop_spoof(message(0.0, 1000.0, 25.0), target);
  CHECK(out.pos == Vec2{1000.0, 5.0});
  CHECK(out.speed == 0.0);
  CHECK(out.accel == 1.25);
  CHECK(target.spoofing_flag);

  for (int k = 1; k < 50; ++k) out = emergency_stop_spoof(message(0.1 * k, 1000.0 + 6.0 * k, 25.0), target);
  CHECK(out.pos == Vec2{1000.0, 5.0});
  CHECK(out.speed == 0.0);
  CHECK(out.timestamp_s == doctest::Approx(4.9));
}

TEST_CASE("emergency stop is a fixed point for a stopped target") {
  SpoofTarget target;
  const Bsm in = message(3.0, 640.0, 0.0);
  const Bsm out = emergency_stop_spoof(in, target);
  CHECK(out.pos == in.pos);
  CHECK(out.speed == in.speed);
  CHECK(out.timestamp_s == in.timestamp_s);
}

TEST_CASE("position drift decelerates a phantom from the true state") {
  SpoofTarget target;
  Bsm out = position_drift_spoof(message(0.0, 1000.0, 20.0), target, -2.5, kEast);
  CHECK(out.pos.x == 1000.0);
  CHECK(out.speed == 20.0);

  out = position_drift_spoof(message(0.1, 1002.0, 20.0), target, -2.5, kEast);
  CHECK(out.pos.x == doctest::Approx(1001.9875).epsilon(1e-12));
  CHECK(out.speed == doctest::Approx(19.75).epsilon(1e-12));
  CHECK(out.timestamp_s == 0.1);

  for (int k = 2; k <= 120; ++k) out = position_drift_spoof(message(0.1 * k, 1000.0 + 20.0 * 0.1 * k, 20.0), target, -2.5, kEast);
  CHECK(out.speed == 0.0);
  CHECK(out.pos.x == doctest::Approx(1080.0).epsilon(1e-9));
  CHECK(out.pos.y == 5.0);
}

TEST_CASE("drift accumulates while the target keeps moving") {
  SpoofTarget target;
  double last_gap = -1.0;
  double last_speed = 1e9;
  for (int k = 0; k < 300; ++k) {
    const double t = 0.1 * k;
    const double x = 600.0 + 22.0 * t;
    const Bsm out = position_drift_spoof(message(t, x, 22.0), target, -2.5, kEast);
    const double gap = x - out.pos.x;
    CHECK(gap >= last_gap - 1e-9);
    CHECK(out.speed <= last_speed);
    CHECK(out.speed >= 0.0);
    last_gap = gap;
    last_speed = out.speed;
  }
}

TEST_CASE("drift rejects time running backwards") {
  SpoofTarget target;
  position_drift_spoof(message(1.0, 0.0, 10.0), target, -2.5, kEast);
  position_drift_spoof(message(1.1, 1.0, 10.0), target, -2.5, kEast);
  CHECK_THROWS_AS(position_drift_spoof(message(1.0, 2.0, 10.0), target, -2.5, kEast), std::invalid_argument);
}

TEST_CASE("attacker keeps per-target state until released") {
  const Geometry g{RoadNetwork{}};
  Attacker a(AttackStrategy::EmergencyStop, -2.5, g);
  a.intercept(message(0.0, 700.0, 20.0, 1));
  a.intercept(message(0.0, 710.0, 20.0, 2));
  CHECK(a.tracking(1));
  CHECK(a.tracking(2));
  CHECK(a.intercept(message(0.1, 702.0, 20.0, 1)).pos.x == 700.0);
  a.release(1);
  CHECK_FALSE(a.tracking(1));
  // A fresh traversal starts a fresh freeze.
  CHECK(a.intercept(message(5.0, 800.0, 20.0, 1)).pos.x == 800.0);
}
