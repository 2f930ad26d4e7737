#include "rampsim/attacks.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace rampsim {

Bsm emergency_stop_spoof(const Bsm& bsm, SpoofTarget& target) {
  Bsm spoofed = bsm;
  if (!target.spoofing_flag) {
    target.spoofing_location = bsm.pos;
    target.spoofing_flag = true;
  }
  target.spoofing_speed = 0.0;
  target.last_time_stamp_s = bsm.timestamp_s;
  spoofed.pos = target.spoofing_location;
  spoofed.speed = target.spoofing_speed;
  return spoofed;
}

Bsm position_drift_spoof(const Bsm& bsm, SpoofTarget& target, double accel, Vec2 direction) {
  if (!target.spoofing_flag) {
    target.last_time_stamp_s = bsm.timestamp_s;
    target.spoofing_location = bsm.pos;
    target.spoofing_speed = bsm.speed;
    target.spoofing_flag = true;
  } else {
    if (bsm.timestamp_s < target.last_time_stamp_s) {
      throw std::invalid_argument("non-monotonic BSM timestamp from sender " + std::to_string(bsm.sender_id));
    }
    if (target.spoofing_speed > 0.0) {
      const double elapsed = bsm.timestamp_s - target.last_time_stamp_s;
      // Stop exactly where the phantom comes to rest instead of rolling back.
      const double dt = std::min(elapsed, target.spoofing_speed / -accel);
      const double advance = target.spoofing_speed * dt + 0.5 * accel * dt * dt;
      target.spoofing_location = target.spoofing_location + advance * direction;
      target.spoofing_speed = std::max(0.0, target.spoofing_speed + accel * elapsed);
      target.last_time_stamp_s = bsm.timestamp_s;
    }
  }
  Bsm spoofed = bsm;
  spoofed.pos = target.spoofing_location;
  spoofed.speed = target.spoofing_speed;
  return spoofed;
}

Attacker::Attacker(AttackStrategy strategy, double drift_accel, const Geometry& geometry)
    : strategy_(strategy), drift_accel_(drift_accel), geometry_(geometry) {}

Bsm Attacker::intercept(const Bsm& bsm) {
  SpoofTarget& target = targets_[bsm.sender_id];
  switch (strategy_) {
    case AttackStrategy::EmergencyStop: return emergency_stop_spoof(bsm, target);
    case AttackStrategy::PositionDrift:
      return position_drift_spoof(bsm, target, drift_accel_, geometry_.lane_direction(bsm.lane));
    case AttackStrategy::None: break;
  }
  return bsm;
}

}  // namespace rampsim
