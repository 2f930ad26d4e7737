#pragma once

#include <map>

#include "rampsim/geometry.hpp"
#include "rampsim/v2x.hpp"

namespace rampsim {

/// What the man in the middle remembers about one target.
struct SpoofTarget {
  bool spoofing_flag = false;
  Vec2 spoofing_location;
  double spoofing_speed = 0.0;
  double last_time_stamp_s = 0.0;
};

/// Freezes the reported location at the first intercepted position and reports
/// zero speed from the first message on. Only position and speed change.
Bsm emergency_stop_spoof(const Bsm& bsm, SpoofTarget& target);

/// Reports a phantom that starts from the true state and decelerates at
/// `accel` (negative) along `direction` until it stands still. Elapsed time is
/// the current minus the previous timestamp; a timestamp earlier than the
/// previous one throws std::invalid_argument.
Bsm position_drift_spoof(const Bsm& bsm, SpoofTarget& target, double accel, Vec2 direction);

/// Attacker sitting between CAVs and the RSU. Holds per-target state for as
/// long as the target stays in the effective area.
class Attacker {
 public:
  Attacker(AttackStrategy strategy, double drift_accel, const Geometry& geometry);

  AttackStrategy strategy() const { return strategy_; }

  /// Spoofs a BSM from a target inside the effective area.
  Bsm intercept(const Bsm& bsm);
  /// Drops state for a target that left the effective area.
  void release(int sender_id) { targets_.erase(sender_id); }
  bool tracking(int sender_id) const { return targets_.count(sender_id) != 0; }
  const std::map<int, SpoofTarget>& targets() const { return targets_; }

 private:
  AttackStrategy strategy_;
  double drift_accel_;
  Geometry geometry_;
  std::map<int, SpoofTarget> targets_;
};

}  // namespace rampsim
