#pragma once

#include <map>
#include <span>
#include <vector>

#include "rampsim/geometry.hpp"
#include "rampsim/scenario.hpp"
#include "rampsim/v2x.hpp"

namespace rampsim {

struct StringMember {
  int vehicle_id = 0;
  double declared_distance_to_merge_m = 0.0;
  double declared_speed_mps = 0.0;
  Approach approach = Approach::Mainline;
  Reception reception;
};

/// Merging CAVs controlled as one unit, nearest to the merge point first.
struct VehicleString {
  std::vector<StringMember> members;

  const StringMember& leader() const { return members.front(); }
  std::size_t size() const { return members.size(); }
  std::vector<Reception> receptions() const;
};

/// Orders the senders of this tick's receptions by declared distance to the
/// merge point (both approaches interleaved) and cuts the order wherever two
/// neighbours are at least `split_gap_m` apart. Senders already past the
/// merge point are left out. When a sender appears twice the reception with
/// the later timestamp is kept.
std::vector<VehicleString> sequence_vehicles(std::span<const Reception> receptions, const Geometry& geometry,
                                             double split_gap_m);

struct ControlGains {
  double k_d = 0.1;
  double k_v = 0.6;
  double a_min = -4.0;
  double a_max = 3.0;
};

/// k_d (headway - length - safe_gap) + k_v (v_front - v_self), clamped to [a_min, a_max].
double motion_control_accel(double s_headway, double s_length, double s_safe_gap, double v_front, double v_self,
                            const ControlGains& gains);

/// accel * t_step + v_self_prev, floored at 0 and capped at v_max.
double recommended_speed(double accel, double t_step, double v_self_prev, double v_max);

struct Advice {
  int vehicle_id = 0;
  int string_id = 0;
  int position_in_string = 0;
  double advisory_mps = 0.0;
  /// Declared state of the addressee the advisory was computed from.
  double reference_distance_to_merge_m = 0.0;
  double reference_speed_mps = 0.0;
};

/// Leaders are told to drive at the speed limit; each follower gets the
/// speed recommended from its predecessor's declared state. A mainline
/// follower skips ramp predecessors it is already level with (declared
/// headway under one vehicle length plus the Krauss minimum gap). Only senders
/// whose declared position lies in the control zone receive advice.
std::vector<Advice> advise(std::span<const VehicleString> strings, const ScenarioConfig& config);

}  // namespace rampsim
