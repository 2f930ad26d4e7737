#include "rampsim/controller.hpp"

#include <algorithm>

namespace rampsim {

std::vector<Reception> VehicleString::receptions() const {
  std::vector<Reception> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(m.reception);
  return out;
}

std::vector<VehicleString> sequence_vehicles(std::span<const Reception> receptions, const Geometry& geometry,
                                             double split_gap_m) {
  // Latest reception per sender.
  std::map<int, const Reception*> latest;
  for (const auto& r : receptions) {
    auto [it, inserted] = latest.try_emplace(r.bsm.sender_id, &r);
    if (!inserted && r.bsm.timestamp_s > it->second->bsm.timestamp_s) it->second = &r;
  }

  std::vector<StringMember> members;
  members.reserve(latest.size());
  for (const auto& [id, r] : latest) {
    const MapMatch match = geometry.map_match(r->bsm.pos);
    if (match.distance_to_merge_m < 0.0) continue;
    members.push_back({id, match.distance_to_merge_m, r->bsm.speed, match.approach, *r});
  }
  std::sort(members.begin(), members.end(), [](const StringMember& a, const StringMember& b) {
    if (a.declared_distance_to_merge_m != b.declared_distance_to_merge_m) {
      return a.declared_distance_to_merge_m < b.declared_distance_to_merge_m;
    }
    return a.vehicle_id < b.vehicle_id;
  });

  std::vector<VehicleString> strings;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i == 0 || members[i].declared_distance_to_merge_m - members[i - 1].declared_distance_to_merge_m >=
                      split_gap_m) {
      strings.emplace_back();
    }
    strings.back().members.push_back(members[i]);
  }
  return strings;
}

double motion_control_accel(double s_headway, double s_length, double s_safe_gap, double v_front, double v_self,
                            const ControlGains& gains) {
  const double a = gains.k_d * (s_headway - s_length - s_safe_gap) + (v_front - v_self) * gains.k_v;
  return std::clamp(a, gains.a_min, gains.a_max);
}

double recommended_speed(double accel, double t_step, double v_self_prev, double v_max) {
  return std::clamp(accel * t_step + v_self_prev, 0.0, v_max);
}

std::vector<Advice> advise(std::span<const VehicleString> strings, const ScenarioConfig& config) {
  const ControllerParams& c = config.controller;
  const ControlGains gains{c.k_d, c.k_v, config.accel_min_mps2, config.accel_max_mps2};
  const double v_max = config.network.speed_limit_mps;
  const double zone_length = config.network.control_zone.end - config.network.control_zone.start;

  std::vector<Advice> out;
  for (std::size_t sid = 0; sid < strings.size(); ++sid) {
    const auto& members = strings[sid].members;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const StringMember& self = members[k];
      if (self.declared_distance_to_merge_m > zone_length) continue;
      // A mainline follower already level with a ramp predecessor cannot
      // fall back behind it; that predecessor merges after it instead.
      std::size_t p = k;
      while (p > 0 && self.approach == Approach::Mainline && members[p - 1].approach == Approach::Ramp &&
             self.declared_distance_to_merge_m - members[p - 1].declared_distance_to_merge_m <
                 config.vehicle_length_m + config.krauss.min_gap_m) {
        --p;
      }
      double advisory = v_max;
      if (p > 0) {
        const StringMember& front = members[p - 1];
        const double headway = self.declared_distance_to_merge_m - front.declared_distance_to_merge_m;
        const double safe_gap = c.safe_gap_m + c.time_gap_s * self.declared_speed_mps;
        const double accel = motion_control_accel(headway, config.vehicle_length_m, safe_gap,
                                                  front.declared_speed_mps, self.declared_speed_mps, gains);
        advisory = recommended_speed(accel, config.time_step_s, self.declared_speed_mps, v_max);
      }
      out.push_back({self.vehicle_id, static_cast<int>(sid), static_cast<int>(k), advisory,
                     self.declared_distance_to_merge_m, self.declared_speed_mps});
    }
  }
  return out;
}

}  // namespace rampsim
