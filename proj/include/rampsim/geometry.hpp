#pragma once

#include "rampsim/scenario.hpp"

namespace rampsim {

enum class Approach : std::uint8_t { Mainline, Ramp };

struct MapMatch {
  Approach approach = Approach::Mainline;
  double distance_to_merge_m = 0.0;
};

/// World-frame layout of a RoadNetwork.
///
/// Mainline lanes run along +x with lane 0 centred on y = 0 and lane 1 one
/// lane width to the left. The ramp is a straight segment meeting the right
/// edge of lane 0 at the merge point, inclined by ramp_angle_deg.
class Geometry {
 public:
  explicit Geometry(const RoadNetwork& network);

  const RoadNetwork& network() const { return network_; }

  Vec2 world_position(Lane lane, double s) const;
  /// Unit vector of travel direction on a lane.
  Vec2 lane_direction(Lane lane) const;
  double distance_to_merge(double s) const { return network_.merge_point_s - s; }

  /// Projects a declared world position onto the nearer approach.
  MapMatch map_match(Vec2 position) const;

  bool in_rsu_range(Vec2 p) const;
  bool in_attacker_range(Vec2 p) const;
  /// Overlap of RSU and attacker coverage.
  bool in_effective_area(Vec2 p) const { return in_rsu_range(p) && in_attacker_range(p); }

  bool in_control_zone(double s) const { return network_.control_zone.contains(s); }
  bool in_buffer_zone(double s) const { return network_.buffer_zone.contains(s); }
  bool in_merge_window(double s) const {
    return s >= network_.merge_point_s - network_.merge_window_m && s <= network_.merge_point_s;
  }

 private:
  RoadNetwork network_;
  Vec2 ramp_end_;
  Vec2 ramp_dir_;
};

}  // namespace rampsim
