#include "rampsim/geometry.hpp"

#include <cmath>
#include <numbers>

namespace rampsim {

Geometry::Geometry(const RoadNetwork& network) : network_(network) {
  const double angle = network_.ramp_angle_deg * std::numbers::pi / 180.0;
  ramp_end_ = {network_.merge_point_s, -network_.lane_width_m};
  ramp_dir_ = {std::cos(angle), std::sin(angle)};
}

Vec2 Geometry::world_position(Lane lane, double s) const {
  switch (lane) {
    case Lane::Mainline0: return {s, 0.0};
    case Lane::Mainline1: return {s, network_.lane_width_m};
    case Lane::Ramp: return ramp_end_ - distance_to_merge(s) * ramp_dir_;
  }
  return {};
}

Vec2 Geometry::lane_direction(Lane lane) const {
  return lane == Lane::Ramp ? ramp_dir_ : Vec2{1.0, 0.0};
}

MapMatch Geometry::map_match(Vec2 p) const {
  const double mainline_d = network_.merge_point_s - p.x;
  const double lateral_main =
      std::min(std::abs(p.y), std::abs(p.y - network_.lane_width_m));

  const Vec2 rel = ramp_end_ - p;
  const double ramp_d = dot(rel, ramp_dir_);
  const double lateral_ramp = std::abs(rel.x * ramp_dir_.y - rel.y * ramp_dir_.x);

  if (ramp_d > 0.0 && lateral_ramp < lateral_main) return {Approach::Ramp, ramp_d};
  return {Approach::Mainline, mainline_d};
}

bool Geometry::in_rsu_range(Vec2 p) const {
  return distance(p, network_.rsu_position) <= network_.rsu_range_m;
}

bool Geometry::in_attacker_range(Vec2 p) const {
  return distance(p, network_.attacker_position) <= network_.attacker_range_m;
}

}  // namespace rampsim
