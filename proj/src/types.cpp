#include "rampsim/types.hpp"

namespace rampsim {

std::string_view to_string(Lane lane) {
  switch (lane) {
    case Lane::Mainline0: return "mainline_0";
    case Lane::Mainline1: return "mainline_1";
    case Lane::Ramp: return "ramp";
  }
  return "?";
}

std::string_view to_string(VehicleClass cls) {
  switch (cls) {
    case VehicleClass::Legacy: return "legacy";
    case VehicleClass::Cav: return "cav";
    case VehicleClass::AttackedCav: return "attacked_cav";
  }
  return "?";
}

std::string_view to_string(AttackStrategy strategy) {
  switch (strategy) {
    case AttackStrategy::None: return "none";
    case AttackStrategy::EmergencyStop: return "emergency_stop";
    case AttackStrategy::PositionDrift: return "position_drift";
  }
  return "?";
}

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::MainlineLane0: return "mainline_lane0";
    case Origin::MainlineLane1: return "mainline_lane1";
    case Origin::Ramp: return "ramp";
  }
  return "?";
}

std::optional<Lane> parse_lane(std::string_view text) {
  if (text == "mainline_0") return Lane::Mainline0;
  if (text == "mainline_1") return Lane::Mainline1;
  if (text == "ramp") return Lane::Ramp;
  return std::nullopt;
}

std::optional<VehicleClass> parse_vehicle_class(std::string_view text) {
  if (text == "legacy") return VehicleClass::Legacy;
  if (text == "cav") return VehicleClass::Cav;
  if (text == "attacked_cav") return VehicleClass::AttackedCav;
  return std::nullopt;
}

std::optional<AttackStrategy> parse_attack_strategy(std::string_view text) {
  if (text == "none") return AttackStrategy::None;
  if (text == "emergency_stop" || text == "stop") return AttackStrategy::EmergencyStop;
  if (text == "position_drift" || text == "drift") return AttackStrategy::PositionDrift;
  return std::nullopt;
}

Lane lane_of(Origin origin) {
  switch (origin) {
    case Origin::MainlineLane0: return Lane::Mainline0;
    case Origin::MainlineLane1: return Lane::Mainline1;
    case Origin::Ramp: return Lane::Ramp;
  }
  return Lane::Mainline0;
}

}  // namespace rampsim
