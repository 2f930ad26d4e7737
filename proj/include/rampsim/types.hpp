#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rampsim {

/// Physical lanes of the merge network. Mainline0 is the rightmost lane,
/// the one the ramp joins.
enum class Lane : std::uint8_t { Mainline0, Mainline1, Ramp };

enum class VehicleClass : std::uint8_t { Legacy, Cav, AttackedCav };

enum class AttackStrategy : std::uint8_t { None, EmergencyStop, PositionDrift };

/// Where an arrival enters the network.
enum class Origin : std::uint8_t { MainlineLane0, MainlineLane1, Ramp };

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

inline bool is_cav(VehicleClass c) { return c != VehicleClass::Legacy; }

std::string_view to_string(Lane lane);
std::string_view to_string(VehicleClass cls);
std::string_view to_string(AttackStrategy strategy);
std::string_view to_string(Origin origin);

std::optional<Lane> parse_lane(std::string_view text);
std::optional<VehicleClass> parse_vehicle_class(std::string_view text);
/// Accepts the long names ("emergency_stop") and the CLI short forms ("stop", "drift").
std::optional<AttackStrategy> parse_attack_strategy(std::string_view text);

Lane lane_of(Origin origin);

/// Malformed or inconsistent scenario parameters. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model invariant was broken mid-run (collision, disorder). Maps to CLI exit code 2.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rampsim
