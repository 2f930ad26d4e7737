#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "rampsim/geometry.hpp"
#include "rampsim/scenario.hpp"

namespace rampsim {

/// Ground truth of one vehicle. `s` is the front bumper position.
struct VehicleState {
  int id = 0;
  VehicleClass cls = VehicleClass::Legacy;
  Lane lane = Lane::Mainline0;
  double s = 0.0;
  double v = 0.0;
  double a = 0.0;
  double length = 5.0;
  double entered_at = 0.0;
  bool controlled = false;
};

/// Speed and acceleration limits shared by every vehicle.
struct MotionLimits {
  double v_max = 29.0;
  double a_min = -4.0;
  double a_max = 3.0;
  double dt = 0.1;
};

MotionLimits motion_limits(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Krauss car following

/// v_leader + (gap - g_des) / (tau + tau_b), clamped below at zero.
double krauss_safe_speed(double v_leader, double gap, double g_des, double tau, double tau_b);

/// Desired gap behind a leader moving at v_leader: min_gap + tau * v_leader.
double krauss_desired_gap(const KraussParams& p, double v_leader);

/// Deceleration time: fixed tau_b_s when set, otherwise mean speed over decel.
double krauss_tau_b(const KraussParams& p, double v_self, double v_leader);

/// Safe speed of a follower with net `gap` behind a leader at `v_leader`.
double krauss_safe_speed(const KraussParams& p, double v_self, double v_leader, double gap);

/// Distance covered from now until standstill when the first step is driven
/// at v0 and every later step brakes by decel * dt (explicit Euler).
double brake_distance(double v0, double decel, double dt);

/// Largest speed for the coming step after which the follower can still stop
/// behind a leader that brakes at `decel` from now on.
double stop_safe_speed(double gap, double v_leader, double decel, double dt);

struct KraussStep {
  double v_next = 0.0;
  double s_next = 0.0;
};

/// One uncontrolled update with an explicit perturbation `eta`.
///
/// v_des = min(v_max, v + a_max dt, v_safe), v_next = max(0, v_des - eta),
/// s_next = s + v_next dt. The perturbation never pushes deceleration past
/// a_min on its own; the stop-safe bound may (emergency braking).
KraussStep krauss_step(const VehicleState& self, const VehicleState* leader, const KraussParams& params,
                       const MotionLimits& limits, double eta);

/// Same as above with eta ~ U[0, eta_max].
KraussStep krauss_step(const VehicleState& self, const VehicleState* leader, const KraussParams& params,
                       const MotionLimits& limits, std::mt19937_64& rng);

/// Target speed of a controlled CAV: the lower of the model-safe speed and the advisory.
double gatekeeper(double v_safe, double v_recommended);

// ---------------------------------------------------------------------------
// Lane changes

struct GapAcceptance {
  KraussParams krauss;
  double safe_gap_m = 15.0;
  MotionLimits limits;
};

GapAcceptance gap_acceptance(const ScenarioConfig& config);

/// Whether `mover` may take the slot between new_leader and new_follower on
/// the target lane. Null neighbours mean the slot is open on that side.
bool merge_decision(const VehicleState& mover, const VehicleState* new_leader,
                    const VehicleState* new_follower, const GapAcceptance& params);

class WorldState;

/// Speed-gain change to the adjacent mainline lane, if any.
std::optional<Lane> discretionary_lane_change(const VehicleState& vehicle, const WorldState& world);

// ---------------------------------------------------------------------------
// World

struct DepartedVehicle {
  int id = 0;
  VehicleClass cls = VehicleClass::Legacy;
  Origin origin = Origin::MainlineLane0;
  double entered_at = 0.0;
  double exited_at = 0.0;
};

/// Speed advisories the vehicles currently hold, keyed by vehicle id.
using AdvisoryMap = std::map<int, double>;

/// All vehicles on the network plus the pending arrival queues.
///
/// Confined to one execution context; world_step is not reentrant.
class WorldState {
 public:
  WorldState(const ScenarioConfig& config, std::vector<ArrivalEvent> arrivals);

  const ScenarioConfig& config() const { return config_; }
  const Geometry& geometry() const { return geometry_; }
  double clock() const { return clock_; }
  bool finished() const { return clock_ >= config_.sim_duration_s - 1e-9; }

  const std::vector<VehicleState>& vehicles() const { return vehicles_; }
  const VehicleState* find(int id) const;
  Origin origin_of(int id) const;

  /// Nearest vehicle strictly ahead of position s on `lane`.
  const VehicleState* leader(Lane lane, double s, int exclude_id = -1) const;
  /// Nearest vehicle at or behind position s on `lane`.
  const VehicleState* follower(Lane lane, double s, int exclude_id = -1) const;
  /// Vehicle ids on a lane, front first.
  std::vector<int> lane_members(Lane lane) const;
  double last_lane_change(int id) const;

  /// States of every vehicle that was on the network during the last tick,
  /// taken after integration and before retirement.
  const std::vector<VehicleState>& last_tick_states() const { return tick_states_; }
  const std::vector<DepartedVehicle>& departed() const { return departed_; }

  std::int64_t arrivals_due() const { return arrivals_due_; }
  std::int64_t spawned() const { return spawned_; }
  std::int64_t blocked() const { return blocked_; }
  /// Vehicle-seconds spent waiting for a free spawn cell.
  double blocked_wait_s() const { return blocked_wait_s_; }
  std::int64_t emergency_brakes() const { return emergency_brakes_; }
  std::int64_t lane_changes() const { return lane_changes_; }
  std::int64_t merges() const { return merges_; }

  /// Inserts a vehicle directly, bypassing the arrival queues. Test setup only.
  int add_vehicle(VehicleState state, Origin origin = Origin::MainlineLane0);

  friend void world_step(WorldState& world, const AdvisoryMap& advisories);

 private:
  struct Aux {
    std::mt19937_64 rng;
    Origin origin = Origin::MainlineLane0;
    double last_lane_change = -1e9;
  };

  void spawn_due();
  bool spawn_cell_free(Lane lane) const;
  double spawn_position(Lane lane) const;
  void rebuild_lane_order();
  void rebuild_lane_order(Lane lane);
  void move_to_lane(std::size_t index, Lane lane);
  bool is_controlled(const VehicleState& v) const;
  void check_invariants() const;
  const VehicleState* ramp_end_obstacle() const { return &ramp_end_; }

  ScenarioConfig config_;
  Geometry geometry_;
  MotionLimits limits_;
  GapAcceptance gaps_;
  double clock_ = 0.0;
  std::int64_t tick_ = 0;
  int next_id_ = 0;

  std::vector<VehicleState> vehicles_;
  std::vector<Aux> aux_;
  std::array<std::vector<std::size_t>, 3> lane_order_;  // indices into vehicles_, front first
  std::array<std::deque<ArrivalEvent>, 3> queues_;
  VehicleState ramp_end_;

  std::vector<VehicleState> tick_states_;
  std::vector<DepartedVehicle> departed_;
  std::int64_t arrivals_due_ = 0;
  std::int64_t spawned_ = 0;
  std::int64_t blocked_ = 0;
  double blocked_wait_s_ = 0.0;
  std::int64_t emergency_brakes_ = 0;
  std::int64_t lane_changes_ = 0;
  std::int64_t merges_ = 0;
};

/// Advances the world by one time step:
///  1. spawn due arrivals whose spawn cell is free (others wait),
///  2. compute every next speed from the current state (synchronous update);
///     controlled CAVs holding an advisory use gatekeeper(safe, advisory),
///     everyone else the Krauss update (CAVs with krauss.cav_eta_max_mps),
///  3. integrate positions,
///  4. discretionary lane changes, then ramp merges (ramp yields to mainline),
///  5. record tick states and retire vehicles past the network end.
/// Advisories addressed to vehicles that are not controlled are ignored.
/// Throws InvariantViolation on an overlap or ordering error.
void world_step(WorldState& world, const AdvisoryMap& advisories);

}  // namespace rampsim
