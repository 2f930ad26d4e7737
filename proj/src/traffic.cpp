#include "rampsim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rampsim {

MotionLimits motion_limits(const ScenarioConfig& config) {
  return {config.network.speed_limit_mps, config.accel_min_mps2, config.accel_max_mps2, config.time_step_s};
}

GapAcceptance gap_acceptance(const ScenarioConfig& config) {
  return {config.krauss, config.controller.safe_gap_m, motion_limits(config)};
}

// ---------------------------------------------------------------------------
// Krauss

double krauss_safe_speed(double v_leader, double gap, double g_des, double tau, double tau_b) {
  const double denom = tau + tau_b;
  if (denom <= 0.0) return std::max(0.0, v_leader);
  return std::max(0.0, v_leader + (gap - g_des) / denom);
}

double krauss_desired_gap(const KraussParams& p, double v_leader) { return p.min_gap_m + p.tau_s * v_leader; }

double krauss_tau_b(const KraussParams& p, double v_self, double v_leader) {
  if (p.tau_b_s > 0.0) return p.tau_b_s;
  return 0.5 * (v_self + v_leader) / p.decel_mps2;
}

double krauss_safe_speed(const KraussParams& p, double v_self, double v_leader, double gap) {
  return krauss_safe_speed(v_leader, gap, krauss_desired_gap(p, v_leader), p.tau_s,
                           krauss_tau_b(p, v_self, v_leader));
}

double brake_distance(double v0, double decel, double dt) {
  if (v0 <= 0.0) return 0.0;
  const double step = decel * dt;
  const double n = std::floor(v0 / step);
  return dt * ((n + 1.0) * v0 - step * n * (n + 1.0) / 2.0);
}

double stop_safe_speed(double gap, double v_leader, double decel, double dt) {
  const double budget = gap + brake_distance(std::max(0.0, v_leader - decel * dt), decel, dt) - 1e-6;
  if (budget <= 0.0) return 0.0;
  // brake_distance(v) >= v * dt, so budget / dt bounds the answer.
  double lo = 0.0;
  double hi = budget / dt;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (brake_distance(mid, decel, dt) <= budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

namespace {

double net_gap(const VehicleState& leader, const VehicleState& follower) {
  return leader.s - leader.length - follower.s;
}

}  // namespace

KraussStep krauss_step(const VehicleState& self, const VehicleState* leader, const KraussParams& params,
                       const MotionLimits& limits, double eta) {
  double v_safe = std::numeric_limits<double>::infinity();
  double v_stop = std::numeric_limits<double>::infinity();
  if (leader) {
    const double gap = net_gap(*leader, self);
    v_safe = krauss_safe_speed(params, self.v, leader->v, gap);
    v_stop = stop_safe_speed(gap, leader->v, -limits.a_min, limits.dt);
  }
  const double v_des = std::min({limits.v_max, self.v + limits.a_max * limits.dt, v_safe});
  double v_next = std::max(0.0, v_des - eta);
  v_next = std::max(v_next, std::min(v_des, std::max(0.0, self.v + limits.a_min * limits.dt)));
  v_next = std::max(0.0, std::min(v_next, v_stop));
  return {v_next, self.s + v_next * limits.dt};
}

KraussStep krauss_step(const VehicleState& self, const VehicleState* leader, const KraussParams& params,
                       const MotionLimits& limits, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> eta(0.0, params.eta_max_mps);
  return krauss_step(self, leader, params, limits, params.eta_max_mps > 0.0 ? eta(rng) : 0.0);
}

double gatekeeper(double v_safe, double v_recommended) { return std::min(v_safe, v_recommended); }

// ---------------------------------------------------------------------------
// Lane changes

bool merge_decision(const VehicleState& mover, const VehicleState* new_leader,
                    const VehicleState* new_follower, const GapAcceptance& p) {
  const double hard_decel = -p.limits.a_min;
  const double dt = p.limits.dt;
  if (new_leader) {
    const double gap = net_gap(*new_leader, mover);
    const double margin = p.krauss.tau_s * std::max(0.0, mover.v - new_leader->v);
    if (gap < p.safe_gap_m + margin) return false;
    if (stop_safe_speed(gap, new_leader->v, hard_decel, dt) < std::max(0.0, mover.v + p.limits.a_min * dt)) {
      return false;
    }
  }
  if (new_follower) {
    const double gap = net_gap(mover, *new_follower);
    if (gap <= 0.0) return false;
    const double v_safe = krauss_safe_speed(p.krauss, new_follower->v, mover.v, gap);
    if (v_safe < new_follower->v - p.krauss.comfortable_decel_mps2 * dt) return false;
    if (stop_safe_speed(gap, mover.v, hard_decel, dt) <
        std::max(0.0, new_follower->v + p.limits.a_min * dt)) {
      return false;
    }
  }
  return true;
}

namespace {

double anticipated_speed(const WorldState& world, Lane lane, const VehicleState& vehicle) {
  const auto& config = world.config();
  const VehicleState* leader = world.leader(lane, vehicle.s, vehicle.id);
  if (!leader) return config.network.speed_limit_mps;
  return std::min(config.network.speed_limit_mps,
                  krauss_safe_speed(config.krauss, vehicle.v, leader->v, net_gap(*leader, vehicle)));
}

}  // namespace

std::optional<Lane> discretionary_lane_change(const VehicleState& vehicle, const WorldState& world) {
  if (vehicle.lane == Lane::Ramp) return std::nullopt;
  if (vehicle.controlled) return std::nullopt;
  const auto& config = world.config();
  if (world.clock() - world.last_lane_change(vehicle.id) < config.lane_change.cooldown_s) return std::nullopt;

  const Lane target = vehicle.lane == Lane::Mainline0 ? Lane::Mainline1 : Lane::Mainline0;
  const double gain = anticipated_speed(world, target, vehicle) - anticipated_speed(world, vehicle.lane, vehicle);
  if (gain < config.lane_change.hysteresis_mps) return std::nullopt;

  const VehicleState* leader = world.leader(target, vehicle.s, vehicle.id);
  const VehicleState* follower = world.follower(target, vehicle.s, vehicle.id);
  if (!merge_decision(vehicle, leader, follower, gap_acceptance(config))) return std::nullopt;
  return target;
}

// ---------------------------------------------------------------------------
// World

WorldState::WorldState(const ScenarioConfig& config, std::vector<ArrivalEvent> arrivals)
    : config_(config), geometry_(config.network), limits_(motion_limits(config)), gaps_(gap_acceptance(config)) {
  for (const auto& event : arrivals) {
    queues_[static_cast<std::size_t>(lane_of(event.origin))].push_back(event);
  }
  ramp_end_.id = -1;
  ramp_end_.lane = Lane::Ramp;
  ramp_end_.s = config_.network.merge_point_s;
  ramp_end_.length = 0.0;
}

const VehicleState* WorldState::find(int id) const {
  for (const auto& v : vehicles_) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

Origin WorldState::origin_of(int id) const {
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    if (vehicles_[i].id == id) return aux_[i].origin;
  }
  return Origin::MainlineLane0;
}

double WorldState::last_lane_change(int id) const {
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    if (vehicles_[i].id == id) return aux_[i].last_lane_change;
  }
  return -1e9;
}

const VehicleState* WorldState::leader(Lane lane, double s, int exclude_id) const {
  const auto& order = lane_order_[static_cast<std::size_t>(lane)];
  // order is sorted by s descending; find the last entry with s' > s.
  const VehicleState* best = nullptr;
  auto it = std::partition_point(order.begin(), order.end(),
                                 [&](std::size_t i) { return vehicles_[i].s > s; });
  while (it != order.begin()) {
    --it;
    if (vehicles_[*it].id != exclude_id) {
      best = &vehicles_[*it];
      break;
    }
  }
  if (!best && lane == Lane::Ramp && s < ramp_end_.s) return &ramp_end_;
  return best;
}

const VehicleState* WorldState::follower(Lane lane, double s, int exclude_id) const {
  const auto& order = lane_order_[static_cast<std::size_t>(lane)];
  auto it = std::partition_point(order.begin(), order.end(),
                                 [&](std::size_t i) { return vehicles_[i].s > s; });
  for (; it != order.end(); ++it) {
    if (vehicles_[*it].id != exclude_id) return &vehicles_[*it];
  }
  return nullptr;
}

std::vector<int> WorldState::lane_members(Lane lane) const {
  std::vector<int> ids;
  for (std::size_t i : lane_order_[static_cast<std::size_t>(lane)]) ids.push_back(vehicles_[i].id);
  return ids;
}

bool WorldState::is_controlled(const VehicleState& v) const {
  return is_cav(v.cls) && (v.lane == Lane::Ramp || v.lane == Lane::Mainline0) && geometry_.in_control_zone(v.s);
}

int WorldState::add_vehicle(VehicleState state, Origin origin) {
  state.id = next_id_++;
  state.controlled = is_controlled(state);
  vehicles_.push_back(state);
  aux_.push_back({std::mt19937_64(derive_seed(config_.seed, stream::kDynamics, state.id)), origin, -1e9});
  ++spawned_;
  ++arrivals_due_;
  rebuild_lane_order(state.lane);
  return state.id;
}

void WorldState::rebuild_lane_order(Lane lane) {
  auto& order = lane_order_[static_cast<std::size_t>(lane)];
  order.clear();
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    if (vehicles_[i].lane == lane) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (vehicles_[a].s != vehicles_[b].s) return vehicles_[a].s > vehicles_[b].s;
    return vehicles_[a].id < vehicles_[b].id;
  });
}

void WorldState::rebuild_lane_order() {
  for (Lane lane : {Lane::Mainline0, Lane::Mainline1, Lane::Ramp}) rebuild_lane_order(lane);
}

void WorldState::move_to_lane(std::size_t index, Lane lane) {
  const Lane old = vehicles_[index].lane;
  vehicles_[index].lane = lane;
  aux_[index].last_lane_change = clock_;
  rebuild_lane_order(old);
  rebuild_lane_order(lane);
}

double WorldState::spawn_position(Lane lane) const {
  const double start =
      lane == Lane::Ramp ? config_.network.merge_point_s - config_.network.ramp_length_m : 0.0;
  return start + config_.vehicle_length_m;
}

bool WorldState::spawn_cell_free(Lane lane) const {
  const auto& order = lane_order_[static_cast<std::size_t>(lane)];
  if (order.empty()) return true;
  const VehicleState& last = vehicles_[order.back()];
  const double cell_end = spawn_position(lane) + config_.controller.safe_gap_m;
  return last.s - last.length >= cell_end;
}

void WorldState::spawn_due() {
  blocked_ = 0;
  for (Lane lane : {Lane::Mainline0, Lane::Mainline1, Lane::Ramp}) {
    auto& queue = queues_[static_cast<std::size_t>(lane)];
    while (!queue.empty() && queue.front().depart_time_s <= clock_ + 1e-9) {
      if (!spawn_cell_free(lane)) break;
      const ArrivalEvent event = queue.front();
      queue.pop_front();

      VehicleState v;
      v.id = next_id_++;
      v.cls = event.vehicle_class;
      v.lane = lane;
      v.s = spawn_position(lane);
      v.length = config_.vehicle_length_m;
      v.entered_at = clock_;
      v.v = limits_.v_max;
      if (const VehicleState* lead = leader(lane, v.s)) {
        const double gap = net_gap(*lead, v);
        v.v = std::min({limits_.v_max, krauss_safe_speed(config_.krauss, limits_.v_max, lead->v, gap),
                        stop_safe_speed(gap, lead->v, -limits_.a_min, limits_.dt)});
      }
      v.controlled = is_controlled(v);
      vehicles_.push_back(v);
      aux_.push_back({std::mt19937_64(derive_seed(config_.seed, stream::kDynamics, v.id)), event.origin, -1e9});
      ++spawned_;
      rebuild_lane_order(lane);
    }
    for (const auto& event : queue) {
      if (event.depart_time_s > clock_ + 1e-9) break;
      ++blocked_;
    }
  }
  arrivals_due_ = spawned_ + blocked_;
  blocked_wait_s_ += static_cast<double>(blocked_) * limits_.dt;
}

void WorldState::check_invariants() const {
  for (Lane lane : {Lane::Mainline0, Lane::Mainline1, Lane::Ramp}) {
    const auto& order = lane_order_[static_cast<std::size_t>(lane)];
    for (std::size_t k = 1; k < order.size(); ++k) {
      const VehicleState& lead = vehicles_[order[k - 1]];
      const VehicleState& follow = vehicles_[order[k]];
      const double gap = net_gap(lead, follow);
      if (gap < -1e-6) {
        std::ostringstream msg;
        msg << "overlap on " << to_string(lane) << " at t=" << clock_ << ": vehicle " << follow.id
            << " (s=" << follow.s << ", v=" << follow.v << ") and leader " << lead.id << " (s=" << lead.s
            << ", v=" << lead.v << "), gap " << gap;
        throw InvariantViolation(msg.str());
      }
    }
  }
  for (const auto& v : vehicles_) {
    if (v.v < 0.0 || !std::isfinite(v.s)) {
      throw InvariantViolation("invalid state for vehicle " + std::to_string(v.id));
    }
    if (v.lane == Lane::Ramp && v.s > config_.network.merge_point_s + 1e-6) {
      throw InvariantViolation("vehicle " + std::to_string(v.id) + " ran past the ramp end");
    }
  }
}

void world_step(WorldState& w, const AdvisoryMap& advisories) {
  const MotionLimits& lim = w.limits_;
  w.spawn_due();
  w.rebuild_lane_order();

  // Synchronous speed update from the state at the start of the tick.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v_next(w.vehicles_.size());
  for (std::size_t i = 0; i < w.vehicles_.size(); ++i) {
    const VehicleState& self = w.vehicles_[i];
    // One draw per vehicle and tick whatever the class, so streams stay aligned.
    const double eta = unit(w.aux_[i].rng) *
                       (is_cav(self.cls) ? w.config_.krauss.cav_eta_max_mps : w.config_.krauss.eta_max_mps);
    const VehicleState* lead = w.leader(self.lane, self.s, self.id);

    const auto advisory = self.controlled ? advisories.find(self.id) : advisories.end();
    double v_stop = std::numeric_limits<double>::infinity();
    if (lead) v_stop = stop_safe_speed(net_gap(*lead, self), lead->v, -lim.a_min, lim.dt);

    double v = 0.0;
    if (advisory != advisories.end()) {
      double v_safe = lim.v_max;
      if (lead) v_safe = std::min(v_safe, krauss_safe_speed(w.config_.krauss, self.v, lead->v, net_gap(*lead, self)));
      const double target = gatekeeper(v_safe, advisory->second);
      v = std::clamp(target, std::max(0.0, self.v + lim.a_min * lim.dt), self.v + lim.a_max * lim.dt);
      v = std::max(0.0, std::min(v, v_stop));
    } else {
      v = krauss_step(self, lead, w.config_.krauss, lim, eta).v_next;
    }
    if (v < std::max(0.0, self.v + lim.a_min * lim.dt) - 1e-9) ++w.emergency_brakes_;
    v_next[i] = v;
  }

  for (std::size_t i = 0; i < w.vehicles_.size(); ++i) {
    VehicleState& self = w.vehicles_[i];
    self.a = (v_next[i] - self.v) / lim.dt;
    self.v = v_next[i];
    self.s += self.v * lim.dt;
  }
  w.rebuild_lane_order();
  w.clock_ += lim.dt;
  ++w.tick_;

  // Mainline speed-gain changes, front to back.
  std::vector<std::size_t> mainline;
  for (std::size_t i = 0; i < w.vehicles_.size(); ++i) {
    if (w.vehicles_[i].lane != Lane::Ramp) mainline.push_back(i);
  }
  std::sort(mainline.begin(), mainline.end(), [&](std::size_t a, std::size_t b) {
    if (w.vehicles_[a].s != w.vehicles_[b].s) return w.vehicles_[a].s > w.vehicles_[b].s;
    return w.vehicles_[a].id < w.vehicles_[b].id;
  });
  for (std::size_t i : mainline) {
    if (const auto target = discretionary_lane_change(w.vehicles_[i], w)) {
      w.move_to_lane(i, *target);
      ++w.lane_changes_;
    }
  }

  // Ramp merges, front first; mainline changes above already took their slots.
  for (std::size_t i : std::vector<std::size_t>(w.lane_order_[static_cast<std::size_t>(Lane::Ramp)])) {
    const VehicleState& self = w.vehicles_[i];
    if (!w.geometry_.in_merge_window(self.s)) continue;
    const VehicleState* lead = w.leader(Lane::Mainline0, self.s, self.id);
    const VehicleState* follow = w.follower(Lane::Mainline0, self.s, self.id);
    if (merge_decision(self, lead, follow, w.gaps_)) {
      w.move_to_lane(i, Lane::Mainline0);
      ++w.merges_;
    }
  }

  for (auto& v : w.vehicles_) v.controlled = w.is_controlled(v);
  w.check_invariants();

  w.tick_states_ = w.vehicles_;

  // Retire vehicles that reached the end of the mainline.
  std::size_t keep = 0;
  for (std::size_t i = 0; i < w.vehicles_.size(); ++i) {
    const VehicleState& v = w.vehicles_[i];
    if (v.lane != Lane::Ramp && v.s >= w.config_.network.mainline_length_m) {
      w.departed_.push_back({v.id, v.cls, w.aux_[i].origin, v.entered_at, w.clock_});
      continue;
    }
    if (keep != i) {
      w.vehicles_[keep] = std::move(w.vehicles_[i]);
      w.aux_[keep] = std::move(w.aux_[i]);
    }
    ++keep;
  }
  w.vehicles_.resize(keep);
  w.aux_.resize(keep);
  w.rebuild_lane_order();
}

}  // namespace rampsim
