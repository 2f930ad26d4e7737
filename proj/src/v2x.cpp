#include "rampsim/v2x.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rampsim/attacks.hpp"
#include "rampsim/traffic.hpp"

namespace rampsim {

double mean_received_power(double tx_power_dbm, double distance_m, const ChannelParams& params) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("received_power: distance must be positive");
  return tx_power_dbm - params.ref_loss_db - 10.0 * params.path_loss_exponent * std::log10(distance_m);
}

double received_power(double tx_power_dbm, double distance_m, const ChannelParams& params, std::mt19937_64& rng) {
  const double mean = mean_received_power(tx_power_dbm, distance_m, params);
  if (params.shadowing_sigma_db <= 0.0) return mean;
  std::normal_distribution<double> shadowing(0.0, params.shadowing_sigma_db);
  return mean + shadowing(rng);
}

bool delivered(double rssi_dbm, const ChannelParams& params) { return rssi_dbm > params.thermal_noise_dbm; }

double rssi_to_distance(double rssi_dbm, const ChannelParams& params) {
  return std::pow(10.0, (params.tx_power_dbm - params.ref_loss_db - rssi_dbm) / (10.0 * params.path_loss_exponent));
}

Vec2 apply_position_noise(Vec2 true_pos, PositionNoiseState& state, const PositionNoiseParams& params,
                          std::mt19937_64& rng) {
  if (params.step_sigma_m > 0.0) {
    std::normal_distribution<double> step(0.0, params.step_sigma_m);
    state.offset.x = std::clamp(state.offset.x + step(rng), -params.cap_m, params.cap_m);
    state.offset.y = std::clamp(state.offset.y + step(rng), -params.cap_m, params.cap_m);
  }
  return true_pos + state.offset;
}

V2xChannel::V2xChannel(const ScenarioConfig& config) : config_(config), geometry_(config.network) {}

V2xChannel::Sender& V2xChannel::sender(int id) {
  auto it = senders_.find(id);
  if (it == senders_.end()) {
    Sender fresh{{},
                 std::mt19937_64(derive_seed(config_.seed, stream::kPositionNoise, static_cast<std::uint64_t>(id))),
                 std::mt19937_64(derive_seed(config_.seed, stream::kShadowing, static_cast<std::uint64_t>(id))),
                 std::nullopt};
    it = senders_.emplace(id, std::move(fresh)).first;
  }
  return it->second;
}

std::vector<Reception> V2xChannel::collect_receptions(const WorldState& world, Attacker* attacker) {
  std::vector<Reception> out;
  const Vec2 rsu = config_.network.rsu_position;

  std::vector<const VehicleState*> cavs;
  for (const auto& v : world.vehicles()) {
    if (is_cav(v.cls)) cavs.push_back(&v);
  }
  std::sort(cavs.begin(), cavs.end(), [](const VehicleState* a, const VehicleState* b) { return a->id < b->id; });

  for (const VehicleState* v : cavs) {
    const Vec2 true_pos = geometry_.world_position(v->lane, v->s);
    // GPS error evolves whether or not the vehicle is transmitting.
    Sender& tx = sender(v->id);
    const Vec2 reported = apply_position_noise(true_pos, tx.noise, config_.position_noise, tx.noise_rng);

    const bool tracked = attacker && attacker->tracking(v->id);
    const bool merging_lane = v->lane == Lane::Ramp || v->lane == Lane::Mainline0;
    const bool in_range = geometry_.in_rsu_range(true_pos);
    const bool in_area = geometry_.in_effective_area(true_pos);
    if (attacker && tracked && !in_area) attacker->release(v->id);
    if (!in_range || !(merging_lane || (tracked && in_area))) continue;

    Bsm bsm{v->id, world.clock(), reported, v->v, v->a, v->lane, true};
    bool spoofed = false;
    if (attacker && v->cls == VehicleClass::AttackedCav && in_area &&
        attacker->strategy() != AttackStrategy::None) {
      bsm = attacker->intercept(bsm);
      spoofed = true;
    }

    const double d = std::max(distance(true_pos, rsu), 1.0);
    double rssi = received_power(config_.channel.tx_power_dbm, d, config_.channel, tx.shadow_rng);
    if (!delivered(rssi, config_.channel)) continue;
    const double alpha = config_.channel.rssi_smoothing_alpha;
    if (tx.smoothed_rssi && alpha < 1.0) rssi = alpha * rssi + (1.0 - alpha) * *tx.smoothed_rssi;
    tx.smoothed_rssi = rssi;

    out.push_back({bsm, rssi, rssi_to_distance(rssi, config_.channel), world.clock(), spoofed});
  }

  // Forget senders that left the network.
  std::vector<int> present;
  present.reserve(cavs.size());
  for (const VehicleState* v : cavs) present.push_back(v->id);
  for (auto it = senders_.begin(); it != senders_.end();) {
    if (!std::binary_search(present.begin(), present.end(), it->first)) {
      it = senders_.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

}  // namespace rampsim
