#pragma once

#include <map>
#include <optional>
#include <random>
#include <vector>

#include "rampsim/geometry.hpp"
#include "rampsim/scenario.hpp"

namespace rampsim {

class WorldState;
class Attacker;

/// Basic safety message as broadcast by a CAV.
struct Bsm {
  int sender_id = 0;
  double timestamp_s = 0.0;
  Vec2 pos;
  double speed = 0.0;
  double accel = 0.0;
  Lane lane = Lane::Mainline0;
  /// Certificates cannot be forged, so every message in this model carries a
  /// valid signature; the defense asserts it.
  bool signature_valid = true;
};

/// RSU-side view of a delivered BSM.
struct Reception {
  Bsm bsm;
  double rssi_dbm = 0.0;
  /// Transmitter distance estimated from RSSI.
  double coarse_distance_m = 0.0;
  double receive_time_s = 0.0;
  /// Ground-truth annotation for logs and evaluation; the RSU never reads it.
  bool spoofed = false;
};

// ---------------------------------------------------------------------------
// Channel

/// Deterministic part of the log-distance model:
/// tx - ref_loss - 10 n log10(d / 1 m).
double mean_received_power(double tx_power_dbm, double distance_m, const ChannelParams& params);

/// Mean power plus N(0, shadowing_sigma_db^2). Throws std::invalid_argument for d <= 0.
double received_power(double tx_power_dbm, double distance_m, const ChannelParams& params, std::mt19937_64& rng);

/// A message is delivered iff its power is above the thermal noise floor.
bool delivered(double rssi_dbm, const ChannelParams& params);

/// Inverse of mean_received_power.
double rssi_to_distance(double rssi_dbm, const ChannelParams& params);

// ---------------------------------------------------------------------------
// GPS error

struct PositionNoiseState {
  Vec2 offset;
};

/// Random-walk position error: offset += N(0, step_sigma^2) per axis, clamped to
/// +-cap per axis; returns true_pos + offset.
Vec2 apply_position_noise(Vec2 true_pos, PositionNoiseState& state, const PositionNoiseParams& params,
                          std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Collection at the RSU

/// Per-sender channel state that persists across ticks.
class V2xChannel {
 public:
  explicit V2xChannel(const ScenarioConfig& config);

  /// One BSM per eligible CAV per tick. A CAV is eligible while it is in RSU
  /// range and either on the ramp or rightmost lane, or still tracked by the
  /// attacker. BSMs from attacked vehicles inside the effective area are
  /// replaced by the attacker's spoofed copy; RSSI always reflects the true
  /// transmitter position.
  std::vector<Reception> collect_receptions(const WorldState& world, Attacker* attacker);

  const Geometry& geometry() const { return geometry_; }

 private:
  struct Sender {
    PositionNoiseState noise;
    std::mt19937_64 noise_rng;
    std::mt19937_64 shadow_rng;
    std::optional<double> smoothed_rssi;
  };
  Sender& sender(int id);

  ScenarioConfig config_;
  Geometry geometry_;
  std::map<int, Sender> senders_;
};

}  // namespace rampsim
