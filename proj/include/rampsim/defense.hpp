#pragma once

#include <span>
#include <vector>

#include "rampsim/v2x.hpp"

namespace rampsim {

/// Mean over members of (RSSI distance - distance from declared position to the RSU)^2.
/// Throws std::invalid_argument on an empty set.
double string_mse(std::span<const Reception> members, Vec2 rsu_pos);

struct FilterResult {
  std::vector<Reception> kept;
  std::vector<int> removed;  // sender ids, in removal order
  double pre_mse = 0.0;
  double post_mse = 0.0;
  int iterations = 0;
};

/// Greedy step-wise deletion. While the set has more than one member and its
/// MSE is not below tau_sq, drop the member whose removal leaves the smallest
/// MSE (lowest sender id on ties). Stops as soon as the MSE falls below
/// tau_sq, or at a single member.
FilterResult filter_string(std::span<const Reception> members, Vec2 rsu_pos, double tau_sq);

/// Exhaustive search for the largest subset with MSE below tau_sq; ties go to
/// the lower MSE, then to the lexicographically smaller sorted id list.
/// Singletons qualify only through the MSE test like any other subset; an
/// empty result means no non-empty subset qualifies. At most 12 members.
std::vector<Reception> brute_force_filter(std::span<const Reception> members, Vec2 rsu_pos, double tau_sq);

struct CalibrationResult {
  double tau_sq = 0.0;
  double raw_mean = 0.0;
  double safety_factor = 0.0;
  std::size_t num_strings = 0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
};

/// Threshold from benign string MSE samples: mean times the safety factor.
/// Throws std::runtime_error when there are no samples.
CalibrationResult calibrate_from_samples(std::span<const double> benign_mse, double safety_factor);

}  // namespace rampsim
