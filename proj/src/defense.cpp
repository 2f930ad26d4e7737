#include "rampsim/defense.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rampsim {

namespace {

double residual_sq(const Reception& r, Vec2 rsu_pos) {
  const double e = r.coarse_distance_m - distance(r.bsm.pos, rsu_pos);
  return e * e;
}

// A set with zero residual is consistent even against a zero threshold.
bool accepted(double mse, double tau_sq) { return mse < tau_sq || mse <= 0.0; }

}  // namespace

double string_mse(std::span<const Reception> members, Vec2 rsu_pos) {
  if (members.empty()) throw std::invalid_argument("string_mse: empty string");
  double sum = 0.0;
  for (const auto& r : members) {
    if (!r.bsm.signature_valid) throw std::invalid_argument("string_mse: unauthenticated BSM");
    sum += residual_sq(r, rsu_pos);
  }
  return sum / static_cast<double>(members.size());
}

FilterResult filter_string(std::span<const Reception> members, Vec2 rsu_pos, double tau_sq) {
  FilterResult result;
  result.kept.assign(members.begin(), members.end());
  if (result.kept.empty()) return result;
  result.pre_mse = string_mse(result.kept, rsu_pos);
  double current = result.pre_mse;

  while (result.kept.size() > 1 && !accepted(current, tau_sq)) {
    ++result.iterations;
    double sum = 0.0;
    for (const auto& r : result.kept) sum += residual_sq(r, rsu_pos);
    const double rest = static_cast<double>(result.kept.size() - 1);

    std::size_t drop = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < result.kept.size(); ++j) {
      const double mse = (sum - residual_sq(result.kept[j], rsu_pos)) / rest;
      const bool better = mse < best ||
                          (mse == best && result.kept[j].bsm.sender_id < result.kept[drop].bsm.sender_id);
      if (better) {
        best = mse;
        drop = j;
      }
    }
    result.removed.push_back(result.kept[drop].bsm.sender_id);
    result.kept.erase(result.kept.begin() + static_cast<std::ptrdiff_t>(drop));
    current = string_mse(result.kept, rsu_pos);
  }
  result.post_mse = current;
  return result;
}

std::vector<Reception> brute_force_filter(std::span<const Reception> members, Vec2 rsu_pos, double tau_sq) {
  const std::size_t n = members.size();
  if (n > 12) throw std::invalid_argument("brute_force_filter: at most 12 members");

  std::vector<double> r2(n);
  for (std::size_t i = 0; i < n; ++i) r2[i] = residual_sq(members[i], rsu_pos);

  auto sorted_ids = [&](std::uint32_t mask) {
    std::vector<int> ids;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) ids.push_back(members[i].bsm.sender_id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  };

  std::uint32_t best_mask = 0;
  int best_count = 0;
  double best_mse = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const int count = std::popcount(mask);
    if (count < best_count) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) sum += r2[i];
    }
    const double mse = sum / count;
    if (!accepted(mse, tau_sq)) continue;
    const bool better = count > best_count || mse < best_mse ||
                        (mse == best_mse && sorted_ids(mask) < sorted_ids(best_mask));
    if (better) {
      best_mask = mask;
      best_count = count;
      best_mse = mse;
    }
  }

  std::vector<Reception> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (best_mask & (1u << i)) kept.push_back(members[i]);
  }
  return kept;
}

CalibrationResult calibrate_from_samples(std::span<const double> benign_mse, double safety_factor) {
  if (benign_mse.empty()) throw std::runtime_error("calibration observed no vehicle strings");
  std::vector<double> sorted(benign_mse.begin(), benign_mse.end());
  std::sort(sorted.begin(), sorted.end());
  auto percentile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  CalibrationResult c;
  c.raw_mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  c.safety_factor = safety_factor;
  c.tau_sq = c.raw_mean * safety_factor;
  c.num_strings = sorted.size();
  c.p50 = percentile(0.50);
  c.p90 = percentile(0.90);
  c.p95 = percentile(0.95);
  c.p99 = percentile(0.99);
  return c;
}

}  // namespace rampsim
