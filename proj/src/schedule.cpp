// SPDX-License-Identifier: Apache-2.0
#include "gsc/schedule.hpp"

#include <cmath>

namespace gsc {

namespace {

void check(long long step, long long pool, const ScheduleParams& p) {
  if (step < 0) throw InvalidInput("schedule step must be non-negative");
  if (pool <= 0) throw InvalidInput("schedule pool must be positive");
  if (p.interval <= 0) throw InvalidInput("schedule interval must be positive");
  if (!(p.k_floor_ratio > 0.0) || !(p.k_start_ratio >= p.k_floor_ratio) ||
      !(p.k_max_ratio >= p.k_start_ratio) || !(p.k_max_ratio <= 1.0) || !(p.decay >= 0.0)) {
    throw InvalidInput("schedule ratios must satisfy 0 < floor <= start <= max <= 1");
  }
}

}  // namespace

long long k_min_at(long long step, long long pool, const ScheduleParams& params) {
  check(step, pool, params);
  const double ratio = std::max(
      params.k_start_ratio - params.decay * static_cast<double>(step / params.interval),
      params.k_floor_ratio);
  return static_cast<long long>(std::nearbyint(ratio * static_cast<double>(pool)));
}

long long k_max_at(long long pool, const ScheduleParams& params) {
  check(0, pool, params);
  return static_cast<long long>(std::nearbyint(params.k_max_ratio * static_cast<double>(pool)));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

long long sample_budget(long long step, long long pool, std::uint64_t seed,
                        const ScheduleParams& params) {
  const long long lo = k_min_at(step, pool, params);
  const long long hi = k_max_at(pool, params);
  if (lo > hi) throw Error("schedule bounds inverted");
  const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;

  // Lemire's multiply-shift rejection keeps the draw exactly uniform.
  std::uint64_t x = splitmix64(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(step)));
  unsigned __int128 m = static_cast<unsigned __int128>(x) * range;
  auto low64 = static_cast<std::uint64_t>(m);
  if (low64 < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low64 < threshold) {
      x = splitmix64(x ^ 0xD1342543DE82EF95ULL);
      m = static_cast<unsigned __int128>(x) * range;
      low64 = static_cast<std::uint64_t>(m);
    }
  }
  return lo + static_cast<long long>(m >> 64);
}

}  // namespace gsc
