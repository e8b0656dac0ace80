// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "gsc/core.hpp"

namespace gsc {

/// Piecewise-constant budget annealing over training steps: the lower bound
/// starts at k_start and loses `decay` of the pool every `interval` steps
/// until it rests at k_floor; the upper bound is fixed at k_max.
struct ScheduleParams {
  double k_max_ratio = 0.95;
  double k_start_ratio = 0.85;
  double k_floor_ratio = 0.05;
  double decay = 0.05;       // ratio decrement per interval
  long long interval = 1000;  // steps per decrement
};

/// round-half-even of max(k_start - decay*floor(t/interval), k_floor) * pool.
long long k_min_at(long long step, long long pool, const ScheduleParams& params = {});

/// round-half-even of k_max_ratio * pool.
long long k_max_at(long long pool, const ScheduleParams& params = {});

/// splitmix64 finalizer; a fixed bijective mixer, usable as a stateless RNG.
std::uint64_t splitmix64(std::uint64_t x);

/// Uniform draw from [k_min_at(step), k_max_at(pool)], keyed only by
/// (seed, step): the same pair always returns the same value, with no
/// hidden stream state. Uses an unbiased bounded mapping, so every budget
/// in the interval is equally likely.
long long sample_budget(long long step, long long pool, std::uint64_t seed,
                        const ScheduleParams& params = {});

}  // namespace gsc
