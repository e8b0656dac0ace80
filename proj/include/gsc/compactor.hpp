// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsc/allocator.hpp"
#include "gsc/core.hpp"
#include "gsc/importance.hpp"

namespace gsc {

enum class ScoreStrategy {
  kOpacity,                // alpha
  kVariation,              // combined variation at the primitive's pixel
  kVariationTimesOpacity,  // product of the two (default)
  kMaskThenOpacity,        // mask keeps rank priority: 1+alpha if masked, else alpha
};

/// Map values sampled at each primitive's projected pixel center, zero for
/// centers behind the camera (depth <= 1e-6) or outside the image.
std::vector<double> sample_map_at_centers(const GaussianSet& set, const Camera& camera,
                                          const ScalarMap& map);

/// Per-primitive selection scores. `variation` is required by the two
/// variation strategies, `targets` by kMaskThenOpacity; unused inputs may
/// be empty.
std::vector<double> score_primitives(const GaussianSet& set, ScoreStrategy strategy,
                                     const std::vector<double>& variation,
                                     const std::vector<std::uint8_t>& targets);

/// Indices of the k highest scores, ascending. Equal scores resolve to the
/// lower index, so the result is a pure function of the score vector.
std::vector<int> select_top_k(const std::vector<double>& scores, long long k);

struct CompactionParams {
  ScoreStrategy strategy = ScoreStrategy::kVariationTimesOpacity;
  bool merge = false;        // replace the tail of each view with cluster summaries
  bool global_topk = false;  // one pooled selection, ignores per-view budgets
  QuantileMode quantile_mode = QuantileMode::kLiteral;
  int patch_size = 4;
};

struct ViewCompaction {
  int view = 0;
  long long budget = 0;
  long long selected = 0;
  long long merged_added = 0;
};

struct CompactionResult {
  GaussianSet output;
  std::vector<ViewCompaction> views;
};

/// Selects per-view budgets from `plan` (or one pooled top-K when
/// global_topk is set). With merge enabled, the low-importance remainder of
/// each view is clustered and moment-matched, and the m summaries replace
/// that view's m lowest-scored picks when m fits the budget; a view's
/// output size always equals its budget. Kept primitives stay in original
/// order, summaries follow, views concatenate in order.
CompactionResult compact_scene(const Scene& scene, const AllocationPlan& plan,
                               const CompactionParams& params);

}  // namespace gsc
