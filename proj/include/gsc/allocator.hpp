// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsc/core.hpp"

namespace gsc {

struct AllocatorParams {
  double temperature = 0.2;  // softmax temperature, > 0
  int lowfreq_side = 64;     // side of the low-frequency box, >= 0
  bool uniform = false;      // skip spectral weighting, kappa_i = 1
};

/// Rec.601 luma plane: 0.299 R + 0.587 G + 0.114 B.
ScalarMap grayscale(const Image& image);

/// High-frequency energy ratio in [0,1]: one minus the fraction of 2D DFT
/// power inside an s x s box centered on the DC bin of the shifted
/// spectrum (box start floor(dim/2) - s/2 per axis, clipped to the
/// spectrum). An all-zero image scores 0; s = 0 scores 1.
double highfreq_energy_ratio(const Image& image, int lowfreq_side = 64);

/// Temperature softmax over eta with max subtraction, scaled by the view
/// count: kappa_i = N * softmax(eta/T)_i, so mean(kappa) == 1.
std::vector<double> spectral_weights(const std::vector<double>& eta, double temperature);

struct ViewBudget {
  int view = 0;
  double eta = 0.0;
  double kappa = 0.0;
  double rho = 0.0;  // kappa * rho_global, the pre-clamp per-view ratio
  long long budget = 0;
};

struct AllocationPlan {
  long long total_budget = 0;
  double rho_global = 0.0;  // K / (N*H*W)
  std::vector<ViewBudget> views;
};

/// Global budget for a keep ratio: floor(rho * N * H * W), rho in [0,1].
long long budget_from_ratio(double rho, int views, int height, int width);

/// Splits total_budget across views proportionally to kappa. Views are
/// capped at height*width pixels with the excess redistributed
/// proportionally among uncapped views; real targets are integerized by
/// largest remainder (ties to the lowest view index). Postconditions:
/// sum of budgets == total_budget and 0 <= budget <= H*W per view.
AllocationPlan allocate_budgets(const std::vector<double>& kappa, const std::vector<double>& eta,
                                long long total_budget, int height, int width);

/// Full pipeline over a scene: eta per view, softmax weights, budgets.
AllocationPlan plan_allocation(const Scene& scene, long long total_budget,
                               const AllocatorParams& params);

}  // namespace gsc
