// SPDX-License-Identifier: Apache-2.0
#include "gsc/allocator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace gsc {

ScalarMap grayscale(const Image& image) {
  ScalarMap out(image.height, image.width);
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      out.at(r, c) =
          0.299 * image.at(r, c, 0) + 0.587 * image.at(r, c, 1) + 0.114 * image.at(r, c, 2);
    }
  }
  return out;
}

double highfreq_energy_ratio(const Image& image, int lowfreq_side) {
  if (image.height <= 0 || image.width <= 0) throw InvalidInput("spectrum of an empty image");
  if (lowfreq_side < 0) throw InvalidInput("low-frequency box side must be non-negative");
  const int h = image.height, w = image.width;
  const ScalarMap gray = grayscale(image);

  const std::size_t n = static_cast<std::size_t>(h) * w;
  std::unique_ptr<fftw_complex[], decltype(&fftw_free)> in(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)), &fftw_free);
  std::unique_ptr<fftw_complex[], decltype(&fftw_free)> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)), &fftw_free);
  if (!in || !out) throw Error("fftw allocation failed");
  for (std::size_t i = 0; i < n; ++i) {
    in[i][0] = gray.data[i];
    in[i][1] = 0.0;
  }
  fftw_plan plan =
      fftw_plan_dft_2d(h, w, in.get(), out.get(), FFTW_FORWARD, FFTW_ESTIMATE);
  if (!plan) throw Error("fftw plan creation failed");
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += out[i][0] * out[i][0] + out[i][1] * out[i][1];
  }
  if (total == 0.0) return 0.0;

  // Low band indexed in the DC-centered (shifted) spectrum, then mapped
  // back to raw DFT bins. Box parts outside the spectrum are clipped.
  const int cy = h / 2, cx = w / 2;
  const int r0 = std::max(0, cy - lowfreq_side / 2);
  const int r1 = std::min(h, cy - lowfreq_side / 2 + lowfreq_side);
  const int c0 = std::max(0, cx - lowfreq_side / 2);
  const int c1 = std::min(w, cx - lowfreq_side / 2 + lowfreq_side);
  double low = 0.0;
  for (int rc = r0; rc < r1; ++rc) {
    const int u = (rc + h - cy) % h;
    for (int cc = c0; cc < c1; ++cc) {
      const int v = (cc + w - cx) % w;
      const std::size_t i = static_cast<std::size_t>(u) * w + v;
      low += out[i][0] * out[i][0] + out[i][1] * out[i][1];
    }
  }
  return 1.0 - low / total;
}

std::vector<double> spectral_weights(const std::vector<double>& eta, double temperature) {
  if (eta.empty()) throw InvalidInput("spectral weights over zero views");
  if (!(temperature > 0.0)) throw InvalidInput("softmax temperature must be positive");
  std::vector<double> z(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) z[i] = eta[i] / temperature;
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  const double n = static_cast<double>(eta.size());
  for (double& v : z) v = n * v / sum;
  return z;
}

long long budget_from_ratio(double rho, int views, int height, int width) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidInput("keep ratio outside [0,1]");
  if (views <= 0 || height <= 0 || width <= 0) throw InvalidInput("empty scene in budget");
  const long long pool = static_cast<long long>(views) * height * width;
  return static_cast<long long>(std::floor(rho * static_cast<double>(pool)));
}

AllocationPlan allocate_budgets(const std::vector<double>& kappa, const std::vector<double>& eta,
                                long long total_budget, int height, int width) {
  const std::size_t n = kappa.size();
  if (n == 0 || eta.size() != n) throw InvalidInput("budget allocation over zero views");
  if (height <= 0 || width <= 0) throw InvalidInput("non-positive view dimensions");
  const long long hw = static_cast<long long>(height) * width;
  const long long pool = hw * static_cast<long long>(n);
  if (total_budget < 0 || total_budget > pool) {
    throw InvalidInput("budget outside [0, N*H*W]");
  }

  // Proportional shares with per-view capacity caps; the overflow of capped
  // views is redistributed among the rest, proportionally, until none
  // overflows. Each round caps at least one view, so this terminates.
  std::vector<double> target(n, 0.0);
  std::vector<bool> capped(n, false);
  long long remaining = total_budget;
  while (true) {
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!capped[i]) weight_sum += kappa[i];
    }
    bool overflow = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (capped[i]) continue;
      target[i] = weight_sum > 0.0
                      ? static_cast<double>(remaining) * kappa[i] / weight_sum
                      : 0.0;
      if (target[i] > static_cast<double>(hw)) overflow = true;
    }
    if (!overflow) break;
    for (std::size_t i = 0; i < n; ++i) {
      if (!capped[i] && target[i] > static_cast<double>(hw)) {
        capped[i] = true;
        target[i] = static_cast<double>(hw);
        remaining -= hw;
      }
    }
  }

  // Largest-remainder integerization, ties to the lowest view index.
  std::vector<long long> budget(n);
  std::vector<double> frac(n);
  long long assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    budget[i] = std::min(hw, static_cast<long long>(std::floor(target[i])));
    frac[i] = target[i] - static_cast<double>(budget[i]);
    assigned += budget[i];
  }
  long long residual = total_budget - assigned;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return frac[a] != frac[b] ? frac[a] > frac[b] : a < b;
  });
  while (residual > 0) {
    bool changed = false;
    for (std::size_t i : order) {
      if (residual == 0) break;
      if (budget[i] < hw) {
        ++budget[i];
        --residual;
        changed = true;
      }
    }
    if (!changed) throw Error("budget integerization failed to place residual");
  }
  while (residual < 0) {
    bool changed = false;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (residual == 0) break;
      if (budget[*it] > 0) {
        --budget[*it];
        ++residual;
        changed = true;
      }
    }
    if (!changed) throw Error("budget integerization failed to remove residual");
  }

  AllocationPlan plan;
  plan.total_budget = total_budget;
  plan.rho_global = static_cast<double>(total_budget) / static_cast<double>(pool);
  plan.views.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    plan.views[i] = {static_cast<int>(i), eta[i], kappa[i], kappa[i] * plan.rho_global,
                     budget[i]};
  }
  return plan;
}

AllocationPlan plan_allocation(const Scene& scene, long long total_budget,
                               const AllocatorParams& params) {
  if (scene.views.empty()) throw InvalidInput("allocation over an empty scene");
  const int h = scene.views.front().camera.height;
  const int w = scene.views.front().camera.width;
  std::vector<double> eta(scene.views.size());
  for (std::size_t i = 0; i < scene.views.size(); ++i) {
    if (scene.views[i].camera.height != h || scene.views[i].camera.width != w) {
      throw InvalidInput("allocation requires uniform view dimensions");
    }
    eta[i] = highfreq_energy_ratio(scene.views[i].image, params.lowfreq_side);
  }
  std::vector<double> kappa = params.uniform
                                  ? std::vector<double>(scene.views.size(), 1.0)
                                  : spectral_weights(eta, params.temperature);
  return allocate_budgets(kappa, eta, total_budget, h, w);
}

}  // namespace gsc
