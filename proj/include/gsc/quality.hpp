// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsc/core.hpp"

namespace gsc {

inline constexpr double kOpacityLossWeight = 0.1;
inline constexpr double kLossClampEps = 1e-7;

/// Binary cross-entropy between per-primitive opacities and 0/1 targets,
/// scaled by weight:  weight * mean_i -[t ln a + (1-t) ln(1-a)]
/// with a clamped to [eps, 1-eps] before the logs. gradient[i] is the
/// analytic derivative with respect to opacities[i], evaluated at the
/// clamped value. Throws InvalidInput on size mismatch or empty input.
struct OpacityLoss {
  double value = 0.0;
  std::vector<double> gradient;
};
OpacityLoss opacity_alignment_loss(const std::vector<double>& opacities,
                                   const std::vector<std::uint8_t>& targets,
                                   double weight = kOpacityLossWeight);

/// Mean squared error over all H*W*3 samples; gradient is with respect to
/// the rendered image, 2*(r-t)/(H*W*3) per sample. Dimensions must agree.
struct RenderLoss {
  double value = 0.0;
  Image gradient;
};
RenderLoss render_mse_loss(const Image& rendered, const Image& target);

/// Arithmetic mean of per-view loss values. Throws InvalidInput on empty.
double batch_mean(const std::vector<double>& values);

/// Compaction objective: opacity alignment plus render fidelity.
inline double total_loss(double opacity_term, double render_term) {
  return opacity_term + render_term;
}

/// Mean squared error between two images of equal dimensions.
double mse(const Image& a, const Image& b);

/// 10*log10(1/MSE) for signals in [0,1]; +infinity for identical images.
double psnr_db(const Image& a, const Image& b);

/// Structural similarity with the standard 11x11 Gaussian window
/// (sigma 1.5), K1=0.01, K2=0.03, dynamic range 1. Statistics use valid
/// windows only (no padding), so both dimensions must be at least 11.
/// Computed per channel and averaged.
double ssim(const Image& a, const Image& b);

}  // namespace gsc
