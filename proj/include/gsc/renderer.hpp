// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "gsc/core.hpp"

namespace gsc {

// Splatting constants. Shared by the optimized and reference paths so the
// two differ only in traversal strategy, never in math.
inline constexpr double kNearPlane = 0.01;   // camera z at or below -> culled
inline constexpr double kCovDilation = 0.3;  // added to cov2d diagonal
inline constexpr double kAlphaMax = 0.99;
inline constexpr double kAlphaFloor = 1.0 / 255.0;  // optimized path only
inline constexpr double kTransmittanceMin = 1e-4;   // optimized path only

struct ProjectedGaussian {
  Vec2 mean2d = Vec2::Zero();  // pixel units; pixel (r,c) center is (c+.5, r+.5)
  Mat2 cov2d = Mat2::Identity();
  double depth = 0.0;  // camera-frame z
  Vec3 color = Vec3::Zero();
  double opacity = 0.0;
  double radius = 0.0;  // 3 * sqrt(max eigenvalue of cov2d)
  int index = -1;       // position in the source set, breaks depth ties
};

/// 0.5 + sum_m sh[m]*Y_m(dir) per channel, clamped to [0,1]. dir must be
/// unit length.
Vec3 evaluate_sh(const std::vector<double>& sh, const Vec3& dir);

/// Perspective EWA projection of one Gaussian. Returns nullopt when the
/// camera-frame depth is at or below the near plane.
std::optional<ProjectedGaussian> project_gaussian(const GaussianPrimitive& g,
                                                  const Camera& camera, int index = -1);

/// Front-to-back alpha compositing over depth-sorted splats (ties broken by
/// input index). Output is deterministic and independent of the worker
/// count; permuting primitives with distinct depths leaves it bit-identical.
Image rasterize(const GaussianSet& set, const Camera& camera,
                const Vec3& background = Vec3::Zero());

/// Same math as rasterize() with every shortcut removed: no screen-space
/// radius bound, no alpha floor, no transmittance cutoff. Quadratic cost;
/// throws InvalidInput above 10^4 primitives. Serves as the correctness
/// oracle for rasterize().
Image reference_rasterize(const GaussianSet& set, const Camera& camera,
                          const Vec3& background = Vec3::Zero());

}  // namespace gsc
