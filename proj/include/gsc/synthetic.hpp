// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "gsc/core.hpp"

namespace gsc {

enum class SceneLayout {
  kPlane,        // single flat surface
  kTwoPlanes,    // step discontinuity between two depths
  kRandomBlobs,  // seeded smooth heightfield
};

struct SyntheticSpec {
  int views = 4;
  int height = 64;
  int width = 64;
  std::uint64_t seed = 0;
  SceneLayout layout = SceneLayout::kPlane;
};

/// Procedural multi-view scene: cameras on an arc above a textured surface,
/// one Gaussian per pixel placed on the surface along that pixel's center
/// ray (so each view's set is pixel-aligned), opacities in [0.3,1], and a
/// ground-truth image rendered from the view's own set. Deterministic in
/// its parameters, including across thread counts.
Scene synthesize_scene(const SyntheticSpec& spec);

}  // namespace gsc
