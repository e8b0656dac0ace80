// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>

#include "gsc/core.hpp"

namespace gsc {

/// Threshold placement for binarize_variation. Literal thresholds at the
/// rho-quantile, so roughly a (1-rho) fraction of pixels ends up high;
/// complement thresholds at the (1-rho)-quantile, flipping that reading.
enum class QuantileMode { kLiteral, kComplement };

struct ImportanceParams {
  double rho = 0.5;  // quantile parameter, must lie in (0,1]
  QuantileMode mode = QuantileMode::kLiteral;
  int patch_size = 4;  // cluster key stride in pixels, >= 1
};

/// Per-pixel photometric variation: L2 norm over the six central-difference
/// color gradients (3 channels x 2 axes), halves replicated at borders.
ScalarMap photometric_variation(const Image& image);

/// Per-pixel 3D positions of a pixel-aligned set, row-major. Requires
/// pixel_aligned and exactly height*width primitives in identity order.
Vec3Map point_map(const GaussianSet& set, int height, int width);

/// Surface normals from a point map: normalize(dP/dx x dP/dy) with the same
/// central differencing as the variation maps. A zero or non-finite cross
/// product yields the sentinel (0,0,1).
Vec3Map normal_map(const Vec3Map& points);

/// Same differencing as photometric_variation applied to normal components.
ScalarMap geometric_variation(const Vec3Map& normals);

/// Pointwise average of the two variation maps. Dimensions must agree.
ScalarMap combine_variation(const ScalarMap& photometric, const ScalarMap& geometric);

/// Quantile with linear interpolation between order statistics
/// (h = (n-1)p). p must lie in [0,1]; the input must be non-empty.
double variation_quantile(const ScalarMap& map, double p);

struct BinarizeResult {
  double threshold = 0.0;
  MaskMap mask;  // 1 where variation strictly exceeds the threshold
};

/// Thresholds the combined variation map. rho must lie in (0,1].
BinarizeResult binarize_variation(const ScalarMap& combined, double rho, QuantileMode mode);

/// Per-primitive binary targets: each center is projected (depth must
/// exceed 1e-6) and reads the mask at the pixel containing it; centers
/// behind the camera or off-image get target 0.
std::vector<std::uint8_t> project_mask_targets(const GaussianSet& set, const Camera& camera,
                                               const MaskMap& mask);

/// Groups pixel positions into clusters. Positions on a patch corner
/// (row % patch == 0 and col % patch == 0) become cluster keys, in input
/// order; every position joins its nearest key by squared pixel distance,
/// ties to the lowest key index. With no corner positions, every position
/// becomes its own cluster. Member lists hold indices into `pixels` in
/// input order.
std::vector<std::vector<int>> cluster_positions(const std::vector<std::pair<int, int>>& pixels,
                                                int patch_size);

/// Opacity-weighted moment match of a cluster: the merged Gaussian keeps
/// the weighted mean center, the second moment of the mixture (member
/// covariance plus center spread), elementwise weighted-mean SH, and the
/// maximum member opacity. Near-zero total weight falls back to uniform
/// weights. Members must share one SH degree.
GaussianPrimitive merge_cluster(const GaussianSet& set, const std::vector<int>& members);

/// Full per-view pipeline: variation maps, threshold, pixel mask,
/// per-primitive targets, and the high/low index partition.
struct ViewImportance {
  ScalarMap photometric;
  ScalarMap geometric;
  ScalarMap combined;
  double threshold = 0.0;
  MaskMap mask;
  std::vector<std::uint8_t> targets;
  std::vector<int> high;  // primitive indices with target 1
  std::vector<int> low;   // primitive indices with target 0
};
ViewImportance compute_view_importance(const SceneView& view, const ImportanceParams& params);

}  // namespace gsc
