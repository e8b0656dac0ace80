// SPDX-License-Identifier: Apache-2.0
#include "gsc/importance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gsc {

namespace {

inline int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

}  // namespace

ScalarMap photometric_variation(const Image& image) {
  const int h = image.height, w = image.width;
  if (h <= 0 || w <= 0) throw InvalidInput("variation of an empty image");
  ScalarMap out(h, w);
  for (int r = 0; r < h; ++r) {
    const int rm = clamp_index(r - 1, h), rp = clamp_index(r + 1, h);
    for (int c = 0; c < w; ++c) {
      const int cm = clamp_index(c - 1, w), cp = clamp_index(c + 1, w);
      double acc = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double gx = 0.5 * (image.at(r, cp, ch) - image.at(r, cm, ch));
        const double gy = 0.5 * (image.at(rp, c, ch) - image.at(rm, c, ch));
        acc += gx * gx + gy * gy;
      }
      out.at(r, c) = std::sqrt(acc);
    }
  }
  return out;
}

Vec3Map point_map(const GaussianSet& set, int height, int width) {
  if (!set.pixel_aligned || set.size() != static_cast<std::size_t>(height) * width ||
      !set.source_pixel.empty()) {
    throw InvalidInput("point map requires an untouched pixel-aligned set");
  }
  Vec3Map out(height, width);
  for (std::size_t i = 0; i < set.size(); ++i) out.data[i] = set.primitives[i].center;
  return out;
}

Vec3Map normal_map(const Vec3Map& points) {
  const int h = points.height, w = points.width;
  if (h <= 0 || w <= 0) throw InvalidInput("normals of an empty point map");
  Vec3Map out(h, w);
  for (int r = 0; r < h; ++r) {
    const int rm = clamp_index(r - 1, h), rp = clamp_index(r + 1, h);
    for (int c = 0; c < w; ++c) {
      const int cm = clamp_index(c - 1, w), cp = clamp_index(c + 1, w);
      const Vec3 dpdx = 0.5 * (points.at(r, cp) - points.at(r, cm));
      const Vec3 dpdy = 0.5 * (points.at(rp, c) - points.at(rm, c));
      const Vec3 cross = dpdx.cross(dpdy);
      const double n2 = cross.squaredNorm();
      out.at(r, c) = (n2 > 0.0 && std::isfinite(n2)) ? Vec3(cross / std::sqrt(n2))
                                                     : Vec3(0.0, 0.0, 1.0);
    }
  }
  return out;
}

ScalarMap geometric_variation(const Vec3Map& normals) {
  const int h = normals.height, w = normals.width;
  if (h <= 0 || w <= 0) throw InvalidInput("variation of an empty normal map");
  ScalarMap out(h, w);
  for (int r = 0; r < h; ++r) {
    const int rm = clamp_index(r - 1, h), rp = clamp_index(r + 1, h);
    for (int c = 0; c < w; ++c) {
      const int cm = clamp_index(c - 1, w), cp = clamp_index(c + 1, w);
      const Vec3 gx = 0.5 * (normals.at(r, cp) - normals.at(r, cm));
      const Vec3 gy = 0.5 * (normals.at(rp, c) - normals.at(rm, c));
      out.at(r, c) = std::sqrt(gx.squaredNorm() + gy.squaredNorm());
    }
  }
  return out;
}

ScalarMap combine_variation(const ScalarMap& photometric, const ScalarMap& geometric) {
  if (photometric.height != geometric.height || photometric.width != geometric.width) {
    throw InvalidInput("variation maps disagree in size");
  }
  ScalarMap out(photometric.height, photometric.width);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = 0.5 * (photometric.data[i] + geometric.data[i]);
  }
  return out;
}

double variation_quantile(const ScalarMap& map, double p) {
  if (map.data.empty()) throw InvalidInput("quantile of an empty map");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("quantile parameter outside [0,1]");
  std::vector<double> sorted = map.data;
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

BinarizeResult binarize_variation(const ScalarMap& combined, double rho, QuantileMode mode) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidInput("mask fraction rho outside (0,1]");
  BinarizeResult out;
  out.threshold =
      variation_quantile(combined, mode == QuantileMode::kLiteral ? rho : 1.0 - rho);
  out.mask = MaskMap(combined.height, combined.width);
  for (std::size_t i = 0; i < combined.data.size(); ++i) {
    out.mask.data[i] = combined.data[i] > out.threshold ? 1 : 0;
  }
  return out;
}

std::vector<std::uint8_t> project_mask_targets(const GaussianSet& set, const Camera& camera,
                                               const MaskMap& mask) {
  if (mask.height != camera.height || mask.width != camera.width) {
    throw InvalidInput("mask dimensions disagree with camera");
  }
  std::vector<std::uint8_t> targets(set.size(), 0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Vec3 p = camera.to_camera(set.primitives[i].center);
    if (p.z() <= 1e-6) continue;
    const double u = camera.fx * p.x() / p.z() + camera.cx;
    const double v = camera.fy * p.y() / p.z() + camera.cy;
    const int col = static_cast<int>(std::floor(u));
    const int row = static_cast<int>(std::floor(v));
    if (row < 0 || row >= mask.height || col < 0 || col >= mask.width) continue;
    targets[i] = mask.at(row, col);
  }
  return targets;
}

std::vector<std::vector<int>> cluster_positions(const std::vector<std::pair<int, int>>& pixels,
                                                int patch_size) {
  if (patch_size < 1) throw InvalidInput("patch size must be at least 1");
  std::vector<int> keys;
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (pixels[i].first % patch_size == 0 && pixels[i].second % patch_size == 0) {
      keys.push_back(static_cast<int>(i));
    }
  }

  std::vector<std::vector<int>> clusters;
  if (keys.empty()) {
    clusters.reserve(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) clusters.push_back({static_cast<int>(i)});
    return clusters;
  }

  clusters.resize(keys.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    long long best = std::numeric_limits<long long>::max();
    int best_key = 0;
    for (std::size_t k = 0; k < keys.size(); ++k) {
      const long long dr = pixels[i].first - pixels[keys[k]].first;
      const long long dc = pixels[i].second - pixels[keys[k]].second;
      const long long d2 = dr * dr + dc * dc;
      if (d2 < best) {  // strict: ties stay with the lowest key index
        best = d2;
        best_key = static_cast<int>(k);
      }
    }
    clusters[best_key].push_back(static_cast<int>(i));
  }
  return clusters;
}

GaussianPrimitive merge_cluster(const GaussianSet& set, const std::vector<int>& members) {
  if (members.empty()) throw InvalidInput("merge of an empty cluster");
  const std::size_t sh_size = set.primitives[members[0]].sh.size();
  for (int m : members) {
    if (m < 0 || static_cast<std::size_t>(m) >= set.size()) {
      throw InvalidInput("merge member index out of range");
    }
    if (set.primitives[m].sh.size() != sh_size) {
      throw InvalidInput("merge members disagree in SH degree");
    }
  }

  const double n = static_cast<double>(members.size());
  double total = 0.0;
  for (int m : members) total += set.primitives[m].opacity;
  const bool degenerate = !(total > 1e-12);

  auto weight = [&](int m) {
    return degenerate ? 1.0 / n : set.primitives[m].opacity / total;
  };

  Vec3 center = Vec3::Zero();
  for (int m : members) center += weight(m) * set.primitives[m].center;

  Mat3 moment = Mat3::Zero();
  for (int m : members) {
    const GaussianPrimitive& g = set.primitives[m];
    const Vec3 d = g.center - center;
    moment += weight(m) *
              (covariance_from_factors(g.scale, g.rotation) + (d * d.transpose()).eval());
  }

  Eigen::SelfAdjointEigenSolver<Mat3> eig(moment);
  if (eig.info() != Eigen::Success) throw Error("merge covariance eigensolve failed");
  Mat3 basis = eig.eigenvectors();
  if (basis.determinant() < 0.0) basis.col(0) = -basis.col(0);

  GaussianPrimitive out;
  out.center = center;
  for (int a = 0; a < 3; ++a) out.scale[a] = std::sqrt(std::max(eig.eigenvalues()[a], 1e-16));
  out.rotation = Quat(basis);

  out.sh.assign(sh_size, 0.0);
  double max_opacity = 0.0;
  for (int m : members) {
    const GaussianPrimitive& g = set.primitives[m];
    const double w = weight(m);
    for (std::size_t j = 0; j < sh_size; ++j) out.sh[j] += w * g.sh[j];
    max_opacity = std::max(max_opacity, g.opacity);
  }
  out.opacity = max_opacity;
  return out;
}

ViewImportance compute_view_importance(const SceneView& view, const ImportanceParams& params) {
  ViewImportance out;
  out.photometric = photometric_variation(view.image);
  const Vec3Map points = point_map(view.gaussians, view.image.height, view.image.width);
  out.geometric = geometric_variation(normal_map(points));
  out.combined = combine_variation(out.photometric, out.geometric);
  BinarizeResult bin = binarize_variation(out.combined, params.rho, params.mode);
  out.threshold = bin.threshold;
  out.mask = std::move(bin.mask);
  out.targets = project_mask_targets(view.gaussians, view.camera, out.mask);
  for (std::size_t i = 0; i < out.targets.size(); ++i) {
    (out.targets[i] ? out.high : out.low).push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace gsc
