// SPDX-License-Identifier: Apache-2.0
#include "gsc/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gsc/parallel.hpp"

namespace gsc {

namespace {

// Real spherical harmonic basis constants, degrees 0..3.
constexpr double kSh0 = 0.28209479177387814;
constexpr double kSh1 = 0.4886025119029199;
constexpr double kSh2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                            -1.0925484305920792, 0.5462742152960396};
constexpr double kSh3[7] = {-0.5900435899266435, 2.890611442640554,  -0.4570457994644658,
                            0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                            -0.5900435899266435};

double max_eigenvalue_2x2(const Mat2& m) {
  const double mid = 0.5 * (m(0, 0) + m(1, 1));
  const double half = 0.5 * (m(0, 0) - m(1, 1));
  return mid + std::sqrt(half * half + m(0, 1) * m(0, 1));
}

struct PixelState {
  Vec3 color = Vec3::Zero();
  double transmittance = 1.0;
};

}  // namespace

Vec3 evaluate_sh(const std::vector<double>& sh, const Vec3& dir) {
  const int degree = sh_degree_from_count(sh.size());
  if (degree < 0) throw InvalidInput("invalid spherical-harmonic coefficient count");
  const double x = dir.x(), y = dir.y(), z = dir.z();

  double basis[16];
  basis[0] = kSh0;
  if (degree >= 1) {
    basis[1] = -kSh1 * y;
    basis[2] = kSh1 * z;
    basis[3] = -kSh1 * x;
  }
  if (degree >= 2) {
    const double xx = x * x, yy = y * y, zz = z * z;
    basis[4] = kSh2[0] * x * y;
    basis[5] = kSh2[1] * y * z;
    basis[6] = kSh2[2] * (2.0 * zz - xx - yy);
    basis[7] = kSh2[3] * x * z;
    basis[8] = kSh2[4] * (xx - yy);
  }
  if (degree >= 3) {
    const double xx = x * x, yy = y * y, zz = z * z;
    basis[9] = kSh3[0] * y * (3.0 * xx - yy);
    basis[10] = kSh3[1] * x * y * z;
    basis[11] = kSh3[2] * y * (4.0 * zz - xx - yy);
    basis[12] = kSh3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
    basis[13] = kSh3[4] * x * (4.0 * zz - xx - yy);
    basis[14] = kSh3[5] * z * (xx - yy);
    basis[15] = kSh3[6] * x * (xx - 3.0 * yy);
  }

  const int terms = (degree + 1) * (degree + 1);
  Vec3 rgb = Vec3::Constant(0.5);
  for (int m = 0; m < terms; ++m) {
    for (int ch = 0; ch < 3; ++ch) rgb[ch] += sh[m * 3 + ch] * basis[m];
  }
  return rgb.cwiseMax(0.0).cwiseMin(1.0);
}

std::optional<ProjectedGaussian> project_gaussian(const GaussianPrimitive& g,
                                                  const Camera& camera, int index) {
  const Vec3 p = camera.to_camera(g.center);
  if (p.z() <= kNearPlane) return std::nullopt;

  const double inv_z = 1.0 / p.z();
  ProjectedGaussian out;
  out.index = index;
  out.depth = p.z();
  out.mean2d = Vec2(camera.fx * p.x() * inv_z + camera.cx,
                    camera.fy * p.y() * inv_z + camera.cy);

  Eigen::Matrix<double, 2, 3> jac;
  jac << camera.fx * inv_z, 0.0, -camera.fx * p.x() * inv_z * inv_z,
      0.0, camera.fy * inv_z, -camera.fy * p.y() * inv_z * inv_z;
  const Eigen::Matrix<double, 2, 3> m = jac * camera.rotation();
  out.cov2d = m * covariance_from_factors(g.scale, g.rotation) * m.transpose();
  out.cov2d(0, 0) += kCovDilation;
  out.cov2d(1, 1) += kCovDilation;

  Vec3 dir = g.center - camera.position();
  const double norm = dir.norm();
  dir = norm > 0.0 ? Vec3(dir / norm) : Vec3(0.0, 0.0, 1.0);
  out.color = evaluate_sh(g.sh, dir);
  out.opacity = g.opacity;
  out.radius = 3.0 * std::sqrt(max_eigenvalue_2x2(out.cov2d));
  return out;
}

namespace {

std::vector<ProjectedGaussian> project_sorted(const GaussianSet& set, const Camera& camera) {
  std::vector<ProjectedGaussian> splats;
  splats.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (auto p = project_gaussian(set.primitives[i], camera, static_cast<int>(i))) {
      splats.push_back(*p);
    }
  }
  std::sort(splats.begin(), splats.end(), [](const ProjectedGaussian& a, const ProjectedGaussian& b) {
    return a.depth != b.depth ? a.depth < b.depth : a.index < b.index;
  });
  return splats;
}

void composite_rows(const std::vector<ProjectedGaussian>& splats, const Camera& camera,
                    int row_begin, int row_end, std::vector<PixelState>& pixels) {
  const int w = camera.width;
  for (const ProjectedGaussian& s : splats) {
    // Pixels whose center lies inside the radius box around mean2d.
    const int c0 = std::max(0, static_cast<int>(std::ceil(s.mean2d.x() - s.radius - 0.5)));
    const int c1 = std::min(w - 1, static_cast<int>(std::floor(s.mean2d.x() + s.radius - 0.5)));
    const int r0 = std::max(row_begin, static_cast<int>(std::ceil(s.mean2d.y() - s.radius - 0.5)));
    const int r1 = std::min(row_end - 1, static_cast<int>(std::floor(s.mean2d.y() + s.radius - 0.5)));
    if (c0 > c1 || r0 > r1) continue;

    const double det = s.cov2d.determinant();
    if (!(det > 0.0)) continue;
    const double inv_det = 1.0 / det;
    const double ia = s.cov2d(1, 1) * inv_det;
    const double ib = -s.cov2d(0, 1) * inv_det;
    const double ic = s.cov2d(0, 0) * inv_det;

    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        PixelState& px = pixels[static_cast<std::size_t>(r) * w + c];
        if (px.transmittance < kTransmittanceMin) continue;
        const double dx = (c + 0.5) - s.mean2d.x();
        const double dy = (r + 0.5) - s.mean2d.y();
        const double power = -0.5 * (ia * dx * dx + 2.0 * ib * dx * dy + ic * dy * dy);
        const double alpha = std::min(kAlphaMax, s.opacity * std::exp(power));
        if (alpha < kAlphaFloor) continue;
        px.color += alpha * px.transmittance * s.color;
        px.transmittance *= 1.0 - alpha;
      }
    }
  }
}

Image finalize(const std::vector<PixelState>& pixels, int h, int w, const Vec3& background) {
  Image out(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const PixelState& px = pixels[static_cast<std::size_t>(r) * w + c];
      out.set_pixel(r, c, px.color + px.transmittance * background);
    }
  }
  return out;
}

}  // namespace

Image rasterize(const GaussianSet& set, const Camera& camera, const Vec3& background) {
  if (camera.width <= 0 || camera.height <= 0) throw InvalidInput("empty camera image plane");
  const std::vector<ProjectedGaussian> splats = project_sorted(set, camera);
  std::vector<PixelState> pixels(static_cast<std::size_t>(camera.height) * camera.width);

  // Static row bands; each band walks the full depth order, so per-pixel
  // compositing order (and therefore the result) does not depend on the
  // number of workers.
  const int workers = std::min(worker_count(), camera.height);
  const int band = (camera.height + workers - 1) / workers;
  parallel_for(0, workers, [&](int w) {
    const int lo = w * band;
    const int hi = std::min(camera.height, lo + band);
    if (lo < hi) composite_rows(splats, camera, lo, hi, pixels);
  });
  return finalize(pixels, camera.height, camera.width, background);
}

Image reference_rasterize(const GaussianSet& set, const Camera& camera, const Vec3& background) {
  if (camera.width <= 0 || camera.height <= 0) throw InvalidInput("empty camera image plane");
  if (set.size() > 10000) {
    throw InvalidInput("reference rasterizer is quadratic; refusing more than 10^4 primitives");
  }
  const std::vector<ProjectedGaussian> splats = project_sorted(set, camera);
  std::vector<PixelState> pixels(static_cast<std::size_t>(camera.height) * camera.width);

  for (const ProjectedGaussian& s : splats) {
    const double det = s.cov2d.determinant();
    if (!(det > 0.0)) continue;
    const double inv_det = 1.0 / det;
    const double ia = s.cov2d(1, 1) * inv_det;
    const double ib = -s.cov2d(0, 1) * inv_det;
    const double ic = s.cov2d(0, 0) * inv_det;
    for (int r = 0; r < camera.height; ++r) {
      for (int c = 0; c < camera.width; ++c) {
        PixelState& px = pixels[static_cast<std::size_t>(r) * camera.width + c];
        const double dx = (c + 0.5) - s.mean2d.x();
        const double dy = (r + 0.5) - s.mean2d.y();
        const double power = -0.5 * (ia * dx * dx + 2.0 * ib * dx * dy + ic * dy * dy);
        const double alpha = std::min(kAlphaMax, s.opacity * std::exp(power));
        px.color += alpha * px.transmittance * s.color;
        px.transmittance *= 1.0 - alpha;
      }
    }
  }
  return finalize(pixels, camera.height, camera.width, background);
}

}  // namespace gsc
