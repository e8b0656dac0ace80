// SPDX-License-Identifier: Apache-2.0
#include "gsc/synthetic.hpp"

#include <cmath>

#include "gsc/renderer.hpp"
#include "gsc/schedule.hpp"

namespace gsc {

namespace {

constexpr double kCameraDistance = 2.5;
constexpr double kStepDepth = -0.8;
constexpr int kBlobCount = 5;

struct Blob {
  double px, py, sigma, amp;
};

// splitmix64-driven uniform in [lo, hi); the counter makes draws
// order-independent.
double uniform(std::uint64_t seed, std::uint64_t counter, double lo, double hi) {
  const std::uint64_t bits = splitmix64(splitmix64(seed) ^ splitmix64(counter));
  const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

std::vector<Blob> make_blobs(std::uint64_t seed) {
  std::vector<Blob> blobs(kBlobCount);
  for (int k = 0; k < kBlobCount; ++k) {
    const std::uint64_t base = 100 + 4 * static_cast<std::uint64_t>(k);
    blobs[k] = {uniform(seed, base + 0, -1.2, 1.2), uniform(seed, base + 1, -1.2, 1.2),
                uniform(seed, base + 2, 0.25, 0.6), uniform(seed, base + 3, -0.35, 0.35)};
  }
  return blobs;
}

double surface_height(SceneLayout layout, const std::vector<Blob>& blobs, double x, double y) {
  switch (layout) {
    case SceneLayout::kPlane:
      return 0.0;
    case SceneLayout::kTwoPlanes:
      return x < 0.0 ? 0.0 : kStepDepth;
    case SceneLayout::kRandomBlobs: {
      double h = 0.0;
      for (const Blob& b : blobs) {
        const double dx = x - b.px, dy = y - b.py;
        h += b.amp * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
      }
      return h;
    }
  }
  return 0.0;
}

Camera arc_camera(int index, int count, int height, int width) {
  const double t = count > 1 ? static_cast<double>(index) / (count - 1) : 0.5;
  const double theta = (-0.45 + 0.9 * t);
  const Vec3 eye(kCameraDistance * std::sin(theta), 0.35, kCameraDistance * std::cos(theta));

  const Vec3 z_c = (-eye).normalized();  // look at the origin
  const Vec3 x_c = Vec3(0.0, 1.0, 0.0).cross(z_c).normalized();
  const Vec3 y_c = z_c.cross(x_c);

  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = 0.8 * width;
  cam.fy = 0.8 * width;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  Mat3 r;
  r.row(0) = x_c.transpose();
  r.row(1) = y_c.transpose();
  r.row(2) = z_c.transpose();
  cam.world_to_camera.setIdentity();
  cam.world_to_camera.topLeftCorner<3, 3>() = r;
  cam.world_to_camera.topRightCorner<3, 1>() = -(r * eye);
  return cam;
}

// Intersection of the pixel ray with the surface. The camera sits well
// above every surface value, looking down, so a bracket between the eye
// and a plane under the lowest surface always straddles the sheet.
double intersect(SceneLayout layout, const std::vector<Blob>& blobs, const Vec3& origin,
                 const Vec3& dir) {
  if (layout == SceneLayout::kPlane) return -origin.z() / dir.z();
  if (layout == SceneLayout::kTwoPlanes) {
    const double t0 = -origin.z() / dir.z();
    if (origin.x() + t0 * dir.x() < 0.0) return t0;
    return (kStepDepth - origin.z()) / dir.z();
  }
  double lo = 0.0;
  double hi = (-0.5 - origin.z()) / dir.z();
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double x = origin.x() + mid * dir.x();
    const double y = origin.y() + mid * dir.y();
    const double g = origin.z() + mid * dir.z() - surface_height(layout, blobs, x, y);
    (g > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Vec3 texture_color(double x, double y) {
  return {0.5 + 0.45 * std::sin(2.1 * x + 1.3 * y),
          0.5 + 0.45 * std::sin(1.7 * y - 0.8 * x + 2.0),
          0.5 + 0.45 * std::sin(2.9 * (x + y) + 4.0)};
}

Image quantized(const Image& in) {
  Image out(in.height, in.width);
  for (std::size_t i = 0; i < in.data.size(); ++i) {
    const double v = std::min(std::max(in.data[i], 0.0), 1.0);
    out.data[i] = static_cast<double>(std::lround(v * 255.0)) / 255.0;
  }
  return out;
}

}  // namespace

Scene synthesize_scene(const SyntheticSpec& spec) {
  if (spec.views <= 0 || spec.height <= 0 || spec.width <= 0) {
    throw InvalidInput("synthetic scene needs positive views and dimensions");
  }
  const std::vector<Blob> blobs =
      spec.layout == SceneLayout::kRandomBlobs ? make_blobs(spec.seed) : std::vector<Blob>{};
  const double phase = uniform(spec.seed, 7, 0.0, 6.283185307179586);

  Scene scene;
  scene.views.resize(spec.views);
  for (int vi = 0; vi < spec.views; ++vi) {
    SceneView& view = scene.views[vi];
    view.camera = arc_camera(vi, spec.views, spec.height, spec.width);
    const Mat3 r_t = view.camera.rotation().transpose();
    const Vec3 eye = view.camera.position();

    view.gaussians.pixel_aligned = true;
    view.gaussians.source_view = vi;
    view.gaussians.primitives.resize(static_cast<std::size_t>(spec.height) * spec.width);
    for (int row = 0; row < spec.height; ++row) {
      for (int col = 0; col < spec.width; ++col) {
        const Vec3 dir_cam((col + 0.5 - view.camera.cx) / view.camera.fx,
                           (row + 0.5 - view.camera.cy) / view.camera.fy, 1.0);
        const Vec3 dir = r_t * dir_cam;
        const double t = intersect(spec.layout, blobs, eye, dir);
        const Vec3 hit = eye + t * dir;

        GaussianPrimitive g;
        g.center = hit;
        // dir_cam.z == 1, so the ray parameter t equals camera depth; a
        // 0.7-pixel footprint keeps neighboring splats overlapping.
        g.scale = Vec3::Constant(0.7 * t / view.camera.fx);
        g.opacity = 0.3 + 0.35 * (1.0 + std::sin(5.0 * hit.x() + 7.0 * hit.y() + phase));
        const Vec3 color = texture_color(hit.x(), hit.y());
        g.sh = {(color.x() - 0.5) / 0.28209479177387814,
                (color.y() - 0.5) / 0.28209479177387814,
                (color.z() - 0.5) / 0.28209479177387814};
        view.gaussians.primitives[static_cast<std::size_t>(row) * spec.width + col] = g;
      }
    }

    // Ground truth from the view's own set; the exhaustive path up to its
    // size limit, the production path beyond it. Quantized like the PNG on
    // disk so that in-memory and re-read scenes match bit for bit.
    const Image raw = view.gaussians.size() <= 10000
                          ? reference_rasterize(view.gaussians, view.camera)
                          : rasterize(view.gaussians, view.camera);
    view.image = quantized(raw);
  }
  return scene;
}

}  // namespace gsc
