// SPDX-License-Identifier: Apache-2.0
#include "gsc/core.hpp"

#include <cmath>
#include <numeric>

namespace gsc {

int sh_degree_from_count(std::size_t count) {
  for (int d = 0; d <= 3; ++d) {
    if (count == static_cast<std::size_t>(3 * (d + 1) * (d + 1))) return d;
  }
  return -1;
}

int GaussianPrimitive::sh_degree() const { return sh_degree_from_count(sh.size()); }

std::size_t MaskMap::ones() const {
  return static_cast<std::size_t>(std::accumulate(data.begin(), data.end(), 0LL));
}

long long Scene::total_primitives() const {
  long long n = 0;
  for (const auto& v : views) n += static_cast<long long>(v.gaussians.size());
  return n;
}

Mat3 covariance_from_factors(const Vec3& scale, const Quat& rotation) {
  if (!(scale.x() > 0.0 && scale.y() > 0.0 && scale.z() > 0.0)) {
    throw InvalidInput("invalid scale: components must be strictly positive");
  }
  const double n2 = rotation.squaredNorm();
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw InvalidInput("invalid rotation: quaternion must be nonzero and finite");
  }
  const Mat3 r = rotation.normalized().toRotationMatrix();
  return r * scale.array().square().matrix().asDiagonal() * r.transpose();
}

namespace {

void check_primitive(int view, int index, const GaussianPrimitive& g,
                     std::vector<Violation>& out) {
  auto add = [&](const char* field, std::string msg) {
    out.push_back({view, index, field, std::move(msg)});
  };
  if (!g.center.allFinite()) add("center", "center has non-finite components");
  if (!std::isfinite(g.opacity) || g.opacity < 0.0 || g.opacity > 1.0) {
    add("opacity", "opacity outside [0,1]");
  }
  if (!g.scale.allFinite() || !(g.scale.minCoeff() > 0.0)) {
    add("scale", "scale components must be strictly positive");
  }
  const double qn = g.rotation.norm();
  if (!std::isfinite(qn) || std::abs(qn - 1.0) > 1e-6) {
    add("rotation", "quaternion is not unit length");
  }
  if (sh_degree_from_count(g.sh.size()) < 0) {
    add("sh", "coefficient count is not 3*(d+1)^2 for d in 0..3");
  }
  for (double c : g.sh) {
    if (!std::isfinite(c)) {
      add("sh", "coefficient has non-finite value");
      break;
    }
  }
}

}  // namespace

std::vector<Violation> validate_scene(const Scene& scene) {
  std::vector<Violation> out;
  for (int vi = 0; vi < scene.view_count(); ++vi) {
    const SceneView& view = scene.views[vi];
    const Camera& cam = view.camera;
    auto add = [&](const char* field, std::string msg) {
      out.push_back({vi, -1, field, std::move(msg)});
    };

    if (cam.width <= 0 || cam.height <= 0) add("camera", "non-positive image dimensions");
    if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) add("camera", "focal lengths must be positive");
    if (cam.width > 0 && !(cam.cx >= 0.0 && cam.cx < cam.width)) {
      add("camera", "principal point x outside [0,width)");
    }
    if (cam.height > 0 && !(cam.cy >= 0.0 && cam.cy < cam.height)) {
      add("camera", "principal point y outside [0,height)");
    }
    const Mat3 r = cam.rotation();
    if ((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
      add("camera", "world_to_camera rotation block is not orthonormal");
    }
    const Eigen::RowVector4d bottom = cam.world_to_camera.row(3);
    if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-12) {
      add("camera", "world_to_camera bottom row is not (0,0,0,1)");
    }

    if (view.image.height != cam.height || view.image.width != cam.width) {
      add("image", "image dimensions disagree with camera");
    }
    for (double v : view.image.data) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        add("image", "pixel value outside [0,1]");
        break;
      }
    }

    const GaussianSet& set = view.gaussians;
    if (set.pixel_aligned) {
      const std::size_t hw = static_cast<std::size_t>(cam.height) * cam.width;
      if (set.size() != hw) add("gaussians", "pixel-aligned set size is not H*W");
    }
    if (!set.source_pixel.empty() && set.source_pixel.size() != set.size()) {
      add("gaussians", "source_pixel size disagrees with primitive count");
    }
    for (std::size_t i = 0; i < set.size(); ++i) {
      check_primitive(vi, static_cast<int>(i), set.primitives[i], out);
    }
  }
  return out;
}

}  // namespace gsc
