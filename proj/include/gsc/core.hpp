// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input or violated call contract; the CLI maps this to exit code 2.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Filesystem or file-format failure; the CLI maps this to exit code 1.
class IoError : public Error {
 public:
  using Error::Error;
};

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

/// One anisotropic 3D Gaussian. The covariance is kept factored as per-axis
/// standard deviations plus a rotation (SPD by construction); use
/// covariance_from_factors() to materialize the matrix.
struct GaussianPrimitive {
  Vec3 center = Vec3::Zero();
  double opacity = 1.0;              // activated, in [0,1]
  Vec3 scale = Vec3::Ones();         // per-axis stddev, strictly positive
  Quat rotation = Quat::Identity();  // unit quaternion
  // Spherical-harmonic color coefficients, coefficient-major and channel
  // interleaved: sh[m*3 + ch]. Valid sizes: 3, 12, 27, 48 (degree 0..3).
  std::vector<double> sh = {0.0, 0.0, 0.0};

  int sh_degree() const;
};

/// Returns the SH degree for a coefficient count of 3*(d+1)^2, or -1.
int sh_degree_from_count(std::size_t count);

/// Pinhole camera. world_to_camera maps world points into the camera frame
/// (x right, y down, z forward); its rotation block must be orthonormal.
struct Camera {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  Mat4 world_to_camera = Mat4::Identity();

  Mat3 rotation() const { return world_to_camera.topLeftCorner<3, 3>(); }
  Vec3 translation() const { return world_to_camera.topRightCorner<3, 1>(); }
  Vec3 to_camera(const Vec3& p) const { return rotation() * p + translation(); }
  Vec3 position() const { return -(rotation().transpose() * translation()); }
};

/// RGB image, row-major, channel-interleaved, values in [0,1].
struct Image {
  int height = 0, width = 0;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, fill) {}

  double& at(int r, int c, int ch) { return data[(static_cast<std::size_t>(r) * width + c) * 3 + ch]; }
  double at(int r, int c, int ch) const { return data[(static_cast<std::size_t>(r) * width + c) * 3 + ch]; }
  Vec3 pixel(int r, int c) const { return {at(r, c, 0), at(r, c, 1), at(r, c, 2)}; }
  void set_pixel(int r, int c, const Vec3& v) {
    at(r, c, 0) = v.x();
    at(r, c, 1) = v.y();
    at(r, c, 2) = v.z();
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
};

/// H x W scalar field (variation maps, transmittance buffers, ...).
struct ScalarMap {
  int height = 0, width = 0;
  std::vector<double> data;

  ScalarMap() = default;
  ScalarMap(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
};

/// H x W field of 3-vectors (normal maps, point maps).
struct Vec3Map {
  int height = 0, width = 0;
  std::vector<Vec3> data;

  Vec3Map() = default;
  Vec3Map(int h, int w, const Vec3& fill = Vec3::Zero())
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  Vec3& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
  const Vec3& at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
};

/// H x W binary mask, entries 0 or 1.
struct MaskMap {
  int height = 0, width = 0;
  std::vector<std::uint8_t> data;

  MaskMap() = default;
  MaskMap(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  std::uint8_t& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
  std::uint8_t at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
  std::size_t ones() const;
};

/// Ordered collection of Gaussians. When pixel_aligned is set the set holds
/// exactly H*W primitives in row-major pixel order; source_pixel is either
/// empty (identity: primitive i belongs to pixel i) or one entry per
/// primitive, carrying original pixel indices through subset operations.
struct GaussianSet {
  std::vector<GaussianPrimitive> primitives;
  std::optional<int> source_view;
  std::vector<int> source_pixel;
  bool pixel_aligned = false;

  std::size_t size() const { return primitives.size(); }
  bool empty() const { return primitives.empty(); }
  int pixel_of(std::size_t i) const {
    return source_pixel.empty() ? static_cast<int>(i) : source_pixel[i];
  }
};

struct SceneView {
  Image image;
  Camera camera;
  GaussianSet gaussians;
};

struct Scene {
  std::vector<SceneView> views;

  int view_count() const { return static_cast<int>(views.size()); }
  long long total_primitives() const;
};

struct Violation {
  int view = -1;       // -1 when not tied to a view
  int primitive = -1;  // -1 when not tied to a primitive
  std::string field;
  std::string message;
};

/// Sigma = R * diag(scale^2) * R^T. The quaternion is normalized internally.
/// Throws InvalidInput for a zero quaternion or non-positive scale.
Mat3 covariance_from_factors(const Vec3& scale, const Quat& rotation);

/// Checks every type invariant plus per-view image/camera dimension
/// agreement. Violations are returned as data; an empty report means valid.
std::vector<Violation> validate_scene(const Scene& scene);

}  // namespace gsc
