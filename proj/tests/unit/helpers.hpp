// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "gsc/core.hpp"

namespace test {

// Deterministic generators shared across suites. Everything takes an
// explicit engine so each test pins its own seed.

inline gsc::Quat random_unit_quaternion(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  gsc::Quat q(n(rng), n(rng), n(rng), n(rng));
  if (q.norm() < 1e-9) return gsc::Quat::Identity();
  q.normalize();
  return q;
}

inline gsc::GaussianPrimitive random_primitive(std::mt19937_64& rng, int sh_degree = 0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  gsc::GaussianPrimitive g;
  g.center = gsc::Vec3(4.0 * u(rng) - 2.0, 4.0 * u(rng) - 2.0, 0.5 + 5.5 * u(rng));
  g.opacity = 0.05 + 0.95 * u(rng);
  for (int a = 0; a < 3; ++a) g.scale[a] = std::exp(std::log(0.05) + u(rng) * std::log(16.0));
  g.rotation = random_unit_quaternion(rng);
  g.sh.assign(3 * (sh_degree + 1) * (sh_degree + 1), 0.0);
  for (double& c : g.sh) c = 2.0 * u(rng) - 1.0;
  return g;
}

// Primitive whose projected footprint covers the whole frame with margin and
// whose alpha stays above the compositing floor at every in-frame pixel. On
// such input the optimized rasterizer applies exactly the terms the dense
// reference applies, so the two paths agree to accumulation precision.
// Assumes an identity-pose camera looking along +z.
inline gsc::GaussianPrimitive covering_primitive(std::mt19937_64& rng, const gsc::Camera& cam,
                                                 int sh_degree = 0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double z = 2.0 + 2.0 * u(rng);
  const double px = cam.width * (0.25 + 0.5 * u(rng));
  const double py = cam.height * (0.25 + 0.5 * u(rng));
  gsc::GaussianPrimitive g;
  g.center = gsc::Vec3((px - cam.cx) / cam.fx * z, (py - cam.cy) / cam.fy * z, z);
  g.opacity = 0.25 + 0.75 * u(rng);
  const double base = z * std::max(cam.width, cam.height) / std::min(cam.fx, cam.fy);
  for (int a = 0; a < 3; ++a) g.scale[a] = base * (0.5 + 0.5 * u(rng));
  g.rotation = random_unit_quaternion(rng);
  g.sh.assign(3 * (sh_degree + 1) * (sh_degree + 1), 0.0);
  for (double& c : g.sh) c = 2.0 * u(rng) - 1.0;
  return g;
}

inline gsc::Camera simple_camera(int height, int width, double focal = 0.0) {
  gsc::Camera cam;
  cam.height = height;
  cam.width = width;
  cam.fx = focal > 0.0 ? focal : 0.6 * width;
  cam.fy = focal > 0.0 ? focal : 0.6 * width;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  return cam;  // identity pose, looking along +z
}

// Fresh directory under the system temp root; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("gsc_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace test
