// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "gsc/allocator.hpp"
#include "gsc/compactor.hpp"
#include "gsc/core.hpp"

namespace gsc {

// Gaussian-splat PLY, binary little-endian, one float32 vertex element:
//   x y z nx ny nz f_dc_0..2 f_rest_* opacity scale_0..2 rot_0..3
// f_dc holds the DC SH coefficients; f_rest holds the higher orders in
// channel-major blocks (all of R, then G, then B). opacity is stored as a
// logit clamped to [-15,15], scale as log stddev, rot as (w,x,y,z).
// Readers accept extra float properties and recover opacity through a
// sigmoid, scale through exp, and renormalize the quaternion.

/// Throws IoError on malformed headers, non-float properties, missing
/// required properties (named in the message), or non-binary-little-endian
/// files.
GaussianSet read_ply(const std::string& path);
void write_ply(const GaussianSet& set, const std::string& path);

/// 8-bit RGB PNG; values map linearly through 255. Palette, grayscale,
/// 16-bit, and alpha files are converted on read.
Image read_png(const std::string& path);
void write_png(const Image& image, const std::string& path);

/// Pinhole camera JSON: fx, fy, cx, cy, width, height, and w2c as 16
/// row-major entries of the world-to-camera matrix.
Camera read_camera_json(const std::string& path);
void write_camera_json(const Camera& camera, const std::string& path);

// Scene manifest JSON:
//   { "format_version": "1.0", "resolution": [H, W],
//     "views": [ { "view_id": 0, "image_path": ..., "camera_path": ...,
//                  "gaussians_path": ..., "pixel_aligned": true }, ... ] }
// Paths are relative to the manifest's directory. view_ids must be unique
// and contiguous from zero; every view must match the shared resolution.

Scene read_scene(const std::string& manifest_path);

/// Writes view_%03d.{png,camera.json,ply} plus the manifest into dir.
void write_scene(const Scene& scene, const std::string& dir,
                 const std::string& manifest_name = "scene.json");

struct ViewMetrics {
  int view = 0;
  double psnr_db = 0.0;  // may be +infinity
  double ssim = 0.0;
};

struct ReportMetrics {
  double psnr_mean = 0.0;
  double ssim_mean = 0.0;
  std::vector<ViewMetrics> per_view;
};

struct CompactionReport {
  AllocationPlan plan;
  std::vector<ViewCompaction> views;
  long long input_count = 0;
  long long output_count = 0;
  std::optional<ReportMetrics> metrics;
  unsigned long long storage_bytes = 0;
  double wall_time_s = 0.0;
};

/// Report JSON as described by schemas/report.schema.json. Infinite PSNR
/// serializes as the string "inf"; absent metrics serialize as null.
void write_report(const CompactionReport& report, const std::string& path);

/// Allocation plan JSON: total_budget, rho_global, and per-view rows.
void write_plan_json(const AllocationPlan& plan, const std::string& path);

}  // namespace gsc
