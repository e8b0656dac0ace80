// SPDX-License-Identifier: Apache-2.0
// Release gate: every shipping criterion checked end to end, one verdict
// line each. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gsc/allocator.hpp"
#include "gsc/compactor.hpp"
#include "gsc/importance.hpp"
#include "gsc/io.hpp"
#include "gsc/quality.hpp"
#include "gsc/renderer.hpp"
#include "gsc/schedule.hpp"
#include "gsc/synthetic.hpp"

#include "../unit/helpers.hpp"

using namespace gsc;

namespace {

struct Gate {
  bool pass = true;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GaussianSet pool_views(const Scene& scene) {
  GaussianSet pooled;
  for (const SceneView& view : scene.views) {
    pooled.primitives.insert(pooled.primitives.end(), view.gaussians.primitives.begin(),
                             view.gaussians.primitives.end());
  }
  return pooled;
}

// Independent mask pipeline used by criterion 7: plain loops and its own
// quantile, sharing nothing with the library implementation.
MaskMap mask_oracle(const Image& image, const Vec3Map& points, double rho, bool literal) {
  const int h = image.height, w = image.width;
  auto cl = [](int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); };

  std::vector<double> photo(static_cast<std::size_t>(h) * w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double gx =
            (image.at(r, cl(c + 1, w), ch) - image.at(r, cl(c - 1, w), ch)) / 2.0;
        const double gy =
            (image.at(cl(r + 1, h), c, ch) - image.at(cl(r - 1, h), c, ch)) / 2.0;
        acc += gx * gx + gy * gy;
      }
      photo[static_cast<std::size_t>(r) * w + c] = std::sqrt(acc);
    }
  }

  std::vector<Vec3> normals(static_cast<std::size_t>(h) * w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const Vec3 dx = (points.at(r, cl(c + 1, w)) - points.at(r, cl(c - 1, w))) / 2.0;
      const Vec3 dy = (points.at(cl(r + 1, h), c) - points.at(cl(r - 1, h), c)) / 2.0;
      const Vec3 cr = dx.cross(dy);
      normals[static_cast<std::size_t>(r) * w + c] =
          cr.squaredNorm() > 0.0 ? Vec3(cr.normalized()) : Vec3(0, 0, 1);
    }
  }
  std::vector<double> geo(static_cast<std::size_t>(h) * w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const Vec3 gx = (normals[static_cast<std::size_t>(r) * w + cl(c + 1, w)] -
                       normals[static_cast<std::size_t>(r) * w + cl(c - 1, w)]) / 2.0;
      const Vec3 gy = (normals[static_cast<std::size_t>(cl(r + 1, h)) * w + c] -
                       normals[static_cast<std::size_t>(cl(r - 1, h)) * w + c]) / 2.0;
      geo[static_cast<std::size_t>(r) * w + c] =
          std::sqrt(gx.squaredNorm() + gy.squaredNorm());
    }
  }

  std::vector<double> combined(photo.size());
  for (std::size_t i = 0; i < photo.size(); ++i) combined[i] = (photo[i] + geo[i]) / 2.0;

  std::vector<double> sorted = combined;
  std::sort(sorted.begin(), sorted.end());
  const double p = literal ? rho : 1.0 - rho;
  const double pos = (sorted.size() - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double eps = lo + 1 < sorted.size()
                         ? sorted[lo] + (pos - lo) * (sorted[lo + 1] - sorted[lo])
                         : sorted.back();

  MaskMap mask(h, w);
  for (std::size_t i = 0; i < combined.size(); ++i) mask.data[i] = combined[i] > eps ? 1 : 0;
  return mask;
}

void c1_budget_arithmetic(Gate& g) {
  const auto t0 = std::chrono::steady_clock::now();
  struct Row {
    double rho;
    int views;
    long long k;
  };
  const Row rows[] = {{0.05, 24, 78643},  {0.10, 24, 157286}, {0.40, 24, 629145},
                      {0.70, 24, 1101004}, {0.05, 16, 52428},  {0.40, 16, 419430}};
  for (const Row& r : rows) {
    const long long got = budget_from_ratio(r.rho, r.views, 256, 256);
    g.expect(got == r.k, "budget(" + std::to_string(r.rho) + "," + std::to_string(r.views) +
                             ") = " + std::to_string(got) + ", want " + std::to_string(r.k));
  }
  // thousands-rounded displays
  g.expect(budget_from_ratio(0.05, 24, 256, 256) / 1000 == 78, "display 78K");
  g.expect(budget_from_ratio(0.40, 24, 256, 256) / 1000 == 629, "display 629K");
  g.expect(budget_from_ratio(0.05, 16, 256, 256) / 1000 == 52, "display 52K");
  g.expect(budget_from_ratio(0.40, 16, 256, 256) / 1000 == 419, "display 419K");
  g.expect(seconds_since(t0) < 1.0, "runtime above 1s");
}

void c2_exact_budget_split(Gate& g) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10);
    const int h = 1 + static_cast<int>(rng() % 64);
    const int w = 1 + static_cast<int>(rng() % 64);
    const long long pool = static_cast<long long>(n) * h * w;
    const long long total = static_cast<long long>(rng() % (pool + 1));
    std::vector<double> eta(n);
    for (double& v : eta) v = u(rng);
    const AllocationPlan plan =
        allocate_budgets(spectral_weights(eta, 0.2), eta, total, h, w);
    long long sum = 0;
    bool in_bounds = true;
    for (const ViewBudget& v : plan.views) {
      in_bounds = in_bounds && v.budget >= 0 && v.budget <= static_cast<long long>(h) * w;
      sum += v.budget;
    }
    g.expect(in_bounds, "trial " + std::to_string(trial) + ": budget out of bounds");
    g.expect(sum == total, "trial " + std::to_string(trial) + ": sum " + std::to_string(sum) +
                               " != " + std::to_string(total));
    if (!g.pass) return;
  }
  g.expect(seconds_since(t0) < 10.0, "runtime above 10s");
}

void c3_weight_normalization(Gate& g) {
  const std::vector<double> kappa = spectral_weights({0.3, 0.1}, 0.2);
  g.expect(std::abs(kappa[0] - 1.462117) < 1e-6,
           "kappa[0] = " + std::to_string(kappa[0]) + ", want 1.462117");
  g.expect(std::abs(kappa[1] - 0.537883) < 1e-6,
           "kappa[1] = " + std::to_string(kappa[1]) + ", want 0.537883");

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> eta(2 + rng() % 9);
    for (double& v : eta) v = u(rng);
    const std::vector<double> k = spectral_weights(eta, 0.05 + u(rng));
    double mean = 0.0;
    for (double v : k) mean += v;
    mean /= static_cast<double>(k.size());
    g.expect(std::abs(mean - 1.0) <= 1e-9, "mean kappa off by " + std::to_string(mean - 1.0));
  }
}

void c4_loss_gradients(Gate& g) {
  const auto t0 = std::chrono::steady_clock::now();
  const double h = 1e-5;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;

  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<double> a(n);
    std::vector<std::uint8_t> t(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = 0.05 + 0.9 * u(rng);
      t[i] = rng() & 1;
    }
    const double lambda = 0.05 + u(rng);
    const OpacityLoss loss = opacity_alignment_loss(a, t, lambda);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> ap = a, am = a;
      ap[i] += h;
      am[i] -= h;
      const double fd = (opacity_alignment_loss(ap, t, lambda).value -
                         opacity_alignment_loss(am, t, lambda).value) /
                        (2.0 * h);
      const double rel = std::abs(loss.gradient[i] - fd) / std::max(std::abs(fd), 1e-8);
      worst = std::max(worst, rel);
    }
  }
  g.expect(worst < 1e-4, "opacity-loss gradient error " + std::to_string(worst));

  worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Image rendered(4, 5), target(4, 5);
    for (double& v : rendered.data) v = u(rng);
    for (double& v : target.data) v = u(rng);
    const RenderLoss loss = render_mse_loss(rendered, target);
    for (int probe = 0; probe < 12; ++probe) {
      const std::size_t i = rng() % rendered.data.size();
      Image rp = rendered, rm = rendered;
      rp.data[i] += h;
      rm.data[i] -= h;
      const double fd =
          (render_mse_loss(rp, target).value - render_mse_loss(rm, target).value) / (2.0 * h);
      const double rel = std::abs(loss.gradient.data[i] - fd) / std::max(std::abs(fd), 1e-8);
      worst = std::max(worst, rel);
    }
  }
  g.expect(worst < 1e-4, "mse gradient error " + std::to_string(worst));
  g.expect(seconds_since(t0) < 30.0, "runtime above 30s");
}

void c5_rasterizer_equivalence(Gate& g) {
  std::mt19937_64 rng(777);
  const Camera cam = test::simple_camera(32, 32);
  const double white_dc = 0.5 / 0.28209479177387814;
  double worst = 0.0, conservation = 0.0;

  // Frame-covering splats keep every term above the skip heuristics, so the
  // optimized path must reproduce the dense oracle to compositing precision.
  for (int scene = 0; scene < 50; ++scene) {
    GaussianSet set;
    const int n = 1 + static_cast<int>(rng() % 16);
    for (int i = 0; i < n; ++i) {
      set.primitives.push_back(test::covering_primitive(rng, cam, static_cast<int>(rng() % 4)));
    }
    const Image fast = rasterize(set, cam);
    const Image exact = reference_rasterize(set, cam);
    for (std::size_t i = 0; i < fast.data.size(); ++i) {
      worst = std::max(worst, std::abs(fast.data[i] - exact.data[i]));
    }
  }
  g.expect(worst <= 2e-3, "paths diverge by " + std::to_string(worst));

  // The conservation identity holds for arbitrary input: dropped terms leave
  // both the accumulated alpha and the final transmittance untouched. White
  // clones over a white background expose the telescoped sum directly.
  for (int scene = 0; scene < 50; ++scene) {
    GaussianSet white;
    const int n = 1 + static_cast<int>(rng() % 16);
    for (int i = 0; i < n; ++i) {
      white.primitives.push_back(test::random_primitive(rng, static_cast<int>(rng() % 4)));
    }
    for (auto& p : white.primitives) p.sh = {white_dc, white_dc, white_dc};
    const Vec3 bg = Vec3::Ones();
    for (const Image& img : {rasterize(white, cam, bg), reference_rasterize(white, cam, bg)}) {
      for (double v : img.data) conservation = std::max(conservation, std::abs(v - 1.0));
    }
  }
  g.expect(conservation <= 1e-6, "conservation residual " + std::to_string(conservation));
}

void c6_identity_and_empty(Gate& g) {
  SyntheticSpec spec;
  spec.views = 2;
  spec.height = 32;
  spec.width = 32;
  spec.seed = 123;
  spec.layout = SceneLayout::kTwoPlanes;
  const Scene scene = synthesize_scene(spec);
  const GaussianSet pooled = pool_views(scene);

  SyntheticSpec wide = spec;
  wide.views = 5;  // interior cameras of a denser arc are novel viewpoints
  const Scene probe = synthesize_scene(wide);

  const AllocationPlan full = plan_allocation(scene, 2048, AllocatorParams{});
  const CompactionResult identity = compact_scene(scene, full, CompactionParams{});
  g.expect(identity.output.size() == pooled.size(), "identity output size");

  for (int vi = 1; vi <= 3; ++vi) {
    const Camera& cam = probe.views[vi].camera;
    const Image a = rasterize(identity.output, cam);
    const Image b = rasterize(pooled, cam);
    g.expect(a.data == b.data, "identity render differs on novel view " + std::to_string(vi));
  }

  const AllocationPlan none = plan_allocation(scene, 0, AllocatorParams{});
  const CompactionResult empty = compact_scene(scene, none, CompactionParams{});
  g.expect(empty.output.empty(), "zero budget left output non-empty");
  const Vec3 bg(0.25, 0.5, 0.75);
  const Image blank = rasterize(empty.output, probe.views[2].camera, bg);
  for (int r = 0; r < blank.height && g.pass; ++r) {
    for (int c = 0; c < blank.width; ++c) {
      g.expect(blank.pixel(r, c) == bg, "zero-budget render is not pure background");
    }
  }
}

void c7_mask_pipeline(Gate& g) {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScalarMap map(64, 64);
  for (double& v : map.data) v = u(rng);  // distinct with probability one
  const double n = static_cast<double>(map.data.size());
  for (double rho : {0.3, 0.5, 0.77}) {
    const auto res = binarize_variation(map, rho, QuantileMode::kLiteral);
    const double fraction = static_cast<double>(res.mask.ones()) / n;
    g.expect(std::abs(fraction - (1.0 - rho)) <= 1.0 / n + 1e-12,
             "high fraction " + std::to_string(fraction) + " at rho " + std::to_string(rho));
  }

  // dyadic two-member cluster whose moment match is exact in binary64
  GaussianSet set;
  GaussianPrimitive a, b;
  a.center = Vec3(-0.5, 0.0, 0.0);
  b.center = Vec3(1.5, 0.0, 0.0);
  a.scale = b.scale = Vec3(0.75, 2.0, 4.0);
  a.opacity = b.opacity = 0.5;
  a.sh = {0.25, -0.5, 0.75};
  b.sh = {0.75, 0.5, 0.25};
  set.primitives = {a, b};
  const GaussianPrimitive merged = merge_cluster(set, {0, 1});
  g.expect(merged.center == Vec3(0.5, 0.0, 0.0), "merged center inexact");
  g.expect(merged.opacity == 0.5, "merged opacity is not the member max");
  g.expect(merged.scale == Vec3(1.25, 2.0, 4.0), "merged scale inexact");
  g.expect(merged.sh == std::vector<double>{0.5, 0.0, 0.5}, "merged sh inexact");
  Mat3 want;
  want << 1.5625, 0, 0, 0, 4, 0, 0, 0, 16;
  g.expect(covariance_from_factors(merged.scale, merged.rotation) == want,
           "merged covariance inexact");

  for (auto layout :
       {SceneLayout::kPlane, SceneLayout::kTwoPlanes, SceneLayout::kRandomBlobs}) {
    SyntheticSpec spec;
    spec.views = 1;
    spec.height = 8;
    spec.width = 8;
    spec.seed = 31337;
    spec.layout = layout;
    const Scene scene = synthesize_scene(spec);
    const SceneView& view = scene.views[0];
    Vec3Map points(8, 8);
    for (int i = 0; i < 64; ++i) points.data[i] = view.gaussians.primitives[i].center;

    for (auto mode : {QuantileMode::kLiteral, QuantileMode::kComplement}) {
      ImportanceParams params;
      params.rho = 0.4;
      params.mode = mode;
      const ViewImportance imp = compute_view_importance(view, params);
      const MaskMap expected =
          mask_oracle(view.image, points, 0.4, mode == QuantileMode::kLiteral);
      g.expect(imp.mask.data == expected.data, "mask disagrees with the oracle pipeline");
    }
  }
}

void c8_schedule(Gate& g) {
  for (long long pool : {16384LL, 10000LL, 4096LL, 777LL}) {
    g.expect(k_min_at(0, pool) ==
                 static_cast<long long>(std::nearbyint(0.85 * static_cast<double>(pool))),
             "k_min at t=0, pool " + std::to_string(pool));
    g.expect(k_min_at(5000, pool) ==
                 static_cast<long long>(std::nearbyint(0.60 * static_cast<double>(pool))),
             "k_min at t=5000, pool " + std::to_string(pool));
    for (long long t : {16000LL, 40000LL, 1000000000000LL}) {
      g.expect(k_min_at(t, pool) ==
                   static_cast<long long>(std::nearbyint(0.05 * static_cast<double>(pool))),
               "k_min floor at t=" + std::to_string(t));
    }
    g.expect(k_max_at(pool) ==
                 static_cast<long long>(std::nearbyint(0.95 * static_cast<double>(pool))),
             "k_max, pool " + std::to_string(pool));
  }

  const long long pool = 16384;
  const long long lo = k_min_at(0, pool), hi = k_max_at(pool);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (long long t : {0LL, 5000LL, 20000LL}) {
      const long long k = sample_budget(t, pool, seed);
      g.expect(k >= k_min_at(t, pool) && k <= hi, "sample out of bounds");
    }
  }

  double mean = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    mean += static_cast<double>(sample_budget(0, pool, 90000 + static_cast<std::uint64_t>(i)));
  }
  mean /= draws;
  const double mid = 0.5 * static_cast<double>(lo + hi);
  g.expect(std::abs(mean - mid) <= 0.005 * mid,
           "sample mean " + std::to_string(mean) + " vs midpoint " + std::to_string(mid));
}

void c9_quality_trend(Gate& g) {
  const auto t0 = std::chrono::steady_clock::now();
  for (auto layout :
       {SceneLayout::kPlane, SceneLayout::kTwoPlanes, SceneLayout::kRandomBlobs}) {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      SyntheticSpec spec;
      spec.views = 4;
      spec.height = 64;
      spec.width = 64;
      spec.seed = seed;
      spec.layout = layout;
      const Scene scene = synthesize_scene(spec);

      auto mean_psnr = [&](double rho) {
        const long long k = budget_from_ratio(rho, 4, 64, 64);
        const AllocationPlan plan = plan_allocation(scene, k, AllocatorParams{});
        const CompactionResult result = compact_scene(scene, plan, CompactionParams{});
        std::vector<double> values;
        for (const SceneView& view : scene.views) {
          values.push_back(psnr_db(rasterize(result.output, view.camera), view.image));
        }
        return batch_mean(values);
      };

      const double lean = mean_psnr(0.05);
      const double rich = mean_psnr(0.4);
      g.expect(rich >= lean - 0.1,
               "psnr regressed: " + std::to_string(rich) + " dB at 0.4 vs " +
                   std::to_string(lean) + " dB at 0.05 (layout " +
                   std::to_string(static_cast<int>(layout)) + ", seed " +
                   std::to_string(seed) + ")");

      const AllocationPlan full = plan_allocation(scene, 4 * 64 * 64, AllocatorParams{});
      const CompactionResult identity = compact_scene(scene, full, CompactionParams{});
      const GaussianSet pooled = pool_views(scene);
      for (const SceneView& view : scene.views) {
        const double sentinel =
            psnr_db(rasterize(identity.output, view.camera), rasterize(pooled, view.camera));
        g.expect(std::isinf(sentinel), "full-budget render is not the full-render sentinel");
      }
    }
  }
  g.expect(seconds_since(t0) < 300.0, "runtime above 5 minutes");
}

void c10_storage_round_trip(Gate& g) {
  test::TempDir tmp("acceptance");
  std::mt19937_64 rng(606);
  auto f32 = [](double v) { return static_cast<double>(static_cast<float>(v)); };

  for (int trial = 0; trial < 100; ++trial) {
    GaussianSet set;
    const int n = 1 + static_cast<int>(rng() % 50);
    const int degree = static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) set.primitives.push_back(test::random_primitive(rng, degree));
    const std::string path = tmp.file("roundtrip.ply");
    write_ply(set, path);
    const GaussianSet back = read_ply(path);
    g.expect(back.size() == set.size(), "primitive count changed");
    for (std::size_t i = 0; i < set.size() && g.pass; ++i) {
      const auto& a = set.primitives[i];
      const auto& b = back.primitives[i];
      for (int axis = 0; axis < 3; ++axis) {
        g.expect(b.center[axis] == f32(a.center[axis]), "center beyond float32 round-off");
        g.expect(std::abs(b.scale[axis] - a.scale[axis]) <= 1e-6 * a.scale[axis] + 1e-9,
                 "scale beyond float32 round-off");
      }
      g.expect(std::abs(b.opacity - a.opacity) <= 1e-6, "opacity beyond float32 round-off");
      for (std::size_t s = 0; s < a.sh.size(); ++s) {
        g.expect(b.sh[s] == f32(a.sh[s]), "sh beyond float32 round-off");
      }
      g.expect(std::abs(std::abs(b.rotation.coeffs().dot(a.rotation.coeffs())) - 1.0) <= 1e-9,
               "rotation beyond float32 round-off");
    }
    if (!g.pass) return;
  }

  GaussianSet fixed;
  GaussianPrimitive p;
  p.opacity = 0.5;
  p.scale = Vec3::Ones();
  fixed.primitives.push_back(p);
  const std::string path = tmp.file("fixed.ply");
  write_ply(fixed, path);
  const GaussianSet back = read_ply(path);
  g.expect(back.primitives[0].opacity == 0.5, "logit zero not exact");
  g.expect(back.primitives[0].scale == Vec3(1.0, 1.0, 1.0), "log-scale zero not exact");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    void (*fn)(Gate&);
  };
  const Criterion criteria[] = {
      {"budget arithmetic", c1_budget_arithmetic},
      {"exact budget split", c2_exact_budget_split},
      {"weight normalization", c3_weight_normalization},
      {"loss gradients", c4_loss_gradients},
      {"rasterizer equivalence", c5_rasterizer_equivalence},
      {"identity and empty compaction", c6_identity_and_empty},
      {"mask pipeline", c7_mask_pipeline},
      {"annealing schedule", c8_schedule},
      {"quality trend", c9_quality_trend},
      {"storage round trip", c10_storage_round_trip},
  };

  int failures = 0;
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    Gate gate;
    const auto t0 = std::chrono::steady_clock::now();
    criteria[i].fn(gate);
    const double dt = seconds_since(t0);
    if (gate.pass) {
      std::printf("[PASS] criterion %zu: %s (%.2fs)\n", i + 1, criteria[i].name, dt);
    } else {
      std::printf("[FAIL] criterion %zu: %s (%.2fs): %s\n", i + 1, criteria[i].name, dt,
                  gate.detail.c_str());
      ++failures;
    }
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, std::size(criteria));
    return 1;
  }
  std::printf("all %zu criteria passed\n", std::size(criteria));
  return 0;
}
