// SPDX-License-Identifier: Apache-2.0
#include "gsc/compactor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gsc {

std::vector<double> sample_map_at_centers(const GaussianSet& set, const Camera& camera,
                                          const ScalarMap& map) {
  if (map.height != camera.height || map.width != camera.width) {
    throw InvalidInput("sampled map dimensions disagree with camera");
  }
  std::vector<double> out(set.size(), 0.0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Vec3 p = camera.to_camera(set.primitives[i].center);
    if (p.z() <= 1e-6) continue;
    const int col = static_cast<int>(std::floor(camera.fx * p.x() / p.z() + camera.cx));
    const int row = static_cast<int>(std::floor(camera.fy * p.y() / p.z() + camera.cy));
    if (row < 0 || row >= map.height || col < 0 || col >= map.width) continue;
    out[i] = map.at(row, col);
  }
  return out;
}

std::vector<double> score_primitives(const GaussianSet& set, ScoreStrategy strategy,
                                     const std::vector<double>& variation,
                                     const std::vector<std::uint8_t>& targets) {
  const std::size_t n = set.size();
  const bool needs_variation =
      strategy == ScoreStrategy::kVariation || strategy == ScoreStrategy::kVariationTimesOpacity;
  if (needs_variation && variation.size() != n) {
    throw InvalidInput("scoring: variation values missing");
  }
  if (strategy == ScoreStrategy::kMaskThenOpacity && targets.size() != n) {
    throw InvalidInput("scoring: mask targets missing");
  }
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = set.primitives[i].opacity;
    switch (strategy) {
      case ScoreStrategy::kOpacity:
        scores[i] = a;
        break;
      case ScoreStrategy::kVariation:
        scores[i] = variation[i];
        break;
      case ScoreStrategy::kVariationTimesOpacity:
        scores[i] = variation[i] * a;
        break;
      case ScoreStrategy::kMaskThenOpacity:
        scores[i] = targets[i] ? 1.0 + a : a;
        break;
    }
  }
  return scores;
}

std::vector<int> select_top_k(const std::vector<double>& scores, long long k) {
  const long long n = static_cast<long long>(scores.size());
  if (k < 0 || k > n) throw InvalidInput("top-k budget outside [0, n]");
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](int a, int b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
  };
  if (k < n) {
    std::nth_element(order.begin(), order.begin() + k, order.end(), better);
    order.resize(static_cast<std::size_t>(k));
  }
  std::sort(order.begin(), order.end());
  return order;
}

namespace {

struct ViewPieces {
  std::vector<int> kept;                    // original indices, ascending
  std::vector<GaussianPrimitive> summaries; // merged cluster proxies
};

ViewPieces compact_view(const SceneView& view, const ViewBudget& vb,
                        const CompactionParams& params, ViewCompaction& stats) {
  ViewPieces out;
  const GaussianSet& set = view.gaussians;
  const long long k = vb.budget;
  if (k > static_cast<long long>(set.size())) {
    throw InvalidInput("view budget exceeds primitive count");
  }
  stats = {vb.view, k, 0, 0};
  if (k == 0) return out;

  const bool needs_importance = params.merge || params.strategy != ScoreStrategy::kOpacity;
  ViewImportance imp;
  std::vector<double> variation;
  if (needs_importance) {
    ImportanceParams ip;
    ip.rho = std::min(1.0, std::max(vb.rho, 1e-9));
    ip.mode = params.quantile_mode;
    ip.patch_size = params.patch_size;
    imp = compute_view_importance(view, ip);
    variation = sample_map_at_centers(set, view.camera, imp.combined);
  }
  const std::vector<double> scores =
      score_primitives(set, params.strategy, variation, imp.targets);
  out.kept = select_top_k(scores, k);
  stats.selected = static_cast<long long>(out.kept.size());

  if (params.merge && !imp.low.empty()) {
    std::vector<std::pair<int, int>> positions;
    positions.reserve(imp.low.size());
    for (int idx : imp.low) {
      const int p = set.pixel_of(static_cast<std::size_t>(idx));
      positions.emplace_back(p / view.camera.width, p % view.camera.width);
    }
    const auto clusters = cluster_positions(positions, params.patch_size);
    const long long m = static_cast<long long>(clusters.size());
    if (m > 0 && m <= k) {
      // Drop the m weakest picks to stay exactly on budget; among equal
      // scores the higher index goes first, mirroring selection order.
      std::vector<int> by_weakness = out.kept;
      std::sort(by_weakness.begin(), by_weakness.end(), [&](int a, int b) {
        return scores[a] != scores[b] ? scores[a] < scores[b] : a > b;
      });
      by_weakness.resize(static_cast<std::size_t>(m));
      std::vector<char> dropped(set.size(), 0);
      for (int idx : by_weakness) dropped[idx] = 1;
      std::vector<int> survivors;
      survivors.reserve(out.kept.size() - static_cast<std::size_t>(m));
      for (int idx : out.kept) {
        if (!dropped[idx]) survivors.push_back(idx);
      }
      out.kept = std::move(survivors);

      out.summaries.reserve(clusters.size());
      for (const auto& cluster : clusters) {
        std::vector<int> members;
        members.reserve(cluster.size());
        for (int mi : cluster) members.push_back(imp.low[mi]);
        out.summaries.push_back(merge_cluster(set, members));
      }
      stats.selected = static_cast<long long>(out.kept.size());
      stats.merged_added = m;
    }
  }
  return out;
}

}  // namespace

CompactionResult compact_scene(const Scene& scene, const AllocationPlan& plan,
                               const CompactionParams& params) {
  if (scene.views.empty()) throw InvalidInput("compaction of an empty scene");
  if (params.global_topk && params.merge) {
    throw InvalidInput("merge is a per-view operation; it cannot combine with global top-k");
  }

  CompactionResult result;

  if (params.global_topk) {
    std::vector<double> pooled;
    std::vector<std::pair<int, int>> origin;  // (view, local index)
    for (int vi = 0; vi < scene.view_count(); ++vi) {
      const SceneView& view = scene.views[vi];
      ViewImportance imp;
      std::vector<double> variation;
      if (params.strategy != ScoreStrategy::kOpacity) {
        ImportanceParams ip;
        ip.rho = std::min(1.0, std::max(plan.rho_global, 1e-9));
        ip.mode = params.quantile_mode;
        ip.patch_size = params.patch_size;
        imp = compute_view_importance(view, ip);
        variation = sample_map_at_centers(view.gaussians, view.camera, imp.combined);
      }
      const auto scores =
          score_primitives(view.gaussians, params.strategy, variation, imp.targets);
      for (std::size_t i = 0; i < scores.size(); ++i) {
        pooled.push_back(scores[i]);
        origin.emplace_back(vi, static_cast<int>(i));
      }
    }
    const std::vector<int> picked = select_top_k(pooled, plan.total_budget);
    result.views.resize(scene.views.size());
    for (int vi = 0; vi < scene.view_count(); ++vi) {
      result.views[vi] = {vi, 0, 0, 0};
    }
    for (int p : picked) {
      const auto [vi, li] = origin[p];
      result.output.primitives.push_back(scene.views[vi].gaussians.primitives[li]);
      ++result.views[vi].selected;
    }
    for (auto& v : result.views) v.budget = v.selected;
    return result;
  }

  if (plan.views.size() != scene.views.size()) {
    throw InvalidInput("allocation plan view count disagrees with scene");
  }
  result.views.resize(scene.views.size());
  for (int vi = 0; vi < scene.view_count(); ++vi) {
    const ViewPieces pieces =
        compact_view(scene.views[vi], plan.views[vi], params, result.views[vi]);
    for (int idx : pieces.kept) {
      result.output.primitives.push_back(scene.views[vi].gaussians.primitives[idx]);
    }
    for (const auto& g : pieces.summaries) result.output.primitives.push_back(g);
  }
  return result;
}

}  // namespace gsc
