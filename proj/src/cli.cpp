// SPDX-License-Identifier: Apache-2.0
#include "gsc/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "gsc/allocator.hpp"
#include "gsc/compactor.hpp"
#include "gsc/importance.hpp"
#include "gsc/io.hpp"
#include "gsc/quality.hpp"
#include "gsc/renderer.hpp"
#include "gsc/schedule.hpp"
#include "gsc/synthetic.hpp"

namespace fs = std::filesystem;

namespace gsc {

namespace {

const std::map<std::string, SceneLayout> kLayouts = {
    {"plane", SceneLayout::kPlane},
    {"two_planes", SceneLayout::kTwoPlanes},
    {"random_blobs", SceneLayout::kRandomBlobs}};

const std::map<std::string, ScoreStrategy> kStrategies = {
    {"opacity", ScoreStrategy::kOpacity},
    {"variation", ScoreStrategy::kVariation},
    {"variation_x_opacity", ScoreStrategy::kVariationTimesOpacity},
    {"mask_then_opacity", ScoreStrategy::kMaskThenOpacity}};

const std::map<std::string, QuantileMode> kQuantileModes = {
    {"literal", QuantileMode::kLiteral}, {"complement", QuantileMode::kComplement}};

Vec3 parse_background(const std::string& text) {
  std::istringstream in(text);
  Vec3 bg;
  char comma1 = 0, comma2 = 0;
  if (!(in >> bg.x() >> comma1 >> bg.y() >> comma2 >> bg.z()) || comma1 != ',' ||
      comma2 != ',' || !(in >> std::ws).eof()) {
    throw InvalidInput("background must be 'r,g,b'");
  }
  if (bg.minCoeff() < 0.0 || bg.maxCoeff() > 1.0) {
    throw InvalidInput("background channels must lie in [0,1]");
  }
  return bg;
}

Scene load_valid_scene(const std::string& manifest) {
  Scene scene = read_scene(manifest);
  const auto violations = validate_scene(scene);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << manifest << ": invalid scene (" << violations.size() << " violations), first: ["
        << "view " << violations.front().view << ", " << violations.front().field << "] "
        << violations.front().message;
    throw InvalidInput(msg.str());
  }
  return scene;
}

long long resolve_budget(const Scene& scene, std::optional<long long> budget,
                         std::optional<double> ratio) {
  if (budget.has_value() == ratio.has_value()) {
    throw InvalidInput("exactly one of --budget or --ratio is required");
  }
  const int h = scene.views.front().camera.height;
  const int w = scene.views.front().camera.width;
  if (ratio) return budget_from_ratio(*ratio, scene.view_count(), h, w);
  return *budget;
}

int cmd_synth(const SyntheticSpec& spec, const std::string& out_dir) {
  write_scene(synthesize_scene(spec), out_dir);
  std::cout << "wrote scene (" << spec.views << " views, " << spec.height << "x" << spec.width
            << ") to " << out_dir << "\n";
  return 0;
}

int cmd_allocate(const std::string& manifest, std::optional<long long> budget,
                 std::optional<double> ratio, const AllocatorParams& params,
                 const std::string& out_path) {
  const Scene scene = load_valid_scene(manifest);
  const AllocationPlan plan =
      plan_allocation(scene, resolve_budget(scene, budget, ratio), params);
  if (out_path.empty()) {
    for (const ViewBudget& v : plan.views) {
      std::printf("view %d: eta=%.6f kappa=%.6f rho=%.6f budget=%lld\n", v.view, v.eta,
                  v.kappa, v.rho, v.budget);
    }
    std::printf("total=%lld rho_global=%.6f\n", plan.total_budget, plan.rho_global);
  } else {
    write_plan_json(plan, out_path);
  }
  return 0;
}

int cmd_compact(const std::string& manifest, std::optional<long long> budget,
                std::optional<double> ratio, const AllocatorParams& alloc_params,
                const CompactionParams& comp_params, bool with_metrics, const Vec3& background,
                const std::string& out_ply, const std::string& report_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const Scene scene = load_valid_scene(manifest);
  const long long k = resolve_budget(scene, budget, ratio);
  const AllocationPlan plan = plan_allocation(scene, k, alloc_params);
  const CompactionResult result = compact_scene(scene, plan, comp_params);
  write_ply(result.output, out_ply);

  CompactionReport report;
  report.plan = plan;
  report.views = result.views;
  report.input_count = scene.total_primitives();
  report.output_count = static_cast<long long>(result.output.size());
  report.storage_bytes = static_cast<unsigned long long>(fs::file_size(out_ply));

  if (with_metrics) {
    ReportMetrics metrics;
    std::vector<double> psnrs, ssims;
    for (int vi = 0; vi < scene.view_count(); ++vi) {
      const Image rendered = rasterize(result.output, scene.views[vi].camera, background);
      ViewMetrics m;
      m.view = vi;
      m.psnr_db = psnr_db(rendered, scene.views[vi].image);
      m.ssim = ssim(rendered, scene.views[vi].image);
      psnrs.push_back(m.psnr_db);
      ssims.push_back(m.ssim);
      metrics.per_view.push_back(m);
    }
    metrics.psnr_mean = batch_mean(psnrs);
    metrics.ssim_mean = batch_mean(ssims);
    report.metrics = std::move(metrics);
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!report_path.empty()) write_report(report, report_path);

  std::cout << "kept " << report.output_count << " of " << report.input_count << " (K=" << k
            << ", views=" << scene.view_count() << ") -> " << out_ply << "\n";
  if (report.metrics) {
    std::cout << "psnr_mean=" << report.metrics->psnr_mean
              << " ssim_mean=" << report.metrics->ssim_mean << "\n";
  }
  return 0;
}

int cmd_render(const std::string& ply_path, const std::string& camera_path,
               const std::string& out_png, const Vec3& background) {
  const GaussianSet set = read_ply(ply_path);
  const Camera camera = read_camera_json(camera_path);
  write_png(rasterize(set, camera, background), out_png);
  return 0;
}

int cmd_eval(const std::string& rendered_dir, const std::string& gt_dir,
             const std::string& out_path) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(rendered_dir)) {
    if (entry.path().extension() == ".png") names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw InvalidInput("no .png files in " + rendered_dir);

  std::ostringstream rows;
  double psnr_sum = 0.0, ssim_sum = 0.0;
  int count = 0;
  rows << "  \"pairs\": [";
  for (const std::string& name : names) {
    const fs::path gt_path = fs::path(gt_dir) / name;
    if (!fs::exists(gt_path)) throw InvalidInput("missing ground-truth pair: " + name);
    const Image rendered = read_png((fs::path(rendered_dir) / name).string());
    const Image truth = read_png(gt_path.string());
    const double p = psnr_db(rendered, truth);
    const double s = ssim(rendered, truth);
    psnr_sum += p;
    ssim_sum += s;
    rows << (count ? "," : "") << "\n    {\"name\": \"" << name << "\", \"psnr_db\": "
         << (std::isinf(p) ? "\"inf\"" : std::to_string(p)) << ", \"ssim\": " << s << "}";
    ++count;
  }
  rows << "\n  ]";

  std::ostringstream doc;
  doc << "{\n  \"psnr_mean\": "
      << (std::isinf(psnr_sum) ? "\"inf\"" : std::to_string(psnr_sum / count))
      << ",\n  \"ssim_mean\": " << ssim_sum / count << ",\n" << rows.str() << "\n}\n";
  if (out_path.empty()) {
    std::cout << doc.str();
  } else {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + out_path);
    out << doc.str();
  }
  return 0;
}

int cmd_mask(const std::string& manifest, const ImportanceParams& params,
             const std::string& out_dir) {
  const Scene scene = load_valid_scene(manifest);
  fs::create_directories(out_dir);
  char name[64];
  for (int vi = 0; vi < scene.view_count(); ++vi) {
    const ViewImportance imp = compute_view_importance(scene.views[vi], params);
    Image img(imp.mask.height, imp.mask.width);
    for (int r = 0; r < imp.mask.height; ++r) {
      for (int c = 0; c < imp.mask.width; ++c) {
        img.set_pixel(r, c, Vec3::Constant(imp.mask.at(r, c) ? 1.0 : 0.0));
      }
    }
    std::snprintf(name, sizeof(name), "mask_%03d.png", vi);
    write_png(img, (fs::path(out_dir) / name).string());
    std::cout << "view " << vi << ": threshold=" << imp.threshold << " high=" << imp.high.size()
              << " low=" << imp.low.size() << "\n";
  }
  return 0;
}

int cmd_schedule(long long pool, long long t_max, std::uint64_t seed,
                 const ScheduleParams& params, const std::string& out_path) {
  std::ostringstream csv;
  csv << "t,k_min,k_max,sample\n";
  for (long long t = 0; t <= t_max; t += params.interval) {
    csv << t << "," << k_min_at(t, pool, params) << "," << k_max_at(pool, params) << ","
        << sample_budget(t, pool, seed, params) << "\n";
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + out_path);
    out << csv.str();
  }
  return 0;
}

int cmd_validate(const std::string& manifest) {
  const Scene scene = read_scene(manifest);
  const auto violations = validate_scene(scene);
  for (const Violation& v : violations) {
    std::cout << "view " << v.view << " primitive " << v.primitive << " [" << v.field << "]: "
              << v.message << "\n";
  }
  if (!violations.empty()) {
    std::cout << violations.size() << " violations\n";
    return 2;
  }
  std::cout << "ok: " << scene.view_count() << " views, " << scene.total_primitives()
            << " primitives\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Budget-controlled compaction for Gaussian-splat scenes"};
  app.require_subcommand(1);
  app.set_config("--config");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a procedural multi-view scene");
  SyntheticSpec spec;
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--views", spec.views, "View count")->check(CLI::PositiveNumber);
  synth->add_option("--height", spec.height, "Image height")->check(CLI::PositiveNumber);
  synth->add_option("--width", spec.width, "Image width")->check(CLI::PositiveNumber);
  synth->add_option("--seed", spec.seed, "RNG seed");
  synth
      ->add_option("--layout", spec.layout,
                   "Surface layout: plane, two_planes, random_blobs")
      ->transform(CLI::CheckedTransformer(kLayouts, CLI::ignore_case));

  // shared budget options
  std::string manifest;
  std::optional<long long> budget;
  std::optional<double> ratio;
  AllocatorParams alloc_params;
  auto add_budget_opts = [&](CLI::App* cmd) {
    cmd->add_option("--scene", manifest, "Scene manifest JSON")->required();
    cmd->add_option("--budget", budget, "Total primitive budget K");
    cmd->add_option("--ratio", ratio, "Keep ratio in [0,1]; K = floor(ratio*N*H*W)");
    cmd->add_option("--temperature", alloc_params.temperature, "Softmax temperature");
    cmd->add_option("--lowfreq-side", alloc_params.lowfreq_side,
                    "Low-frequency box side for spectral scores");
    cmd->add_flag("--uniform", alloc_params.uniform, "Uniform budgets, skip spectral weights");
  };

  // allocate
  auto* allocate = app.add_subcommand("allocate", "Plan per-view budgets");
  std::string plan_out;
  add_budget_opts(allocate);
  allocate->add_option("--out", plan_out, "Plan JSON path (default: print)");

  // compact
  auto* compact = app.add_subcommand("compact", "Compact a scene to a budget");
  CompactionParams comp_params;
  bool with_metrics = false;
  std::string compact_out, report_out, background_text = "0,0,0";
  add_budget_opts(compact);
  compact->add_option("--out", compact_out, "Output PLY path")->required();
  compact->add_option("--report", report_out, "Report JSON path");
  compact
      ->add_option("--strategy", comp_params.strategy,
                   "opacity, variation, variation_x_opacity, mask_then_opacity")
      ->transform(CLI::CheckedTransformer(kStrategies, CLI::ignore_case));
  compact->add_flag("--merge", comp_params.merge, "Merge low-importance clusters into the tail");
  compact->add_flag("--global-topk", comp_params.global_topk,
                    "One pooled selection, ignore per-view budgets");
  compact
      ->add_option("--quantile-mode", comp_params.quantile_mode,
                   "Mask threshold placement: literal or complement")
      ->transform(CLI::CheckedTransformer(kQuantileModes, CLI::ignore_case));
  compact->add_option("--patch-size", comp_params.patch_size, "Cluster key stride in pixels")
      ->check(CLI::PositiveNumber);
  compact->add_flag("--metrics", with_metrics, "Render the result and report PSNR/SSIM");
  compact->add_option("--background", background_text, "Background color 'r,g,b'");

  // render
  auto* render = app.add_subcommand("render", "Rasterize a PLY through a camera");
  std::string render_ply, render_camera, render_out, render_bg = "0,0,0";
  render->add_option("--ply", render_ply, "Gaussian PLY")->required();
  render->add_option("--camera", render_camera, "Camera JSON")->required();
  render->add_option("--out", render_out, "Output PNG")->required();
  render->add_option("--background", render_bg, "Background color 'r,g,b'");

  // eval
  auto* eval = app.add_subcommand("eval", "PSNR/SSIM between matching PNG directories");
  std::string eval_rendered, eval_gt, eval_out;
  eval->add_option("--rendered", eval_rendered, "Directory of rendered PNGs")->required();
  eval->add_option("--gt", eval_gt, "Directory of ground-truth PNGs")->required();
  eval->add_option("--out", eval_out, "Metrics JSON path (default: print)");

  // mask
  auto* mask = app.add_subcommand("mask", "Write per-view importance masks");
  ImportanceParams mask_params;
  std::string mask_scene, mask_out;
  mask->add_option("--scene", mask_scene, "Scene manifest JSON")->required();
  mask->add_option("--out", mask_out, "Output directory")->required();
  mask->add_option("--rho", mask_params.rho, "Quantile parameter in (0,1]");
  mask
      ->add_option("--quantile-mode", mask_params.mode,
                   "Mask threshold placement: literal or complement")
      ->transform(CLI::CheckedTransformer(kQuantileModes, CLI::ignore_case));
  mask->add_option("--patch-size", mask_params.patch_size, "Cluster key stride in pixels")
      ->check(CLI::PositiveNumber);

  // schedule
  auto* schedule = app.add_subcommand("schedule", "Print the budget annealing table");
  ScheduleParams sched_params;
  long long sched_pool = 0, sched_tmax = 20000;
  std::uint64_t sched_seed = 0;
  std::string sched_out;
  schedule->add_option("--pool", sched_pool, "Total pool N*H*W")->required();
  schedule->add_option("--t-max", sched_tmax, "Last training step");
  schedule->add_option("--seed", sched_seed, "Sampler seed");
  schedule->add_option("--interval", sched_params.interval, "Steps per decrement");
  schedule->add_option("--k-start", sched_params.k_start_ratio, "Initial lower-bound ratio");
  schedule->add_option("--k-max", sched_params.k_max_ratio, "Upper-bound ratio");
  schedule->add_option("--k-floor", sched_params.k_floor_ratio, "Final lower-bound ratio");
  schedule->add_option("--decay", sched_params.decay, "Ratio decrement per interval");
  schedule->add_option("--out", sched_out, "CSV path (default: print)");

  // validate
  auto* validate = app.add_subcommand("validate", "Check a scene against the type invariants");
  std::string validate_scene_path;
  validate->add_option("--scene", validate_scene_path, "Scene manifest JSON")->required();

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("gscompact");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(argv_storage.size());
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(spec, synth_out);
    if (allocate->parsed()) return cmd_allocate(manifest, budget, ratio, alloc_params, plan_out);
    if (compact->parsed()) {
      return cmd_compact(manifest, budget, ratio, alloc_params, comp_params, with_metrics,
                         parse_background(background_text), compact_out, report_out);
    }
    if (render->parsed()) {
      return cmd_render(render_ply, render_camera, render_out, parse_background(render_bg));
    }
    if (eval->parsed()) return cmd_eval(eval_rendered, eval_gt, eval_out);
    if (mask->parsed()) return cmd_mask(mask_scene, mask_params, mask_out);
    if (schedule->parsed()) {
      return cmd_schedule(sched_pool, sched_tmax, sched_seed, sched_params, sched_out);
    }
    if (validate->parsed()) return cmd_validate(validate_scene_path);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gsc
