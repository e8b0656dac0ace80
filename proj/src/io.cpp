// SPDX-License-Identifier: Apache-2.0
#include "gsc/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace gsc {

namespace {

constexpr double kLogitClamp = 15.0;

double logit_clamped(double a) {
  if (a <= 0.0) return -kLogitClamp;
  if (a >= 1.0) return kLogitClamp;
  return std::clamp(std::log(a / (1.0 - a)), -kLogitClamp, kLogitClamp);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void put_f32(std::string& buf, double v) {
  const float f = static_cast<float>(v);
  char b[4];
  std::memcpy(b, &f, 4);
  buf.append(b, 4);
}

int rest_coeffs_for_degree(int degree) { return 3 * ((degree + 1) * (degree + 1) - 1); }

}  // namespace

void write_ply(const GaussianSet& set, const std::string& path) {
  int degree = 0;
  if (!set.empty()) {
    degree = set.primitives.front().sh_degree();
    if (degree < 0) throw InvalidInput("write_ply: invalid SH coefficient count");
    for (const auto& g : set.primitives) {
      if (g.sh_degree() != degree) {
        throw InvalidInput("write_ply: primitives disagree in SH degree");
      }
    }
  }
  const int rest = rest_coeffs_for_degree(degree);
  const int coeffs = (degree + 1) * (degree + 1);

  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\n"
         << "element vertex " << set.size() << "\n";
  for (const char* p : {"x", "y", "z", "nx", "ny", "nz"}) {
    header << "property float " << p << "\n";
  }
  for (int i = 0; i < 3; ++i) header << "property float f_dc_" << i << "\n";
  for (int i = 0; i < rest; ++i) header << "property float f_rest_" << i << "\n";
  header << "property float opacity\n";
  for (int i = 0; i < 3; ++i) header << "property float scale_" << i << "\n";
  for (int i = 0; i < 4; ++i) header << "property float rot_" << i << "\n";
  header << "end_header\n";

  std::string body;
  body.reserve(set.size() * (17 + rest) * 4);
  for (const auto& g : set.primitives) {
    put_f32(body, g.center.x());
    put_f32(body, g.center.y());
    put_f32(body, g.center.z());
    for (int i = 0; i < 3; ++i) put_f32(body, 0.0);  // normals, unused
    for (int ch = 0; ch < 3; ++ch) put_f32(body, g.sh[ch]);
    // Higher orders are channel-major on disk, coefficient-major in memory.
    for (int ch = 0; ch < 3; ++ch) {
      for (int m = 1; m < coeffs; ++m) put_f32(body, g.sh[m * 3 + ch]);
    }
    put_f32(body, logit_clamped(g.opacity));
    for (int i = 0; i < 3; ++i) {
      if (!(g.scale[i] > 0.0)) throw InvalidInput("write_ply: non-positive scale");
      put_f32(body, std::log(g.scale[i]));
    }
    put_f32(body, g.rotation.w());
    put_f32(body, g.rotation.x());
    put_f32(body, g.rotation.y());
    put_f32(body, g.rotation.z());
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << header.str();
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw IoError("short write: " + path);
}

GaussianSet read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);

  std::string line;
  if (!std::getline(in, line) || line != "ply") throw IoError("not a PLY file: " + path);

  long long count = -1;
  std::vector<std::string> props;
  bool format_seen = false, in_vertex = false, header_done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "comment" || tok.empty()) continue;
    if (tok == "format") {
      std::string kind, version;
      ls >> kind >> version;
      if (kind != "binary_little_endian") {
        throw IoError("unsupported PLY format '" + kind + "' (binary_little_endian only)");
      }
      format_seen = true;
    } else if (tok == "element") {
      std::string name;
      long long n = 0;
      ls >> name >> n;
      if (name != "vertex") throw IoError("unsupported PLY element '" + name + "'");
      if (count >= 0) throw IoError("duplicate vertex element");
      count = n;
      in_vertex = true;
    } else if (tok == "property") {
      if (!in_vertex) throw IoError("property outside vertex element");
      std::string type, name;
      ls >> type >> name;
      if (type != "float") {
        throw IoError("unsupported property type '" + type + "' for " + name);
      }
      props.push_back(name);
    } else if (tok == "end_header") {
      header_done = true;
      break;
    } else {
      throw IoError("unrecognized header line: " + line);
    }
  }
  if (!header_done || !format_seen || count < 0) throw IoError("truncated PLY header");

  std::map<std::string, int> offset;
  for (std::size_t i = 0; i < props.size(); ++i) offset[props[i]] = static_cast<int>(i);
  auto require = [&](const std::string& name) {
    auto it = offset.find(name);
    if (it == offset.end()) throw IoError("PLY missing required property '" + name + "'");
    return it->second;
  };

  const int ox = require("x"), oy = require("y"), oz = require("z");
  const int odc[3] = {require("f_dc_0"), require("f_dc_1"), require("f_dc_2")};
  const int oop = require("opacity");
  const int osc[3] = {require("scale_0"), require("scale_1"), require("scale_2")};
  const int orot[4] = {require("rot_0"), require("rot_1"), require("rot_2"), require("rot_3")};

  int rest = 0;
  while (offset.count("f_rest_" + std::to_string(rest))) ++rest;
  int degree = -1;
  for (int d = 0; d <= 3; ++d) {
    if (rest == rest_coeffs_for_degree(d)) degree = d;
  }
  if (degree < 0) throw IoError("PLY f_rest_* count does not match any SH degree in 0..3");
  const int coeffs = (degree + 1) * (degree + 1);
  std::vector<int> orest(rest);
  for (int i = 0; i < rest; ++i) orest[i] = offset.at("f_rest_" + std::to_string(i));

  const std::size_t stride = props.size() * 4;
  std::string row(stride, '\0');
  auto f32 = [&](int prop_index) {
    float f;
    std::memcpy(&f, row.data() + static_cast<std::size_t>(prop_index) * 4, 4);
    return static_cast<double>(f);
  };

  GaussianSet set;
  set.primitives.reserve(static_cast<std::size_t>(count));
  for (long long i = 0; i < count; ++i) {
    in.read(row.data(), static_cast<std::streamsize>(stride));
    if (in.gcount() != static_cast<std::streamsize>(stride)) {
      throw IoError("truncated PLY body: " + path);
    }
    GaussianPrimitive g;
    g.center = Vec3(f32(ox), f32(oy), f32(oz));
    g.sh.assign(static_cast<std::size_t>(coeffs) * 3, 0.0);
    for (int ch = 0; ch < 3; ++ch) g.sh[ch] = f32(odc[ch]);
    for (int ch = 0; ch < 3; ++ch) {
      for (int m = 1; m < coeffs; ++m) {
        g.sh[m * 3 + ch] = f32(orest[ch * (coeffs - 1) + (m - 1)]);
      }
    }
    g.opacity = sigmoid(f32(oop));
    for (int a = 0; a < 3; ++a) g.scale[a] = std::exp(f32(osc[a]));
    g.rotation = Quat(f32(orot[0]), f32(orot[1]), f32(orot[2]), f32(orot[3]));
    const double qn = g.rotation.norm();
    if (!(qn > 0.0) || !std::isfinite(qn)) {
      throw IoError("PLY row " + std::to_string(i) + ": zero or non-finite quaternion");
    }
    g.rotation.normalize();
    set.primitives.push_back(std::move(g));
  }
  return set;
}

namespace {

struct PngCloser {
  std::FILE* f = nullptr;
  ~PngCloser() {
    if (f) std::fclose(f);
  }
};

}  // namespace

Image read_png(const std::string& path) {
  PngCloser file{std::fopen(path.c_str(), "rb")};
  if (!file.f) throw IoError("cannot open: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }
  std::vector<png_bytep> rows;
  std::vector<png_byte> pixels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("malformed PNG: " + path);
  }
  png_init_io(png, file.f);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != static_cast<std::size_t>(w) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("unexpected PNG row layout: " + path);
  }
  pixels.resize(static_cast<std::size_t>(h) * rowbytes);
  rows.resize(h);
  for (png_uint_32 r = 0; r < h; ++r) rows[r] = pixels.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image out(static_cast<int>(h), static_cast<int>(w));
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = static_cast<double>(pixels[i]) / 255.0;
  }
  return out;
}

void write_png(const Image& image, const std::string& path) {
  if (image.height <= 0 || image.width <= 0) throw InvalidInput("write_png: empty image");
  PngCloser file{std::fopen(path.c_str(), "wb")};
  if (!file.f) throw IoError("cannot open for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path);
  }
  png_init_io(png, file.f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> row(static_cast<std::size_t>(image.width) * 3);
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        const double v = std::clamp(image.at(r, c, ch), 0.0, 1.0);
        row[static_cast<std::size_t>(c) * 3 + ch] =
            static_cast<png_byte>(std::lround(v * 255.0));
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw IoError("malformed JSON: " + path);
  return j;
}

void save_json(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("short write: " + path);
}

double require_number(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw IoError(path + ": missing or non-numeric '" + key + "'");
  }
  return j[key].get<double>();
}

}  // namespace

Camera read_camera_json(const std::string& path) {
  const json j = load_json(path);
  Camera cam;
  cam.fx = require_number(j, "fx", path);
  cam.fy = require_number(j, "fy", path);
  cam.cx = require_number(j, "cx", path);
  cam.cy = require_number(j, "cy", path);
  cam.width = static_cast<int>(require_number(j, "width", path));
  cam.height = static_cast<int>(require_number(j, "height", path));
  if (!j.contains("w2c") || !j["w2c"].is_array() || j["w2c"].size() != 16) {
    throw IoError(path + ": 'w2c' must be an array of 16 numbers");
  }
  for (int i = 0; i < 16; ++i) {
    const auto& v = j["w2c"][i];
    if (!v.is_number()) throw IoError(path + ": 'w2c' must be an array of 16 numbers");
    cam.world_to_camera(i / 4, i % 4) = v.get<double>();
  }
  return cam;
}

void write_camera_json(const Camera& camera, const std::string& path) {
  json j;
  j["fx"] = camera.fx;
  j["fy"] = camera.fy;
  j["cx"] = camera.cx;
  j["cy"] = camera.cy;
  j["width"] = camera.width;
  j["height"] = camera.height;
  json w2c = json::array();
  for (int i = 0; i < 16; ++i) w2c.push_back(camera.world_to_camera(i / 4, i % 4));
  j["w2c"] = std::move(w2c);
  save_json(j, path);
}

Scene read_scene(const std::string& manifest_path) {
  const json j = load_json(manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();

  if (!j.contains("format_version") || j["format_version"] != "1.0") {
    throw IoError(manifest_path + ": format_version must be \"1.0\"");
  }
  if (!j.contains("resolution") || !j["resolution"].is_array() || j["resolution"].size() != 2) {
    throw IoError(manifest_path + ": resolution must be [height, width]");
  }
  const int h = j["resolution"][0].get<int>();
  const int w = j["resolution"][1].get<int>();
  if (h <= 0 || w <= 0) throw IoError(manifest_path + ": non-positive resolution");
  if (!j.contains("views") || !j["views"].is_array() || j["views"].empty()) {
    throw IoError(manifest_path + ": views must be a non-empty array");
  }

  Scene scene;
  scene.views.resize(j["views"].size());
  std::vector<bool> seen(j["views"].size(), false);
  for (const auto& vj : j["views"]) {
    for (const char* key : {"view_id", "image_path", "camera_path", "gaussians_path"}) {
      if (!vj.contains(key)) {
        throw IoError(manifest_path + ": view missing '" + std::string(key) + "'");
      }
    }
    const int id = vj["view_id"].get<int>();
    if (id < 0 || id >= static_cast<int>(scene.views.size()) || seen[id]) {
      throw IoError(manifest_path + ": view_ids must be unique and contiguous from 0");
    }
    seen[id] = true;

    SceneView& view = scene.views[id];
    view.image = read_png((base / vj["image_path"].get<std::string>()).string());
    view.camera = read_camera_json((base / vj["camera_path"].get<std::string>()).string());
    view.gaussians = read_ply((base / vj["gaussians_path"].get<std::string>()).string());
    view.gaussians.source_view = id;
    if (vj.value("pixel_aligned", false)) {
      if (view.gaussians.size() != static_cast<std::size_t>(h) * w) {
        throw IoError(manifest_path + ": pixel-aligned view " + std::to_string(id) +
                      " does not hold H*W primitives");
      }
      view.gaussians.pixel_aligned = true;
    }
    if (view.image.height != h || view.image.width != w || view.camera.height != h ||
        view.camera.width != w) {
      throw IoError(manifest_path + ": view " + std::to_string(id) +
                    " disagrees with the manifest resolution");
    }
  }
  return scene;
}

void write_scene(const Scene& scene, const std::string& dir, const std::string& manifest_name) {
  if (scene.views.empty()) throw InvalidInput("write_scene: empty scene");
  fs::create_directories(dir);
  const fs::path base(dir);

  json views = json::array();
  char name[64];
  for (int i = 0; i < scene.view_count(); ++i) {
    const SceneView& view = scene.views[i];
    std::snprintf(name, sizeof(name), "view_%03d", i);
    const std::string stem(name);
    write_png(view.image, (base / (stem + ".png")).string());
    write_camera_json(view.camera, (base / (stem + ".camera.json")).string());
    write_ply(view.gaussians, (base / (stem + ".ply")).string());
    views.push_back({{"view_id", i},
                     {"image_path", stem + ".png"},
                     {"camera_path", stem + ".camera.json"},
                     {"gaussians_path", stem + ".ply"},
                     {"pixel_aligned", view.gaussians.pixel_aligned}});
  }
  json j;
  j["format_version"] = "1.0";
  j["resolution"] = {scene.views.front().camera.height, scene.views.front().camera.width};
  j["views"] = std::move(views);
  save_json(j, (base / manifest_name).string());
}

namespace {

json psnr_value(double v) {
  if (std::isinf(v)) return json("inf");
  return json(v);
}

}  // namespace

void write_report(const CompactionReport& report, const std::string& path) {
  if (report.plan.views.size() != report.views.size()) {
    throw InvalidInput("report: plan and compaction view counts disagree");
  }
  json per_view = json::array();
  for (std::size_t i = 0; i < report.views.size(); ++i) {
    const ViewBudget& vb = report.plan.views[i];
    const ViewCompaction& vc = report.views[i];
    per_view.push_back({{"view_id", vc.view},
                        {"budget", vc.budget},
                        {"selected", vc.selected},
                        {"merged_added", vc.merged_added},
                        {"eta", vb.eta},
                        {"kappa", vb.kappa},
                        {"rho", vb.rho}});
  }

  json j;
  j["format_version"] = "1.0";
  j["K"] = report.plan.total_budget;
  j["rho_global"] = report.plan.rho_global;
  j["input_count"] = report.input_count;
  j["output_count"] = report.output_count;
  j["per_view"] = std::move(per_view);
  if (report.metrics) {
    json pv = json::array();
    for (const ViewMetrics& m : report.metrics->per_view) {
      pv.push_back({{"view_id", m.view}, {"psnr_db", psnr_value(m.psnr_db)}, {"ssim", m.ssim}});
    }
    j["metrics"] = {{"psnr_mean", psnr_value(report.metrics->psnr_mean)},
                    {"ssim_mean", report.metrics->ssim_mean},
                    {"lpips", nullptr},
                    {"per_view", std::move(pv)}};
  } else {
    j["metrics"] = nullptr;
  }
  j["storage_bytes"] = report.storage_bytes;
  j["wall_time_s"] = report.wall_time_s;
  save_json(j, path);
}

void write_plan_json(const AllocationPlan& plan, const std::string& path) {
  json views = json::array();
  for (const ViewBudget& v : plan.views) {
    views.push_back({{"view_id", v.view},
                     {"eta", v.eta},
                     {"kappa", v.kappa},
                     {"rho", v.rho},
                     {"budget", v.budget}});
  }
  json j;
  j["total_budget"] = plan.total_budget;
  j["rho_global"] = plan.rho_global;
  j["views"] = std::move(views);
  save_json(j, path);
}

}  // namespace gsc
