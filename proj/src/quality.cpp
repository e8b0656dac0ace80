// SPDX-License-Identifier: Apache-2.0
#include "gsc/quality.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace gsc {

OpacityLoss opacity_alignment_loss(const std::vector<double>& opacities,
                                   const std::vector<std::uint8_t>& targets, double weight) {
  if (opacities.empty()) throw InvalidInput("opacity loss over an empty set");
  if (opacities.size() != targets.size()) {
    throw InvalidInput("opacity loss: value/target size mismatch");
  }
  const double n = static_cast<double>(opacities.size());
  OpacityLoss out;
  out.gradient.resize(opacities.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < opacities.size(); ++i) {
    const double a = std::clamp(opacities[i], kLossClampEps, 1.0 - kLossClampEps);
    const double t = targets[i] ? 1.0 : 0.0;
    sum += -(t * std::log(a) + (1.0 - t) * std::log(1.0 - a));
    out.gradient[i] = weight / n * (a - t) / (a * (1.0 - a));
  }
  out.value = weight * sum / n;
  return out;
}

RenderLoss render_mse_loss(const Image& rendered, const Image& target) {
  if (rendered.height != target.height || rendered.width != target.width) {
    throw InvalidInput("render loss: image dimensions disagree");
  }
  if (rendered.data.empty()) throw InvalidInput("render loss over an empty image");
  const double n = static_cast<double>(rendered.data.size());
  RenderLoss out;
  out.gradient = Image(rendered.height, rendered.width);
  double sum = 0.0;
  for (std::size_t i = 0; i < rendered.data.size(); ++i) {
    const double d = rendered.data[i] - target.data[i];
    sum += d * d;
    out.gradient.data[i] = 2.0 * d / n;
  }
  out.value = sum / n;
  return out;
}

double batch_mean(const std::vector<double>& values) {
  if (values.empty()) throw InvalidInput("batch mean of an empty list");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double mse(const Image& a, const Image& b) {
  if (a.height != b.height || a.width != b.width) {
    throw InvalidInput("mse: image dimensions disagree");
  }
  if (a.data.empty()) throw InvalidInput("mse over an empty image");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.data.size());
}

double psnr_db(const Image& a, const Image& b) {
  const double err = mse(a, b);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / err);
}

namespace {

constexpr int kWin = 11;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

std::array<double, kWin> ssim_kernel() {
  std::array<double, kWin> k{};
  const double sigma = 1.5;
  double sum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - (kWin - 1) / 2.0;
    k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Valid-mode separable convolution of an H x W channel plane.
ScalarMap convolve_valid(const ScalarMap& in, const std::array<double, kWin>& k) {
  const int h = in.height, w = in.width;
  ScalarMap rows(h, w - kWin + 1);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c + kWin <= w; ++c) {
      double acc = 0.0;
      for (int i = 0; i < kWin; ++i) acc += k[i] * in.at(r, c + i);
      rows.at(r, c) = acc;
    }
  }
  ScalarMap out(h - kWin + 1, rows.width);
  for (int r = 0; r + kWin <= h; ++r) {
    for (int c = 0; c < rows.width; ++c) {
      double acc = 0.0;
      for (int i = 0; i < kWin; ++i) acc += k[i] * rows.at(r + i, c);
      out.at(r, c) = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  if (a.height != b.height || a.width != b.width) {
    throw InvalidInput("ssim: image dimensions disagree");
  }
  if (a.height < kWin || a.width < kWin) {
    throw InvalidInput("ssim requires images at least 11x11");
  }
  const auto kernel = ssim_kernel();
  double channel_sum = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    ScalarMap x(a.height, a.width), y(a.height, a.width);
    ScalarMap xx(a.height, a.width), yy(a.height, a.width), xy(a.height, a.width);
    for (int r = 0; r < a.height; ++r) {
      for (int c = 0; c < a.width; ++c) {
        const double va = a.at(r, c, ch), vb = b.at(r, c, ch);
        x.at(r, c) = va;
        y.at(r, c) = vb;
        xx.at(r, c) = va * va;
        yy.at(r, c) = vb * vb;
        xy.at(r, c) = va * vb;
      }
    }
    const ScalarMap mx = convolve_valid(x, kernel);
    const ScalarMap my = convolve_valid(y, kernel);
    const ScalarMap mxx = convolve_valid(xx, kernel);
    const ScalarMap myy = convolve_valid(yy, kernel);
    const ScalarMap mxy = convolve_valid(xy, kernel);

    double acc = 0.0;
    for (std::size_t i = 0; i < mx.data.size(); ++i) {
      const double mu_x = mx.data[i], mu_y = my.data[i];
      const double var_x = mxx.data[i] - mu_x * mu_x;
      const double var_y = myy.data[i] - mu_y * mu_y;
      const double cov = mxy.data[i] - mu_x * mu_y;
      acc += ((2.0 * mu_x * mu_y + kSsimC1) * (2.0 * cov + kSsimC2)) /
             ((mu_x * mu_x + mu_y * mu_y + kSsimC1) * (var_x + var_y + kSsimC2));
    }
    channel_sum += acc / static_cast<double>(mx.data.size());
  }
  return channel_sum / 3.0;
}

}  // namespace gsc
