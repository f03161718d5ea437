#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "hswap/image/image.hpp"
#include "hswap/losses/keypoints.hpp"

namespace hswap::metrics {

constexpr double kPsnrCap = 99.0;

// 10*log10(1/MSE) over the whole frame or a mask region; identical inputs
// are capped at 99 dB.
inline double psnr(const img::Image& a, const img::Image& b,
                   const img::Mask* region = nullptr) {
  check_arg(a.height() == b.height() && a.width() == b.width(), "psnr: shape mismatch");
  if (region) {
    check_arg(region->height() == a.height() && region->width() == a.width(),
              "psnr: region shape mismatch");
    check_arg(region->area() > 0, "psnr: empty region");
  }
  double se = 0.0;
  std::int64_t count = 0;
  for (int r = 0; r < a.height(); ++r)
    for (int c = 0; c < a.width(); ++c) {
      if (region && region->at(r, c) == 0.0f) continue;
      for (int ch = 0; ch < 3; ++ch) {
        const double d = double(a.at(r, c, ch)) - b.at(r, c, ch);
        se += d * d;
      }
      count += 3;
    }
  const double mse = se / static_cast<double>(count);
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace detail {

struct SsimStats {
  double ssim = 0.0;  // mean SSIM over the valid window positions
  double cs = 0.0;    // mean contrast-structure component
};

inline std::vector<double> gaussian_window11() {
  std::vector<double> k(11);
  double s = 0.0;
  for (int i = 0; i < 11; ++i) {
    const double x = i - 5.0;
    k[static_cast<std::size_t>(i)] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
    s += k[static_cast<std::size_t>(i)];
  }
  for (double& v : k) v /= s;
  return k;
}

// Separable valid-mode filtering of a single channel.
inline std::vector<double> filter_valid(const std::vector<double>& x, int h, int w,
                                        const std::vector<double>& k) {
  const int r = static_cast<int>(k.size()) / 2;
  const int oh = h - 2 * r, ow = w - 2 * r;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (int t = 0; t < static_cast<int>(k.size()); ++t)
        acc += k[static_cast<std::size_t>(t)] * x[static_cast<std::size_t>(i) * w + j + t];
      tmp[static_cast<std::size_t>(i) * ow + j] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int i = 0; i < oh; ++i)
    for (int j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (int t = 0; t < static_cast<int>(k.size()); ++t)
        acc += k[static_cast<std::size_t>(t)] * tmp[static_cast<std::size_t>(i + t) * ow + j];
      out[static_cast<std::size_t>(i) * ow + j] = acc;
    }
  return out;
}

inline SsimStats ssim_channel(const std::vector<double>& x, const std::vector<double>& y, int h,
                              int w, double k1 = 0.01, double k2 = 0.03) {
  const double c1 = k1 * k1, c2 = k2 * k2;
  const auto win = gaussian_window11();
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = filter_valid(x, h, w, win);
  const auto mu_y = filter_valid(y, h, w, win);
  const auto sxx = filter_valid(xx, h, w, win);
  const auto syy = filter_valid(yy, h, w, win);
  const auto sxy = filter_valid(xy, h, w, win);
  SsimStats out;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double vx = sxx[i] - mu_x[i] * mu_x[i];
    const double vy = syy[i] - mu_y[i] * mu_y[i];
    const double cxy = sxy[i] - mu_x[i] * mu_y[i];
    const double cs = (2.0 * cxy + c2) / (vx + vy + c2);
    const double l = (2.0 * mu_x[i] * mu_y[i] + c1) / (mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + c1);
    out.cs += cs;
    out.ssim += l * cs;
  }
  out.cs /= static_cast<double>(mu_x.size());
  out.ssim /= static_cast<double>(mu_x.size());
  return out;
}

inline void image_channels(const img::Image& im, std::vector<double> out[3]) {
  for (int ch = 0; ch < 3; ++ch) out[ch].resize(im.size() / 3);
  for (int r = 0; r < im.height(); ++r)
    for (int c = 0; c < im.width(); ++c)
      for (int ch = 0; ch < 3; ++ch)
        out[ch][static_cast<std::size_t>(r) * im.width() + c] = im.at(r, c, ch);
}

inline void downsample2(std::vector<double>& x, int h, int w) {
  const int oh = h / 2, ow = w / 2;
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int i = 0; i < oh; ++i)
    for (int j = 0; j < ow; ++j)
      out[static_cast<std::size_t>(i) * ow + j] =
          0.25 * (x[static_cast<std::size_t>(2 * i) * w + 2 * j] +
                  x[static_cast<std::size_t>(2 * i) * w + 2 * j + 1] +
                  x[static_cast<std::size_t>(2 * i + 1) * w + 2 * j] +
                  x[static_cast<std::size_t>(2 * i + 1) * w + 2 * j + 1]);
  x = std::move(out);
}

}  // namespace detail

// Standard single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1=0.01,
// K2=0.03, dynamic range 1, averaged over the three channels.
inline double ssim(const img::Image& a, const img::Image& b) {
  check_arg(a.height() == b.height() && a.width() == b.width(), "ssim: shape mismatch");
  check_arg(std::min(a.height(), a.width()) >= 11, "ssim: image too small for an 11x11 window");
  std::vector<double> ca[3], cb[3];
  detail::image_channels(a, ca);
  detail::image_channels(b, cb);
  double acc = 0.0;
  for (int ch = 0; ch < 3; ++ch)
    acc += detail::ssim_channel(ca[ch], cb[ch], a.height(), a.width()).ssim;
  return acc / 3.0;
}

// Multi-scale SSIM with the standard five weights; fewer scales (with
// renormalized weights) when the image is too small for all five.
inline double ms_ssim(const img::Image& a, const img::Image& b) {
  check_arg(a.height() == b.height() && a.width() == b.width(), "ms_ssim: shape mismatch");
  static const double kWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  int scales = 0;
  for (int s = 0; s < 5; ++s)
    if (std::min(a.height(), a.width()) / (1 << s) >= 11) scales = s + 1;
  check_arg(scales >= 1, "ms_ssim: image too small for a single scale");
  double wsum = 0.0;
  for (int s = 0; s < scales; ++s) wsum += kWeights[s];

  std::vector<double> ca[3], cb[3];
  detail::image_channels(a, ca);
  detail::image_channels(b, cb);
  double result = 1.0;
  for (int ch = 0; ch < 3; ++ch) {
    std::vector<double> x = ca[ch], y = cb[ch];
    int h = a.height(), w = a.width();
    double prod = 1.0;
    for (int s = 0; s < scales; ++s) {
      const auto st = detail::ssim_channel(x, y, h, w);
      const double weight = kWeights[s] / wsum;
      const double base = s + 1 == scales ? st.ssim : st.cs;
      prod *= std::pow(std::max(base, 1e-9), weight);
      if (s + 1 < scales) {
        detail::downsample2(x, h, w);
        detail::downsample2(y, h, w);
        h /= 2;
        w /= 2;
      }
    }
    result *= std::cbrt(prod);
  }
  // channels combined geometrically above; clamp tiny drift
  return std::min(1.0, std::max(0.0, result));
}

// Average keypoint distance: mean coordinatewise L1 over corresponding
// normalized keypoints. Count-invariant by construction.
inline double akd(const losses::KeypointSet& gen, const losses::KeypointSet& ref) {
  check_arg(gen.size() == ref.size(), "akd: keypoint count mismatch");
  check_arg(gen.size() > 0, "akd: empty keypoint sets");
  double acc = 0.0;
  for (int i = 0; i < gen.size(); ++i)
    acc += std::abs(gen.point(i).x - ref.point(i).x) + std::abs(gen.point(i).y - ref.point(i).y);
  return acc / static_cast<double>(gen.size());
}

}  // namespace hswap::metrics
