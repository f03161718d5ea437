#pragma once

#include <algorithm>
#include <cmath>

#include "hswap/image/image.hpp"

namespace hswap::img {

// BT.601 luma, replicated across the three channels. Idempotent.
inline Image to_gray(const Image& img) {
  Image out(img.height(), img.width());
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c) {
      const float y = 0.299f * img.at(r, c, 0) + 0.587f * img.at(r, c, 1) +
                      0.114f * img.at(r, c, 2);
      const float yc = std::min(1.0f, std::max(0.0f, y));
      out.set_pixel(r, c, yc, yc, yc);
    }
  return out;
}

// Chebyshev-ball (square) dilation: out(p)=1 iff some set pixel lies within
// the given radius in max-norm.
inline Mask dilate(const Mask& m, int radius) {
  check_arg(radius >= 0, "dilate: radius must be >= 0");
  check_arg(m.is_hard_valued(), "dilate: requires a hard mask");
  if (radius == 0) return m;
  const int h = m.height(), w = m.width();
  // Separable: horizontal max run, then vertical.
  Mask tmp(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      float v = 0.0f;
      const int lo = std::max(0, c - radius), hi = std::min(w - 1, c + radius);
      for (int k = lo; k <= hi && v == 0.0f; ++k) v = m.at(r, k);
      tmp.at(r, c) = v;
    }
  Mask out(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      float v = 0.0f;
      const int lo = std::max(0, r - radius), hi = std::min(h - 1, r + radius);
      for (int k = lo; k <= hi && v == 0.0f; ++k) v = tmp.at(k, c);
      out.at(r, c) = v;
    }
  return out;
}

// Default dilation radius used by the mask preprocessing stage.
inline int default_dilation_radius(int height, int width) {
  return static_cast<int>(std::ceil(0.05 * std::min(height, width)));
}

inline Mask mask_sub(const Mask& a, const Mask& b) {
  check_arg(a.same_shape(b), "mask_sub: shape mismatch");
  Mask out(a.height(), a.width());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.data()[i] = std::max(a.data()[i] - b.data()[i], 0.0f);
  out.refresh_soft_flag();
  return out;
}

inline Mask mask_union(const Mask& a, const Mask& b) {
  check_arg(a.same_shape(b), "mask_union: shape mismatch");
  Mask out(a.height(), a.width());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.data()[i] = std::max(a.data()[i], b.data()[i]);
  out.refresh_soft_flag();
  return out;
}

inline Mask mask_complement(const Mask& m) {
  Mask out(m.height(), m.width());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = 1.0f - m.data()[i];
  out.refresh_soft_flag();
  return out;
}

inline Mask mask_intersect(const Mask& a, const Mask& b) {
  check_arg(a.same_shape(b), "mask_intersect: shape mismatch");
  Mask out(a.height(), a.width());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  out.refresh_soft_flag();
  return out;
}

inline Image apply_mask(const Image& img, const Mask& m) {
  check_arg(img.height() == m.height() && img.width() == m.width(),
            "apply_mask: shape mismatch");
  Image out(img.height(), img.width());
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c) {
      const float w = m.at(r, c);
      for (int ch = 0; ch < Image::kChannels; ++ch) out.at(r, c, ch) = img.at(r, c, ch) * w;
    }
  return out;
}

// Window clamped to image bounds; never pads.
inline Image crop(const Image& img, const CropSpec& spec) {
  check_arg(spec.size > 0, "crop: size must be positive");
  const int size = std::min({spec.size, img.height(), img.width()});
  int r0 = spec.center_row - size / 2;
  int c0 = spec.center_col - size / 2;
  r0 = std::max(0, std::min(r0, img.height() - size));
  c0 = std::max(0, std::min(c0, img.width() - size));
  Image out(size, size);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c)
      for (int ch = 0; ch < Image::kChannels; ++ch)
        out.at(r, c, ch) = img.at(r0 + r, c0 + c, ch);
  return out;
}

// Bilinear resize with half-pixel centers and edge clamping.
inline Image resize(const Image& img, int out_h, int out_w) {
  check_arg(out_h >= Image::kMinSide && out_w >= Image::kMinSide,
            "resize: degenerate target size");
  if (out_h == img.height() && out_w == img.width()) return img;
  Image out(out_h, out_w);
  const double sr = static_cast<double>(img.height()) / out_h;
  const double sc = static_cast<double>(img.width()) / out_w;
  for (int r = 0; r < out_h; ++r) {
    double fr = (r + 0.5) * sr - 0.5;
    fr = std::min<double>(std::max(fr, 0.0), img.height() - 1);
    const int r0 = static_cast<int>(fr);
    const int r1 = std::min(r0 + 1, img.height() - 1);
    const double wr = fr - r0;
    for (int c = 0; c < out_w; ++c) {
      double fc = (c + 0.5) * sc - 0.5;
      fc = std::min<double>(std::max(fc, 0.0), img.width() - 1);
      const int c0 = static_cast<int>(fc);
      const int c1 = std::min(c0 + 1, img.width() - 1);
      const double wc = fc - c0;
      for (int ch = 0; ch < Image::kChannels; ++ch) {
        const double v = (1 - wr) * ((1 - wc) * img.at(r0, c0, ch) + wc * img.at(r0, c1, ch)) +
                         wr * ((1 - wc) * img.at(r1, c0, ch) + wc * img.at(r1, c1, ch));
        out.at(r, c, ch) = static_cast<float>(std::min(1.0, std::max(0.0, v)));
      }
    }
  }
  return out;
}

// Gaussian blur of a mask; used for feathered (soft) mask construction.
inline Mask gaussian_feather(const Mask& m, double sigma) {
  check_arg(sigma > 0.0, "gaussian_feather: sigma must be positive");
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double ksum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    ksum += k[static_cast<std::size_t>(i + radius)];
  }
  for (double& v : k) v /= ksum;

  const int h = m.height(), w = m.width();
  std::vector<double> tmp(static_cast<std::size_t>(h) * w, 0.0);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int cc = std::min(w - 1, std::max(0, c + i));
        acc += k[static_cast<std::size_t>(i + radius)] * m.at(r, cc);
      }
      tmp[static_cast<std::size_t>(r) * w + c] = acc;
    }
  Mask out = Mask::soft(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int rr = std::min(h - 1, std::max(0, r + i));
        acc += k[static_cast<std::size_t>(i + radius)] * tmp[static_cast<std::size_t>(rr) * w + c];
      }
      out.at(r, c) = static_cast<float>(std::min(1.0, std::max(0.0, acc)));
    }
  out.refresh_soft_flag();
  return out;
}

inline double mean_abs_diff(const Image& a, const Image& b) {
  check_arg(a.height() == b.height() && a.width() == b.width(), "mean_abs_diff: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(double(a.data()[i]) - b.data()[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace hswap::img
