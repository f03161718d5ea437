#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "hswap/core/error.hpp"

namespace hswap::img {

// Dense H x W x 3 raster with values in [0,1], row-major, channel-interleaved.
class Image {
 public:
  static constexpr int kChannels = 3;
  static constexpr int kMinSide = 8;

  Image() = default;

  Image(int height, int width, float fill = 0.0f)
      : h_(height), w_(width),
        data_(static_cast<std::size_t>(height) * width * kChannels, fill) {
    check_arg(height >= kMinSide && width >= kMinSide, "image sides must be >= 8");
    check_arg(fill >= 0.0f && fill <= 1.0f, "image fill outside [0,1]");
  }

  int height() const { return h_; }
  int width() const { return w_; }
  bool defined() const { return h_ > 0; }

  float& at(int r, int c, int ch) {
    return data_[(static_cast<std::size_t>(r) * w_ + c) * kChannels + ch];
  }
  float at(int r, int c, int ch) const {
    return data_[(static_cast<std::size_t>(r) * w_ + c) * kChannels + ch];
  }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }

  void set_pixel(int r, int c, float red, float green, float blue) {
    at(r, c, 0) = red;
    at(r, c, 1) = green;
    at(r, c, 2) = blue;
  }

  void clamp01() {
    for (float& v : data_) v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  }

  bool in_range() const {
    for (float v : data_)
      if (!(v >= 0.0f && v <= 1.0f)) return false;
    return true;
  }

 private:
  int h_ = 0, w_ = 0;
  std::vector<float> data_;
};

// Binary (hard) or fractional (soft) per-pixel mask paired with an Image.
class Mask {
 public:
  Mask() = default;

  Mask(int height, int width, float fill = 0.0f)
      : h_(height), w_(width), data_(static_cast<std::size_t>(height) * width, fill) {
    check_arg(height > 0 && width > 0, "mask sides must be positive");
    check_arg(fill == 0.0f || fill == 1.0f, "mask fill must be 0 or 1");
  }

  static Mask soft(int height, int width) {
    Mask m(height, width);
    m.soft_ = true;
    return m;
  }

  int height() const { return h_; }
  int width() const { return w_; }
  bool defined() const { return h_ > 0; }
  bool is_soft() const { return soft_; }

  float& at(int r, int c) { return data_[static_cast<std::size_t>(r) * w_ + c]; }
  float at(int r, int c) const { return data_[static_cast<std::size_t>(r) * w_ + c]; }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }

  // Recompute the soft flag from the data: soft iff any value strictly
  // inside (0,1).
  void refresh_soft_flag() {
    soft_ = false;
    for (float v : data_) {
      if (v > 0.0f && v < 1.0f) {
        soft_ = true;
        break;
      }
    }
  }

  bool is_hard_valued() const {
    for (float v : data_)
      if (v != 0.0f && v != 1.0f) return false;
    return true;
  }

  std::int64_t area() const {
    std::int64_t n = 0;
    for (float v : data_) n += v != 0.0f ? 1 : 0;
    return n;
  }

  double sum() const {
    double s = 0.0;
    for (float v : data_) s += v;
    return s;
  }

  bool same_shape(const Mask& o) const { return h_ == o.h_ && w_ == o.w_; }

 private:
  int h_ = 0, w_ = 0;
  bool soft_ = false;
  std::vector<float> data_;
};

enum class CropSemantic { kFace, kHead };

// Square crop window; out-of-range windows are clamped to the image bounds.
struct CropSpec {
  int center_row = 0;
  int center_col = 0;
  int size = 0;
  CropSemantic semantic = CropSemantic::kFace;
};

}  // namespace hswap::img
