#pragma once

#include "hswap/image/image.hpp"
#include "hswap/nn/var.hpp"

namespace hswap::nn {

template <typename T>
Tensor<T> image_to_chw(const img::Image& image) {
  const std::int64_t h = image.height(), w = image.width();
  Tensor<T> out({3, h, w});
  for (std::int64_t r = 0; r < h; ++r)
    for (std::int64_t c = 0; c < w; ++c)
      for (int ch = 0; ch < 3; ++ch)
        out[ch * h * w + r * w + c] =
            static_cast<T>(image.at(static_cast<int>(r), static_cast<int>(c), ch));
  return out;
}

template <typename T>
Tensor<T> images_to_nchw(const std::vector<img::Image>& images) {
  check_arg(!images.empty(), "images_to_nchw: empty batch");
  const std::int64_t n = static_cast<std::int64_t>(images.size());
  const std::int64_t h = images[0].height(), w = images[0].width();
  Tensor<T> out({n, 3, h, w});
  for (std::int64_t i = 0; i < n; ++i) {
    check_arg(images[static_cast<std::size_t>(i)].height() == h &&
                  images[static_cast<std::size_t>(i)].width() == w,
              "images_to_nchw: mixed resolutions");
    Tensor<T> one = image_to_chw<T>(images[static_cast<std::size_t>(i)]);
    std::copy(one.data(), one.data() + one.numel(), out.data() + i * 3 * h * w);
  }
  return out;
}

// (N,3,H,W) or (3,H,W) -> Image for sample n, clamped to [0,1].
template <typename T>
img::Image chw_to_image(const Tensor<T>& t, std::int64_t sample = 0) {
  std::int64_t h, w;
  const T* base;
  if (t.ndim() == 4) {
    h = t.dim(2);
    w = t.dim(3);
    base = t.data() + sample * 3 * h * w;
  } else {
    check_arg(t.ndim() == 3, "chw_to_image: expects 3-D or 4-D");
    h = t.dim(1);
    w = t.dim(2);
    base = t.data();
  }
  img::Image out(static_cast<int>(h), static_cast<int>(w));
  for (std::int64_t r = 0; r < h; ++r)
    for (std::int64_t c = 0; c < w; ++c)
      for (int ch = 0; ch < 3; ++ch) {
        const double v = static_cast<double>(base[ch * h * w + r * w + c]);
        out.at(static_cast<int>(r), static_cast<int>(c), ch) =
            static_cast<float>(std::min(1.0, std::max(0.0, v)));
      }
  return out;
}

template <typename T>
Tensor<T> mask_to_hw(const img::Mask& m) {
  Tensor<T> out({m.height(), m.width()});
  for (std::size_t i = 0; i < m.size(); ++i) out[static_cast<std::int64_t>(i)] = static_cast<T>(m.data()[i]);
  return out;
}

// Mask replicated as a single-channel image plane (N=1).
template <typename T>
Tensor<T> mask_to_n1hw(const img::Mask& m) {
  return mask_to_hw<T>(m).reshaped({1, 1, m.height(), m.width()});
}

}  // namespace hswap::nn
