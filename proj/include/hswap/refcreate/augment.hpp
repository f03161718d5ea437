#pragma once

#include "hswap/core/rng.hpp"
#include "hswap/image/ops.hpp"

namespace hswap::refcreate {

// Random color jitter C' and horizontal flip F used while training the
// reference-creation module.
struct AugmentPolicy {
  double brightness = 0.2;
  double contrast = 0.2;
  double saturation = 0.2;
  bool hflip = true;
};

inline img::Image hflip(const img::Image& image) {
  img::Image out(image.height(), image.width());
  for (int r = 0; r < image.height(); ++r)
    for (int c = 0; c < image.width(); ++c)
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = image.at(r, image.width() - 1 - c, ch);
  return out;
}

inline img::Image color_jitter(const img::Image& image, const AugmentPolicy& policy, Rng& rng) {
  const double db = rng.uniform(-policy.brightness, policy.brightness);
  const double dc = 1.0 + rng.uniform(-policy.contrast, policy.contrast);
  const double ds = 1.0 + rng.uniform(-policy.saturation, policy.saturation);

  double mean = 0.0;
  for (std::size_t i = 0; i < image.size(); ++i) mean += image.data()[i];
  mean /= static_cast<double>(image.size());

  img::Image out(image.height(), image.width());
  for (int r = 0; r < image.height(); ++r)
    for (int c = 0; c < image.width(); ++c) {
      const double luma = 0.299 * image.at(r, c, 0) + 0.587 * image.at(r, c, 1) +
                          0.114 * image.at(r, c, 2);
      for (int ch = 0; ch < 3; ++ch) {
        double v = image.at(r, c, ch);
        v = luma + (v - luma) * ds;           // saturation about the luma
        v = mean + (v - mean) * dc;           // contrast about the image mean
        v += db;                              // brightness
        out.at(r, c, ch) = static_cast<float>(std::min(1.0, std::max(0.0, v)));
      }
    }
  return out;
}

}  // namespace hswap::refcreate
