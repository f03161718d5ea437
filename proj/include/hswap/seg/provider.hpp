#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "hswap/core/error.hpp"
#include "hswap/image/image.hpp"
#include "hswap/seg/segmap.hpp"

namespace hswap::seg {

// Image -> SegMap provider. A real parsing model plugs in behind this
// interface; must be safe for concurrent lookups.
class SegmentationProvider {
 public:
  virtual ~SegmentationProvider() = default;
  virtual SegMap segment(const img::Image& image) const = 0;
  virtual std::string name() const = 0;
};

inline std::uint64_t image_content_hash(const img::Image& image) {
  // FNV-1a over the raw float bytes.
  std::uint64_t h = 1469598103934665603ull;
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(image.data());
  const std::size_t n = image.size() * sizeof(float);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  h ^= static_cast<std::uint64_t>(image.height()) * 0x9e3779b97f4a7c15ull;
  h ^= static_cast<std::uint64_t>(image.width());
  return h;
}

// Exact lookup over registered fixture images. Unknown images raise a
// provider error, per the segment() contract.
class FixtureLookupProvider : public SegmentationProvider {
 public:
  void register_image(const img::Image& image, SegMap seg) {
    std::lock_guard<std::mutex> lock(mu_);
    table_[image_content_hash(image)] = std::move(seg);
  }

  SegMap segment(const img::Image& image) const override {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = table_.find(image_content_hash(image));
    if (it == table_.end())
      throw ProviderError("segmentation: image not registered with the fixture provider");
    return it->second;
  }

  std::string name() const override { return "fixture-lookup"; }

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::uint64_t, SegMap> table_;
};

// Nearest-class-color segmenter for generated images. Each head class has a
// reference color; pixels inside the head hint are assigned the closest
// class color, pixels outside become background. Stands in for a real
// parsing model at desk scale.
class PaletteSegmenter : public SegmentationProvider {
 public:
  struct Entry {
    int cls;
    std::array<float, 3> color;
  };

  PaletteSegmenter(std::vector<Entry> palette, img::Mask head_hint)
      : palette_(std::move(palette)), head_hint_(std::move(head_hint)) {
    check_arg(!palette_.empty(), "palette segmenter needs at least one class entry");
  }

  SegMap segment(const img::Image& image) const override {
    check_arg(image.height() == head_hint_.height() && image.width() == head_hint_.width(),
              "palette segmenter: image/hint shape mismatch");
    SegMap out(image.height(), image.width(), kBackground);
    for (int r = 0; r < image.height(); ++r)
      for (int c = 0; c < image.width(); ++c) {
        if (head_hint_.at(r, c) < 0.5f) continue;
        double best = 1e30;
        int best_cls = kSkin;
        for (const auto& e : palette_) {
          double d = 0.0;
          for (int ch = 0; ch < 3; ++ch) {
            const double diff = image.at(r, c, ch) - e.color[static_cast<std::size_t>(ch)];
            d += diff * diff;
          }
          if (d < best) {
            best = d;
            best_cls = e.cls;
          }
        }
        out.at(r, c) = static_cast<std::uint8_t>(best_cls);
      }
    return out;
  }

  std::string name() const override { return "palette"; }

 private:
  std::vector<Entry> palette_;
  img::Mask head_hint_;
};

}  // namespace hswap::seg
