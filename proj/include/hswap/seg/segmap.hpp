#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hswap/image/image.hpp"
#include "hswap/image/ops.hpp"
#include "hswap/io/png.hpp"
#include "hswap/seg/taxonomy.hpp"
#include "nlohmann/json.hpp"

namespace hswap::seg {

// Per-pixel class labels over the 20-class taxonomy.
class SegMap {
 public:
  SegMap() = default;

  SegMap(int height, int width, std::uint8_t fill = kBackground)
      : h_(height), w_(width), labels_(static_cast<std::size_t>(height) * width, fill) {
    check_arg(height > 0 && width > 0, "segmap sides must be positive");
  }

  int height() const { return h_; }
  int width() const { return w_; }
  bool defined() const { return h_ > 0; }

  std::uint8_t& at(int r, int c) { return labels_[static_cast<std::size_t>(r) * w_ + c]; }
  std::uint8_t at(int r, int c) const { return labels_[static_cast<std::size_t>(r) * w_ + c]; }

  std::uint8_t* data() { return labels_.data(); }
  const std::uint8_t* data() const { return labels_.data(); }
  std::size_t size() const { return labels_.size(); }

  bool valid_labels() const {
    for (auto l : labels_)
      if (l >= kNumClasses) return false;
    return true;
  }

  SegMap hflipped() const {
    SegMap out(h_, w_);
    for (int r = 0; r < h_; ++r)
      for (int c = 0; c < w_; ++c) out.at(r, c) = at(r, w_ - 1 - c);
    return out;
  }

  bool operator==(const SegMap& o) const {
    return h_ == o.h_ && w_ == o.w_ && labels_ == o.labels_;
  }

 private:
  int h_ = 0, w_ = 0;
  std::vector<std::uint8_t> labels_;
};

// Semantic regions used by the color-reference stage. Left/right classes are
// merged; "face" aggregates skin.
enum class Region : int {
  kFace = 0,
  kEars,
  kEyes,
  kBrows,
  kNose,
  kLips,
  kMouth,
  kTeeth,
  kBeard,
  kHair,
  kGlasses,
  kHat,
  kHeadphones,
  kEarrings,
  kCount,
};

constexpr int kNumRegions = static_cast<int>(Region::kCount);

inline const std::array<std::string, kNumRegions>& region_names() {
  static const std::array<std::string, kNumRegions> names = {
      "face", "ears", "eyes", "brows", "nose",    "lips", "mouth",
      "teeth", "beard", "hair", "glasses", "hat", "headphones", "earrings"};
  return names;
}

// Class index -> region, or -1 for classes that belong to no region
// (background, person, neck).
inline int region_of_class(int cls) {
  switch (cls) {
    case kSkin: return static_cast<int>(Region::kFace);
    case kLeftEar:
    case kRightEar: return static_cast<int>(Region::kEars);
    case kLeftEye:
    case kRightEye: return static_cast<int>(Region::kEyes);
    case kLeftBrow:
    case kRightBrow: return static_cast<int>(Region::kBrows);
    case kNose: return static_cast<int>(Region::kNose);
    case kLips: return static_cast<int>(Region::kLips);
    case kMouth: return static_cast<int>(Region::kMouth);
    case kTeeth: return static_cast<int>(Region::kTeeth);
    case kBeard: return static_cast<int>(Region::kBeard);
    case kHair: return static_cast<int>(Region::kHair);
    case kGlasses: return static_cast<int>(Region::kGlasses);
    case kHat: return static_cast<int>(Region::kHat);
    case kHeadphone: return static_cast<int>(Region::kHeadphones);
    case kEarring: return static_cast<int>(Region::kEarrings);
    default: return -1;
  }
}

// Disjoint pixel index lists (row-major indices) per semantic region.
struct RegionSet {
  std::array<std::vector<std::int64_t>, kNumRegions> pixels;

  const std::vector<std::int64_t>& of(Region r) const {
    return pixels[static_cast<std::size_t>(r)];
  }
  std::int64_t total() const {
    std::int64_t n = 0;
    for (const auto& v : pixels) n += static_cast<std::int64_t>(v.size());
    return n;
  }
};

inline RegionSet region_masks(const SegMap& seg) {
  RegionSet out;
  const std::int64_t n = static_cast<std::int64_t>(seg.size());
  for (std::int64_t i = 0; i < n; ++i) {
    const int reg = region_of_class(seg.data()[i]);
    if (reg >= 0) out.pixels[static_cast<std::size_t>(reg)].push_back(i);
  }
  return out;
}

inline img::Mask head_mask(const SegMap& seg, bool include_neck = false) {
  img::Mask out(seg.height(), seg.width());
  for (int r = 0; r < seg.height(); ++r)
    for (int c = 0; c < seg.width(); ++c)
      out.at(r, c) = is_head_class(seg.at(r, c), include_neck) ? 1.0f : 0.0f;
  return out;
}

inline img::Mask class_mask(const SegMap& seg, int cls) {
  img::Mask out(seg.height(), seg.width());
  for (int r = 0; r < seg.height(); ++r)
    for (int c = 0; c < seg.width(); ++c) out.at(r, c) = seg.at(r, c) == cls ? 1.0f : 0.0f;
  return out;
}

// ---- serialization ----

inline std::vector<std::uint8_t> encode_segmap_png(const SegMap& seg) {
  io::RawPng raw;
  raw.height = seg.height();
  raw.width = seg.width();
  raw.channels = 1;
  raw.pixels.assign(seg.data(), seg.data() + seg.size());
  return io::encode_png(raw);
}

inline SegMap decode_segmap_png(const std::vector<std::uint8_t>& bytes) {
  io::RawPng raw = io::decode_png(bytes);
  check_arg(raw.channels == 1, "segmap png must be single-channel");
  SegMap out(raw.height, raw.width);
  for (std::size_t i = 0; i < out.size(); ++i) {
    check_arg(raw.pixels[i] < kNumClasses, "segmap png contains label >= 20");
    out.data()[i] = raw.pixels[i];
  }
  return out;
}

inline void save_segmap_png(const std::string& path, const SegMap& seg) {
  io::write_file(path, encode_segmap_png(seg));
}

inline SegMap load_segmap_png(const std::string& path) {
  return decode_segmap_png(io::read_file(path));
}

// Versioned index->name manifest.
inline nlohmann::json taxonomy_manifest() {
  nlohmann::json j;
  j["version"] = kTaxonomyVersion;
  nlohmann::json classes = nlohmann::json::object();
  for (int i = 0; i < kNumClasses; ++i) classes[std::to_string(i)] = class_names()[static_cast<std::size_t>(i)];
  j["classes"] = classes;
  return j;
}

}  // namespace hswap::seg
