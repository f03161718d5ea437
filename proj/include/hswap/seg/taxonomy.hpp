#pragma once

#include <array>
#include <string>

#include "nlohmann/json_fwd.hpp"

namespace hswap::seg {

// The 20-class head parsing taxonomy. Indices are stable across the whole
// artifact: serialized SegMaps, checkpoints and manifests all rely on them.
enum Class : int {
  kBackground = 0,
  kPerson = 1,
  kSkin = 2,
  kLeftBrow = 3,
  kRightBrow = 4,
  kLeftEye = 5,
  kRightEye = 6,
  kMouth = 7,
  kTeeth = 8,
  kLips = 9,
  kLeftEar = 10,
  kRightEar = 11,
  kNose = 12,
  kNeck = 13,
  kBeard = 14,
  kHair = 15,
  kHat = 16,
  kHeadphone = 17,
  kGlasses = 18,
  kEarring = 19,
};

constexpr int kNumClasses = 20;
constexpr int kTaxonomyVersion = 1;

inline const std::array<std::string, kNumClasses>& class_names() {
  static const std::array<std::string, kNumClasses> names = {
      "background", "person",    "skin",     "left brow", "right brow",
      "left eye",   "right eye", "mouth",    "teeth",     "lips",
      "left ear",   "right ear", "nose",     "neck",      "beard",
      "hair",       "hat",       "headphone", "glasses",  "earring"};
  return names;
}

// Everything that travels with the head during a swap. Neck stays with the
// target body by default (configurable); person/background never move.
inline bool is_head_class(int cls, bool include_neck = false) {
  if (cls == kNeck) return include_neck;
  return cls >= kSkin && cls < kNumClasses;
}

}  // namespace hswap::seg
