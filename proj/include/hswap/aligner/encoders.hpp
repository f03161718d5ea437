#pragma once

#include "hswap/nn/layers.hpp"

namespace hswap::aligner {

// Embedding dimensions are fixed across the artifact; desk-scale encoders
// shrink depth and width but keep these outputs.
constexpr std::int64_t kIdDim = 512;
constexpr std::int64_t kPortraitDim = 512;
constexpr std::int64_t kMotionDim = 256;

// Shared shape: strided conv pyramid, global average pool, projection.
template <typename T>
class ConvEncoder {
 public:
  ConvEncoder() = default;

  ConvEncoder(Rng& rng, std::int64_t out_dim, std::vector<std::int64_t> widths)
      : widths_(std::move(widths)) {
    std::int64_t in = 3;
    for (std::int64_t wdt : widths_) {
      convs_.emplace_back(in, wdt, 3, 2, rng);
      in = wdt;
    }
    proj_ = nn::Linear<T>(in, out_dim, rng);
  }

  nn::Var<T> operator()(const nn::Var<T>& images, bool frozen = false) const {
    nn::Var<T> x = images;
    for (const auto& c : convs_)
      x = nn::leaky_relu(frozen ? c.forward_frozen(x) : const_cast<nn::Conv2d<T>&>(c)(x), T(0.2));
    nn::Var<T> pooled = nn::global_avgpool(x);
    return frozen ? proj_.forward_frozen(pooled) : const_cast<nn::Linear<T>&>(proj_)(pooled);
  }

  // Intermediate feature maps for perceptual-style losses.
  std::vector<nn::Var<T>> feature_maps(const nn::Var<T>& images, bool frozen = true) const {
    std::vector<nn::Var<T>> out;
    nn::Var<T> x = images;
    for (const auto& c : convs_) {
      x = nn::leaky_relu(frozen ? c.forward_frozen(x) : const_cast<nn::Conv2d<T>&>(c)(x), T(0.2));
      out.push_back(x);
    }
    return out;
  }

  void register_into(nn::ParamRegistry<T>& reg, const std::string& prefix) {
    for (std::size_t i = 0; i < convs_.size(); ++i)
      convs_[i].register_into(reg, prefix + ".conv" + std::to_string(i));
    proj_.register_into(reg, prefix + ".proj");
  }

 private:
  std::vector<std::int64_t> widths_;
  std::vector<nn::Conv2d<T>> convs_;
  nn::Linear<T> proj_;
};

// Portrait encoder: full source frame -> 512-d global appearance.
template <typename T>
ConvEncoder<T> make_portrait_encoder(Rng& rng) {
  return ConvEncoder<T>(rng, kPortraitDim, {16, 32, 64, 128});
}

// Identity encoder: central face crop -> 512-d. Default is trainable and
// learned jointly; a frozen pretrained embedder can be loaded in its place.
template <typename T>
ConvEncoder<T> make_identity_encoder(Rng& rng) {
  return ConvEncoder<T>(rng, kIdDim, {16, 32, 64});
}

// Motion encoder: augmented target frame -> 256-d pose+expression.
template <typename T>
ConvEncoder<T> make_motion_encoder(Rng& rng) {
  return ConvEncoder<T>(rng, kMotionDim, {12, 24, 48, 96});
}

}  // namespace hswap::aligner
