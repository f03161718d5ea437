#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hswap/core/rng.hpp"
#include "hswap/nn/layers.hpp"

namespace hswap::losses {

enum class ProviderRole { kPerceptual, kIdentity, kEmotion, kGaze };

inline const char* role_name(ProviderRole r) {
  switch (r) {
    case ProviderRole::kPerceptual: return "perceptual";
    case ProviderRole::kIdentity: return "identity";
    case ProviderRole::kEmotion: return "emotion";
    case ProviderRole::kGaze: return "gaze";
  }
  return "?";
}

// Deterministic image -> feature-map-list callable. Perceptual-style losses
// are computed against whatever provider is plugged in; gradients flow into
// the input image, never into the provider.
template <typename T>
class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;
  virtual std::vector<nn::Var<T>> features(const nn::Var<T>& images) const = 0;
  virtual ProviderRole role() const = 0;
  virtual std::string name() const = 0;
};

// Frozen randomly-initialized conv pyramid. The desk-scale stand-in for a
// pretrained perceptual network: fixed seed, deterministic, never trained.
template <typename T>
class FrozenConvProvider : public FeatureProvider<T> {
 public:
  explicit FrozenConvProvider(std::uint64_t seed = 977, ProviderRole role = ProviderRole::kPerceptual,
                              std::int64_t base_width = 12)
      : role_(role) {
    Rng rng = Rng::seeded(seed);
    weights_.push_back(frozen_conv(3, base_width, rng));
    weights_.push_back(frozen_conv(base_width, base_width * 2, rng));
    weights_.push_back(frozen_conv(base_width * 2, base_width * 4, rng));
  }

  std::vector<nn::Var<T>> features(const nn::Var<T>& images) const override {
    std::vector<nn::Var<T>> out;
    nn::Var<T> x = images;
    for (const auto& [w, b] : weights_) {
      x = nn::leaky_relu(nn::conv2d(x, w, b, 2), T(0.2));
      out.push_back(x);
    }
    return out;
  }

  ProviderRole role() const override { return role_; }
  std::string name() const override { return "frozen-conv"; }

 private:
  static std::pair<nn::Var<T>, nn::Var<T>> frozen_conv(std::int64_t in, std::int64_t out,
                                                       Rng& rng) {
    auto w = nn::Var<T>::constant(nn::kaiming_normal<T>({out, in, 3, 3}, in * 9, rng));
    auto b = nn::Var<T>::constant(Tensor<T>::zeros({out}));
    return {w, b};
  }

  std::vector<std::pair<nn::Var<T>, nn::Var<T>>> weights_;
  ProviderRole role_;
};

}  // namespace hswap::losses
