#pragma once

#include "hswap/nn/layers.hpp"

namespace hswap::nn {

// Spectrally-normalized conv stack producing patch scores plus the
// intermediate feature maps consumed by the feature-matching loss.
template <typename T>
class Discriminator {
 public:
  struct Output {
    Var<T> scores;               // (N,1,h,w) patch logits
    std::vector<Var<T>> features;
  };

  Discriminator() = default;

  Discriminator(Rng& rng, std::int64_t in_channels = 3, std::int64_t base = 24)
      : c0_(in_channels, base, 3, 2, rng, true),
        c1_(base, base * 2, 3, 2, rng, true),
        c2_(base * 2, base * 4, 3, 2, rng, true),
        c3_(base * 4, base * 8, 3, 2, rng, true),
        head_(base * 8, 1, 1, 1, rng, true) {}

  Output operator()(const Var<T>& x) {
    Output out;
    Var<T> h = leaky_relu(c0_(x), T(0.2));
    out.features.push_back(h);
    h = leaky_relu(c1_(h), T(0.2));
    out.features.push_back(h);
    h = leaky_relu(c2_(h), T(0.2));
    out.features.push_back(h);
    h = leaky_relu(c3_(h), T(0.2));
    out.features.push_back(h);
    out.scores = head_(h);
    return out;
  }

  void set_training(bool training) {
    c0_.set_sn_update(training);
    c1_.set_sn_update(training);
    c2_.set_sn_update(training);
    c3_.set_sn_update(training);
    head_.set_sn_update(training);
  }

  void register_into(ParamRegistry<T>& reg, const std::string& prefix) {
    c0_.register_into(reg, prefix + ".c0");
    c1_.register_into(reg, prefix + ".c1");
    c2_.register_into(reg, prefix + ".c2");
    c3_.register_into(reg, prefix + ".c3");
    head_.register_into(reg, prefix + ".head");
  }

 private:
  Conv2d<T> c0_, c1_, c2_, c3_, head_;
};

}  // namespace hswap::nn
