#pragma once

#include "hswap/nn/layers.hpp"

namespace hswap::aligner {

constexpr std::int64_t kSeedChannels = 512;
constexpr std::int64_t kSeedSize = 4;
constexpr std::int64_t kCondDim = 512 + 512 + 256;  // concatenated embeddings

// AdaIN-conditioned generator: a learnable 512x4x4 tensor passes through a
// stem plus four upsampling conv blocks (4 -> 64); the conditioning vector
// modulates every block. Outputs an RGB image and head-mask logits.
template <typename T>
class AdaInGenerator {
 public:
  struct Output {
    nn::Var<T> image;        // (N,3,R,R) in [0,1]
    nn::Var<T> mask_logits;  // (N,1,R,R); sigmoid for the soft mask
  };

  AdaInGenerator() = default;

  AdaInGenerator(Rng& rng, std::int64_t resolution = 64,
                 std::vector<std::int64_t> widths = {128, 96, 64, 48, 32})
      : resolution_(resolution) {
    check_arg(widths.size() >= 2, "generator: needs a stem width plus block widths");
    const auto blocks = static_cast<std::int64_t>(widths.size()) - 1;
    check_arg(resolution == kSeedSize << blocks,
              "generator: resolution must equal 4 * 2^blocks");
    Tensor<T> seed({kSeedChannels, kSeedSize, kSeedSize});
    for (std::int64_t i = 0; i < seed.numel(); ++i) seed[i] = static_cast<T>(rng.normal());
    seed_ = nn::Var<T>::leaf(std::move(seed));

    std::int64_t in = kSeedChannels;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      convs_.emplace_back(in, widths[i], 3, 1, rng);
      adains_.emplace_back(kCondDim, widths[i], rng);
      in = widths[i];
    }
    image_head_ = nn::Conv2d<T>(in, 3, 1, 1, rng);
    mask_head_ = nn::Conv2d<T>(in, 1, 1, 1, rng);
  }

  Output operator()(const nn::Var<T>& cond) {
    check_arg(cond.val().ndim() == 2 && cond.val().dim(1) == kCondDim,
              "generator: conditioning vector must be (N,1280)");
    const std::int64_t n = cond.val().dim(0);
    nn::Var<T> x = nn::broadcast_batch(seed_, n);
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      if (i > 0) x = nn::upsample2_nearest(x);
      x = nn::leaky_relu(adains_[i](convs_[i](x), cond), T(0.2));
      if (!x.val().all_finite())
        throw NumericError("generator block " + std::to_string(i) + " produced non-finite values");
    }
    Output out;
    out.image = nn::sigmoid(image_head_(x));
    out.mask_logits = mask_head_(x);
    nn::check_finite(out.image, "generator image head");
    nn::check_finite(out.mask_logits, "generator mask head");
    return out;
  }

  std::int64_t resolution() const { return resolution_; }

  void register_into(nn::ParamRegistry<T>& reg, const std::string& prefix) {
    reg.add_param(prefix + ".seed", &seed_);
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      convs_[i].register_into(reg, prefix + ".block" + std::to_string(i));
      adains_[i].register_into(reg, prefix + ".adain" + std::to_string(i));
    }
    image_head_.register_into(reg, prefix + ".image_head");
    mask_head_.register_into(reg, prefix + ".mask_head");
  }

 private:
  std::int64_t resolution_ = 64;
  nn::Var<T> seed_;
  std::vector<nn::Conv2d<T>> convs_;
  std::vector<nn::AdaIn<T>> adains_;
  nn::Conv2d<T> image_head_, mask_head_;
};

}  // namespace hswap::aligner
