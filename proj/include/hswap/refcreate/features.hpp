#pragma once

#include "hswap/nn/image_bridge.hpp"
#include "hswap/nn/layers.hpp"

namespace hswap::refcreate {

// Three-level feature pyramid with top-down fusion, output upsampled to the
// input resolution. Desk-scale stand-in for the full extractor; feature dim
// defaults to 64.
template <typename T>
class FeaturePyramid {
 public:
  FeaturePyramid() = default;

  FeaturePyramid(Rng& rng, std::int64_t feature_dim = 64, std::int64_t base_width = 16)
      : dim_(feature_dim),
        stem_(3, base_width, 3, 1, rng),
        down1_(base_width, base_width * 2, 3, 2, rng),
        down2_(base_width * 2, base_width * 4, 3, 2, rng),
        lat0_(base_width, feature_dim, 1, 1, rng),
        lat1_(base_width * 2, feature_dim, 1, 1, rng),
        lat2_(base_width * 4, feature_dim, 1, 1, rng),
        smooth1_(feature_dim, feature_dim, 3, 1, rng) {}

  // (N,3,H,W) -> (N,D,H,W); H and W must be divisible by 4.
  nn::Var<T> operator()(const nn::Var<T>& images) {
    check_arg(images.val().ndim() == 4 && images.val().dim(1) == 3,
              "feature pyramid: expects (N,3,H,W)");
    check_arg(images.val().dim(2) % 4 == 0 && images.val().dim(3) % 4 == 0,
              "feature pyramid: spatial dims must be divisible by 4");
    auto c0 = nn::leaky_relu(stem_(images), T(0.2));
    auto c1 = nn::leaky_relu(down1_(c0), T(0.2));
    auto c2 = nn::leaky_relu(down2_(c1), T(0.2));
    auto p2 = lat2_(c2);
    auto p1 = smooth1_(nn::vadd(lat1_(c1), nn::upsample2_nearest(p2)));
    auto p0 = nn::vadd(lat0_(c0), nn::upsample2_nearest(p1));
    return p0;
  }

  nn::Var<T> extract(const img::Image& image) {
    auto x = nn::Var<T>::constant(nn::image_to_chw<T>(image).reshaped(
        {1, 3, image.height(), image.width()}));
    return (*this)(x);
  }

  std::int64_t feature_dim() const { return dim_; }

  void register_into(nn::ParamRegistry<T>& reg, const std::string& prefix) {
    stem_.register_into(reg, prefix + ".stem");
    down1_.register_into(reg, prefix + ".down1");
    down2_.register_into(reg, prefix + ".down2");
    lat0_.register_into(reg, prefix + ".lat0");
    lat1_.register_into(reg, prefix + ".lat1");
    lat2_.register_into(reg, prefix + ".lat2");
    smooth1_.register_into(reg, prefix + ".smooth1");
  }

 private:
  std::int64_t dim_ = 64;
  nn::Conv2d<T> stem_, down1_, down2_, lat0_, lat1_, lat2_, smooth1_;
};

}  // namespace hswap::refcreate
