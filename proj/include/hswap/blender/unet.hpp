#pragma once

#include "hswap/blender/masks.hpp"
#include "hswap/nn/image_bridge.hpp"
#include "hswap/nn/layers.hpp"

namespace hswap::blender {

// The six operands of the blending network, in wire order:
// head reference (3), inpaint reference (3), head mask (1), background (3),
// inpaint mask (1), gray head (3) = 14 channels.
template <typename T>
struct BlendInputs {
  nn::Var<T> head_reference;     // (N,3,H,W)
  nn::Var<T> inpaint_reference;  // (N,3,H,W)
  nn::Var<T> head_mask;          // (N,1,H,W)
  nn::Var<T> background;         // (N,3,H,W)
  nn::Var<T> inpaint_mask;       // (N,1,H,W)
  nn::Var<T> gray_head;          // (N,3,H,W)
};

// Concatenation is the only way into the network; a missing operand is a
// construction error, not a silent default.
template <typename T>
nn::Var<T> pack_blend_inputs(const BlendInputs<T>& in) {
  const std::pair<const char*, const nn::Var<T>*> operands[] = {
      {"head_reference", &in.head_reference}, {"inpaint_reference", &in.inpaint_reference},
      {"head_mask", &in.head_mask},           {"background", &in.background},
      {"inpaint_mask", &in.inpaint_mask},     {"gray_head", &in.gray_head}};
  for (const auto& [name, v] : operands)
    check_arg(v->defined(), std::string("blend inputs: missing operand ") + name);
  auto packed = nn::concat_channels<T>({in.head_reference, in.inpaint_reference, in.head_mask,
                                        in.background, in.inpaint_mask, in.gray_head});
  check_arg(packed.val().dim(1) == 14, "blend inputs: expected 14 channels");
  return packed;
}

template <typename T>
BlendInputs<T> blend_inputs_from_images(const img::Image& head_reference,
                                        const img::Image& inpaint_reference,
                                        const img::Mask& head_mask, const img::Image& background,
                                        const img::Mask& inpaint_mask,
                                        const img::Image& gray_head) {
  const std::int64_t h = head_reference.height(), w = head_reference.width();
  auto im = [&](const img::Image& x) {
    return nn::Var<T>::constant(nn::image_to_chw<T>(x).reshaped({1, 3, h, w}));
  };
  auto mk = [&](const img::Mask& x) { return nn::Var<T>::constant(nn::mask_to_n1hw<T>(x)); };
  return BlendInputs<T>{im(head_reference), im(inpaint_reference), mk(head_mask), im(background),
                        mk(inpaint_mask), im(gray_head)};
}

// Four-level encoder-decoder with skip connections over the 14-channel
// conditioning stack.
template <typename T>
class BlenderUNet {
 public:
  static constexpr std::int64_t kInChannels = 14;

  BlenderUNet() = default;

  explicit BlenderUNet(Rng& rng, std::int64_t base = 32)
      : enc0_(kInChannels, base, 3, 1, rng),
        enc1_(base, base * 3 / 2, 3, 2, rng),
        enc2_(base * 3 / 2, base * 3, 3, 2, rng),
        enc3_(base * 3, base * 4, 3, 2, rng),
        mid_(base * 4, base * 4, 3, 1, rng),
        dec2_(base * 4 + base * 3, base * 3, 3, 1, rng),
        dec1_(base * 3 + base * 3 / 2, base * 3 / 2, 3, 1, rng),
        dec0_(base * 3 / 2 + base, base, 3, 1, rng),
        out_(base, 3, 1, 1, rng) {}

  nn::Var<T> operator()(const nn::Var<T>& x14) {
    check_arg(x14.val().ndim() == 4 && x14.val().dim(1) == kInChannels,
              "blender unet: first layer expects 14 input channels");
    auto e0 = nn::leaky_relu(enc0_(x14), T(0.2));
    auto e1 = nn::leaky_relu(enc1_(e0), T(0.2));
    auto e2 = nn::leaky_relu(enc2_(e1), T(0.2));
    auto e3 = nn::leaky_relu(enc3_(e2), T(0.2));
    auto m = nn::leaky_relu(mid_(e3), T(0.2));
    auto d2 = nn::leaky_relu(dec2_(nn::concat_channels<T>({nn::upsample2_nearest(m), e2})), T(0.2));
    auto d1 = nn::leaky_relu(dec1_(nn::concat_channels<T>({nn::upsample2_nearest(d2), e1})), T(0.2));
    auto d0 = nn::leaky_relu(dec0_(nn::concat_channels<T>({nn::upsample2_nearest(d1), e0})), T(0.2));
    auto out = nn::sigmoid(out_(d0));
    nn::check_finite(out, "blender unet output");
    return out;
  }

  nn::Var<T> blend(const BlendInputs<T>& inputs) { return (*this)(pack_blend_inputs(inputs)); }

  void register_into(nn::ParamRegistry<T>& reg, const std::string& prefix) {
    enc0_.register_into(reg, prefix + ".enc0");
    enc1_.register_into(reg, prefix + ".enc1");
    enc2_.register_into(reg, prefix + ".enc2");
    enc3_.register_into(reg, prefix + ".enc3");
    mid_.register_into(reg, prefix + ".mid");
    dec2_.register_into(reg, prefix + ".dec2");
    dec1_.register_into(reg, prefix + ".dec1");
    dec0_.register_into(reg, prefix + ".dec0");
    out_.register_into(reg, prefix + ".out");
  }

 private:
  nn::Conv2d<T> enc0_, enc1_, enc2_, enc3_, mid_, dec2_, dec1_, dec0_, out_;
};

// Executes the optional excess-hair post-processing step; identity when
// disabled or when the mask is empty (the external client is never called).
inline img::Image postprocess(const img::Image& blended, const img::Mask& inpainting_mask,
                              InpaintClient& client, bool enabled,
                              std::vector<std::string>* provenance = nullptr) {
  if (!enabled || inpainting_mask.area() == 0) return blended;
  return background_reference(blended, inpainting_mask, client, provenance);
}

}  // namespace hswap::blender
