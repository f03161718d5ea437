#pragma once

#include "hswap/aligner/encoders.hpp"
#include "hswap/aligner/generator.hpp"
#include "hswap/image/ops.hpp"
#include "hswap/nn/image_bridge.hpp"

namespace hswap::aligner {

struct AlignerConfig {
  std::int64_t resolution = 64;
  std::int64_t face_resolution = 32;
  double face_crop_fraction = 0.6;  // central fraction fed to the id encoder
  double stretch_min = 0.75;
  double stretch_max = 1.25;
  bool freeze_id_encoder = false;  // true when a pretrained embedder is plugged in
  std::vector<std::int64_t> generator_widths = {128, 96, 64, 48, 32};
};

template <typename T>
struct EmbeddingBundle {
  nn::Var<T> f_id;   // (N,512)
  nn::Var<T> f_por;  // (N,512)
  nn::Var<T> f_mtn;  // (N,256)

  bool finite() const {
    return f_id.val().all_finite() && f_por.val().all_finite() && f_mtn.val().all_finite();
  }
};

struct AlignerOutput {
  img::Image image;
  img::Mask soft_mask;  // sigmoid of the mask logits
  img::Mask hard_mask;  // thresholded at 0.5
};

// Anisotropic stretch about the image center, re-sampled to the original
// size with edge clamping. Alters apparent identity proportions while
// preserving pose and expression.
inline img::Image stretch_augment(const img::Image& image, double sx, double sy,
                                  double lo = 0.75, double hi = 1.25) {
  check_arg(sx >= lo && sx <= hi && sy >= lo && sy <= hi,
            "stretch_augment: ratio outside configured range");
  img::Image out(image.height(), image.width());
  const double cr = (image.height() - 1) / 2.0;
  const double cc = (image.width() - 1) / 2.0;
  for (int r = 0; r < image.height(); ++r)
    for (int c = 0; c < image.width(); ++c) {
      double fr = cr + (r - cr) / sy;
      double fc = cc + (c - cc) / sx;
      fr = std::min<double>(std::max(fr, 0.0), image.height() - 1);
      fc = std::min<double>(std::max(fc, 0.0), image.width() - 1);
      const int r0 = static_cast<int>(fr), c0 = static_cast<int>(fc);
      const int r1 = std::min(r0 + 1, image.height() - 1);
      const int c1 = std::min(c0 + 1, image.width() - 1);
      const double wr = fr - r0, wc = fc - c0;
      for (int ch = 0; ch < 3; ++ch) {
        const double v = (1 - wr) * ((1 - wc) * image.at(r0, c0, ch) + wc * image.at(r0, c1, ch)) +
                         wr * ((1 - wc) * image.at(r1, c0, ch) + wc * image.at(r1, c1, ch));
        out.at(r, c, ch) = static_cast<float>(std::min(1.0, std::max(0.0, v)));
      }
    }
  return out;
}

// Central face crop resized to the identity-encoder resolution.
inline img::Image face_crop(const img::Image& image, const AlignerConfig& cfg) {
  const int size = std::max(
      8, static_cast<int>(std::lround(cfg.face_crop_fraction * std::min(image.height(), image.width()))));
  img::CropSpec spec{image.height() / 2, image.width() / 2, size, img::CropSemantic::kFace};
  return img::resize(img::crop(image, spec), static_cast<int>(cfg.face_resolution),
                     static_cast<int>(cfg.face_resolution));
}

// The reenactment network: two appearance encoders, one motion encoder, a
// spectrally-normalized fusion MLP and the AdaIN generator.
template <typename T>
class AlignerModel {
 public:
  AlignerModel() = default;

  AlignerModel(Rng& rng, AlignerConfig cfg = {})
      : cfg_(std::move(cfg)),
        e_id_(make_identity_encoder<T>(rng)),
        e_por_(make_portrait_encoder<T>(rng)),
        e_motion_(make_motion_encoder<T>(rng)),
        fuse1_(kCondDim, kCondDim, rng, /*spectral_norm=*/true),
        fuse2_(kCondDim, kCondDim, rng, /*spectral_norm=*/true),
        generator_(rng, cfg_.resolution, cfg_.generator_widths) {}

  const AlignerConfig& config() const { return cfg_; }

  // --- batched graph-building API (training) ---

  EmbeddingBundle<T> encode_t(const nn::Var<T>& source, const nn::Var<T>& face,
                              const nn::Var<T>& target_aug) {
    check_resolution(source, cfg_.resolution, "source");
    check_resolution(target_aug, cfg_.resolution, "target");
    check_resolution(face, cfg_.face_resolution, "face crop");
    EmbeddingBundle<T> b;
    b.f_id = e_id_(face, cfg_.freeze_id_encoder);
    b.f_por = e_por_(source);
    b.f_mtn = e_motion_(target_aug);
    return b;
  }

  // Concatenation followed by the 2-layer spectrally-normalized ReLU MLP;
  // the 1280-dim width is maintained through fusion.
  nn::Var<T> fuse_t(const EmbeddingBundle<T>& b) {
    check_arg(b.f_id.defined() && b.f_por.defined() && b.f_mtn.defined(),
              "fuse: incomplete embedding bundle");
    const std::int64_t n = b.f_id.val().dim(0);
    auto cat3 = [&](const nn::Var<T>& a, const nn::Var<T>& bb, const nn::Var<T>& c) {
      auto a4 = nn::reshape(a, {n, a.val().dim(1), 1, 1});
      auto b4 = nn::reshape(bb, {n, bb.val().dim(1), 1, 1});
      auto c4 = nn::reshape(c, {n, c.val().dim(1), 1, 1});
      auto cat = nn::concat_channels<T>({a4, b4, c4});
      return nn::reshape(cat, {n, cat.val().dim(1)});
    };
    nn::Var<T> x = cat3(b.f_id, b.f_por, b.f_mtn);
    x = nn::relu(fuse1_(x));
    x = nn::relu(fuse2_(x));
    return x;
  }

  typename AdaInGenerator<T>::Output generate_t(const nn::Var<T>& cond) {
    return generator_(cond);
  }

  // --- image-level API (inference; no stretch augmentation) ---

  EmbeddingBundle<T> encode(const img::Image& source, const img::Image& face,
                            const img::Image& target) {
    auto to_batch = [](const img::Image& im) {
      return nn::Var<T>::constant(
          nn::image_to_chw<T>(im).reshaped({1, 3, im.height(), im.width()}));
    };
    return encode_t(to_batch(source), to_batch(face), to_batch(target));
  }

  AlignerOutput reenact(const img::Image& source, const img::Image& target) {
    EmbeddingBundle<T> bundle = encode(source, face_crop(source, cfg_), target);
    auto out = generate_t(fuse_t(bundle));
    return to_output(out);
  }

  AlignerOutput to_output(const typename AdaInGenerator<T>::Output& out) const {
    AlignerOutput result;
    result.image = nn::chw_to_image(out.image.val());
    const auto& logits = out.mask_logits.val();
    const int h = static_cast<int>(logits.dim(2)), w = static_cast<int>(logits.dim(3));
    result.soft_mask = img::Mask::soft(h, w);
    result.hard_mask = img::Mask(h, w);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const float s = 1.0f / (1.0f + std::exp(-logits.at(0, 0, r, c)));
        result.soft_mask.at(r, c) = s;
        result.hard_mask.at(r, c) = s >= 0.5f ? 1.0f : 0.0f;
      }
    result.soft_mask.refresh_soft_flag();
    return result;
  }

  // Identity embedding / feature maps with encoder weights detached: the
  // identity losses shape the generator, not the encoder.
  nn::Var<T> id_embedding_frozen(const nn::Var<T>& faces) const { return e_id_(faces, true); }
  std::vector<nn::Var<T>> id_feature_maps_frozen(const nn::Var<T>& faces) const {
    return e_id_.feature_maps(faces, true);
  }

  void register_into(nn::ParamRegistry<T>& reg, const std::string& prefix) {
    e_id_.register_into(reg, prefix + ".e_id");
    e_por_.register_into(reg, prefix + ".e_por");
    e_motion_.register_into(reg, prefix + ".e_motion");
    fuse1_.register_into(reg, prefix + ".fuse1");
    fuse2_.register_into(reg, prefix + ".fuse2");
    generator_.register_into(reg, prefix + ".generator");
  }

  // Trainable parameters; the id encoder drops out when frozen.
  std::vector<nn::Var<T>> trainable_params() {
    nn::ParamRegistry<T> all;
    register_into(all, "aligner");
    std::vector<nn::Var<T>> out;
    for (auto& [name, v] : all.params) {
      if (cfg_.freeze_id_encoder && name.find(".e_id.") != std::string::npos) continue;
      out.push_back(*v);
    }
    return out;
  }

  nn::Linear<T>& fusion_layer(int i) { return i == 0 ? fuse1_ : fuse2_; }

  void set_training(bool training) {
    fuse1_.set_sn_update(training);
    fuse2_.set_sn_update(training);
  }

 private:
  static void check_resolution(const nn::Var<T>& x, std::int64_t res, const std::string& what) {
    check_arg(x.val().ndim() == 4 && x.val().dim(2) == res && x.val().dim(3) == res,
              "aligner: " + what + " resolution mismatch");
  }

  AlignerConfig cfg_;
  ConvEncoder<T> e_id_, e_por_, e_motion_;
  nn::Linear<T> fuse1_, fuse2_;
  AdaInGenerator<T> generator_;
};

}  // namespace hswap::aligner
