#pragma once

#include <optional>
#include <vector>

#include "hswap/losses/keypoints.hpp"
#include "hswap/losses/providers.hpp"
#include "hswap/losses/weights.hpp"
#include "hswap/nn/ops.hpp"
#include "hswap/refcreate/correlation.hpp"

namespace hswap::losses {

using nn::Var;

// ---------------------------------------------------------------------------
// keypoint closure
// ---------------------------------------------------------------------------

// Compares the per-pair opening gap |k_lower - k_upper| (componentwise abs)
// between the generated and driving sets, summed over pairs. The printed
// formula omits the driving term; the implemented loss follows the prose:
// it is zero exactly when every generated gap equals the driving gap.
template <typename T>
Var<T> keypoint_closure_loss_t(const Var<T>& gen_points,
                               const std::vector<std::pair<int, int>>& pairs,
                               const KeypointSet& driving) {
  check_arg(gen_points.val().ndim() == 2 && gen_points.val().dim(1) == 2,
            "keypoint loss: generated points must be (P,2)");
  check_arg(pairs == driving.pairs() &&
                gen_points.val().dim(0) == static_cast<std::int64_t>(driving.size()),
            "keypoint loss: pair structure mismatch");
  check_arg(!pairs.empty(), "keypoint loss: no symmetric pairs");

  std::vector<std::int64_t> lower, upper;
  Tensor<T> drv_gaps({static_cast<std::int64_t>(pairs.size()), 2});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    lower.push_back(pairs[i].first);
    upper.push_back(pairs[i].second);
    const auto& lo = driving.point(pairs[i].first);
    const auto& up = driving.point(pairs[i].second);
    drv_gaps.at(static_cast<std::int64_t>(i), 0) = static_cast<T>(std::abs(lo.x - up.x));
    drv_gaps.at(static_cast<std::int64_t>(i), 1) = static_cast<T>(std::abs(lo.y - up.y));
  }
  Var<T> gaps = nn::vabs(nn::vsub(nn::gather_rows(gen_points, lower),
                                  nn::gather_rows(gen_points, upper)));
  return nn::vsum(nn::vabs(nn::vsub(gaps, Var<T>::constant(drv_gaps))));
}

inline double keypoint_closure_loss(const KeypointSet& gen, const KeypointSet& drv) {
  check_arg(gen.same_structure(drv), "keypoint loss: structure mismatch");
  double total = 0.0;
  for (const auto& [lo, up] : gen.pairs()) {
    const double gx = std::abs(gen.point(lo).x - gen.point(up).x);
    const double gy = std::abs(gen.point(lo).y - gen.point(up).y);
    const double dx = std::abs(drv.point(lo).x - drv.point(up).x);
    const double dy = std::abs(drv.point(lo).y - drv.point(up).y);
    total += std::abs(gx - dx) + std::abs(gy - dy);
  }
  return total;
}

// ---------------------------------------------------------------------------
// dice
// ---------------------------------------------------------------------------

template <typename T>
Var<T> dice_loss(const Var<T>& pred_soft, const Tensor<T>& gt, T eps = T(1e-6)) {
  check_arg(pred_soft.val().numel() == gt.numel(), "dice: shape mismatch");
  Var<T> gt_var = Var<T>::constant(gt);
  Var<T> inter = nn::vsum(nn::vmul(pred_soft, gt_var));
  T gt_sum = T(0);
  for (std::int64_t i = 0; i < gt.numel(); ++i) gt_sum += gt[i];
  Var<T> numer = nn::add_scalar(nn::mul_scalar(inter, T(2)), eps);
  Var<T> denom = nn::add_scalar(nn::add_scalar(nn::vsum(pred_soft), gt_sum), eps);
  return nn::add_scalar(nn::mul_scalar(nn::vdiv(numer, denom), T(-1)), T(1));
}

// ---------------------------------------------------------------------------
// adversarial
// ---------------------------------------------------------------------------

template <typename T>
Var<T> hinge_d_loss(const Var<T>& real_scores, const Var<T>& fake_scores) {
  Var<T> lr = nn::vmean(nn::relu(nn::add_scalar(nn::mul_scalar(real_scores, T(-1)), T(1))));
  Var<T> lf = nn::vmean(nn::relu(nn::add_scalar(fake_scores, T(1))));
  return nn::vadd(lr, lf);
}

template <typename T>
Var<T> hinge_g_loss(const Var<T>& fake_scores) {
  return nn::mul_scalar(nn::vmean(fake_scores), T(-1));
}

// Mean L1 across discriminator feature maps; the real side is detached by
// the caller.
template <typename T>
Var<T> feature_matching_loss(const std::vector<Var<T>>& real_feats,
                             const std::vector<Var<T>>& fake_feats) {
  check_arg(real_feats.size() == fake_feats.size() && !real_feats.empty(),
            "feature matching: layer count mismatch");
  std::vector<std::pair<T, Var<T>>> terms;
  const T w = T(1) / static_cast<T>(real_feats.size());
  for (std::size_t i = 0; i < real_feats.size(); ++i)
    terms.emplace_back(w, nn::vmean(nn::vabs(nn::vsub(fake_feats[i], real_feats[i]))));
  return nn::weighted_sum(terms);
}

// ---------------------------------------------------------------------------
// reconstruction / identity
// ---------------------------------------------------------------------------

template <typename T>
Var<T> l1_loss(const Var<T>& gen, const Var<T>& gt) {
  return nn::vmean(nn::vabs(nn::vsub(gen, gt)));
}

// Mean-abs feature difference, uniformly averaged over provider layers.
template <typename T>
Var<T> perceptual_loss(const FeatureProvider<T>& provider, const Var<T>& gen, const Var<T>& gt) {
  auto fg = provider.features(gen);
  auto ft = provider.features(gt.detach());
  return feature_matching_loss(ft, fg);
}

// 1 - mean row cosine between two (N,D) embedding matrices.
template <typename T>
Var<T> cosine_embedding_loss(const Var<T>& gen_embed, const Var<T>& ref_embed) {
  check_arg(gen_embed.val().same_shape(ref_embed.val()) && gen_embed.val().ndim() == 2,
            "cosine loss: shape mismatch");
  Var<T> cos = nn::rowwise_dot(nn::rows_normalize(gen_embed), nn::rows_normalize(ref_embed));
  return nn::add_scalar(nn::mul_scalar(nn::vmean(cos), T(-1)), T(1));
}

// ---------------------------------------------------------------------------
// cycle consistency (reference-creation training signal)
// ---------------------------------------------------------------------------

// Resamples the head reference back to target geometry through the
// transposed correlation and penalizes the L1 deviation from the target
// image. Mean over all resampled pixel-channels; regions missing on either
// side contribute nothing.
template <typename T>
Var<T> cycle_loss(const std::vector<refcreate::RegionCorrelation<T>>& correlations,
                  const img::Image& target, const Var<T>& reference_image, T tau) {
  check_arg(tau > T(0), "cycle loss: temperature must be positive");
  check_arg(reference_image.val().ndim() == 4, "cycle loss: reference must be (1,3,H,W)");
  std::vector<std::pair<T, Var<T>>> terms;
  std::int64_t total_px = 0;
  for (const auto& corr : correlations) {
    if (corr.pixels_a.empty() || corr.pixels_t.empty()) continue;
    Var<T> colors_a = nn::gather_pixels(reference_image, 0, corr.pixels_a);
    Var<T> back = refcreate::resample_region_reverse(corr, colors_a, tau);
    Tensor<T> target_colors = refcreate::gather_image_colors<T>(target, corr.pixels_t);
    terms.emplace_back(T(1), nn::vsum(nn::vabs(nn::vsub(back, Var<T>::constant(target_colors)))));
    total_px += static_cast<std::int64_t>(corr.pixels_t.size());
  }
  if (terms.empty()) return Var<T>::scalar(T(0));
  return nn::mul_scalar(nn::weighted_sum(terms), T(1) / static_cast<T>(3 * total_px));
}

// ---------------------------------------------------------------------------
// grayscale regularization on the head reference
// ---------------------------------------------------------------------------

namespace detail {
template <typename T>
Var<T> luma(const Var<T>& x) {
  // (N,3,H,W) -> (N,1,H,W) via a constant 1x1 conv with BT.601 weights
  Tensor<T> w({1, 3, 1, 1});
  w[0] = T(0.299);
  w[1] = T(0.587);
  w[2] = T(0.114);
  return nn::conv2d(x, Var<T>::constant(w), Var<T>::constant(Tensor<T>::zeros({1})), 1, 0);
}
}  // namespace detail

// L1 between masked grayscales of the reenacted head and the head color
// reference, normalized by the full pixel count.
template <typename T>
Var<T> gray_reg_loss(const Var<T>& image_a, const Var<T>& reference, const Tensor<T>& head_mask) {
  check_arg(image_a.val().ndim() == 4 && reference.val().ndim() == 4, "gray reg: expects (N,3,H,W)");
  check_arg(image_a.val().same_shape(reference.val()), "gray reg: shape mismatch");
  const std::int64_t hw = image_a.val().dim(2) * image_a.val().dim(3);
  check_arg(head_mask.numel() == hw, "gray reg: mask shape mismatch");
  Var<T> diff = nn::vabs(nn::vsub(detail::luma(image_a), detail::luma(reference)));
  Var<T> masked = nn::mul_hw_mask(diff, head_mask);
  const std::int64_t n = image_a.val().dim(0);
  return nn::mul_scalar(nn::vsum(masked), T(1) / static_cast<T>(n * hw));
}

// ---------------------------------------------------------------------------
// weighted totals
// ---------------------------------------------------------------------------

template <typename T>
struct AlignerLossTerms {
  Var<T> adv, fm, l1, perc_vgg, perc_id, cos_id, dice, emo, kpt;
  Var<T> gaze;  // required only while the gaze schedule is active
};

template <typename T>
Var<T> total_aligner_loss(const AlignerLossTerms<T>& t, const LossWeights& w, bool gaze_active) {
  const std::pair<const char*, const Var<T>*> mandatory[] = {
      {"adv", &t.adv},   {"fm", &t.fm},     {"l1", &t.l1},
      {"perc_vgg", &t.perc_vgg}, {"perc_id", &t.perc_id}, {"cos_id", &t.cos_id},
      {"dice", &t.dice}, {"emo", &t.emo},   {"kpt", &t.kpt}};
  for (const auto& [name, v] : mandatory)
    check_arg(v->defined(), std::string("aligner total: missing mandatory term ") + name);
  std::vector<std::pair<T, Var<T>>> terms = {
      {static_cast<T>(w.lambda_adv), t.adv},
      {static_cast<T>(w.lambda_fm), t.fm},
      {static_cast<T>(w.lambda_l1), t.l1},
      {static_cast<T>(w.lambda_perc_vgg), t.perc_vgg},
      {static_cast<T>(w.lambda_perc_id), t.perc_id},
      {static_cast<T>(w.lambda_cos_id), t.cos_id},
      {static_cast<T>(w.lambda_dice), t.dice},
      {static_cast<T>(w.lambda_emo), t.emo},
      {static_cast<T>(w.lambda_kpt), t.kpt}};
  if (gaze_active) {
    check_arg(t.gaze.defined(), "aligner total: gaze schedule active but term missing");
    terms.emplace_back(static_cast<T>(w.lambda_gaze), t.gaze);
  }
  return nn::weighted_sum(terms);
}

template <typename T>
struct BlenderLossTerms {
  Var<T> adv, l1, perc_vgg, cycle, cycle_prime, reg;
};

template <typename T>
Var<T> total_blender_loss(const BlenderLossTerms<T>& t, const LossWeights& w) {
  const std::pair<const char*, const Var<T>*> mandatory[] = {
      {"adv", &t.adv}, {"l1", &t.l1},   {"perc_vgg", &t.perc_vgg},
      {"c", &t.cycle}, {"c'", &t.cycle_prime}, {"reg", &t.reg}};
  for (const auto& [name, v] : mandatory)
    check_arg(v->defined(), std::string("blender total: missing mandatory term ") + name);
  std::vector<std::pair<T, Var<T>>> terms = {
      {static_cast<T>(w.blender_lambda_adv), t.adv},
      {static_cast<T>(w.blender_lambda_l1), t.l1},
      {static_cast<T>(w.blender_lambda_perc_vgg), t.perc_vgg},
      {static_cast<T>(w.blender_lambda_c), t.cycle},
      {static_cast<T>(w.blender_lambda_c), t.cycle_prime},
      {static_cast<T>(w.blender_lambda_reg), t.reg}};
  return nn::weighted_sum(terms);
}

}  // namespace hswap::losses
