#pragma once

#include "hswap/core/rng.hpp"
#include "hswap/image/ops.hpp"
#include "hswap/seg/segmap.hpp"

namespace hswap::blender {

// The derived mask set of the preprocessing stage. Naming follows the roles:
// inpaint_a is the region to fill around the reenacted head, background_t is
// the target frame with the (enlarged) head removed, gray_head_a the
// grayscale head to recolor.
struct MaskBundle {
  img::Mask head_a;           // reenacted head mask
  img::Mask head_t;           // target head mask
  img::Mask union_heads;      // union of both head masks
  img::Mask head_a_enlarged;  // dilate(union)
  img::Mask head_t_enlarged;  // dilate(target head)
  img::Mask inpaint_a;        // head_a_enlarged - head_a
  img::Mask inpaint_t;        // head_t_enlarged - head_t
  img::Image background_t;    // target * (1 - head_a_enlarged)
  img::Image gray_head_a;     // gray(reenacted * head_a)

  bool invariants_ok() const {
    for (std::size_t i = 0; i < inpaint_a.size(); ++i) {
      if (inpaint_a.data()[i] * head_a.data()[i] != 0.0f) return false;  // disjoint
      if (std::max(inpaint_a.data()[i], head_a.data()[i]) != head_a_enlarged.data()[i])
        return false;  // union equals the enlarged mask
    }
    const int h = background_t.height(), w = background_t.width();
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        if (head_a_enlarged.at(r, c) == 1.0f)
          for (int ch = 0; ch < 3; ++ch)
            if (background_t.at(r, c, ch) != 0.0f) return false;
        if (head_a.at(r, c) == 0.0f) {
          for (int ch = 0; ch < 3; ++ch)
            if (gray_head_a.at(r, c, ch) != 0.0f) return false;
        } else if (gray_head_a.at(r, c, 0) != gray_head_a.at(r, c, 1) ||
                   gray_head_a.at(r, c, 1) != gray_head_a.at(r, c, 2)) {
          return false;
        }
      }
    return true;
  }
};

// The enlarged A mask dilates the *union* of the two head masks while the
// enlarged T mask dilates the target mask alone; the asymmetry is deliberate
// and kept as printed.
inline MaskBundle preprocess(const img::Image& image_a, const seg::SegMap& seg_a,
                             const img::Image& image_t, const seg::SegMap& seg_t,
                             int dilation_radius = -1) {
  check_arg(image_a.height() == image_t.height() && image_a.width() == image_t.width(),
            "preprocess: image shape mismatch");
  check_arg(seg_a.height() == image_a.height() && seg_t.height() == image_t.height(),
            "preprocess: segmap shape mismatch");
  if (dilation_radius < 0)
    dilation_radius = img::default_dilation_radius(image_a.height(), image_a.width());

  MaskBundle b;
  b.head_a = seg::head_mask(seg_a);
  b.head_t = seg::head_mask(seg_t);
  b.union_heads = img::mask_union(b.head_a, b.head_t);
  b.head_a_enlarged = img::dilate(b.union_heads, dilation_radius);
  b.head_t_enlarged = img::dilate(b.head_t, dilation_radius);
  b.inpaint_a = img::mask_sub(b.head_a_enlarged, b.head_a);
  b.inpaint_t = img::mask_sub(b.head_t_enlarged, b.head_t);
  b.background_t = img::apply_mask(image_t, img::mask_complement(b.head_a_enlarged));
  b.gray_head_a = img::to_gray(img::apply_mask(image_a, b.head_a));
  // gray of a masked-out pixel is exactly zero; enforce bitwise anyway
  for (int r = 0; r < b.gray_head_a.height(); ++r)
    for (int c = 0; c < b.gray_head_a.width(); ++c)
      if (b.head_a.at(r, c) == 0.0f)
        for (int ch = 0; ch < 3; ++ch) b.gray_head_a.at(r, c, ch) = 0.0f;
  return b;
}

// Random growth of the inpainting mask: an extra dilation step plus a few
// elliptical blobs seeded on the existing region, bounded by 3x the original
// area. Deterministic under a fixed rng.
struct InpaintAugmentPolicy {
  bool enabled = true;
  int max_extra_dilation = 2;
  int max_blobs = 3;
  double min_axis = 2.0;
  double max_axis = 6.0;
  double max_area_ratio = 3.0;
};

inline img::Mask augment_inpaint_mask(const img::Mask& mask, const InpaintAugmentPolicy& policy,
                                      Rng& rng) {
  check_arg(mask.is_hard_valued(), "augment_inpaint_mask: requires a hard mask");
  const std::int64_t base_area = mask.area();
  if (!policy.enabled || base_area == 0) return mask;
  const auto limit =
      static_cast<std::int64_t>(policy.max_area_ratio * static_cast<double>(base_area));

  int extra = static_cast<int>(rng.uniform_int(0, policy.max_extra_dilation));
  img::Mask out = img::dilate(mask, extra);
  while (out.area() > limit && extra > 0) out = img::dilate(mask, --extra);
  if (out.area() > limit) out = mask;

  // Collect current pixels once as blob anchors.
  std::vector<std::pair<int, int>> anchors;
  for (int r = 0; r < out.height(); ++r)
    for (int c = 0; c < out.width(); ++c)
      if (out.at(r, c) == 1.0f) anchors.emplace_back(r, c);

  const int blobs = static_cast<int>(rng.uniform_int(0, policy.max_blobs));
  for (int k = 0; k < blobs && !anchors.empty(); ++k) {
    const auto [cr, cc] = anchors[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(anchors.size()) - 1))];
    const double ax = rng.uniform(policy.min_axis, policy.max_axis);
    const double ay = rng.uniform(policy.min_axis, policy.max_axis);
    img::Mask candidate = out;
    const int rr = static_cast<int>(std::ceil(std::max(ax, ay)));
    for (int dr = -rr; dr <= rr; ++dr)
      for (int dc = -rr; dc <= rr; ++dc) {
        const int r = cr + dr, c = cc + dc;
        if (r < 0 || r >= out.height() || c < 0 || c >= out.width()) continue;
        if ((dr * dr) / (ay * ay) + (dc * dc) / (ax * ax) <= 1.0) candidate.at(r, c) = 1.0f;
      }
    if (candidate.area() <= limit) out = candidate;
  }
  return img::mask_union(out, mask);  // growth only
}

// Exact per-pixel convex combination of the reenacted head and the
// extrapolated background under the soft matting mask.
inline img::Image refine_hair(const img::Image& image_a, const img::Image& extrapolated,
                              const img::Mask& soft_mask) {
  check_arg(image_a.height() == extrapolated.height() && image_a.width() == extrapolated.width(),
            "refine_hair: image shape mismatch");
  check_arg(soft_mask.height() == image_a.height() && soft_mask.width() == image_a.width(),
            "refine_hair: mask shape mismatch");
  img::Image out(image_a.height(), image_a.width());
  for (int r = 0; r < out.height(); ++r)
    for (int c = 0; c < out.width(); ++c) {
      const float m = soft_mask.at(r, c);
      for (int ch = 0; ch < 3; ++ch)
        out.at(r, c, ch) = m * image_a.at(r, c, ch) + (1.0f - m) * extrapolated.at(r, c, ch);
    }
  return out;
}

// Target hair that the reenacted head does not cover; the optional
// post-processing step inpaints exactly this region.
inline img::Mask excess_hair_mask(const seg::SegMap& seg_t, const seg::SegMap& seg_a) {
  check_arg(seg_t.height() == seg_a.height() && seg_t.width() == seg_a.width(),
            "excess_hair_mask: shape mismatch");
  return img::mask_sub(seg::class_mask(seg_t, seg::kHair), seg::head_mask(seg_a));
}

}  // namespace hswap::blender
