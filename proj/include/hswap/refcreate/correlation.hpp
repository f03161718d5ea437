#pragma once

#include <vector>

#include "hswap/image/image.hpp"
#include "hswap/nn/ops.hpp"
#include "hswap/seg/segmap.hpp"

namespace hswap::refcreate {

// Per-region correlation matrix between channelwise-centralized dense
// features of the generated (A) and target (T) images, with the exact pixel
// index maps for both sides.
template <typename T>
struct RegionCorrelation {
  seg::Region region = seg::Region::kCount;
  nn::Var<T> gamma;                     // (N_A, N_T), cosine values in [-1,1]
  std::vector<std::int64_t> pixels_a;   // row-major indices into the A image
  std::vector<std::int64_t> pixels_t;   // row-major indices into the T image
};

// Gamma(u,v) = cos(centralized f_A(u), centralized f_T(v)). Rows with
// (near-)zero centralized norm fall back to dividing by eps, which makes a
// constant-feature region produce an all-zero matrix.
template <typename T>
RegionCorrelation<T> region_correlation(const nn::Var<T>& f_a, std::int64_t sample_a,
                                        const std::vector<std::int64_t>& pixels_a,
                                        const nn::Var<T>& f_t, std::int64_t sample_t,
                                        const std::vector<std::int64_t>& pixels_t,
                                        seg::Region region = seg::Region::kCount,
                                        T eps = T(1e-8)) {
  check_arg(!pixels_a.empty() && !pixels_t.empty(), "region_correlation: empty region");
  nn::Var<T> a = nn::gather_pixels(f_a, sample_a, pixels_a);
  nn::Var<T> b = nn::gather_pixels(f_t, sample_t, pixels_t);
  nn::Var<T> an = nn::rows_normalize(nn::center_columns(a), eps);
  nn::Var<T> bn = nn::rows_normalize(nn::center_columns(b), eps);
  RegionCorrelation<T> out;
  out.region = region;
  out.gamma = nn::matmul(an, nn::transpose2d(bn));
  out.pixels_a = pixels_a;
  out.pixels_t = pixels_t;
  return out;
}

// Temperature-softmax resampling: each A-side pixel color is the
// softmax-weighted convex combination of the T-side region colors.
// colors_t: (N_T, 3). Returns (N_A, 3).
template <typename T>
nn::Var<T> resample_region(const RegionCorrelation<T>& corr, const nn::Var<T>& colors_t, T tau) {
  check_arg(tau > T(0), "resample_region: temperature must be positive");
  check_arg(colors_t.val().ndim() == 2 &&
                colors_t.val().dim(0) == static_cast<std::int64_t>(corr.pixels_t.size()),
            "resample_region: color row count mismatch");
  nn::Var<T> weights = nn::softmax_rows(corr.gamma, tau);
  return nn::matmul(weights, colors_t);
}

// Reverse-direction resampling used by the cycle loss: weights come from the
// transposed correlation, colors from the already-resampled A side.
template <typename T>
nn::Var<T> resample_region_reverse(const RegionCorrelation<T>& corr, const nn::Var<T>& colors_a,
                                   T tau) {
  check_arg(tau > T(0), "resample_region_reverse: temperature must be positive");
  nn::Var<T> weights = nn::softmax_rows(nn::transpose2d(corr.gamma), tau);
  return nn::matmul(weights, colors_a);
}

// Pull (P,3) color rows for the given pixel indices out of an Image.
template <typename T>
Tensor<T> gather_image_colors(const img::Image& image, const std::vector<std::int64_t>& idx) {
  Tensor<T> out({static_cast<std::int64_t>(idx.size()), 3});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const std::int64_t r = idx[i] / image.width();
    const std::int64_t c = idx[i] % image.width();
    for (int ch = 0; ch < 3; ++ch)
      out.at(static_cast<std::int64_t>(i), ch) =
          static_cast<T>(image.at(static_cast<int>(r), static_cast<int>(c), ch));
  }
  return out;
}

}  // namespace hswap::refcreate
