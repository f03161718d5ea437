#pragma once

#include <map>
#include <string>
#include <vector>

#include "hswap/nn/image_bridge.hpp"
#include "hswap/refcreate/correlation.hpp"
#include "nlohmann/json.hpp"

namespace hswap::refcreate {

// Donor table for regions present in the reenacted head but missing (or too
// small) in the target. Donors were picked for chromatic plausibility and
// can be overridden through config.
struct FallbackTable {
  std::map<seg::Region, seg::Region> donors = {
      {seg::Region::kBeard, seg::Region::kHair},
      {seg::Region::kHat, seg::Region::kHair},
      {seg::Region::kHeadphones, seg::Region::kHair},
      {seg::Region::kGlasses, seg::Region::kFace},
      {seg::Region::kTeeth, seg::Region::kLips},
      {seg::Region::kMouth, seg::Region::kLips},
      {seg::Region::kEars, seg::Region::kFace},
      {seg::Region::kBrows, seg::Region::kHair},
      {seg::Region::kEarrings, seg::Region::kFace},
  };
  // 32 px at 64x64, scaled with image area.
  int min_donor_pixels_at_64 = 32;

  int min_donor_size(int height, int width) const {
    const double scaled = min_donor_pixels_at_64 * (static_cast<double>(height) * width) / 4096.0;
    return std::max(1, static_cast<int>(std::lround(scaled)));
  }
};

enum class RefSource { kMatched, kFallback, kCopied };

struct RegionProvenance {
  seg::Region region = seg::Region::kCount;
  RefSource source = RefSource::kCopied;
  seg::Region donor = seg::Region::kCount;  // set for fallback entries
  std::int64_t pixel_count = 0;
};

struct ProvenanceMap {
  std::vector<RegionProvenance> entries;

  const RegionProvenance* find(seg::Region r) const {
    for (const auto& e : entries)
      if (e.region == r) return &e;
    return nullptr;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& e : entries) {
      std::string src;
      switch (e.source) {
        case RefSource::kMatched: src = "matched"; break;
        case RefSource::kFallback:
          src = "fallback:" + seg::region_names()[static_cast<std::size_t>(e.donor)];
          break;
        case RefSource::kCopied: src = "copied"; break;
      }
      j[seg::region_names()[static_cast<std::size_t>(e.region)]] = {
          {"source", src}, {"pixels", e.pixel_count}};
    }
    return j;
  }
};

template <typename T>
struct HeadReference {
  nn::Var<T> image;  // (1,3,H,W); zero outside the head regions of A
  ProvenanceMap provenance;
  // Correlations for matched/fallback regions, consumed by the cycle loss.
  std::vector<RegionCorrelation<T>> correlations;
};

// Assembles the head color reference for the A side: per-region
// temperature-softmax resampling of target colors, donor fallback when the
// target lacks the region, colors copied from the A image as a last resort.
// Every A-side head pixel ends up assigned.
template <typename T>
HeadReference<T> build_head_reference(const nn::Var<T>& f_a, std::int64_t sample_a,
                                      const seg::SegMap& seg_a, const img::Image& image_a,
                                      const nn::Var<T>& f_t, std::int64_t sample_t,
                                      const seg::SegMap& seg_t, const img::Image& image_t,
                                      T tau, const FallbackTable& fallback = {}) {
  check_arg(tau > T(0), "build_head_reference: temperature must be positive");
  const std::int64_t h = seg_a.height(), w = seg_a.width();
  const int min_donor = fallback.min_donor_size(static_cast<int>(h), static_cast<int>(w));

  const seg::RegionSet regions_a = seg::region_masks(seg_a);
  const seg::RegionSet regions_t = seg::region_masks(seg_t);

  HeadReference<T> out;
  std::vector<nn::Var<T>> layers;
  for (int r = 0; r < seg::kNumRegions; ++r) {
    const auto region = static_cast<seg::Region>(r);
    const auto& px_a = regions_a.pixels[static_cast<std::size_t>(r)];
    if (px_a.empty()) continue;

    RegionProvenance prov;
    prov.region = region;
    prov.pixel_count = static_cast<std::int64_t>(px_a.size());

    const std::vector<std::int64_t>* donor_px = nullptr;
    seg::Region donor_region = region;
    const auto& px_t = regions_t.pixels[static_cast<std::size_t>(r)];
    if (!px_t.empty()) {
      donor_px = &px_t;
      prov.source = RefSource::kMatched;
    } else {
      auto it = fallback.donors.find(region);
      if (it != fallback.donors.end()) {
        const auto& px_d = regions_t.pixels[static_cast<std::size_t>(it->second)];
        if (static_cast<int>(px_d.size()) >= min_donor) {
          donor_px = &px_d;
          donor_region = it->second;
          prov.source = RefSource::kFallback;
          prov.donor = donor_region;
        }
      }
    }

    nn::Var<T> colors;
    if (donor_px) {
      RegionCorrelation<T> corr =
          region_correlation(f_a, sample_a, px_a, f_t, sample_t, *donor_px, region);
      colors = resample_region(
          corr, nn::Var<T>::constant(gather_image_colors<T>(image_t, *donor_px)), tau);
      out.correlations.push_back(std::move(corr));
    } else {
      prov.source = RefSource::kCopied;
      colors = nn::Var<T>::constant(gather_image_colors<T>(image_a, px_a));
    }
    layers.push_back(nn::scatter_rows_to_image(colors, px_a, h, w));
    out.provenance.entries.push_back(prov);
  }

  if (layers.empty()) {
    out.image = nn::Var<T>::constant(Tensor<T>::zeros({1, 3, h, w}));
    return out;
  }
  nn::Var<T> acc = layers[0];
  for (std::size_t i = 1; i < layers.size(); ++i) acc = nn::vadd(acc, layers[i]);
  out.image = acc;
  return out;
}

// Inference convenience: plain image + provenance, no gradient machinery.
struct HeadReferenceImage {
  img::Image image;
  ProvenanceMap provenance;
};

template <typename T>
HeadReferenceImage build_head_reference_image(const nn::Var<T>& f_a, const seg::SegMap& seg_a,
                                              const img::Image& image_a, const nn::Var<T>& f_t,
                                              const seg::SegMap& seg_t, const img::Image& image_t,
                                              T tau, const FallbackTable& fallback = {}) {
  HeadReference<T> ref = build_head_reference(f_a.detach(), 0, seg_a, image_a, f_t.detach(), 0,
                                              seg_t, image_t, tau, fallback);
  return {nn::chw_to_image(ref.image.val()), std::move(ref.provenance)};
}

}  // namespace hswap::refcreate
