#include <catch2/catch_amalgamated.hpp>

#include "hswap/refcreate/augment.hpp"
#include "hswap/refcreate/features.hpp"
#include "hswap/refcreate/reference.hpp"
#include "helpers.hpp"

using namespace hswap;
using namespace hswap::refcreate;
using nn::Var;

namespace {

// Independent correlation oracle: centralize per channel over the region,
// cosine with the same eps rule as the implementation.
std::vector<std::vector<double>> corr_oracle(const std::vector<std::vector<double>>& fa,
                                             const std::vector<std::vector<double>>& ft,
                                             double eps = 1e-8) {
  auto centralize = [](std::vector<std::vector<double>> f) {
    const std::size_t p = f.size(), d = f[0].size();
    for (std::size_t j = 0; j < d; ++j) {
      double m = 0;
      for (std::size_t i = 0; i < p; ++i) m += f[i][j];
      m /= static_cast<double>(p);
      for (std::size_t i = 0; i < p; ++i) f[i][j] -= m;
    }
    return f;
  };
  auto ca = centralize(fa);
  auto ct = centralize(ft);
  auto norm = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  std::vector<std::vector<double>> g(ca.size(), std::vector<double>(ct.size(), 0.0));
  for (std::size_t u = 0; u < ca.size(); ++u)
    for (std::size_t v = 0; v < ct.size(); ++v) {
      double dot = 0;
      for (std::size_t j = 0; j < ca[u].size(); ++j) dot += ca[u][j] * ct[v][j];
      g[u][v] = dot / (std::max(norm(ca[u]), eps) * std::max(norm(ct[v]), eps));
    }
  return g;
}

// Wrap a (P,D) feature table as a (1,D,H,W) tensor at pixel indices 0..P-1.
Var<double> embed_features(const std::vector<std::vector<double>>& f, std::int64_t h,
                           std::int64_t w) {
  const std::int64_t d = static_cast<std::int64_t>(f[0].size());
  Tensor<double> t({1, d, h, w});
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::int64_t j = 0; j < d; ++j) t[j * h * w + static_cast<std::int64_t>(i)] = f[i][static_cast<std::size_t>(j)];
  return Var<double>::constant(t);
}

std::vector<std::int64_t> iota_idx(std::size_t n) {
  std::vector<std::int64_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::int64_t>(i);
  return out;
}

}  // namespace

TEST_CASE("correlation matches the brute-force oracle on random small regions") {
  Rng rng = Rng::seeded(41);
  for (int t = 0; t < 50; ++t) {
    const std::size_t pa = static_cast<std::size_t>(rng.uniform_int(2, 16));
    const std::size_t pt = static_cast<std::size_t>(rng.uniform_int(2, 16));
    const std::size_t d = static_cast<std::size_t>(rng.uniform_int(2, 8));
    std::vector<std::vector<double>> fa(pa, std::vector<double>(d));
    std::vector<std::vector<double>> ft(pt, std::vector<double>(d));
    for (auto& row : fa)
      for (auto& v : row) v = rng.uniform(-1, 1);
    for (auto& row : ft)
      for (auto& v : row) v = rng.uniform(-1, 1);

    auto f_a = embed_features(fa, 4, 4);
    auto f_t = embed_features(ft, 4, 4);
    auto corr = region_correlation(f_a, 0, iota_idx(pa), f_t, 0, iota_idx(pt));
    auto oracle = corr_oracle(fa, ft);
    for (std::size_t u = 0; u < pa; ++u)
      for (std::size_t v = 0; v < pt; ++v) {
        const double got = corr.gamma.val().at(static_cast<std::int64_t>(u), static_cast<std::int64_t>(v));
        REQUIRE(got == Catch::Approx(oracle[u][v]).margin(1e-6));
        REQUIRE(got >= -1.0 - 1e-9);
        REQUIRE(got <= 1.0 + 1e-9);
      }
  }
}

TEST_CASE("identical feature tables put the row argmax on the matching pixel") {
  Rng rng = Rng::seeded(43);
  const std::size_t p = 10, d = 6;
  std::vector<std::vector<double>> f(p, std::vector<double>(d));
  for (auto& row : f)
    for (auto& v : row) v = rng.uniform(-1, 1);
  auto fv = embed_features(f, 4, 4);
  auto corr = region_correlation(fv, 0, iota_idx(p), fv, 0, iota_idx(p));
  for (std::size_t u = 0; u < p; ++u) {
    std::int64_t arg = 0;
    double best = -2;
    for (std::size_t v = 0; v < p; ++v)
      if (corr.gamma.val().at(static_cast<std::int64_t>(u), static_cast<std::int64_t>(v)) > best) {
        best = corr.gamma.val().at(static_cast<std::int64_t>(u), static_cast<std::int64_t>(v));
        arg = static_cast<std::int64_t>(v);
      }
    REQUIRE(arg == static_cast<std::int64_t>(u));
  }
}

TEST_CASE("constant-feature regions produce an all-zero correlation") {
  std::vector<std::vector<double>> f(6, std::vector<double>(4, 0.7));
  auto fv = embed_features(f, 4, 4);
  auto corr = region_correlation(fv, 0, iota_idx(6), fv, 0, iota_idx(6));
  for (std::int64_t i = 0; i < corr.gamma.val().numel(); ++i)
    REQUIRE(corr.gamma.val()[i] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("hand-built 2x2 feature example matches the oracle") {
  std::vector<std::vector<double>> fa = {{1.0, 0.0}, {0.0, 1.0}};
  std::vector<std::vector<double>> ft = {{0.9, 0.1}, {0.2, 0.8}};
  auto corr = region_correlation(embed_features(fa, 4, 4), 0, iota_idx(2),
                                 embed_features(ft, 4, 4), 0, iota_idx(2));
  auto oracle = corr_oracle(fa, ft);
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v)
      REQUIRE(corr.gamma.val().at(u, v) == Catch::Approx(oracle[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]).margin(1e-6));
}

TEST_CASE("empty regions are rejected so callers can trigger fallback") {
  auto fv = embed_features({{1.0, 0.0}}, 4, 4);
  REQUIRE_THROWS_AS(region_correlation(fv, 0, {}, fv, 0, iota_idx(1)), std::invalid_argument);
}

TEST_CASE("resampling examples") {
  Rng rng = Rng::seeded(47);
  const std::size_t pt = 7;
  Tensor<double> colors({static_cast<std::int64_t>(pt), 3});
  for (std::int64_t i = 0; i < colors.numel(); ++i) colors[i] = rng.uniform(0, 1);

  SECTION("all-zero correlation averages the target region") {
    RegionCorrelation<double> corr;
    corr.gamma = Var<double>::constant(Tensor<double>::zeros({3, static_cast<std::int64_t>(pt)}));
    corr.pixels_a = iota_idx(3);
    corr.pixels_t = iota_idx(pt);
    auto out = resample_region(corr, Var<double>::constant(colors), 0.5);
    for (int ch = 0; ch < 3; ++ch) {
      double mean = 0;
      for (std::size_t v = 0; v < pt; ++v) mean += colors.at(static_cast<std::int64_t>(v), ch);
      mean /= static_cast<double>(pt);
      for (int u = 0; u < 3; ++u) REQUIRE(out.val().at(u, ch) == Catch::Approx(mean).margin(1e-6));
    }
  }

  SECTION("tau -> 0 recovers the argmax pixel colors") {
    Tensor<double> gamma({2, static_cast<std::int64_t>(pt)});
    for (std::int64_t i = 0; i < gamma.numel(); ++i) gamma[i] = rng.uniform(-0.5, 0.5);
    gamma.at(0, 4) = 0.95;
    gamma.at(1, 2) = 0.99;
    RegionCorrelation<double> corr;
    corr.gamma = Var<double>::constant(gamma);
    corr.pixels_a = iota_idx(2);
    corr.pixels_t = iota_idx(pt);
    auto out = resample_region(corr, Var<double>::constant(colors), 1e-4);
    for (int ch = 0; ch < 3; ++ch) {
      REQUIRE(out.val().at(0, ch) == Catch::Approx(colors.at(4, ch)).margin(1e-4));
      REQUIRE(out.val().at(1, ch) == Catch::Approx(colors.at(2, ch)).margin(1e-4));
    }
  }

  SECTION("single-pixel target region copies that pixel exactly") {
    RegionCorrelation<double> corr;
    corr.gamma = Var<double>::constant(Tensor<double>::full({3, 1}, 0.3));
    corr.pixels_a = iota_idx(3);
    corr.pixels_t = iota_idx(1);
    Tensor<double> one({1, 3});
    one.at(0, 0) = 0.2;
    one.at(0, 1) = 0.6;
    one.at(0, 2) = 0.9;
    auto out = resample_region(corr, Var<double>::constant(one), 0.01);
    for (int u = 0; u < 3; ++u)
      for (int ch = 0; ch < 3; ++ch)
        REQUIRE(out.val().at(u, ch) == Catch::Approx(one.at(0, ch)).margin(1e-12));
  }

  SECTION("non-positive temperature rejected") {
    RegionCorrelation<double> corr;
    corr.gamma = Var<double>::constant(Tensor<double>::zeros({2, 2}));
    corr.pixels_a = iota_idx(2);
    corr.pixels_t = iota_idx(2);
    Tensor<double> c({2, 3});
    REQUIRE_THROWS_AS(resample_region(corr, Var<double>::constant(c), 0.0),
                      std::invalid_argument);
  }
}

TEST_CASE("softmax rows sum to one and resampled colors are convex-bounded") {
  Rng rng = Rng::seeded(53);
  for (int t = 0; t < 30; ++t) {
    const std::size_t pa = static_cast<std::size_t>(rng.uniform_int(1, 12));
    const std::size_t pt = static_cast<std::size_t>(rng.uniform_int(1, 12));
    Tensor<double> gamma({static_cast<std::int64_t>(pa), static_cast<std::int64_t>(pt)});
    for (std::int64_t i = 0; i < gamma.numel(); ++i) gamma[i] = rng.uniform(-1, 1);
    const double tau = rng.uniform(0.01, 2.0);
    auto w = nn::softmax_rows(Var<double>::constant(gamma), tau);
    for (std::size_t u = 0; u < pa; ++u) {
      double s = 0;
      for (std::size_t v = 0; v < pt; ++v) s += w.val().at(static_cast<std::int64_t>(u), static_cast<std::int64_t>(v));
      REQUIRE(s == Catch::Approx(1.0).margin(1e-6));
    }

    Tensor<double> colors({static_cast<std::int64_t>(pt), 3});
    for (std::int64_t i = 0; i < colors.numel(); ++i) colors[i] = rng.uniform(0, 1);
    RegionCorrelation<double> corr;
    corr.gamma = Var<double>::constant(gamma);
    corr.pixels_a = iota_idx(pa);
    corr.pixels_t = iota_idx(pt);
    auto out = resample_region(corr, Var<double>::constant(colors), tau);
    for (int ch = 0; ch < 3; ++ch) {
      double lo = 2, hi = -1;
      for (std::size_t v = 0; v < pt; ++v) {
        lo = std::min(lo, colors.at(static_cast<std::int64_t>(v), ch));
        hi = std::max(hi, colors.at(static_cast<std::int64_t>(v), ch));
      }
      for (std::size_t u = 0; u < pa; ++u) {
        REQUIRE(out.val().at(static_cast<std::int64_t>(u), ch) >= lo - 1e-9);
        REQUIRE(out.val().at(static_cast<std::int64_t>(u), ch) <= hi + 1e-9);
      }
    }
  }
}

TEST_CASE("feature pyramid contract") {
  Rng rng = Rng::seeded(59);
  FeaturePyramid<float> fpn(rng, 64, 8);
  img::Image image(32, 32, 0.5f);

  SECTION("output dims (1,64,H,W)") {
    auto f = fpn.extract(image);
    REQUIRE(f.val().dim(0) == 1);
    REQUIRE(f.val().dim(1) == 64);
    REQUIRE(f.val().dim(2) == 32);
    REQUIRE(f.val().dim(3) == 32);
  }
  SECTION("deterministic across calls") {
    auto f1 = fpn.extract(image);
    auto f2 = fpn.extract(image);
    for (std::int64_t i = 0; i < f1.val().numel(); ++i) REQUIRE(f1.val()[i] == f2.val()[i]);
  }
  SECTION("constant image gives spatially constant interior features") {
    auto f = fpn.extract(image);
    // compare interior pixels (margin larger than the receptive field)
    const int m = 14;
    for (std::int64_t ch = 0; ch < 64; ++ch) {
      const float ref = f.val().at(0, ch, m, m);
      for (int r = m; r < 32 - m; ++r)
        for (int c = m; c < 32 - m; ++c)
          REQUIRE(f.val().at(0, ch, r, c) == Catch::Approx(ref).margin(1e-5));
    }
  }
}

TEST_CASE("head reference assembly with fallback and copy rules") {
  Rng rng = Rng::seeded(61);
  const int n = 16;
  // A-side: skin + beard + hat; T-side: skin + hair only
  seg::SegMap seg_a(n, n, seg::kBackground);
  seg::SegMap seg_t(n, n, seg::kBackground);
  for (int r = 4; r < 12; ++r)
    for (int c = 4; c < 12; ++c) {
      seg_a.at(r, c) = seg::kSkin;
      seg_t.at(r, c) = seg::kSkin;
    }
  for (int c = 4; c < 12; ++c) {
    seg_a.at(3, c) = seg::kBeard;
    seg_a.at(2, c) = seg::kHat;
    seg_t.at(3, c) = seg::kHair;
    seg_t.at(2, c) = seg::kHair;
  }

  img::Image image_a(n, n, 0.25f);
  img::Image image_t(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) image_t.set_pixel(r, c, 0.9f, 0.5f, 0.1f);

  FeaturePyramid<float> fpn(rng, 16, 8);
  auto f_a = fpn.extract(image_a);
  auto f_t = fpn.extract(image_t);

  FallbackTable table;
  SECTION("beard borrows from hair, provenance records the donor") {
    auto ref = build_head_reference<float>(f_a, 0, seg_a, image_a, f_t, 0, seg_t, image_t, 0.01f,
                                           table);
    const auto* beard = ref.provenance.find(seg::Region::kBeard);
    REQUIRE(beard != nullptr);
    REQUIRE(beard->source == RefSource::kFallback);
    REQUIRE(beard->donor == seg::Region::kHair);
    const auto* face = ref.provenance.find(seg::Region::kFace);
    REQUIRE(face->source == RefSource::kMatched);

    // every A head pixel assigned; outside head zero
    const seg::RegionSet ra = seg::region_masks(seg_a);
    for (const auto& px : ra.pixels)
      for (auto i : px) {
        double s = 0;
        for (int ch = 0; ch < 3; ++ch) s += ref.image.val()[ch * n * n + i];
        REQUIRE(s > 0.0);  // target colors are all bright
      }
    REQUIRE(ref.image.val()[0] == 0.0f);  // background pixel
  }

  SECTION("small donor falls through to the copy rule") {
    table.min_donor_pixels_at_64 = 4096;  // nothing is big enough to donate
    auto ref = build_head_reference<float>(f_a, 0, seg_a, image_a, f_t, 0, seg_t, image_t, 0.01f,
                                           table);
    const auto* hat = ref.provenance.find(seg::Region::kHat);
    REQUIRE(hat != nullptr);
    REQUIRE(hat->source == RefSource::kCopied);
    // copied colors come from image_a (0.25 everywhere)
    const seg::RegionSet ra = seg::region_masks(seg_a);
    const auto& hat_px = ra.pixels[static_cast<std::size_t>(seg::Region::kHat)];
    for (auto i : hat_px)
      REQUIRE(ref.image.val()[0 * n * n + i] == Catch::Approx(0.25).margin(1e-6));
  }
}

TEST_CASE("color jitter stays in range and flip is an involution") {
  Rng rng = Rng::seeded(67);
  img::Image x(16, 16);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c)
      x.set_pixel(r, c, static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform()),
                  static_cast<float>(rng.uniform()));
  AugmentPolicy policy;
  for (int t = 0; t < 20; ++t) REQUIRE(color_jitter(x, policy, rng).in_range());

  img::Image xf = hflip(hflip(x));
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(xf.data()[i] == x.data()[i]);
}
