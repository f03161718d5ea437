#include <catch2/catch_amalgamated.hpp>

#include "hswap/core/rng.hpp"
#include "hswap/image/image.hpp"
#include "hswap/image/ops.hpp"
#include "hswap/image/png_io.hpp"

using namespace hswap;
using namespace hswap::img;

namespace {

Image random_image(int h, int w, Rng& rng) {
  Image out(h, w);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = static_cast<float>(rng.uniform());
  return out;
}

Mask random_hard_mask(int h, int w, Rng& rng, double p = 0.3) {
  Mask out(h, w);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = rng.bernoulli(p) ? 1.0f : 0.0f;
  return out;
}

// Brute-force Chebyshev dilation oracle.
Mask dilate_oracle(const Mask& m, int radius) {
  Mask out(m.height(), m.width());
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) {
      float v = 0.0f;
      for (int dr = -radius; dr <= radius && v == 0.0f; ++dr)
        for (int dc = -radius; dc <= radius && v == 0.0f; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr >= 0 && rr < m.height() && cc >= 0 && cc < m.width() && m.at(rr, cc) == 1.0f)
            v = 1.0f;
        }
      out.at(r, c) = v;
    }
  return out;
}

bool mask_subset(const Mask& a, const Mask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.data()[i] == 1.0f && b.data()[i] != 1.0f) return false;
  return true;
}

bool masks_equal(const Mask& a, const Mask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.data()[i] != b.data()[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("to_gray matches the BT.601 weights") {
  Image img(8, 8);
  img.set_pixel(3, 4, 1.0f, 0.0f, 0.0f);
  Image g = to_gray(img);
  REQUIRE(g.at(3, 4, 0) == Catch::Approx(0.299).margin(1e-6));
  REQUIRE(g.at(3, 4, 1) == Catch::Approx(0.299).margin(1e-6));
  REQUIRE(g.at(3, 4, 2) == Catch::Approx(0.299).margin(1e-6));
}

TEST_CASE("to_gray of white is white and is idempotent") {
  Rng rng = Rng::seeded(1);
  Image white(10, 12, 1.0f);
  Image g = to_gray(white);
  for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(g.data()[i] == Catch::Approx(1.0).margin(1e-6));

  Image x = random_image(16, 16, rng);
  Image g1 = to_gray(x);
  Image g2 = to_gray(g1);
  for (std::size_t i = 0; i < g1.size(); ++i)
    REQUIRE(g2.data()[i] == Catch::Approx(g1.data()[i]).margin(1e-6));
}

TEST_CASE("dilate basics") {
  SECTION("all-zero stays zero") {
    Mask z(16, 16);
    REQUIRE(masks_equal(dilate(z, 5), z));
  }
  SECTION("single center pixel becomes a 3x3 block at radius 1") {
    Mask m(9, 9);
    m.at(4, 4) = 1.0f;
    Mask d = dilate(m, 1);
    for (int r = 0; r < 9; ++r)
      for (int c = 0; c < 9; ++c) {
        const bool inside = std::abs(r - 4) <= 1 && std::abs(c - 4) <= 1;
        REQUIRE(d.at(r, c) == (inside ? 1.0f : 0.0f));
      }
  }
  SECTION("radius 0 is identity") {
    Rng rng = Rng::seeded(2);
    Mask m = random_hard_mask(12, 14, rng);
    REQUIRE(masks_equal(dilate(m, 0), m));
  }
  SECTION("negative radius rejected") {
    Mask m(8, 8);
    REQUIRE_THROWS_AS(dilate(m, -1), std::invalid_argument);
  }
}

TEST_CASE("dilate matches brute-force oracle on random masks") {
  Rng rng = Rng::seeded(3);
  for (int t = 0; t < 20; ++t) {
    Mask m = random_hard_mask(15, 13, rng, 0.15);
    const int radius = static_cast<int>(rng.uniform_int(0, 4));
    REQUIRE(masks_equal(dilate(m, radius), dilate_oracle(m, radius)));
  }
}

TEST_CASE("dilation monotonicity and composition") {
  Rng rng = Rng::seeded(4);
  for (int t = 0; t < 10; ++t) {
    Mask m1 = random_hard_mask(14, 14, rng, 0.1);
    Mask m2 = mask_union(m1, random_hard_mask(14, 14, rng, 0.1));
    const int r = static_cast<int>(rng.uniform_int(0, 3));
    REQUIRE(mask_subset(dilate(m1, r), dilate(m2, r)));
    REQUIRE(mask_subset(m1, dilate(m1, r)));

    const int r1 = static_cast<int>(rng.uniform_int(0, 3));
    const int r2 = static_cast<int>(rng.uniform_int(0, 3));
    REQUIRE(masks_equal(dilate(m1, r1 + r2), dilate(dilate(m1, r1), r2)));
  }
}

TEST_CASE("mask algebra") {
  Rng rng = Rng::seeded(5);
  Mask m = random_hard_mask(10, 10, rng);
  Mask z(10, 10);
  SECTION("sub of self is zero, union with zero is identity") {
    REQUIRE(masks_equal(mask_sub(m, m), z));
    REQUIRE(masks_equal(mask_union(m, z), m));
  }
  SECTION("closure: results of hard inputs are hard") {
    Mask a = random_hard_mask(10, 10, rng);
    REQUIRE(mask_sub(m, a).is_hard_valued());
    REQUIRE(mask_union(m, a).is_hard_valued());
    REQUIRE_FALSE(mask_sub(m, a).is_soft());
  }
  SECTION("shape mismatch rejected") {
    Mask other(9, 10);
    REQUIRE_THROWS_AS(mask_sub(m, other), std::invalid_argument);
  }
}

TEST_CASE("apply_mask with all-ones is identity") {
  Rng rng = Rng::seeded(6);
  Image x = random_image(12, 12, rng);
  Mask ones(12, 12, 1.0f);
  Image y = apply_mask(x, ones);
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(y.data()[i] == x.data()[i]);
}

TEST_CASE("crop and resize identities") {
  Rng rng = Rng::seeded(7);
  Image x = random_image(20, 20, rng);
  SECTION("full-image crop is identity") {
    CropSpec spec{10, 10, 20, CropSemantic::kHead};
    Image y = crop(x, spec);
    REQUIRE(y.height() == 20);
    for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(y.data()[i] == x.data()[i]);
  }
  SECTION("out-of-range window is clamped inside") {
    CropSpec spec{0, 0, 10, CropSemantic::kFace};
    Image y = crop(x, spec);
    REQUIRE(y.height() == 10);
    REQUIRE(y.at(0, 0, 0) == x.at(0, 0, 0));
  }
  SECTION("resize to same size is identity") {
    Image y = resize(x, 20, 20);
    for (std::size_t i = 0; i < x.size(); ++i)
      REQUIRE(y.data()[i] == Catch::Approx(x.data()[i]).margin(1e-6));
  }
  SECTION("bilinear resize preserves constants") {
    Image c(16, 16, 0.37f);
    Image y = resize(c, 9, 23);
    for (std::size_t i = 0; i < y.size(); ++i)
      REQUIRE(y.data()[i] == Catch::Approx(0.37).margin(1e-6));
  }
  SECTION("degenerate target rejected") {
    REQUIRE_THROWS_AS(resize(x, 2, 20), std::invalid_argument);
  }
}

TEST_CASE("range preservation on randomized inputs") {
  Rng rng = Rng::seeded(8);
  for (int t = 0; t < 10; ++t) {
    Image x = random_image(16, 18, rng);
    Mask m = random_hard_mask(16, 18, rng);
    REQUIRE(to_gray(x).in_range());
    REQUIRE(apply_mask(x, m).in_range());
    REQUIRE(resize(x, 11, 27).in_range());
    REQUIRE(crop(x, {8, 9, 9, CropSemantic::kHead}).in_range());
  }
}

TEST_CASE("png round trip for images and masks") {
  Rng rng = Rng::seeded(9);
  Image x = random_image(24, 17, rng);
  auto bytes = encode_image_png(x);
  Image y = decode_image_png(bytes);
  REQUIRE(y.height() == 24);
  REQUIRE(y.width() == 17);
  // 8-bit quantization: error bounded by half a step
  for (std::size_t i = 0; i < x.size(); ++i)
    REQUIRE(std::abs(y.data()[i] - x.data()[i]) <= 0.5f / 255.0f + 1e-6f);
  // second round trip is exact
  Image z = decode_image_png(encode_image_png(y));
  for (std::size_t i = 0; i < y.size(); ++i) REQUIRE(z.data()[i] == y.data()[i]);

  Mask hard = random_hard_mask(24, 17, rng);
  Mask hr = decode_mask_png(encode_mask_png(hard));
  REQUIRE_FALSE(hr.is_soft());
  for (std::size_t i = 0; i < hard.size(); ++i) REQUIRE(hr.data()[i] == hard.data()[i]);

  Mask soft = Mask::soft(24, 17);
  for (std::size_t i = 0; i < soft.size(); ++i)
    soft.data()[i] = static_cast<float>(rng.uniform());
  soft.refresh_soft_flag();
  Mask sr = decode_mask_png(encode_mask_png(soft));
  REQUIRE(sr.is_soft());
}

TEST_CASE("gaussian feather produces a soft mask in range") {
  Mask m(32, 32);
  for (int r = 10; r < 22; ++r)
    for (int c = 10; c < 22; ++c) m.at(r, c) = 1.0f;
  Mask s = gaussian_feather(m, 2.0);
  REQUIRE(s.is_soft());
  for (std::size_t i = 0; i < s.size(); ++i) {
    REQUIRE(s.data()[i] >= 0.0f);
    REQUIRE(s.data()[i] <= 1.0f);
  }
  REQUIRE(s.at(16, 16) > 0.99f);
  REQUIRE(s.at(0, 0) < 0.01f);
}
