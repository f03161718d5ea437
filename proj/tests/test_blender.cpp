#include <catch2/catch_amalgamated.hpp>

#include <thread>

#include "hswap/blender/inpaint.hpp"
#include "hswap/blender/inpaint_http.hpp"
#include "hswap/blender/masks.hpp"
#include "hswap/blender/unet.hpp"
#include "helpers.hpp"

using namespace hswap;
using namespace hswap::blender;

namespace {

img::Image random_image(int n, Rng& rng) {
  img::Image out(n, n);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = static_cast<float>(rng.uniform());
  return out;
}

seg::SegMap random_headish_segmap(int n, Rng& rng) {
  seg::SegMap s(n, n, seg::kBackground);
  const int cr = static_cast<int>(rng.uniform_int(n / 3, 2 * n / 3));
  const int cc = static_cast<int>(rng.uniform_int(n / 3, 2 * n / 3));
  const int ar = static_cast<int>(rng.uniform_int(2, n / 3));
  const int ac = static_cast<int>(rng.uniform_int(2, n / 3));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double q = double(r - cr) * (r - cr) / double(ar * ar) +
                       double(c - cc) * (c - cc) / double(ac * ac);
      if (q <= 1.0) s.at(r, c) = r < cr ? seg::kHair : seg::kSkin;
    }
  return s;
}

}  // namespace

TEST_CASE("preprocess matches a hand-computed oracle on an 8x8 case") {
  const int n = 8;
  seg::SegMap seg_a(n, n, seg::kBackground);
  seg::SegMap seg_t(n, n, seg::kBackground);
  // A head: 2x2 skin block; T head: shifted 2x2 block
  seg_a.at(3, 3) = seg::kSkin;
  seg_a.at(3, 4) = seg::kSkin;
  seg_a.at(4, 3) = seg::kSkin;
  seg_a.at(4, 4) = seg::kSkin;
  seg_t.at(4, 4) = seg::kSkin;
  seg_t.at(4, 5) = seg::kSkin;
  seg_t.at(5, 4) = seg::kSkin;
  seg_t.at(5, 5) = seg::kSkin;

  Rng rng = Rng::seeded(1);
  img::Image ia = random_image(n, rng);
  img::Image it = random_image(n, rng);
  MaskBundle b = preprocess(ia, seg_a, it, seg_t, 1);

  // independent recomputation with explicit loops
  auto head_of = [&](const seg::SegMap& s) {
    img::Mask m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m.at(r, c) = s.at(r, c) == seg::kSkin ? 1.0f : 0.0f;
    return m;
  };
  img::Mask ha = head_of(seg_a), ht = head_of(seg_t);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      REQUIRE(b.head_a.at(r, c) == ha.at(r, c));
      REQUIRE(b.head_t.at(r, c) == ht.at(r, c));
      const float u = std::max(ha.at(r, c), ht.at(r, c));
      REQUIRE(b.union_heads.at(r, c) == u);
      // Chebyshev dilation radius 1 of the union
      float du = 0.0f;
      float dt = 0.0f;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || rr >= n || cc < 0 || cc >= n) continue;
          du = std::max(du, std::max(ha.at(rr, cc), ht.at(rr, cc)));
          dt = std::max(dt, ht.at(rr, cc));
        }
      REQUIRE(b.head_a_enlarged.at(r, c) == du);
      REQUIRE(b.head_t_enlarged.at(r, c) == dt);
      REQUIRE(b.inpaint_a.at(r, c) == std::max(du - ha.at(r, c), 0.0f));
      REQUIRE(b.inpaint_t.at(r, c) == std::max(dt - ht.at(r, c), 0.0f));
      for (int ch = 0; ch < 3; ++ch)
        REQUIRE(b.background_t.at(r, c, ch) == it.at(r, c, ch) * (1.0f - du));
    }
  REQUIRE(b.invariants_ok());
}

TEST_CASE("identical head masks make the inpaint region a pure dilation ring") {
  const int n = 16;
  seg::SegMap s(n, n, seg::kBackground);
  for (int r = 5; r < 11; ++r)
    for (int c = 5; c < 11; ++c) s.at(r, c) = seg::kSkin;
  img::Image im(n, n, 0.5f);
  MaskBundle b = preprocess(im, s, im, s, 2);
  img::Mask ring = img::mask_sub(img::dilate(seg::head_mask(s), 2), seg::head_mask(s));
  for (std::size_t i = 0; i < ring.size(); ++i)
    REQUIRE(b.inpaint_a.data()[i] == ring.data()[i]);
}

TEST_CASE("empty heads leave the background untouched") {
  const int n = 12;
  seg::SegMap s(n, n, seg::kBackground);
  Rng rng = Rng::seeded(2);
  img::Image ia = random_image(n, rng);
  img::Image it = random_image(n, rng);
  MaskBundle b = preprocess(ia, s, it, s, 2);
  REQUIRE(b.head_a.area() == 0);
  REQUIRE(b.inpaint_a.area() == 0);
  for (std::size_t i = 0; i < it.size(); ++i) REQUIRE(b.background_t.data()[i] == it.data()[i]);
  REQUIRE(b.invariants_ok());
}

TEST_CASE("mask bundle invariants hold on random segmap pairs") {
  Rng rng = Rng::seeded(3);
  for (int t = 0; t < 50; ++t) {
    const int n = 24;
    seg::SegMap sa = random_headish_segmap(n, rng);
    seg::SegMap st = random_headish_segmap(n, rng);
    img::Image ia = random_image(n, rng);
    img::Image it = random_image(n, rng);
    MaskBundle b = preprocess(ia, sa, it, st, static_cast<int>(rng.uniform_int(1, 3)));
    REQUIRE(b.invariants_ok());
  }
}

TEST_CASE("inpaint mask augmentation") {
  Rng rng = Rng::seeded(5);
  seg::SegMap s = random_headish_segmap(24, rng);
  img::Mask head = seg::head_mask(s);
  img::Mask ring = img::mask_sub(img::dilate(head, 2), head);
  InpaintAugmentPolicy policy;

  SECTION("disabled policy is the identity") {
    policy.enabled = false;
    Rng r2 = Rng::seeded(7);
    img::Mask out = augment_inpaint_mask(ring, policy, r2);
    for (std::size_t i = 0; i < ring.size(); ++i) REQUIRE(out.data()[i] == ring.data()[i]);
  }
  SECTION("fixed seed reproduces the same augmentation") {
    Rng a = Rng::seeded(11);
    Rng b = Rng::seeded(11);
    img::Mask m1 = augment_inpaint_mask(ring, policy, a);
    img::Mask m2 = augment_inpaint_mask(ring, policy, b);
    for (std::size_t i = 0; i < m1.size(); ++i) REQUIRE(m1.data()[i] == m2.data()[i]);
  }
  SECTION("area ratio stays within [1,3] and growth is monotone") {
    Rng r2 = Rng::seeded(13);
    const auto base = static_cast<double>(ring.area());
    for (int t = 0; t < 200; ++t) {
      img::Mask out = augment_inpaint_mask(ring, policy, r2);
      const double ratio = static_cast<double>(out.area()) / base;
      REQUIRE(ratio >= 1.0);
      REQUIRE(ratio <= 3.0);
      for (std::size_t i = 0; i < ring.size(); ++i)
        if (ring.data()[i] == 1.0f) REQUIRE(out.data()[i] == 1.0f);
    }
  }
  SECTION("empty input stays empty") {
    img::Mask empty(16, 16);
    Rng r2 = Rng::seeded(17);
    REQUIRE(augment_inpaint_mask(empty, policy, r2).area() == 0);
  }
}

TEST_CASE("background reference wrapper") {
  Rng rng = Rng::seeded(19);
  img::Image im = random_image(16, rng);
  NeighborhoodFillClient fill;

  SECTION("empty mask returns the input exactly") {
    img::Mask empty(16, 16);
    img::Image out = background_reference(im, empty, fill);
    for (std::size_t i = 0; i < im.size(); ++i) REQUIRE(out.data()[i] == im.data()[i]);
  }
  SECTION("constant image is a fixed point of the averaging fill") {
    img::Image c(16, 16, 0.42f);
    img::Mask m(16, 16);
    for (int r = 5; r < 10; ++r)
      for (int cc = 5; cc < 10; ++cc) m.at(r, cc) = 1.0f;
    img::Image out = background_reference(c, m, fill);
    for (std::size_t i = 0; i < c.size(); ++i)
      REQUIRE(out.data()[i] == Catch::Approx(0.42).margin(1e-6));
  }
  SECTION("single masked pixel with equal neighbors converges to that value") {
    img::Image x(9, 9, 0.6f);
    x.set_pixel(4, 4, 0.0f, 0.0f, 0.0f);
    img::Mask m(9, 9);
    m.at(4, 4) = 1.0f;
    img::Image out = background_reference(x, m, fill);
    for (int ch = 0; ch < 3; ++ch) REQUIRE(out.at(4, 4, ch) == Catch::Approx(0.6).margin(1e-4));
  }
  SECTION("unmasked pixels are restored bit-exactly even for a hostile client") {
    struct Scrambler : InpaintClient {
      img::Image fill(const img::Image& image, const img::Mask&) override {
        img::Image out(image.height(), image.width(), 1.0f);
        return out;
      }
      std::string name() const override { return "scrambler"; }
    } scrambler;
    img::Mask m(16, 16);
    m.at(3, 3) = 1.0f;
    std::vector<std::string> prov;
    img::Image out = background_reference(im, m, scrambler, &prov);
    REQUIRE(prov == std::vector<std::string>{"scrambler"});
    for (int r = 0; r < 16; ++r)
      for (int c = 0; c < 16; ++c) {
        if (r == 3 && c == 3) continue;
        for (int ch = 0; ch < 3; ++ch) REQUIRE(out.at(r, c, ch) == im.at(r, c, ch));
      }
    REQUIRE(out.at(3, 3, 0) == 1.0f);
  }
}

TEST_CASE("subprocess inpaint client round trip") {
  Rng rng = Rng::seeded(23);
  img::Image im = random_image(16, rng);
  img::Mask m(16, 16);
  for (int r = 6; r < 10; ++r)
    for (int c = 6; c < 10; ++c) m.at(r, c) = 1.0f;

  SubprocessInpaintClient client(HSWAP_INPAINT_STUB_PATH);
  img::Image via_proc = background_reference(im, m, client);
  NeighborhoodFillClient local;
  img::Image direct = background_reference(im, m, local);
  // the wire round-trips through 8-bit PNG; compare within quantization
  for (std::size_t i = 0; i < im.size(); ++i)
    REQUIRE(std::abs(via_proc.data()[i] - direct.data()[i]) <= 2.5f / 255.0f);

  SECTION("failing command raises a provider error") {
    SubprocessInpaintClient bad("false");
    REQUIRE_THROWS_AS(bad.fill(im, m), ProviderError);
  }
}

TEST_CASE("http inpaint client round trip") {
  httplib::Server server;
  NeighborhoodFillClient fill;
  server.Post("/inpaint", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    img::Image image = img::decode_image_png(io::base64_decode(body["image"].get<std::string>()));
    img::Mask mask = img::decode_mask_png(io::base64_decode(body["mask"].get<std::string>()));
    nlohmann::json out;
    out["image"] = io::base64_encode(img::encode_image_png(fill.fill(image, mask)));
    res.set_content(out.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  Rng rng = Rng::seeded(29);
  img::Image im = random_image(16, rng);
  img::Mask m(16, 16);
  m.at(8, 8) = 1.0f;
  HttpInpaintClient client("127.0.0.1", port);
  img::Image out = background_reference(im, m, client);
  for (int ch = 0; ch < 3; ++ch) REQUIRE(out.at(8, 8, ch) >= 0.0f);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c)
      if (r != 8 || c != 8)
        for (int ch = 0; ch < 3; ++ch) REQUIRE(out.at(r, c, ch) == im.at(r, c, ch));

  server.stop();
  th.join();
}

TEST_CASE("bounded client serializes serial-only clients") {
  auto inner = std::make_shared<NeighborhoodFillClient>();
  BoundedInpaintClient bounded(inner, 2);
  img::Image im(8, 8, 0.3f);
  img::Mask m(8, 8);
  m.at(4, 4) = 1.0f;
  std::vector<std::thread> workers;
  std::atomic<int> ok{0};
  for (int i = 0; i < 4; ++i)
    workers.emplace_back([&] {
      img::Image out = bounded.fill(im, m);
      if (out.height() == 8) ++ok;
    });
  for (auto& w : workers) w.join();
  REQUIRE(ok == 4);
}

TEST_CASE("refine_hair is the exact convex combination") {
  Rng rng = Rng::seeded(31);
  img::Image a = random_image(12, rng);
  img::Image e = random_image(12, rng);

  img::Mask ones(12, 12, 1.0f);
  img::Image r1 = refine_hair(a, e, ones);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(r1.data()[i] == a.data()[i]);

  img::Mask zeros(12, 12);
  img::Image r0 = refine_hair(a, e, zeros);
  for (std::size_t i = 0; i < e.size(); ++i) REQUIRE(r0.data()[i] == e.data()[i]);

  img::Mask half = img::Mask::soft(12, 12);
  for (std::size_t i = 0; i < half.size(); ++i) half.data()[i] = 0.5f;
  img::Image rh = refine_hair(a, e, half);
  for (std::size_t i = 0; i < a.size(); ++i)
    REQUIRE(rh.data()[i] == 0.5f * a.data()[i] + 0.5f * e.data()[i]);

  img::Mask soft = img::Mask::soft(12, 12);
  for (std::size_t i = 0; i < soft.size(); ++i) soft.data()[i] = static_cast<float>(rng.uniform());
  img::Image rs = refine_hair(a, e, soft);
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < 12; ++c)
      for (int ch = 0; ch < 3; ++ch)
        REQUIRE(rs.at(r, c, ch) ==
                soft.at(r, c) * a.at(r, c, ch) + (1.0f - soft.at(r, c)) * e.at(r, c, ch));
}

TEST_CASE("excess hair mask cases") {
  const int n = 16;
  SECTION("identical coverage gives an empty mask") {
    seg::SegMap s(n, n, seg::kHair);
    REQUIRE(excess_hair_mask(s, s).area() == 0);
  }
  SECTION("target hair outside the reenacted head is selected") {
    seg::SegMap st(n, n, seg::kBackground);
    seg::SegMap sa(n, n, seg::kBackground);
    for (int c = 0; c < n; ++c) st.at(2, c) = seg::kHair;  // long hair row
    for (int c = 4; c < 8; ++c) sa.at(2, c) = seg::kSkin;  // head covers part of it
    img::Mask m = excess_hair_mask(st, sa);
    REQUIRE(m.area() == n - 4);
    REQUIRE(m.at(2, 0) == 1.0f);
    REQUIRE(m.at(2, 5) == 0.0f);
  }
  SECTION("no target hair gives an empty mask") {
    seg::SegMap st(n, n, seg::kSkin);
    seg::SegMap sa(n, n, seg::kBackground);
    REQUIRE(excess_hair_mask(st, sa).area() == 0);
  }
}

TEST_CASE("postprocess identity cases") {
  Rng rng = Rng::seeded(37);
  img::Image im = random_image(12, rng);
  NeighborhoodFillClient fill;
  img::Mask empty(12, 12);
  img::Image a = postprocess(im, empty, fill, true);
  for (std::size_t i = 0; i < im.size(); ++i) REQUIRE(a.data()[i] == im.data()[i]);

  img::Mask m(12, 12);
  m.at(5, 5) = 1.0f;
  struct Exploder : InpaintClient {
    img::Image fill(const img::Image&, const img::Mask&) override {
      throw ProviderError("must not be called");
    }
    std::string name() const override { return "exploder"; }
  } exploder;
  img::Image b = postprocess(im, m, exploder, /*enabled=*/false);
  for (std::size_t i = 0; i < im.size(); ++i) REQUIRE(b.data()[i] == im.data()[i]);

  img::Image c = postprocess(im, m, fill, true);
  for (int r = 0; r < 12; ++r)
    for (int cc = 0; cc < 12; ++cc)
      if (r != 5 || cc != 5)
        for (int ch = 0; ch < 3; ++ch) REQUIRE(c.at(r, cc, ch) == im.at(r, cc, ch));
}

TEST_CASE("blender unet contract") {
  Rng rng = Rng::seeded(41);
  BlenderUNet<float> unet(rng, 16);

  SECTION("first layer asserts 14 input channels") {
    auto x13 = nn::Var<float>::constant(Tensor<float>::zeros({1, 13, 16, 16}));
    REQUIRE_THROWS_AS(unet(x13), std::invalid_argument);
  }
  SECTION("missing operand is a construction error") {
    BlendInputs<float> in;
    in.head_reference = nn::Var<float>::constant(Tensor<float>::zeros({1, 3, 16, 16}));
    REQUIRE_THROWS_AS(pack_blend_inputs(in), std::invalid_argument);
  }
  SECTION("output is a [0,1] image at input resolution, deterministic") {
    img::Image im(16, 16, 0.5f);
    img::Mask mk(16, 16, 1.0f);
    auto inputs = blend_inputs_from_images<float>(im, im, mk, im, mk, im);
    auto packed = pack_blend_inputs(inputs);
    REQUIRE(packed.val().dim(1) == 14);
    auto y1 = unet(packed);
    auto y2 = unet(packed);
    REQUIRE(y1.val().dim(1) == 3);
    REQUIRE(y1.val().dim(2) == 16);
    for (std::int64_t i = 0; i < y1.val().numel(); ++i) {
      REQUIRE(y1.val()[i] >= 0.0f);
      REQUIRE(y1.val()[i] <= 1.0f);
      REQUIRE(y1.val()[i] == y2.val()[i]);
    }
  }
}
