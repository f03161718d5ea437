#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <condition_variable>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "hswap/image/png_io.hpp"

namespace hswap::blender {

// Fills masked pixels of an image. Real models (LaMa-style inpainters,
// diffusion models) attach behind this interface over subprocess stdio or
// HTTP; the default is a dependency-free iterative fill.
class InpaintClient {
 public:
  virtual ~InpaintClient() = default;
  virtual img::Image fill(const img::Image& image, const img::Mask& mask) = 0;
  virtual std::string name() const = 0;
  // Clients that cannot tolerate concurrent calls declare it here.
  virtual bool concurrent_safe() const { return true; }
};

// Wrapper around any client: unmasked pixels are restored bit-exactly from
// the input (never trusted to the client), output is clamped to [0,1].
// Appends the serving client's name to the provenance log when given.
inline img::Image background_reference(const img::Image& image, const img::Mask& mask,
                                       InpaintClient& client,
                                       std::vector<std::string>* provenance = nullptr) {
  check_arg(image.height() == mask.height() && image.width() == mask.width(),
            "background_reference: shape mismatch");
  if (provenance) provenance->push_back(client.name());
  if (mask.area() == 0) return image;
  img::Image out = client.fill(image, mask);
  check_arg(out.height() == image.height() && out.width() == image.width(),
            "background_reference: client returned wrong shape");
  out.clamp01();
  for (int r = 0; r < image.height(); ++r)
    for (int c = 0; c < image.width(); ++c)
      if (mask.at(r, c) == 0.0f)
        for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = image.at(r, c, ch);
  return out;
}

// Jacobi relaxation: masked pixels repeatedly replaced by the mean of their
// in-bounds 4-neighborhood until convergence. Zero external weights, fully
// deterministic.
class NeighborhoodFillClient : public InpaintClient {
 public:
  explicit NeighborhoodFillClient(double tolerance = 1e-4, int max_iters = 2000)
      : tol_(tolerance), max_iters_(max_iters) {}

  img::Image fill(const img::Image& image, const img::Mask& mask) override {
    img::Image cur = image;
    // initialize holes with the mean of the visible pixels
    double mean[3] = {0.5, 0.5, 0.5};
    std::int64_t visible = 0;
    for (int r = 0; r < image.height(); ++r)
      for (int c = 0; c < image.width(); ++c)
        if (mask.at(r, c) == 0.0f) ++visible;
    if (visible > 0) {
      double acc[3] = {0, 0, 0};
      for (int r = 0; r < image.height(); ++r)
        for (int c = 0; c < image.width(); ++c)
          if (mask.at(r, c) == 0.0f)
            for (int ch = 0; ch < 3; ++ch) acc[ch] += image.at(r, c, ch);
      for (int ch = 0; ch < 3; ++ch) mean[ch] = acc[ch] / static_cast<double>(visible);
    }
    std::vector<std::pair<int, int>> holes;
    for (int r = 0; r < image.height(); ++r)
      for (int c = 0; c < image.width(); ++c)
        if (mask.at(r, c) != 0.0f) {
          holes.emplace_back(r, c);
          for (int ch = 0; ch < 3; ++ch) cur.at(r, c, ch) = static_cast<float>(mean[ch]);
        }

    img::Image next = cur;
    for (int it = 0; it < max_iters_; ++it) {
      double max_delta = 0.0;
      for (const auto& [r, c] : holes) {
        for (int ch = 0; ch < 3; ++ch) {
          double acc = 0.0;
          int count = 0;
          if (r > 0) { acc += cur.at(r - 1, c, ch); ++count; }
          if (r + 1 < cur.height()) { acc += cur.at(r + 1, c, ch); ++count; }
          if (c > 0) { acc += cur.at(r, c - 1, ch); ++count; }
          if (c + 1 < cur.width()) { acc += cur.at(r, c + 1, ch); ++count; }
          const float v = count ? static_cast<float>(acc / count) : cur.at(r, c, ch);
          max_delta = std::max(max_delta, std::abs(double(v) - cur.at(r, c, ch)));
          next.at(r, c, ch) = v;
        }
      }
      std::swap(cur, next);
      if (max_delta < tol_) break;
    }
    return cur;
  }

  std::string name() const override { return "neighborhood-fill"; }

 private:
  double tol_;
  int max_iters_;
};

// ---------------------------------------------------------------------------
// wire protocols
// ---------------------------------------------------------------------------

// Framed stdio protocol:
//   request:  "HSIP" u32 version=1 u32 image_len u32 mask_len <png> <png>
//   response: "HSIR" u32 status(0=ok) u32 image_len <png>
// All integers little-endian.
namespace wire {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::vector<std::uint8_t> encode_request(const img::Image& image, const img::Mask& mask) {
  auto img_png = img::encode_image_png(image);
  auto mask_png = img::encode_mask_png(mask);
  std::vector<std::uint8_t> out = {'H', 'S', 'I', 'P'};
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(img_png.size()));
  put_u32(out, static_cast<std::uint32_t>(mask_png.size()));
  out.insert(out.end(), img_png.begin(), img_png.end());
  out.insert(out.end(), mask_png.begin(), mask_png.end());
  return out;
}

inline std::vector<std::uint8_t> encode_response(const img::Image& image) {
  auto img_png = img::encode_image_png(image);
  std::vector<std::uint8_t> out = {'H', 'S', 'I', 'R'};
  put_u32(out, 0);
  put_u32(out, static_cast<std::uint32_t>(img_png.size()));
  out.insert(out.end(), img_png.begin(), img_png.end());
  return out;
}

}  // namespace wire

// Spawns `command` (via /bin/sh -c) per call, writes one framed request to
// its stdin and reads one framed response from its stdout. Serial-only.
class SubprocessInpaintClient : public InpaintClient {
 public:
  explicit SubprocessInpaintClient(std::string command) : command_(std::move(command)) {}

  img::Image fill(const img::Image& image, const img::Mask& mask) override {
    std::lock_guard<std::mutex> guard(mu_);
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
      throw ProviderError("inpaint subprocess: pipe failed");
    const pid_t pid = fork();
    if (pid < 0) throw ProviderError("inpaint subprocess: fork failed");
    if (pid == 0) {
      dup2(in_pipe[0], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      close(in_pipe[0]);
      close(in_pipe[1]);
      close(out_pipe[0]);
      close(out_pipe[1]);
      execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);

    const auto request = wire::encode_request(image, mask);
    std::size_t written = 0;
    while (written < request.size()) {
      const ssize_t n = write(in_pipe[1], request.data() + written, request.size() - written);
      if (n <= 0) break;
      written += static_cast<std::size_t>(n);
    }
    close(in_pipe[1]);

    std::vector<std::uint8_t> response;
    std::uint8_t buf[4096];
    ssize_t n;
    while ((n = read(out_pipe[0], buf, sizeof(buf))) > 0)
      response.insert(response.end(), buf, buf + n);
    close(out_pipe[0]);
    int status = 0;
    waitpid(pid, &status, 0);

    if (written < request.size()) throw ProviderError("inpaint subprocess: request write failed");
    if (response.size() < 12 || std::memcmp(response.data(), "HSIR", 4) != 0)
      throw ProviderError("inpaint subprocess: malformed response");
    if (wire::get_u32(response.data() + 4) != 0)
      throw ProviderError("inpaint subprocess: client reported failure");
    const std::uint32_t len = wire::get_u32(response.data() + 8);
    check_arg(response.size() >= 12 + len, "inpaint subprocess: truncated response");
    std::vector<std::uint8_t> png(response.begin() + 12, response.begin() + 12 + len);
    return img::decode_image_png(png);
  }

  std::string name() const override { return "subprocess:" + command_; }
  bool concurrent_safe() const override { return false; }

 private:
  std::string command_;
  std::mutex mu_;
};

// Limits the number of in-flight calls into a wrapped client (default 2) and
// serializes clients that declare themselves serial-only.
class BoundedInpaintClient : public InpaintClient {
 public:
  BoundedInpaintClient(std::shared_ptr<InpaintClient> inner, int max_in_flight = 2)
      : inner_(std::move(inner)),
        slots_(inner_->concurrent_safe() ? max_in_flight : 1) {}

  img::Image fill(const img::Image& image, const img::Mask& mask) override {
    {
      std::unique_lock<std::mutex> lock(mu_);
      cv_.wait(lock, [&] { return in_flight_ < slots_; });
      ++in_flight_;
    }
    try {
      img::Image out = inner_->fill(image, mask);
      release();
      return out;
    } catch (...) {
      release();
      throw;
    }
  }

  std::string name() const override { return inner_->name(); }

 private:
  void release() {
    std::lock_guard<std::mutex> lock(mu_);
    --in_flight_;
    cv_.notify_one();
  }

  std::shared_ptr<InpaintClient> inner_;
  int slots_;
  int in_flight_ = 0;
  std::mutex mu_;
  std::condition_variable cv_;
};

}  // namespace hswap::blender
