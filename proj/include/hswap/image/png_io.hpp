#pragma once

// Image/Mask <-> 8-bit PNG. Quantization happens only here, with
// round-half-to-even ties.

#include <cfenv>
#include <cmath>

#include "hswap/image/image.hpp"
#include "hswap/io/png.hpp"

namespace hswap::img {

inline std::uint8_t quantize8(float v) {
  const double x = std::min(1.0, std::max(0.0, static_cast<double>(v))) * 255.0;
  return static_cast<std::uint8_t>(std::nearbyint(x));  // ties to even
}

inline std::vector<std::uint8_t> encode_image_png(const Image& img) {
  io::RawPng raw;
  raw.height = img.height();
  raw.width = img.width();
  raw.channels = 3;
  raw.pixels.resize(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) raw.pixels[i] = quantize8(img.data()[i]);
  return io::encode_png(raw);
}

inline Image decode_image_png(const std::vector<std::uint8_t>& bytes) {
  io::RawPng raw = io::decode_png(bytes);
  Image out(raw.height, raw.width);
  if (raw.channels == 3) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out.data()[i] = static_cast<float>(raw.pixels[i]) / 255.0f;
  } else {
    for (int r = 0; r < raw.height; ++r)
      for (int c = 0; c < raw.width; ++c) {
        const float v = static_cast<float>(raw.pixels[static_cast<std::size_t>(r) * raw.width + c]) / 255.0f;
        out.set_pixel(r, c, v, v, v);
      }
  }
  return out;
}

// Masks are stored as single-channel PNG: 255 = 1, 0 = 0, intermediate
// values are soft weights / 255.
inline std::vector<std::uint8_t> encode_mask_png(const Mask& m) {
  io::RawPng raw;
  raw.height = m.height();
  raw.width = m.width();
  raw.channels = 1;
  raw.pixels.resize(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) raw.pixels[i] = quantize8(m.data()[i]);
  return io::encode_png(raw);
}

inline Mask decode_mask_png(const std::vector<std::uint8_t>& bytes) {
  io::RawPng raw = io::decode_png(bytes);
  check_arg(raw.channels == 1, "mask png must be single-channel");
  Mask out(raw.height, raw.width);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = static_cast<float>(raw.pixels[i]) / 255.0f;
  out.refresh_soft_flag();
  return out;
}

inline void save_image_png(const std::string& path, const Image& img) {
  io::write_file(path, encode_image_png(img));
}

inline Image load_image_png(const std::string& path) {
  return decode_image_png(io::read_file(path));
}

inline void save_mask_png(const std::string& path, const Mask& m) {
  io::write_file(path, encode_mask_png(m));
}

inline Mask load_mask_png(const std::string& path) {
  return decode_mask_png(io::read_file(path));
}

}  // namespace hswap::img
