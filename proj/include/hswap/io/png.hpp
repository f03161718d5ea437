#pragma once

// Minimal PNG codec: 8-bit RGB and 8-bit grayscale, no interlacing.
// Writing always uses filter 0; reading handles all five standard filters.

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "hswap/core/error.hpp"

namespace hswap::io {

struct RawPng {
  int height = 0;
  int width = 0;
  int channels = 0;  // 1 = gray, 3 = rgb
  std::vector<std::uint8_t> pixels;  // row-major, interleaved
};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

inline void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                         const std::vector<std::uint8_t>& payload) {
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const std::uint32_t crc = static_cast<std::uint32_t>(
      ::crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start)));
  put_u32(out, crc);
}

inline std::vector<std::uint8_t> deflate_all(const std::vector<std::uint8_t>& raw) {
  uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> out(bound);
  if (::compress2(out.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw NumericError("png: deflate failed");
  out.resize(bound);
  return out;
}

inline std::vector<std::uint8_t> inflate_all(const std::vector<std::uint8_t>& zz,
                                             std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  uLongf out_len = static_cast<uLongf>(expected);
  int rc = ::uncompress(out.data(), &out_len, zz.data(), static_cast<uLong>(zz.size()));
  if (rc != Z_OK || out_len != expected) throw std::invalid_argument("png: corrupt IDAT stream");
  return out;
}

inline int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  return pb <= pc ? b : c;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_png(const RawPng& img) {
  check_arg(img.width > 0 && img.height > 0, "png: empty image");
  check_arg(img.channels == 1 || img.channels == 3, "png: channels must be 1 or 3");
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
  check_arg(img.pixels.size() == stride * static_cast<std::size_t>(img.height),
            "png: pixel buffer size mismatch");

  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * static_cast<std::size_t>(img.height));
  for (int r = 0; r < img.height; ++r) {
    raw.push_back(0);  // filter type 0
    const std::uint8_t* row = img.pixels.data() + stride * static_cast<std::size_t>(r);
    raw.insert(raw.end(), row, row + stride);
  }

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  detail::put_u32(ihdr, static_cast<std::uint32_t>(img.width));
  detail::put_u32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(8);                                       // bit depth
  ihdr.push_back(img.channels == 3 ? 2 : 0);               // color type
  ihdr.push_back(0);                                       // compression
  ihdr.push_back(0);                                       // filter method
  ihdr.push_back(0);                                       // no interlace
  detail::append_chunk(out, "IHDR", ihdr);
  detail::append_chunk(out, "IDAT", detail::deflate_all(raw));
  detail::append_chunk(out, "IEND", {});
  return out;
}

inline RawPng decode_png(const std::vector<std::uint8_t>& bytes) {
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  check_arg(bytes.size() > 8 && std::memcmp(bytes.data(), sig, 8) == 0, "png: bad signature");

  RawPng img;
  int bit_depth = 0, color_type = -1;
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t len = detail::get_u32(bytes.data() + pos);
    check_arg(pos + 12 + len <= bytes.size(), "png: truncated chunk");
    const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
    const std::uint8_t* payload = bytes.data() + pos + 8;
    if (std::memcmp(type, "IHDR", 4) == 0) {
      check_arg(len == 13, "png: bad IHDR");
      img.width = static_cast<int>(detail::get_u32(payload));
      img.height = static_cast<int>(detail::get_u32(payload + 4));
      bit_depth = payload[8];
      color_type = payload[9];
      check_arg(payload[12] == 0, "png: interlaced images unsupported");
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), payload, payload + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  check_arg(img.width > 0 && img.height > 0, "png: missing IHDR");
  check_arg(bit_depth == 8, "png: only 8-bit images supported");
  check_arg(color_type == 0 || color_type == 2, "png: only gray/RGB supported");
  img.channels = color_type == 2 ? 3 : 1;

  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
  const std::size_t raw_size = (stride + 1) * static_cast<std::size_t>(img.height);
  std::vector<std::uint8_t> raw = detail::inflate_all(idat, raw_size);

  img.pixels.assign(stride * static_cast<std::size_t>(img.height), 0);
  const int bpp = img.channels;
  std::vector<std::uint8_t> prev(stride, 0);
  for (int r = 0; r < img.height; ++r) {
    const std::uint8_t filter = raw[(stride + 1) * static_cast<std::size_t>(r)];
    const std::uint8_t* src = raw.data() + (stride + 1) * static_cast<std::size_t>(r) + 1;
    std::uint8_t* dst = img.pixels.data() + stride * static_cast<std::size_t>(r);
    for (std::size_t i = 0; i < stride; ++i) {
      const int a = i >= static_cast<std::size_t>(bpp) ? dst[i - bpp] : 0;
      const int b = prev[i];
      const int c = i >= static_cast<std::size_t>(bpp) ? prev[i - bpp] : 0;
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += detail::paeth(a, b, c); break;
        default: throw std::invalid_argument("png: unknown filter type");
      }
      dst[i] = static_cast<std::uint8_t>(v & 0xff);
    }
    std::memcpy(prev.data(), dst, stride);
  }
  return img;
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw ConfigError("write failed: " + path);
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open: " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f),
                                   std::istreambuf_iterator<char>());
}

}  // namespace hswap::io
