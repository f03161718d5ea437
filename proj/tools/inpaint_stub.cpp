// Reference implementation of the stdio inpainting protocol: reads one
// framed request from stdin, fills the masked region with the iterative
// neighborhood fill, writes one framed response to stdout. Real inpainting
// models can follow the same contract.

#include <unistd.h>

#include <cstring>
#include <vector>

#include "hswap/blender/inpaint.hpp"

using namespace hswap;

int main() {
  std::vector<std::uint8_t> input;
  std::uint8_t buf[4096];
  ssize_t n;
  while ((n = read(STDIN_FILENO, buf, sizeof(buf))) > 0) input.insert(input.end(), buf, buf + n);

  if (input.size() < 16 || std::memcmp(input.data(), "HSIP", 4) != 0) return 2;
  const std::uint32_t version = blender::wire::get_u32(input.data() + 4);
  if (version != 1) return 2;
  const std::uint32_t img_len = blender::wire::get_u32(input.data() + 8);
  const std::uint32_t mask_len = blender::wire::get_u32(input.data() + 12);
  if (input.size() < 16 + static_cast<std::size_t>(img_len) + mask_len) return 2;

  try {
    std::vector<std::uint8_t> img_png(input.begin() + 16, input.begin() + 16 + img_len);
    std::vector<std::uint8_t> mask_png(input.begin() + 16 + img_len,
                                       input.begin() + 16 + img_len + mask_len);
    img::Image image = img::decode_image_png(img_png);
    img::Mask mask = img::decode_mask_png(mask_png);
    blender::NeighborhoodFillClient fill;
    img::Image out = fill.fill(image, mask);
    const auto response = blender::wire::encode_response(out);
    std::size_t written = 0;
    while (written < response.size()) {
      const ssize_t w = write(STDOUT_FILENO, response.data() + written, response.size() - written);
      if (w <= 0) return 3;
      written += static_cast<std::size_t>(w);
    }
  } catch (const std::exception&) {
    return 2;
  }
  return 0;
}
