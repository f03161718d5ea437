#pragma once

// HTTP transport for the inpainting protocol:
//   POST <path>  body: {"image": <b64 png>, "mask": <b64 png>}
//   response:    {"image": <b64 png>}

#include "hswap/blender/inpaint.hpp"
#include "hswap/io/base64.hpp"
#include "httplib.h"
// httplib pulls in <resolv.h>, whose _res macro breaks Eigen's parameter
// names in any later include.
#ifdef _res
#undef _res
#endif
#include "nlohmann/json.hpp"

namespace hswap::blender {

class HttpInpaintClient : public InpaintClient {
 public:
  HttpInpaintClient(std::string host, int port, std::string path = "/inpaint")
      : host_(std::move(host)), port_(port), path_(std::move(path)) {}

  img::Image fill(const img::Image& image, const img::Mask& mask) override {
    nlohmann::json req;
    req["image"] = io::base64_encode(img::encode_image_png(image));
    req["mask"] = io::base64_encode(img::encode_mask_png(mask));
    httplib::Client cli(host_, port_);
    cli.set_read_timeout(60, 0);
    auto res = cli.Post(path_, req.dump(), "application/json");
    if (!res || res->status != 200)
      throw ProviderError("inpaint http: request to " + host_ + path_ + " failed");
    auto body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.contains("image"))
      throw ProviderError("inpaint http: malformed response body");
    return img::decode_image_png(io::base64_decode(body["image"].get<std::string>()));
  }

  std::string name() const override {
    return "http:" + host_ + ":" + std::to_string(port_) + path_;
  }

 private:
  std::string host_;
  int port_;
  std::string path_;
};

}  // namespace hswap::blender
