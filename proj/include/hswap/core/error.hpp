#pragma once

#include <stdexcept>
#include <string>

namespace hswap {

// Configuration / CLI usage problems. CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// An external provider (segmenter, inpainting client, feature provider)
// failed or is unavailable. CLI exit code 3.
struct ProviderError : std::runtime_error {
  explicit ProviderError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values inside a network or optimizer. CLI exit code 4.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void check_arg(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace hswap
