#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hswap {

// Deterministic RNG. Distributions are implemented by hand on top of
// mt19937_64 so that the produced streams do not depend on the standard
// library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<std::int64_t>(gen_() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Independent sub-stream; used so per-item generation is order-free.
  Rng fork(std::uint64_t stream) const {
    return Rng(mix(seed_base_ ^ mix(stream + 0x9e3779b97f4a7c15ull)));
  }

  static Rng seeded(std::uint64_t seed) {
    Rng r(mix(seed));
    r.seed_base_ = seed;
    return r;
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 gen_;
  std::uint64_t seed_base_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hswap
