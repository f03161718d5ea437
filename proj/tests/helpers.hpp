#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "hswap/core/rng.hpp"
#include "hswap/nn/var.hpp"

namespace testutil {

using hswap::Rng;
using hswap::Tensor;
using hswap::nn::Var;

// Central finite differences against the analytic gradient of a scalar graph.
// `loss_fn` must rebuild the graph from the current leaf values each call.
// Returns the maximum relative error over all coordinates of all leaves.
inline double max_grad_rel_error(const std::function<Var<double>()>& loss_fn,
                                 std::vector<Var<double>>& leaves, double step = 1e-4) {
  Var<double> loss = loss_fn();
  for (auto& l : leaves) l.zero_grad();
  hswap::nn::backward(loss);

  double worst = 0.0;
  for (auto& leaf : leaves) {
    Tensor<double>& value = leaf.val();
    const Tensor<double>& grad = leaf.grad();
    for (std::int64_t i = 0; i < value.numel(); ++i) {
      const double saved = value[i];
      value[i] = saved + step;
      const double fp = loss_fn().val()[0];
      value[i] = saved - step;
      const double fm = loss_fn().val()[0];
      value[i] = saved;
      const double numeric = (fp - fm) / (2.0 * step);
      const double analytic = grad[i];
      const double denom = std::max({1.0, std::abs(numeric), std::abs(analytic)});
      worst = std::max(worst, std::abs(numeric - analytic) / denom);
    }
  }
  return worst;
}

inline Tensor<double> random_tensor(std::vector<std::int64_t> shape, Rng& rng, double lo = -1.0,
                                    double hi = 1.0) {
  Tensor<double> t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

template <typename T>
inline Tensor<T> random_tensor_t(std::vector<std::int64_t> shape, Rng& rng, double lo = -1.0,
                                 double hi = 1.0) {
  Tensor<T> t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

}  // namespace testutil
