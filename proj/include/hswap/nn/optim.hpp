#pragma once

#include <cmath>
#include <vector>

#include "hswap/nn/var.hpp"

namespace hswap::nn {

// Adam with the GAN-style default beta1 = 0.
template <typename T>
class Adam {
 public:
  Adam() = default;

  Adam(std::vector<Var<T>> params, T lr, T beta1 = T(0), T beta2 = T(0.999), T eps = T(1e-8))
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
      m_.push_back(Tensor<T>::zeros(p.val().shape()));
      v_.push_back(Tensor<T>::zeros(p.val().shape()));
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  // Global-norm gradient clipping across the whole parameter group.
  // Returns the pre-clip norm.
  double clip_global_norm(double max_norm) {
    double sq = 0.0;
    for (auto& p : params_) {
      if (!p.has_grad()) continue;
      const Tensor<T>& g = p.grad();
      for (std::int64_t i = 0; i < g.numel(); ++i)
        sq += static_cast<double>(g[i]) * static_cast<double>(g[i]);
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
      const T scale = static_cast<T>(max_norm / norm);
      for (auto& p : params_) {
        if (!p.has_grad()) continue;
        Tensor<T>& g = p.grad();
        for (std::int64_t i = 0; i < g.numel(); ++i) g[i] *= scale;
      }
    }
    return norm;
  }

  void step() {
    ++t_;
    const T bc1 = T(1) - std::pow(beta1_, static_cast<T>(t_));
    const T bc2 = T(1) - std::pow(beta2_, static_cast<T>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      if (!params_[k].has_grad()) continue;
      Tensor<T>& g = params_[k].grad();
      Tensor<T>& m = m_[k];
      Tensor<T>& v = v_[k];
      Tensor<T>& w = params_[k].val();
      for (std::int64_t i = 0; i < g.numel(); ++i) {
        m[i] = beta1_ * m[i] + (T(1) - beta1_) * g[i];
        v[i] = beta2_ * v[i] + (T(1) - beta2_) * g[i] * g[i];
        const T mhat = m[i] / bc1;
        const T vhat = v[i] / bc2;
        w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

  std::int64_t iterations() const { return t_; }
  void set_iterations(std::int64_t t) { t_ = t; }
  std::vector<Tensor<T>>& moments1() { return m_; }
  std::vector<Tensor<T>>& moments2() { return v_; }
  const std::vector<Var<T>>& params() const { return params_; }

 private:
  std::vector<Var<T>> params_;
  std::vector<Tensor<T>> m_, v_;
  T lr_ = T(1e-4), beta1_ = T(0), beta2_ = T(0.999), eps_ = T(1e-8);
  std::int64_t t_ = 0;
};

}  // namespace hswap::nn
