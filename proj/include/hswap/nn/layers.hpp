#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hswap/core/rng.hpp"
#include "hswap/nn/ops.hpp"

namespace hswap::nn {

// Named views over a module's parameters and persistent buffers, used by the
// optimizer and the checkpoint writer.
template <typename T>
struct ParamRegistry {
  std::vector<std::pair<std::string, Var<T>*>> params;
  std::vector<std::pair<std::string, Tensor<T>*>> buffers;

  void add_param(const std::string& name, Var<T>* v) { params.emplace_back(name, v); }
  void add_buffer(const std::string& name, Tensor<T>* t) { buffers.emplace_back(name, t); }

  std::vector<Var<T>> param_vars() const {
    std::vector<Var<T>> out;
    out.reserve(params.size());
    for (const auto& [name, v] : params) out.push_back(*v);
    return out;
  }
};

template <typename T>
Tensor<T> kaiming_normal(std::vector<std::int64_t> shape, std::int64_t fan_in, Rng& rng,
                         double negative_slope = 0.2) {
  const double gain = std::sqrt(2.0 / (1.0 + negative_slope * negative_slope));
  const double std_dev = gain / std::sqrt(static_cast<double>(fan_in));
  Tensor<T> t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i)
    t[i] = static_cast<T>(rng.normal(0.0, std_dev));
  return t;
}

namespace detail {

template <typename T>
void normalize_inplace(Tensor<T>& v) {
  T s = T(0);
  for (std::int64_t i = 0; i < v.numel(); ++i) s += v[i] * v[i];
  const T n = std::sqrt(s) + T(1e-12);
  for (std::int64_t i = 0; i < v.numel(); ++i) v[i] /= n;
}

// One power iteration on W viewed as (rows, cols).
template <typename T>
void power_iterate(const Tensor<T>& w, Tensor<T>& u, Tensor<T>& v) {
  const std::int64_t rows = w.dim(0);
  const std::int64_t cols = w.numel() / rows;
  // v = normalize(W^T u)
  for (std::int64_t j = 0; j < cols; ++j) v[j] = T(0);
  for (std::int64_t i = 0; i < rows; ++i) {
    const T* wr = w.data() + i * cols;
    const T ui = u[i];
    for (std::int64_t j = 0; j < cols; ++j) v[j] += wr[j] * ui;
  }
  normalize_inplace(v);
  // u = normalize(W v)
  for (std::int64_t i = 0; i < rows; ++i) {
    const T* wr = w.data() + i * cols;
    T s = T(0);
    for (std::int64_t j = 0; j < cols; ++j) s += wr[j] * v[j];
    u[i] = s;
  }
  normalize_inplace(u);
}

}  // namespace detail

template <typename T>
class Conv2d {
 public:
  Conv2d() = default;

  Conv2d(std::int64_t in_ch, std::int64_t out_ch, std::int64_t kernel, std::int64_t stride,
         Rng& rng, bool spectral_norm = false)
      : stride_(stride), sn_(spectral_norm) {
    const std::int64_t fan_in = in_ch * kernel * kernel;
    w_ = Var<T>::leaf(kaiming_normal<T>({out_ch, in_ch, kernel, kernel}, fan_in, rng));
    b_ = Var<T>::leaf(Tensor<T>::zeros({out_ch}));
    if (sn_) {
      u_ = Tensor<T>({out_ch});
      v_ = Tensor<T>({fan_in});
      for (std::int64_t i = 0; i < u_.numel(); ++i) u_[i] = static_cast<T>(rng.normal());
      detail::normalize_inplace(u_);
      detail::power_iterate(w_.val(), u_, v_);
    }
  }

  Var<T> operator()(const Var<T>& x) {
    Var<T> w = w_;
    if (sn_) {
      if (sn_update_) detail::power_iterate(w_.val(), u_, v_);
      w = spectral_scale(w_, u_, v_);
    }
    return conv2d(x, w, b_, stride_);
  }

  // Power-iteration buffers advance only while training so that inference
  // forwards are repeatable.
  void set_sn_update(bool enabled) { sn_update_ = enabled; }

  // Forward with parameters treated as constants; gradients reach the input
  // only. Used where a network serves as a frozen loss provider.
  Var<T> forward_frozen(const Var<T>& x) const {
    return conv2d(x, Var<T>::constant(w_.val()), Var<T>::constant(b_.val()), stride_);
  }

  // Current effective weight (after spectral normalization if enabled).
  Tensor<T> effective_weight(int extra_power_iters = 0) {
    if (!sn_) return w_.val();
    for (int i = 0; i < extra_power_iters; ++i) detail::power_iterate(w_.val(), u_, v_);
    Var<T> w = spectral_scale(Var<T>::constant(w_.val()), u_, v_);
    return w.val();
  }

  void register_into(ParamRegistry<T>& reg, const std::string& prefix) {
    reg.add_param(prefix + ".w", &w_);
    reg.add_param(prefix + ".b", &b_);
    if (sn_) {
      reg.add_buffer(prefix + ".sn_u", &u_);
      reg.add_buffer(prefix + ".sn_v", &v_);
    }
  }

  std::int64_t out_channels() const { return w_.val().dim(0); }

 private:
  Var<T> w_, b_;
  Tensor<T> u_, v_;
  std::int64_t stride_ = 1;
  bool sn_ = false;
  bool sn_update_ = false;
};

template <typename T>
class Linear {
 public:
  Linear() = default;

  Linear(std::int64_t in_dim, std::int64_t out_dim, Rng& rng, bool spectral_norm = false)
      : sn_(spectral_norm) {
    w_ = Var<T>::leaf(kaiming_normal<T>({out_dim, in_dim}, in_dim, rng));
    b_ = Var<T>::leaf(Tensor<T>::zeros({out_dim}));
    if (sn_) {
      u_ = Tensor<T>({out_dim});
      v_ = Tensor<T>({in_dim});
      for (std::int64_t i = 0; i < u_.numel(); ++i) u_[i] = static_cast<T>(rng.normal());
      detail::normalize_inplace(u_);
      detail::power_iterate(w_.val(), u_, v_);
    }
  }

  Var<T> operator()(const Var<T>& x) {
    Var<T> w = w_;
    if (sn_) {
      if (sn_update_) detail::power_iterate(w_.val(), u_, v_);
      w = spectral_scale(w_, u_, v_);
    }
    return linear(x, w, b_);
  }

  void set_sn_update(bool enabled) { sn_update_ = enabled; }

  Var<T> forward_frozen(const Var<T>& x) const {
    return linear(x, Var<T>::constant(w_.val()), Var<T>::constant(b_.val()));
  }

  Tensor<T> effective_weight(int extra_power_iters = 0) {
    if (!sn_) return w_.val();
    for (int i = 0; i < extra_power_iters; ++i) detail::power_iterate(w_.val(), u_, v_);
    Var<T> w = spectral_scale(Var<T>::constant(w_.val()), u_, v_);
    return w.val();
  }

  void register_into(ParamRegistry<T>& reg, const std::string& prefix) {
    reg.add_param(prefix + ".w", &w_);
    reg.add_param(prefix + ".b", &b_);
    if (sn_) {
      reg.add_buffer(prefix + ".sn_u", &u_);
      reg.add_buffer(prefix + ".sn_v", &v_);
    }
  }

 private:
  Var<T> w_, b_;
  Tensor<T> u_, v_;
  bool sn_ = false;
  bool sn_update_ = false;
};

// AdaIN conditioning: instance-normalize, then scale/shift with per-channel
// parameters projected from the conditioning vector. Scale is (1 + ds) so an
// untrained projection starts near identity.
template <typename T>
class AdaIn {
 public:
  AdaIn() = default;

  AdaIn(std::int64_t cond_dim, std::int64_t channels, Rng& rng)
      : proj_scale_(cond_dim, channels, rng), proj_bias_(cond_dim, channels, rng) {}

  Var<T> operator()(const Var<T>& x, const Var<T>& cond) {
    Var<T> xhat = instance_norm(x);
    Var<T> s = add_scalar(proj_scale_(cond), T(1));
    Var<T> b = proj_bias_(cond);
    return channel_affine(xhat, s, b);
  }

  void register_into(ParamRegistry<T>& reg, const std::string& prefix) {
    proj_scale_.register_into(reg, prefix + ".scale");
    proj_bias_.register_into(reg, prefix + ".bias");
  }

 private:
  Linear<T> proj_scale_, proj_bias_;
};

template <typename T>
inline void check_finite(const Var<T>& x, const std::string& where) {
  if (!x.val().all_finite())
    throw NumericError("non-finite activations in " + where);
}

}  // namespace hswap::nn
