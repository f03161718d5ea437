#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "hswap/core/error.hpp"

namespace hswap {

// Dense row-major tensor of up to 4 dimensions. Plain value type: copies
// copy the buffer.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::int64_t> shape, T fill = T(0))
      : shape_(std::move(shape)), data_(checked_numel(shape_), fill) {}

  static Tensor zeros(std::vector<std::int64_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<std::int64_t> shape, T v) { return Tensor(std::move(shape), v); }
  static Tensor scalar(T v) { return Tensor({1}, v); }

  static Tensor from(std::vector<std::int64_t> shape, std::vector<T> data) {
    Tensor t;
    t.shape_ = std::move(shape);
    check_arg(checked_numel(t.shape_) == static_cast<std::int64_t>(data.size()),
              "tensor data size does not match shape");
    t.data_ = std::move(data);
    return t;
  }

  bool defined() const { return !shape_.empty(); }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
  int ndim() const { return static_cast<int>(shape_.size()); }
  std::int64_t dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  const std::vector<std::int64_t>& shape() const { return shape_; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  T& at(std::int64_t i, std::int64_t j) { return data_[static_cast<std::size_t>(i * shape_[1] + j)]; }
  const T& at(std::int64_t i, std::int64_t j) const {
    return data_[static_cast<std::size_t>(i * shape_[1] + j)];
  }
  T& at(std::int64_t i, std::int64_t j, std::int64_t k) {
    return data_[static_cast<std::size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }
  const T& at(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return data_[static_cast<std::size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }
  T& at(std::int64_t i, std::int64_t j, std::int64_t k, std::int64_t l) {
    return data_[static_cast<std::size_t>(((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }
  const T& at(std::int64_t i, std::int64_t j, std::int64_t k, std::int64_t l) const {
    return data_[static_cast<std::size_t>(((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }

  Tensor reshaped(std::vector<std::int64_t> shape) const {
    check_arg(checked_numel(shape) == numel(), "reshape numel mismatch");
    Tensor t = *this;
    t.shape_ = std::move(shape);
    return t;
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    for (const T& v : data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

 private:
  static std::int64_t checked_numel(const std::vector<std::int64_t>& shape) {
    check_arg(!shape.empty(), "tensor needs at least one dimension");
    std::int64_t n = 1;
    for (auto d : shape) {
      check_arg(d > 0, "tensor dimensions must be positive");
      n *= d;
    }
    return n;
  }

  std::vector<std::int64_t> shape_;
  std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace hswap
