#pragma once

#include <Eigen/Core>

#include "hswap/core/tensor.hpp"

namespace hswap::nn {

template <typename T>
using EMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using EMap = Eigen::Map<EMat<T>>;
template <typename T>
using ECMap = Eigen::Map<const EMat<T>>;

// C = A(M,K) * B(K,N), optionally accumulating into C.
template <typename T>
inline void gemm(const T* a, const T* b, T* c, std::int64_t m, std::int64_t k, std::int64_t n,
                 bool accumulate = false, bool trans_a = false, bool trans_b = false) {
  ECMap<T> A(a, trans_a ? k : m, trans_a ? m : k);
  ECMap<T> B(b, trans_b ? n : k, trans_b ? k : n);
  EMap<T> C(c, m, n);
  if (!trans_a && !trans_b) {
    if (accumulate) C.noalias() += A * B;
    else C.noalias() = A * B;
  } else if (trans_a && !trans_b) {
    if (accumulate) C.noalias() += A.transpose() * B;
    else C.noalias() = A.transpose() * B;
  } else if (!trans_a && trans_b) {
    if (accumulate) C.noalias() += A * B.transpose();
    else C.noalias() = A * B.transpose();
  } else {
    if (accumulate) C.noalias() += A.transpose() * B.transpose();
    else C.noalias() = A.transpose() * B.transpose();
  }
}

}  // namespace hswap::nn
