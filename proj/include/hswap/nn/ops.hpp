#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hswap/nn/blas.hpp"
#include "hswap/nn/var.hpp"

namespace hswap::nn {

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

template <typename T>
Var<T> vadd(const Var<T>& a, const Var<T>& b) {
  check_arg(a.val().same_shape(b.val()), "vadd: shape mismatch");
  Tensor<T> out = a.val();
  const T* bd = b.val().data();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] += bd[i];
  return make_var<T>(std::move(out), {a, b}, [](Node<T>& n) {
    for (int p = 0; p < 2; ++p)
      if (n.parents[p]->requires_grad) accumulate(*n.parents[p], n.grad);
  });
}

template <typename T>
Var<T> vsub(const Var<T>& a, const Var<T>& b) {
  check_arg(a.val().same_shape(b.val()), "vsub: shape mismatch");
  Tensor<T> out = a.val();
  const T* bd = b.val().data();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] -= bd[i];
  return make_var<T>(std::move(out), {a, b}, [](Node<T>& n) {
    if (n.parents[0]->requires_grad) accumulate(*n.parents[0], n.grad);
    if (n.parents[1]->requires_grad) {
      Tensor<T>& g = n.parents[1]->ensure_grad();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] -= n.grad[i];
    }
  });
}

template <typename T>
Var<T> vmul(const Var<T>& a, const Var<T>& b) {
  check_arg(a.val().same_shape(b.val()), "vmul: shape mismatch");
  Tensor<T> out = a.val();
  const T* bd = b.val().data();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] *= bd[i];
  return make_var<T>(std::move(out), {a, b}, [](Node<T>& n) {
    const Tensor<T>& av = n.parents[0]->value;
    const Tensor<T>& bv = n.parents[1]->value;
    if (n.parents[0]->requires_grad) {
      Tensor<T>& g = n.parents[0]->ensure_grad();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * bv[i];
    }
    if (n.parents[1]->requires_grad) {
      Tensor<T>& g = n.parents[1]->ensure_grad();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * av[i];
    }
  });
}

// Elementwise division; both operands may carry gradients.
template <typename T>
Var<T> vdiv(const Var<T>& a, const Var<T>& b) {
  check_arg(a.val().same_shape(b.val()), "vdiv: shape mismatch");
  Tensor<T> out = a.val();
  const T* bd = b.val().data();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] /= bd[i];
  return make_var<T>(std::move(out), {a, b}, [](Node<T>& n) {
    const Tensor<T>& av = n.parents[0]->value;
    const Tensor<T>& bv = n.parents[1]->value;
    if (n.parents[0]->requires_grad) {
      Tensor<T>& g = n.parents[0]->ensure_grad();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] / bv[i];
    }
    if (n.parents[1]->requires_grad) {
      Tensor<T>& g = n.parents[1]->ensure_grad();
      for (std::int64_t i = 0; i < g.numel(); ++i)
        g[i] -= n.grad[i] * av[i] / (bv[i] * bv[i]);
    }
  });
}

template <typename T>
Var<T> add_scalar(const Var<T>& a, T s) {
  Tensor<T> out = a.val();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] += s;
  return make_var<T>(std::move(out), {a},
                     [](Node<T>& n) { accumulate(*n.parents[0], n.grad); });
}

template <typename T>
Var<T> mul_scalar(const Var<T>& a, T s) {
  Tensor<T> out = a.val();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] *= s;
  return make_var<T>(std::move(out), {a}, [s](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * s;
  });
}

template <typename T>
Var<T> relu(const Var<T>& a) {
  Tensor<T> out = a.val();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = std::max(out[i], T(0));
  return make_var<T>(std::move(out), {a}, [](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    const Tensor<T>& x = n.parents[0]->value;
    for (std::int64_t i = 0; i < g.numel(); ++i)
      if (x[i] > T(0)) g[i] += n.grad[i];
  });
}

template <typename T>
Var<T> leaky_relu(const Var<T>& a, T alpha = T(0.2)) {
  Tensor<T> out = a.val();
  for (std::int64_t i = 0; i < out.numel(); ++i)
    out[i] = out[i] > T(0) ? out[i] : alpha * out[i];
  return make_var<T>(std::move(out), {a}, [alpha](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    const Tensor<T>& x = n.parents[0]->value;
    for (std::int64_t i = 0; i < g.numel(); ++i)
      g[i] += n.grad[i] * (x[i] > T(0) ? T(1) : alpha);
  });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
  Tensor<T> out = a.val();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = T(1) / (T(1) + std::exp(-out[i]));
  Tensor<T> y = out;
  return make_var<T>(std::move(out), {a}, [y](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * y[i] * (T(1) - y[i]);
  });
}

template <typename T>
Var<T> vtanh(const Var<T>& a) {
  Tensor<T> out = a.val();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
  Tensor<T> y = out;
  return make_var<T>(std::move(out), {a}, [y](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * (T(1) - y[i] * y[i]);
  });
}

template <typename T>
Var<T> vabs(const Var<T>& a) {
  Tensor<T> out = a.val();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = std::abs(out[i]);
  return make_var<T>(std::move(out), {a}, [](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    const Tensor<T>& x = n.parents[0]->value;
    for (std::int64_t i = 0; i < g.numel(); ++i)
      g[i] += n.grad[i] * (x[i] > T(0) ? T(1) : (x[i] < T(0) ? T(-1) : T(0)));
  });
}

template <typename T>
Var<T> vsquare(const Var<T>& a) {
  Tensor<T> out = a.val();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] *= out[i];
  return make_var<T>(std::move(out), {a}, [](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    const Tensor<T>& x = n.parents[0]->value;
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] * T(2) * x[i];
  });
}

template <typename T>
Var<T> vsqrt(const Var<T>& a) {
  Tensor<T> out = a.val();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = std::sqrt(out[i]);
  Tensor<T> y = out;
  return make_var<T>(std::move(out), {a}, [y](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i] / (T(2) * y[i]);
  });
}

// relu(x) for hinge losses already covered; clamp below at `lo` (used rarely).
template <typename T>
Var<T> clamp_min(const Var<T>& a, T lo) {
  Tensor<T> out = a.val();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = std::max(out[i], lo);
  return make_var<T>(std::move(out), {a}, [lo](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    const Tensor<T>& x = n.parents[0]->value;
    for (std::int64_t i = 0; i < g.numel(); ++i)
      if (x[i] > lo) g[i] += n.grad[i];
  });
}

// ---------------------------------------------------------------------------
// reductions / reshapes
// ---------------------------------------------------------------------------

template <typename T>
Var<T> vsum(const Var<T>& a) {
  T s = T(0);
  for (std::int64_t i = 0; i < a.val().numel(); ++i) s += a.val()[i];
  return make_var<T>(Tensor<T>::scalar(s), {a}, [](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    const T go = n.grad[0];
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += go;
  });
}

template <typename T>
Var<T> vmean(const Var<T>& a) {
  const std::int64_t m = a.val().numel();
  T s = T(0);
  for (std::int64_t i = 0; i < m; ++i) s += a.val()[i];
  s /= static_cast<T>(m);
  return make_var<T>(Tensor<T>::scalar(s), {a}, [m](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    const T go = n.grad[0] / static_cast<T>(m);
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += go;
  });
}

template <typename T>
Var<T> vdot(const Var<T>& a, const Var<T>& b) {
  check_arg(a.val().numel() == b.val().numel(), "vdot: size mismatch");
  T s = T(0);
  for (std::int64_t i = 0; i < a.val().numel(); ++i) s += a.val()[i] * b.val()[i];
  return make_var<T>(Tensor<T>::scalar(s), {a, b}, [](Node<T>& n) {
    const T go = n.grad[0];
    const Tensor<T>& av = n.parents[0]->value;
    const Tensor<T>& bv = n.parents[1]->value;
    if (n.parents[0]->requires_grad) {
      Tensor<T>& g = n.parents[0]->ensure_grad();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += go * bv[i];
    }
    if (n.parents[1]->requires_grad) {
      Tensor<T>& g = n.parents[1]->ensure_grad();
      for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += go * av[i];
    }
  });
}

template <typename T>
Var<T> reshape(const Var<T>& a, std::vector<std::int64_t> shape) {
  Tensor<T> out = a.val().reshaped(shape);
  return make_var<T>(std::move(out), {a}, [](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < g.numel(); ++i) g[i] += n.grad[i];
  });
}

// Weighted sum of scalar terms.
template <typename T>
Var<T> weighted_sum(const std::vector<std::pair<T, Var<T>>>& terms) {
  check_arg(!terms.empty(), "weighted_sum: no terms");
  T s = T(0);
  std::vector<Var<T>> parents;
  std::vector<T> weights;
  for (const auto& [w, v] : terms) {
    check_arg(v.defined() && v.val().numel() == 1, "weighted_sum: terms must be scalars");
    s += w * v.val()[0];
    parents.push_back(v);
    weights.push_back(w);
  }
  return make_var<T>(Tensor<T>::scalar(s), std::move(parents), [weights](Node<T>& n) {
    const T go = n.grad[0];
    for (std::size_t i = 0; i < weights.size(); ++i)
      if (n.parents[i]->requires_grad) n.parents[i]->ensure_grad()[0] += go * weights[i];
  });
}

// ---------------------------------------------------------------------------
// matrix ops
// ---------------------------------------------------------------------------

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  check_arg(a.val().ndim() == 2 && b.val().ndim() == 2, "matmul: expects 2-D");
  const std::int64_t m = a.val().dim(0), k = a.val().dim(1), n2 = b.val().dim(1);
  check_arg(b.val().dim(0) == k, "matmul: inner dims differ");
  Tensor<T> out({m, n2});
  gemm(a.val().data(), b.val().data(), out.data(), m, k, n2);
  return make_var<T>(std::move(out), {a, b}, [m, k, n2](Node<T>& n) {
    const Tensor<T>& av = n.parents[0]->value;
    const Tensor<T>& bv = n.parents[1]->value;
    if (n.parents[0]->requires_grad) {
      Tensor<T>& g = n.parents[0]->ensure_grad();
      gemm(n.grad.data(), bv.data(), g.data(), m, n2, k, true, false, true);
    }
    if (n.parents[1]->requires_grad) {
      Tensor<T>& g = n.parents[1]->ensure_grad();
      gemm(av.data(), n.grad.data(), g.data(), k, m, n2, true, true, false);
    }
  });
}

// y = A(P,C) * w(C), w constant.
template <typename T>
Var<T> matvec_const(const Var<T>& a, const Tensor<T>& w) {
  check_arg(a.val().ndim() == 2 && a.val().dim(1) == w.numel(), "matvec_const: shape mismatch");
  const std::int64_t p = a.val().dim(0), c = a.val().dim(1);
  Tensor<T> out({p});
  for (std::int64_t i = 0; i < p; ++i) {
    T s = T(0);
    for (std::int64_t j = 0; j < c; ++j) s += a.val().at(i, j) * w[j];
    out[i] = s;
  }
  Tensor<T> wc = w;
  return make_var<T>(std::move(out), {a}, [p, c, wc](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < p; ++i)
      for (std::int64_t j = 0; j < c; ++j) g.at(i, j) += n.grad[i] * wc[j];
  });
}

// Per-row dot product of two (N,D) matrices -> (N).
template <typename T>
Var<T> rowwise_dot(const Var<T>& a, const Var<T>& b) {
  check_arg(a.val().same_shape(b.val()) && a.val().ndim() == 2, "rowwise_dot: shape mismatch");
  const std::int64_t n = a.val().dim(0), d = a.val().dim(1);
  Tensor<T> out({n});
  for (std::int64_t i = 0; i < n; ++i) {
    T s = T(0);
    for (std::int64_t j = 0; j < d; ++j) s += a.val().at(i, j) * b.val().at(i, j);
    out[i] = s;
  }
  return make_var<T>(std::move(out), {a, b}, [n, d](Node<T>& nd_) {
    const Tensor<T>& av = nd_.parents[0]->value;
    const Tensor<T>& bv = nd_.parents[1]->value;
    if (nd_.parents[0]->requires_grad) {
      Tensor<T>& g = nd_.parents[0]->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < d; ++j) g.at(i, j) += nd_.grad[i] * bv.at(i, j);
    }
    if (nd_.parents[1]->requires_grad) {
      Tensor<T>& g = nd_.parents[1]->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < d; ++j) g.at(i, j) += nd_.grad[i] * av.at(i, j);
    }
  });
}

// Rows scaled to unit L2 norm; rows with norm <= eps are divided by eps.
template <typename T>
Var<T> rows_normalize(const Var<T>& a, T eps = T(1e-8)) {
  check_arg(a.val().ndim() == 2, "rows_normalize: expects 2-D");
  const std::int64_t p = a.val().dim(0), d = a.val().dim(1);
  Tensor<T> out({p, d});
  Tensor<T> norms({p});
  for (std::int64_t i = 0; i < p; ++i) {
    T s = T(0);
    for (std::int64_t j = 0; j < d; ++j) s += a.val().at(i, j) * a.val().at(i, j);
    const T nrm = std::sqrt(s);
    norms[i] = nrm;
    const T denom = std::max(nrm, eps);
    for (std::int64_t j = 0; j < d; ++j) out.at(i, j) = a.val().at(i, j) / denom;
  }
  Tensor<T> y = out;
  return make_var<T>(std::move(out), {a}, [p, d, eps, norms, y](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < p; ++i) {
      if (norms[i] > eps) {
        T dyy = T(0);
        for (std::int64_t j = 0; j < d; ++j) dyy += n.grad.at(i, j) * y.at(i, j);
        for (std::int64_t j = 0; j < d; ++j)
          g.at(i, j) += (n.grad.at(i, j) - y.at(i, j) * dyy) / norms[i];
      } else {
        for (std::int64_t j = 0; j < d; ++j) g.at(i, j) += n.grad.at(i, j) / eps;
      }
    }
  });
}

// Subtract the column mean from every row (channelwise centralization).
template <typename T>
Var<T> center_columns(const Var<T>& a) {
  check_arg(a.val().ndim() == 2, "center_columns: expects 2-D");
  const std::int64_t p = a.val().dim(0), d = a.val().dim(1);
  Tensor<T> mean({d});
  for (std::int64_t j = 0; j < d; ++j) {
    T s = T(0);
    for (std::int64_t i = 0; i < p; ++i) s += a.val().at(i, j);
    mean[j] = s / static_cast<T>(p);
  }
  Tensor<T> out({p, d});
  for (std::int64_t i = 0; i < p; ++i)
    for (std::int64_t j = 0; j < d; ++j) out.at(i, j) = a.val().at(i, j) - mean[j];
  return make_var<T>(std::move(out), {a}, [p, d](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    for (std::int64_t j = 0; j < d; ++j) {
      T s = T(0);
      for (std::int64_t i = 0; i < p; ++i) s += n.grad.at(i, j);
      const T m = s / static_cast<T>(p);
      for (std::int64_t i = 0; i < p; ++i) g.at(i, j) += n.grad.at(i, j) - m;
    }
  });
}

// Row softmax with temperature: y_ij = softmax_j(a_ij / tau).
template <typename T>
Var<T> softmax_rows(const Var<T>& a, T tau) {
  check_arg(tau > T(0), "softmax_rows: temperature must be positive");
  check_arg(a.val().ndim() == 2, "softmax_rows: expects 2-D");
  const std::int64_t p = a.val().dim(0), d = a.val().dim(1);
  Tensor<T> out({p, d});
  for (std::int64_t i = 0; i < p; ++i) {
    T mx = a.val().at(i, 0);
    for (std::int64_t j = 1; j < d; ++j) mx = std::max(mx, a.val().at(i, j));
    T z = T(0);
    for (std::int64_t j = 0; j < d; ++j) {
      const T e = std::exp((a.val().at(i, j) - mx) / tau);
      out.at(i, j) = e;
      z += e;
    }
    for (std::int64_t j = 0; j < d; ++j) out.at(i, j) /= z;
  }
  Tensor<T> y = out;
  return make_var<T>(std::move(out), {a}, [p, d, tau, y](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < p; ++i) {
      T dyy = T(0);
      for (std::int64_t j = 0; j < d; ++j) dyy += n.grad.at(i, j) * y.at(i, j);
      for (std::int64_t j = 0; j < d; ++j)
        g.at(i, j) += y.at(i, j) * (n.grad.at(i, j) - dyy) / tau;
    }
  });
}

// Transpose of a 2-D matrix.
template <typename T>
Var<T> transpose2d(const Var<T>& a) {
  check_arg(a.val().ndim() == 2, "transpose2d: expects 2-D");
  const std::int64_t p = a.val().dim(0), d = a.val().dim(1);
  Tensor<T> out({d, p});
  for (std::int64_t i = 0; i < p; ++i)
    for (std::int64_t j = 0; j < d; ++j) out.at(j, i) = a.val().at(i, j);
  return make_var<T>(std::move(out), {a}, [p, d](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < p; ++i)
      for (std::int64_t j = 0; j < d; ++j) g.at(i, j) += n.grad.at(j, i);
  });
}

// ---------------------------------------------------------------------------
// gather / broadcast
// ---------------------------------------------------------------------------

// Pull feature vectors at the given spatial indices (row-major r*W+c) of
// sample `n` from a (N,C,H,W) tensor -> (P,C).
template <typename T>
Var<T> gather_pixels(const Var<T>& x, std::int64_t sample,
                     const std::vector<std::int64_t>& idx) {
  check_arg(x.val().ndim() == 4, "gather_pixels: expects (N,C,H,W)");
  const std::int64_t c = x.val().dim(1), hw = x.val().dim(2) * x.val().dim(3);
  check_arg(sample >= 0 && sample < x.val().dim(0), "gather_pixels: bad sample");
  const std::int64_t p = static_cast<std::int64_t>(idx.size());
  check_arg(p > 0, "gather_pixels: empty index list");
  Tensor<T> out({p, c});
  const T* base = x.val().data() + sample * c * hw;
  for (std::int64_t i = 0; i < p; ++i)
    for (std::int64_t ch = 0; ch < c; ++ch) out.at(i, ch) = base[ch * hw + idx[static_cast<std::size_t>(i)]];
  std::vector<std::int64_t> idx_copy = idx;
  return make_var<T>(std::move(out), {x}, [sample, c, hw, idx_copy](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    T* base = g.data() + sample * c * hw;
    const std::int64_t p = static_cast<std::int64_t>(idx_copy.size());
    for (std::int64_t i = 0; i < p; ++i)
      for (std::int64_t ch = 0; ch < c; ++ch)
        base[ch * hw + idx_copy[static_cast<std::size_t>(i)]] += n.grad.at(i, ch);
  });
}

// Gather rows of a (R,C) matrix -> (P,C).
template <typename T>
Var<T> gather_rows(const Var<T>& x, const std::vector<std::int64_t>& idx) {
  check_arg(x.val().ndim() == 2, "gather_rows: expects 2-D");
  const std::int64_t c = x.val().dim(1);
  const std::int64_t p = static_cast<std::int64_t>(idx.size());
  check_arg(p > 0, "gather_rows: empty index list");
  Tensor<T> out({p, c});
  for (std::int64_t i = 0; i < p; ++i)
    for (std::int64_t j = 0; j < c; ++j) out.at(i, j) = x.val().at(idx[static_cast<std::size_t>(i)], j);
  std::vector<std::int64_t> idx_copy = idx;
  return make_var<T>(std::move(out), {x}, [c, idx_copy](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < idx_copy.size(); ++i)
      for (std::int64_t j = 0; j < c; ++j)
        g.at(idx_copy[i], j) += n.grad.at(static_cast<std::int64_t>(i), j);
  });
}

// Scatter per-pixel rows (P,C) into an otherwise-zero (1,C,H,W) image at the
// given row-major spatial indices.
template <typename T>
Var<T> scatter_rows_to_image(const Var<T>& rows, const std::vector<std::int64_t>& idx,
                             std::int64_t h, std::int64_t w) {
  check_arg(rows.val().ndim() == 2, "scatter_rows_to_image: expects (P,C)");
  const std::int64_t p = rows.val().dim(0), c = rows.val().dim(1);
  check_arg(static_cast<std::int64_t>(idx.size()) == p, "scatter_rows_to_image: index count mismatch");
  Tensor<T> out({1, c, h, w});
  const std::int64_t hw = h * w;
  for (std::int64_t i = 0; i < p; ++i)
    for (std::int64_t ch = 0; ch < c; ++ch)
      out[ch * hw + idx[static_cast<std::size_t>(i)]] += rows.val().at(i, ch);
  std::vector<std::int64_t> idx_copy = idx;
  return make_var<T>(std::move(out), {rows}, [c, hw, idx_copy](Node<T>& n) {
    Tensor<T>& g = n.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < idx_copy.size(); ++i)
      for (std::int64_t ch = 0; ch < c; ++ch)
        g.at(static_cast<std::int64_t>(i), ch) += n.grad[ch * hw + idx_copy[i]];
  });
}

// Repeat a (C,H,W) tensor across a batch -> (N,C,H,W).
template <typename T>
Var<T> broadcast_batch(const Var<T>& x, std::int64_t n) {
  check_arg(x.val().ndim() == 3, "broadcast_batch: expects (C,H,W)");
  const std::int64_t m = x.val().numel();
  Tensor<T> out({n, x.val().dim(0), x.val().dim(1), x.val().dim(2)});
  for (std::int64_t i = 0; i < n; ++i)
    std::copy(x.val().data(), x.val().data() + m, out.data() + i * m);
  return make_var<T>(std::move(out), {x}, [n, m](Node<T>& nd) {
    Tensor<T>& g = nd.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i) {
      const T* src = nd.grad.data() + i * m;
      for (std::int64_t j = 0; j < m; ++j) g[j] += src[j];
    }
  });
}

// Multiply each channel of (N,C,H,W) by a constant (H,W) map.
template <typename T>
Var<T> mul_hw_mask(const Var<T>& x, const Tensor<T>& mask) {
  check_arg(x.val().ndim() == 4, "mul_hw_mask: expects (N,C,H,W)");
  const std::int64_t n = x.val().dim(0), c = x.val().dim(1);
  const std::int64_t hw = x.val().dim(2) * x.val().dim(3);
  check_arg(mask.numel() == hw, "mul_hw_mask: mask shape mismatch");
  Tensor<T> out = x.val();
  for (std::int64_t i = 0; i < n * c; ++i) {
    T* row = out.data() + i * hw;
    for (std::int64_t j = 0; j < hw; ++j) row[j] *= mask[j];
  }
  Tensor<T> mc = mask;
  return make_var<T>(std::move(out), {x}, [n, c, hw, mc](Node<T>& nd) {
    Tensor<T>& g = nd.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < n * c; ++i) {
      T* grow = g.data() + i * hw;
      const T* orow = nd.grad.data() + i * hw;
      for (std::int64_t j = 0; j < hw; ++j) grow[j] += orow[j] * mc[j];
    }
  });
}

// Concatenate along the channel axis of (N,C_i,H,W) tensors.
template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& xs) {
  check_arg(!xs.empty(), "concat_channels: empty input");
  const std::int64_t n = xs[0].val().dim(0), h = xs[0].val().dim(2), w = xs[0].val().dim(3);
  std::int64_t ctot = 0;
  std::vector<std::int64_t> cs;
  for (const auto& x : xs) {
    check_arg(x.val().ndim() == 4 && x.val().dim(0) == n && x.val().dim(2) == h &&
                  x.val().dim(3) == w,
              "concat_channels: shape mismatch");
    cs.push_back(x.val().dim(1));
    ctot += x.val().dim(1);
  }
  Tensor<T> out({n, ctot, h, w});
  const std::int64_t hw = h * w;
  for (std::int64_t b = 0; b < n; ++b) {
    std::int64_t off = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const std::int64_t ck = cs[k];
      std::copy(xs[k].val().data() + b * ck * hw, xs[k].val().data() + (b + 1) * ck * hw,
                out.data() + (b * ctot + off) * hw);
      off += ck;
    }
  }
  return make_var<T>(std::move(out), xs, [n, cs, ctot, hw](Node<T>& nd) {
    for (std::int64_t b = 0; b < n; ++b) {
      std::int64_t off = 0;
      for (std::size_t k = 0; k < cs.size(); ++k) {
        const std::int64_t ck = cs[k];
        if (nd.parents[k]->requires_grad) {
          Tensor<T>& g = nd.parents[k]->ensure_grad();
          const T* src = nd.grad.data() + (b * ctot + off) * hw;
          T* dst = g.data() + b * ck * hw;
          for (std::int64_t j = 0; j < ck * hw; ++j) dst[j] += src[j];
        }
        off += ck;
      }
    }
  });
}

// ---------------------------------------------------------------------------
// neural-net structural ops
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void im2col(const T* x, std::int64_t ic, std::int64_t h, std::int64_t w, std::int64_t kh,
            std::int64_t kw, std::int64_t stride, std::int64_t pad, std::int64_t oh,
            std::int64_t ow, T* cols) {
  // cols: (ic*kh*kw, oh*ow) row-major
  for (std::int64_t c = 0; c < ic; ++c)
    for (std::int64_t ki = 0; ki < kh; ++ki)
      for (std::int64_t kj = 0; kj < kw; ++kj) {
        T* dst = cols + ((c * kh + ki) * kw + kj) * (oh * ow);
        for (std::int64_t oi = 0; oi < oh; ++oi) {
          const std::int64_t ri = oi * stride + ki - pad;
          for (std::int64_t oj = 0; oj < ow; ++oj) {
            const std::int64_t cj = oj * stride + kj - pad;
            dst[oi * ow + oj] = (ri >= 0 && ri < h && cj >= 0 && cj < w)
                                    ? x[(c * h + ri) * w + cj]
                                    : T(0);
          }
        }
      }
}

template <typename T>
void col2im_add(const T* cols, std::int64_t ic, std::int64_t h, std::int64_t w, std::int64_t kh,
                std::int64_t kw, std::int64_t stride, std::int64_t pad, std::int64_t oh,
                std::int64_t ow, T* x) {
  for (std::int64_t c = 0; c < ic; ++c)
    for (std::int64_t ki = 0; ki < kh; ++ki)
      for (std::int64_t kj = 0; kj < kw; ++kj) {
        const T* src = cols + ((c * kh + ki) * kw + kj) * (oh * ow);
        for (std::int64_t oi = 0; oi < oh; ++oi) {
          const std::int64_t ri = oi * stride + ki - pad;
          if (ri < 0 || ri >= h) continue;
          for (std::int64_t oj = 0; oj < ow; ++oj) {
            const std::int64_t cj = oj * stride + kj - pad;
            if (cj >= 0 && cj < w) x[(c * h + ri) * w + cj] += src[oi * ow + oj];
          }
        }
      }
}

}  // namespace detail

// 2-D convolution, zero padding. x:(N,IC,H,W), w:(OC,IC,KH,KW), b:(OC).
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, std::int64_t stride = 1,
              std::int64_t pad = -1) {
  check_arg(x.val().ndim() == 4 && w.val().ndim() == 4, "conv2d: bad ranks");
  const std::int64_t n = x.val().dim(0), ic = x.val().dim(1), h = x.val().dim(2),
                     wd = x.val().dim(3);
  const std::int64_t oc = w.val().dim(0), kh = w.val().dim(2), kw = w.val().dim(3);
  check_arg(w.val().dim(1) == ic, "conv2d: channel mismatch");
  check_arg(b.val().numel() == oc, "conv2d: bias size mismatch");
  if (pad < 0) pad = kh / 2;
  const std::int64_t oh = (h + 2 * pad - kh) / stride + 1;
  const std::int64_t ow = (wd + 2 * pad - kw) / stride + 1;
  const std::int64_t k = ic * kh * kw;

  Tensor<T> out({n, oc, oh, ow});
  {
    Tensor<T> cols({k, oh * ow});
    for (std::int64_t bn = 0; bn < n; ++bn) {
      detail::im2col(x.val().data() + bn * ic * h * wd, ic, h, wd, kh, kw, stride, pad, oh, ow,
                     cols.data());
      gemm(w.val().data(), cols.data(), out.data() + bn * oc * oh * ow, oc, k, oh * ow);
      T* o = out.data() + bn * oc * oh * ow;
      for (std::int64_t c = 0; c < oc; ++c) {
        const T bias = b.val()[c];
        for (std::int64_t j = 0; j < oh * ow; ++j) o[c * oh * ow + j] += bias;
      }
    }
  }

  auto back = [n, ic, h, wd, oc, kh, kw, stride, pad, oh, ow, k](Node<T>& nd) {
    const Tensor<T>& xv = nd.parents[0]->value;
    const Tensor<T>& wv = nd.parents[1]->value;
    const bool need_x = nd.parents[0]->requires_grad;
    const bool need_w = nd.parents[1]->requires_grad;
    const bool need_b = nd.parents[2]->requires_grad;
    Tensor<T> cols({k, oh * ow});
    Tensor<T> dcols({k, oh * ow});
    for (std::int64_t bn = 0; bn < n; ++bn) {
      const T* dout = nd.grad.data() + bn * oc * oh * ow;
      if (need_w || need_x)
        detail::im2col(xv.data() + bn * ic * h * wd, ic, h, wd, kh, kw, stride, pad, oh, ow,
                       cols.data());
      if (need_w) {
        Tensor<T>& gw = nd.parents[1]->ensure_grad();
        gemm(dout, cols.data(), gw.data(), oc, oh * ow, k, true, false, true);
      }
      if (need_b) {
        Tensor<T>& gb = nd.parents[2]->ensure_grad();
        for (std::int64_t c = 0; c < oc; ++c) {
          T s = T(0);
          for (std::int64_t j = 0; j < oh * ow; ++j) s += dout[c * oh * ow + j];
          gb[c] += s;
        }
      }
      if (need_x) {
        Tensor<T>& gx = nd.parents[0]->ensure_grad();
        gemm(wv.data(), dout, dcols.data(), k, oc, oh * ow, false, true, false);
        detail::col2im_add(dcols.data(), ic, h, wd, kh, kw, stride, pad, oh, ow,
                           gx.data() + bn * ic * h * wd);
      }
    }
  };
  return make_var<T>(std::move(out), {x, w, b}, back);
}

// Fully connected layer: x(N,IN) * w(OUT,IN)^T + b(OUT).
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  check_arg(x.val().ndim() == 2 && w.val().ndim() == 2, "linear: bad ranks");
  const std::int64_t n = x.val().dim(0), in = x.val().dim(1), out_dim = w.val().dim(0);
  check_arg(w.val().dim(1) == in && b.val().numel() == out_dim, "linear: shape mismatch");
  Tensor<T> out({n, out_dim});
  gemm(x.val().data(), w.val().data(), out.data(), n, in, out_dim, false, false, true);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < out_dim; ++j) out.at(i, j) += b.val()[j];
  return make_var<T>(std::move(out), {x, w, b}, [n, in, out_dim](Node<T>& nd) {
    const Tensor<T>& xv = nd.parents[0]->value;
    const Tensor<T>& wv = nd.parents[1]->value;
    if (nd.parents[0]->requires_grad)
      gemm(nd.grad.data(), wv.data(), nd.parents[0]->ensure_grad().data(), n, out_dim, in, true);
    if (nd.parents[1]->requires_grad)
      gemm(nd.grad.data(), xv.data(), nd.parents[1]->ensure_grad().data(), out_dim, n, in, true,
           true, false);
    if (nd.parents[2]->requires_grad) {
      Tensor<T>& gb = nd.parents[2]->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < out_dim; ++j) gb[j] += nd.grad.at(i, j);
    }
  });
}

// Per-sample, per-channel normalization over the spatial extent.
template <typename T>
Var<T> instance_norm(const Var<T>& x, T eps = T(1e-5)) {
  check_arg(x.val().ndim() == 4, "instance_norm: expects (N,C,H,W)");
  const std::int64_t n = x.val().dim(0), c = x.val().dim(1);
  const std::int64_t hw = x.val().dim(2) * x.val().dim(3);
  Tensor<T> out = x.val();
  Tensor<T> inv_std({n, c});
  for (std::int64_t i = 0; i < n * c; ++i) {
    T* row = out.data() + i * hw;
    T mu = T(0);
    for (std::int64_t j = 0; j < hw; ++j) mu += row[j];
    mu /= static_cast<T>(hw);
    T var = T(0);
    for (std::int64_t j = 0; j < hw; ++j) {
      row[j] -= mu;
      var += row[j] * row[j];
    }
    var /= static_cast<T>(hw);
    const T is = T(1) / std::sqrt(var + eps);
    inv_std[i] = is;
    for (std::int64_t j = 0; j < hw; ++j) row[j] *= is;
  }
  Tensor<T> xhat = out;
  return make_var<T>(std::move(out), {x}, [n, c, hw, inv_std, xhat](Node<T>& nd) {
    Tensor<T>& g = nd.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < n * c; ++i) {
      const T* dy = nd.grad.data() + i * hw;
      const T* xh = xhat.data() + i * hw;
      T* gx = g.data() + i * hw;
      T mean_dy = T(0), mean_dyxh = T(0);
      for (std::int64_t j = 0; j < hw; ++j) {
        mean_dy += dy[j];
        mean_dyxh += dy[j] * xh[j];
      }
      mean_dy /= static_cast<T>(hw);
      mean_dyxh /= static_cast<T>(hw);
      const T is = inv_std[i];
      for (std::int64_t j = 0; j < hw; ++j)
        gx[j] += is * (dy[j] - mean_dy - xh[j] * mean_dyxh);
    }
  });
}

// y[n,c,:,:] = x[n,c,:,:] * s[n,c] + b[n,c]
template <typename T>
Var<T> channel_affine(const Var<T>& x, const Var<T>& s, const Var<T>& b) {
  check_arg(x.val().ndim() == 4 && s.val().ndim() == 2 && b.val().ndim() == 2,
            "channel_affine: bad ranks");
  const std::int64_t n = x.val().dim(0), c = x.val().dim(1);
  const std::int64_t hw = x.val().dim(2) * x.val().dim(3);
  check_arg(s.val().dim(0) == n && s.val().dim(1) == c && b.val().same_shape(s.val()),
            "channel_affine: shape mismatch");
  Tensor<T> out = x.val();
  for (std::int64_t i = 0; i < n * c; ++i) {
    T* row = out.data() + i * hw;
    const T sc = s.val()[i], bi = b.val()[i];
    for (std::int64_t j = 0; j < hw; ++j) row[j] = row[j] * sc + bi;
  }
  return make_var<T>(std::move(out), {x, s, b}, [n, c, hw](Node<T>& nd) {
    const Tensor<T>& xv = nd.parents[0]->value;
    const Tensor<T>& sv = nd.parents[1]->value;
    for (std::int64_t i = 0; i < n * c; ++i) {
      const T* dy = nd.grad.data() + i * hw;
      if (nd.parents[0]->requires_grad) {
        T* gx = nd.parents[0]->ensure_grad().data() + i * hw;
        const T sc = sv[i];
        for (std::int64_t j = 0; j < hw; ++j) gx[j] += dy[j] * sc;
      }
      if (nd.parents[1]->requires_grad) {
        const T* xrow = xv.data() + i * hw;
        T s = T(0);
        for (std::int64_t j = 0; j < hw; ++j) s += dy[j] * xrow[j];
        nd.parents[1]->ensure_grad()[i] += s;
      }
      if (nd.parents[2]->requires_grad) {
        T s = T(0);
        for (std::int64_t j = 0; j < hw; ++j) s += dy[j];
        nd.parents[2]->ensure_grad()[i] += s;
      }
    }
  });
}

template <typename T>
Var<T> upsample2_nearest(const Var<T>& x) {
  check_arg(x.val().ndim() == 4, "upsample2_nearest: expects (N,C,H,W)");
  const std::int64_t n = x.val().dim(0), c = x.val().dim(1), h = x.val().dim(2),
                     w = x.val().dim(3);
  Tensor<T> out({n, c, 2 * h, 2 * w});
  for (std::int64_t i = 0; i < n * c; ++i) {
    const T* src = x.val().data() + i * h * w;
    T* dst = out.data() + i * 4 * h * w;
    for (std::int64_t r = 0; r < h; ++r)
      for (std::int64_t cc = 0; cc < w; ++cc) {
        const T v = src[r * w + cc];
        dst[(2 * r) * 2 * w + 2 * cc] = v;
        dst[(2 * r) * 2 * w + 2 * cc + 1] = v;
        dst[(2 * r + 1) * 2 * w + 2 * cc] = v;
        dst[(2 * r + 1) * 2 * w + 2 * cc + 1] = v;
      }
  }
  return make_var<T>(std::move(out), {x}, [n, c, h, w](Node<T>& nd) {
    Tensor<T>& g = nd.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < n * c; ++i) {
      T* dst = g.data() + i * h * w;
      const T* src = nd.grad.data() + i * 4 * h * w;
      for (std::int64_t r = 0; r < h; ++r)
        for (std::int64_t cc = 0; cc < w; ++cc)
          dst[r * w + cc] += src[(2 * r) * 2 * w + 2 * cc] + src[(2 * r) * 2 * w + 2 * cc + 1] +
                             src[(2 * r + 1) * 2 * w + 2 * cc] +
                             src[(2 * r + 1) * 2 * w + 2 * cc + 1];
    }
  });
}

// 2x2 average pooling, stride 2.
template <typename T>
Var<T> avgpool2(const Var<T>& x) {
  check_arg(x.val().ndim() == 4, "avgpool2: expects (N,C,H,W)");
  const std::int64_t n = x.val().dim(0), c = x.val().dim(1), h = x.val().dim(2),
                     w = x.val().dim(3);
  check_arg(h % 2 == 0 && w % 2 == 0, "avgpool2: odd spatial dims");
  Tensor<T> out({n, c, h / 2, w / 2});
  for (std::int64_t i = 0; i < n * c; ++i) {
    const T* src = x.val().data() + i * h * w;
    T* dst = out.data() + i * (h / 2) * (w / 2);
    for (std::int64_t r = 0; r < h / 2; ++r)
      for (std::int64_t cc = 0; cc < w / 2; ++cc)
        dst[r * (w / 2) + cc] =
            (src[(2 * r) * w + 2 * cc] + src[(2 * r) * w + 2 * cc + 1] +
             src[(2 * r + 1) * w + 2 * cc] + src[(2 * r + 1) * w + 2 * cc + 1]) /
            T(4);
  }
  return make_var<T>(std::move(out), {x}, [n, c, h, w](Node<T>& nd) {
    Tensor<T>& g = nd.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < n * c; ++i) {
      T* dst = g.data() + i * h * w;
      const T* src = nd.grad.data() + i * (h / 2) * (w / 2);
      for (std::int64_t r = 0; r < h / 2; ++r)
        for (std::int64_t cc = 0; cc < w / 2; ++cc) {
          const T v = src[r * (w / 2) + cc] / T(4);
          dst[(2 * r) * w + 2 * cc] += v;
          dst[(2 * r) * w + 2 * cc + 1] += v;
          dst[(2 * r + 1) * w + 2 * cc] += v;
          dst[(2 * r + 1) * w + 2 * cc + 1] += v;
        }
    }
  });
}

template <typename T>
Var<T> global_avgpool(const Var<T>& x) {
  check_arg(x.val().ndim() == 4, "global_avgpool: expects (N,C,H,W)");
  const std::int64_t n = x.val().dim(0), c = x.val().dim(1);
  const std::int64_t hw = x.val().dim(2) * x.val().dim(3);
  Tensor<T> out({n, c});
  for (std::int64_t i = 0; i < n * c; ++i) {
    T s = T(0);
    const T* src = x.val().data() + i * hw;
    for (std::int64_t j = 0; j < hw; ++j) s += src[j];
    out[i] = s / static_cast<T>(hw);
  }
  return make_var<T>(std::move(out), {x}, [n, c, hw](Node<T>& nd) {
    Tensor<T>& g = nd.parents[0]->ensure_grad();
    for (std::int64_t i = 0; i < n * c; ++i) {
      const T v = nd.grad[i] / static_cast<T>(hw);
      T* dst = g.data() + i * hw;
      for (std::int64_t j = 0; j < hw; ++j) dst[j] += v;
    }
  });
}

// W / sigma with sigma = u^T W v; u and v are power-iteration buffers treated
// as constants by the gradient.
template <typename T>
Var<T> spectral_scale(const Var<T>& w, const Tensor<T>& u, const Tensor<T>& v) {
  const std::int64_t rows = w.val().dim(0);
  const std::int64_t cols = w.val().numel() / rows;
  check_arg(u.numel() == rows && v.numel() == cols, "spectral_scale: buffer size mismatch");
  T sigma = T(0);
  for (std::int64_t i = 0; i < rows; ++i) {
    T s = T(0);
    const T* wrow = w.val().data() + i * cols;
    for (std::int64_t j = 0; j < cols; ++j) s += wrow[j] * v[j];
    sigma += u[i] * s;
  }
  sigma = std::max(sigma, T(1e-12));
  Tensor<T> out = w.val();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] /= sigma;
  Tensor<T> uc = u, vc = v;
  return make_var<T>(std::move(out), {w}, [rows, cols, sigma, uc, vc](Node<T>& nd) {
    Tensor<T>& g = nd.parents[0]->ensure_grad();
    const Tensor<T>& wv = nd.parents[0]->value;
    T gw = T(0);  // sum of grad .* W
    for (std::int64_t i = 0; i < wv.numel(); ++i) gw += nd.grad[i] * wv[i];
    const T coef = gw / (sigma * sigma);
    for (std::int64_t i = 0; i < rows; ++i)
      for (std::int64_t j = 0; j < cols; ++j)
        g[i * cols + j] += nd.grad[i * cols + j] / sigma - coef * uc[i] * vc[j];
  });
}

}  // namespace hswap::nn
