#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hswap/core/tensor.hpp"

namespace hswap::nn {

// Reverse-mode autodiff over dense tensors. Graphs are built dynamically per
// step; parameters are long-lived leaf nodes whose grads the optimizer
// consumes.

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // allocated on first accumulation
  std::vector<std::shared_ptr<Node<T>>> parents;
  std::function<void(Node<T>&)> backprop;
  bool requires_grad = false;

  Tensor<T>& ensure_grad() {
    if (!grad.defined()) grad = Tensor<T>::zeros(value.shape());
    return grad;
  }
};

template <typename T>
class Var {
 public:
  Var() = default;

  static Var leaf(Tensor<T> v, bool requires_grad = true) {
    Var out;
    out.n_ = std::make_shared<Node<T>>();
    out.n_->value = std::move(v);
    out.n_->requires_grad = requires_grad;
    return out;
  }

  static Var constant(Tensor<T> v) { return leaf(std::move(v), false); }
  static Var scalar(T v, bool requires_grad = false) {
    return leaf(Tensor<T>::scalar(v), requires_grad);
  }

  bool defined() const { return n_ != nullptr; }
  const Tensor<T>& val() const { return n_->value; }
  Tensor<T>& val() { return n_->value; }
  Tensor<T>& grad() { return n_->ensure_grad(); }
  bool has_grad() const { return n_->grad.defined(); }
  bool requires_grad() const { return n_ && n_->requires_grad; }
  const std::shared_ptr<Node<T>>& node() const { return n_; }

  void zero_grad() {
    if (n_ && n_->grad.defined()) n_->grad.fill(T(0));
  }

  // Shares the value buffer, drops graph history.
  Var detach() const { return constant(n_->value); }

 private:
  std::shared_ptr<Node<T>> n_;
};

template <typename T>
Var<T> make_var(Tensor<T> value, std::vector<Var<T>> parents,
                std::function<void(Node<T>&)> backprop) {
  bool needs = false;
  for (const auto& p : parents) needs = needs || p.requires_grad();
  Var<T> out = Var<T>::leaf(std::move(value), needs);
  if (needs) {
    auto& node = *out.node();
    node.parents.reserve(parents.size());
    for (auto& p : parents) node.parents.push_back(p.node());
    node.backprop = std::move(backprop);
  }
  return out;
}

// Accumulate src into dst (allocating dst on demand).
template <typename T>
inline void accumulate(Node<T>& parent, const Tensor<T>& src) {
  Tensor<T>& g = parent.ensure_grad();
  const std::int64_t n = g.numel();
  T* gd = g.data();
  const T* sd = src.data();
  for (std::int64_t i = 0; i < n; ++i) gd[i] += sd[i];
}

// Run reverse-mode accumulation from a scalar root.
template <typename T>
void backward(const Var<T>& root) {
  check_arg(root.defined() && root.val().numel() == 1, "backward: root must be a scalar");
  if (!root.requires_grad()) return;

  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* p = node->parents[next++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node()->ensure_grad().fill(T(1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backprop && node->grad.defined()) node->backprop(*node);
  }
}

}  // namespace hswap::nn
