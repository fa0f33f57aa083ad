#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <memory>
#include <unordered_set>

#include "ugdf/tensor.hpp"

namespace ugdf {

inline std::atomic<int64_t> g_node_counter{0};

// Reverse-mode tape node. Nodes are created in topological order; backward
// walks the reachable set in decreasing creation order.
template <class T>
struct Node {
  Tensor<T> val;
  Tensor<T> grad;
  bool requires_grad = false;
  int64_t order = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  void ensure_grad() {
    if (grad.empty()) grad = Tensor<T>(val.shape);
  }
};

template <class T>
using Var = std::shared_ptr<Node<T>>;

template <class T>
Var<T> make_var(Tensor<T> val, bool requires_grad = false) {
  auto n = std::make_shared<Node<T>>();
  n->val = std::move(val);
  n->requires_grad = requires_grad;
  n->order = g_node_counter.fetch_add(1, std::memory_order_relaxed);
  return n;
}

template <class T>
Var<T> make_op(Tensor<T> val, std::vector<Var<T>> parents,
               std::function<void(Node<T>&)> backward_fn) {
  bool rg = false;
  for (const auto& p : parents) rg = rg || p->requires_grad;
  auto n = make_var<T>(std::move(val), rg);
  if (rg) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return n;
}

// Seeds d(root)/d(root) = 1 and propagates; root must be scalar unless a seed
// tensor is supplied.
template <class T>
void backward(const Var<T>& root, const Tensor<T>* seed = nullptr) {
  if (!root->requires_grad) return;
  std::vector<Node<T>*> topo;
  std::unordered_set<Node<T>*> seen;
  std::vector<Node<T>*> stack{root.get()};
  while (!stack.empty()) {
    Node<T>* n = stack.back();
    stack.pop_back();
    if (!n->requires_grad || !seen.insert(n).second) continue;
    topo.push_back(n);
    for (auto& p : n->parents) stack.push_back(p.get());
  }
  std::sort(topo.begin(), topo.end(),
            [](const Node<T>* a, const Node<T>* b) { return a->order > b->order; });

  root->ensure_grad();
  if (seed) {
    if (seed->shape != root->val.shape)
      throw std::invalid_argument("backward: seed shape mismatch");
    root->grad = *seed;
  } else {
    if (root->val.size() != 1)
      throw std::invalid_argument("backward: non-scalar root needs an explicit seed");
    root->grad.v[0] = T(1);
  }
  for (Node<T>* n : topo) {
    if (!n->backward_fn) continue;
    for (auto& p : n->parents)
      if (p->requires_grad) p->ensure_grad();
    n->backward_fn(*n);
  }
}

template <class T>
void zero_grad(const std::vector<Var<T>>& params) {
  for (auto& p : params) {
    p->ensure_grad();
    std::fill(p->grad.v.begin(), p->grad.v.end(), T(0));
  }
}

}  // namespace ugdf
