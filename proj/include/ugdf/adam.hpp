#pragma once

#include "ugdf/autograd.hpp"

namespace ugdf {

// Bias-corrected Adam. One state per parameter list; the learning-rate
// schedule is applied by the caller through `lr`.
template <class T>
struct AdamState {
  std::vector<Tensor<T>> first_moment;
  std::vector<Tensor<T>> second_moment;
  int64_t step_count = 0;
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T lr = T(1e-3);
  T epsilon = T(1e-8);

  explicit AdamState(const std::vector<Var<T>>& params) {
    for (const auto& p : params) {
      first_moment.emplace_back(p->val.shape);
      second_moment.emplace_back(p->val.shape);
    }
  }
};

template <class T>
void adam_step(const std::vector<Var<T>>& params, AdamState<T>& state) {
  if (params.size() != state.first_moment.size())
    throw std::invalid_argument("adam_step: parameter count mismatch");
  ++state.step_count;
  const T bc1 = T(1) - std::pow(state.beta1, static_cast<T>(state.step_count));
  const T bc2 = T(1) - std::pow(state.beta2, static_cast<T>(state.step_count));
  for (size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    if (p.grad.shape != p.val.shape)
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    for (int64_t i = 0; i < p.val.size(); ++i) {
      const T g = p.grad[i];
      m[i] = state.beta1 * m[i] + (T(1) - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (T(1) - state.beta2) * g * g;
      const T mhat = m[i] / bc1;
      const T vhat = v[i] / bc2;
      p.val[i] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

}  // namespace ugdf
