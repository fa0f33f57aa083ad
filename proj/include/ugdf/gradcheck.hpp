#pragma once

#include <functional>

#include "ugdf/autograd.hpp"

namespace ugdf {

// Central finite-difference check of reverse-mode gradients.
//
// The op under test maps a set of input tensors to one output tensor; the
// check projects the output through a fixed random linear functional so the
// comparison target is a scalar. Returns the max relative error
// |a - b| / max(|a|, |b|, 1e-8) over every element of every input.
template <class T>
double grad_check(
    const std::function<Var<T>(const std::vector<Var<T>>&)>& op,
    std::vector<Tensor<T>> inputs, uint64_t seed = 7, T step = T(1e-3)) {
  std::mt19937 rng(static_cast<uint32_t>(seed));

  auto run = [&](const std::vector<Tensor<T>>& ins, bool track) {
    std::vector<Var<T>> vars;
    vars.reserve(ins.size());
    for (const auto& t : ins) vars.push_back(make_var<T>(t, track));
    return std::make_pair(op(vars), vars);
  };

  auto [out0, vars0] = run(inputs, true);
  Tensor<T> probe = random_uniform<T>(out0->val.shape, rng, T(-1), T(1));

  auto project = [&probe](const Tensor<T>& out) {
    double s = 0;
    for (int64_t i = 0; i < out.size(); ++i)
      s += static_cast<double>(probe[i]) * static_cast<double>(out[i]);
    return s;
  };

  backward(out0, &probe);

  double max_rel = 0;
  for (size_t k = 0; k < inputs.size(); ++k) {
    for (int64_t i = 0; i < inputs[k].size(); ++i) {
      const T saved = inputs[k][i];
      inputs[k][i] = saved + step;
      const double fp = project(run(inputs, false).first->val);
      inputs[k][i] = saved - step;
      const double fm = project(run(inputs, false).first->val);
      inputs[k][i] = saved;
      const double numeric = (fp - fm) / (2.0 * static_cast<double>(step));
      const double analytic = static_cast<double>(vars0[k]->grad[i]);
      const double denom =
          std::max({std::abs(numeric), std::abs(analytic), 1e-8});
      max_rel = std::max(max_rel, std::abs(numeric - analytic) / denom);
    }
  }
  return max_rel;
}

}  // namespace ugdf
