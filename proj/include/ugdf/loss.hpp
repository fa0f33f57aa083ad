#pragma once

#include "ugdf/autograd.hpp"
#include "ugdf/ops.hpp"

namespace ugdf::loss {

template <class T>
struct LossWeights {
  std::vector<T> alpha = {T(0.5), T(0.7), T(1.0)};  // one per hourglass output
  T eta = T(0.1);
};

template <class T>
T smooth_l1(T x) {
  const T a = std::abs(x);
  return a < T(1) ? T(0.5) * x * x : a - T(0.5);
}

// (1/N) sum_i sum_{j valid} alpha_i * smoothL1(gt_j - pred_{i,j})
template <class T>
Var<T> disparity_loss(const std::vector<Var<T>>& preds, const Tensor<T>& gt,
                      const Tensor<T>& valid_mask, const LossWeights<T>& w) {
  if (preds.size() != w.alpha.size())
    throw std::invalid_argument("disparity_loss: prediction count != alpha count");
  for (const auto& p : preds)
    if (p->val.size() != gt.size())
      throw std::invalid_argument("disparity_loss: shape mismatch");
  int64_t n_valid = 0;
  for (int64_t j = 0; j < gt.size(); ++j)
    if (valid_mask[j] != T(0)) ++n_valid;
  if (n_valid == 0) throw std::invalid_argument("disparity_loss: empty valid mask");

  T total = T(0);
  for (size_t i = 0; i < preds.size(); ++i)
    for (int64_t j = 0; j < gt.size(); ++j)
      if (valid_mask[j] != T(0))
        total += w.alpha[i] * smooth_l1(gt[j] - preds[i]->val[j]);
  Tensor<T> out({1});
  out[0] = total / static_cast<T>(n_valid);

  return make_op<T>(std::move(out), preds,
                    [gt, valid_mask, alpha = w.alpha, n_valid](Node<T>& n) {
                      const T scale = n.grad[0] / static_cast<T>(n_valid);
                      for (size_t i = 0; i < n.parents.size(); ++i) {
                        auto& p = *n.parents[i];
                        if (!p.requires_grad) continue;
                        for (int64_t j = 0; j < gt.size(); ++j) {
                          if (valid_mask[j] == T(0)) continue;
                          const T r = gt[j] - p.val[j];
                          const T d = std::abs(r) < T(1) ? r : (r > T(0) ? T(1) : T(-1));
                          p.grad[j] += -alpha[i] * d * scale;
                        }
                      }
                    });
}

// scale-invariant log loss: (1/n) sum c^2 - (1/n^2)(sum c)^2 + eta,
// c_i = log(gt_i) - log(pred_i)
template <class T>
Var<T> silog_depth_loss(const Var<T>& pred_depth, const Tensor<T>& gt_depth,
                        const Tensor<T>& valid_mask, T eta) {
  if (pred_depth->val.size() != gt_depth.size())
    throw std::invalid_argument("silog: shape mismatch");
  int64_t n = 0;
  T sum_c = T(0), sum_c2 = T(0);
  for (int64_t j = 0; j < gt_depth.size(); ++j) {
    if (valid_mask[j] == T(0)) continue;
    if (gt_depth[j] <= T(0) || pred_depth->val[j] <= T(0))
      throw std::domain_error("silog: non-positive depth at a valid pixel");
    const T c = std::log(gt_depth[j]) - std::log(pred_depth->val[j]);
    sum_c += c;
    sum_c2 += c * c;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("silog: empty valid mask");
  const T dn = static_cast<T>(n);
  Tensor<T> out({1});
  out[0] = sum_c2 / dn - (sum_c * sum_c) / (dn * dn) + eta;

  return make_op<T>(std::move(out), {pred_depth},
                    [gt_depth, valid_mask, sum_c, dn](Node<T>& node) {
                      auto& p = *node.parents[0];
                      const T g = node.grad[0];
                      for (int64_t j = 0; j < gt_depth.size(); ++j) {
                        if (valid_mask[j] == T(0)) continue;
                        const T c = std::log(gt_depth[j]) - std::log(p.val[j]);
                        const T dldc = T(2) * c / dn - T(2) * sum_c / (dn * dn);
                        p.grad[j] += g * dldc * (-T(1) / p.val[j]);
                      }
                    });
}

// Laplace negative log likelihood: mean over valid of log(sigma) + |e|/sigma
template <class T>
Var<T> uncertainty_loss(const Var<T>& pred, const Tensor<T>& gt, const Var<T>& sigma,
                        const Tensor<T>& valid_mask) {
  if (pred->val.size() != gt.size() || sigma->val.size() != gt.size())
    throw std::invalid_argument("uncertainty_loss: shape mismatch");
  int64_t n = 0;
  T total = T(0);
  for (int64_t j = 0; j < gt.size(); ++j) {
    if (valid_mask[j] == T(0)) continue;
    const T s = sigma->val[j];
    if (s < T(1e-3) - T(1e-6) || s > T(1) - T(1e-3) + T(1e-6))
      throw std::domain_error("uncertainty_loss: sigma outside clamp range");
    total += std::log(s) + std::abs(pred->val[j] - gt[j]) / s;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("uncertainty_loss: empty valid mask");
  Tensor<T> out({1});
  out[0] = total / static_cast<T>(n);

  return make_op<T>(std::move(out), {pred, sigma},
                    [gt, valid_mask, n](Node<T>& node) {
                      auto& pp = *node.parents[0];
                      auto& ps = *node.parents[1];
                      const T scale = node.grad[0] / static_cast<T>(n);
                      for (int64_t j = 0; j < gt.size(); ++j) {
                        if (valid_mask[j] == T(0)) continue;
                        const T e = pp.val[j] - gt[j];
                        const T s = ps.val[j];
                        if (pp.requires_grad)
                          pp.grad[j] += scale * (e >= T(0) ? T(1) : T(-1)) / s;
                        if (ps.requires_grad)
                          ps.grad[j] += scale * (T(1) / s - std::abs(e) / (s * s));
                      }
                    });
}

template <class T>
struct LossBreakdown {
  T disp = T(0);
  T depth = T(0);
  T mono_unc = T(0);
  T ster_unc = T(0);
  T total = T(0);
};

}  // namespace ugdf::loss
