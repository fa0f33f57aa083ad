#pragma once

#include <cmath>

#include "ugdf/autograd.hpp"
#include "ugdf/kernels.hpp"

namespace ugdf::ops {

namespace detail {

template <class T>
void check_same_shape(const Var<T>& a, const Var<T>& b, const char* op) {
  if (a->val.shape != b->val.shape)
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                shape_str(a->val.shape) + " vs " + shape_str(b->val.shape));
}

template <class T, class F, class DFa, class DFb>
Var<T> binary_ew(const Var<T>& a, const Var<T>& b, const char* name, F f, DFa dfa, DFb dfb) {
  check_same_shape(a, b, name);
  Tensor<T> out(a->val.shape);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = f(a->val[i], b->val[i]);
  return make_op<T>(std::move(out), {a, b}, [=](Node<T>& n) {
    auto& pa = *n.parents[0];
    auto& pb = *n.parents[1];
    for (int64_t i = 0; i < n.val.size(); ++i) {
      const T g = n.grad[i];
      if (pa.requires_grad) pa.grad[i] += g * dfa(pa.val[i], pb.val[i]);
      if (pb.requires_grad) pb.grad[i] += g * dfb(pa.val[i], pb.val[i]);
    }
  });
}

template <class T, class F, class DF>
Var<T> unary_ew(const Var<T>& a, F f, DF df) {
  Tensor<T> out(a->val.shape);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = f(a->val[i]);
  return make_op<T>(std::move(out), {a}, [=](Node<T>& n) {
    auto& pa = *n.parents[0];
    for (int64_t i = 0; i < n.val.size(); ++i)
      pa.grad[i] += n.grad[i] * df(pa.val[i], n.val[i]);
  });
}

template <class T>
T stable_sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <class T>
T softplus(T x) {
  return std::max(x, T(0)) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace detail

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  return detail::binary_ew(
      a, b, "add", [](T x, T y) { return x + y; }, [](T, T) { return T(1); },
      [](T, T) { return T(1); });
}

template <class T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  return detail::binary_ew(
      a, b, "sub", [](T x, T y) { return x - y; }, [](T, T) { return T(1); },
      [](T, T) { return T(-1); });
}

template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  return detail::binary_ew(
      a, b, "mul", [](T x, T y) { return x * y; }, [](T, T y) { return y; },
      [](T x, T) { return x; });
}

template <class T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
  return detail::binary_ew(
      a, b, "div", [](T x, T y) { return x / y; }, [](T, T y) { return T(1) / y; },
      [](T x, T y) { return -x / (y * y); });
}

// a*x + b with scalar coefficients
template <class T>
Var<T> affine(const Var<T>& x, T a, T b) {
  return detail::unary_ew(
      x, [=](T v) { return a * v + b; }, [=](T, T) { return a; });
}

template <class T>
Var<T> abs_op(const Var<T>& x) {
  return detail::unary_ew(
      x, [](T v) { return std::abs(v); },
      [](T v, T) { return v >= T(0) ? T(1) : T(-1); });
}

template <class T>
Var<T> log_op(const Var<T>& x) {
  for (int64_t i = 0; i < x->val.size(); ++i)
    if (x->val[i] <= T(0)) throw std::domain_error("log: non-positive input");
  return detail::unary_ew(
      x, [](T v) { return std::log(v); }, [](T v, T) { return T(1) / v; });
}

template <class T>
Var<T> exp_op(const Var<T>& x) {
  return detail::unary_ew(
      x, [](T v) { return std::exp(v); }, [](T, T y) { return y; });
}

template <class T>
Var<T> relu(const Var<T>& x) {
  return detail::unary_ew(
      x, [](T v) { return v > T(0) ? v : T(0); },
      [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <class T>
Var<T> sigmoid(const Var<T>& x) {
  return detail::unary_ew(
      x, [](T v) { return detail::stable_sigmoid(v); },
      [](T, T y) { return y * (T(1) - y); });
}

template <class T>
Var<T> tanh_op(const Var<T>& x) {
  return detail::unary_ew(
      x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <class T>
Var<T> mish(const Var<T>& x) {
  return detail::unary_ew(
      x, [](T v) { return v * std::tanh(detail::softplus(v)); },
      [](T v, T) {
        const T t = std::tanh(detail::softplus(v));
        return t + v * (T(1) - t * t) * detail::stable_sigmoid(v);
      });
}

// values outside [lo,hi] are clamped; clamped positions get zero gradient
template <class T>
Var<T> clamp(const Var<T>& x, T lo, T hi) {
  return detail::unary_ew(
      x, [=](T v) { return std::min(std::max(v, lo), hi); },
      [=](T v, T) { return (v > lo && v < hi) ? T(1) : T(0); });
}

template <class T>
Var<T> sum_all(const Var<T>& x) {
  T s = T(0);
  for (int64_t i = 0; i < x->val.size(); ++i) s += x->val[i];
  Tensor<T> out({1});
  out[0] = s;
  return make_op<T>(std::move(out), {x}, [](Node<T>& n) {
    auto& p = *n.parents[0];
    const T g = n.grad[0];
    for (int64_t i = 0; i < p.val.size(); ++i) p.grad[i] += g;
  });
}

template <class T>
Var<T> mean_all(const Var<T>& x) {
  const T inv = T(1) / static_cast<T>(x->val.size());
  return affine(sum_all(x), inv, T(0));
}

template <class T>
Var<T> softmax_over_axis(const Var<T>& x, int axis) {
  const auto& s = x->val.shape;
  if (axis < 0 || axis >= static_cast<int>(s.size()))
    throw std::invalid_argument("softmax: bad axis");
  int64_t outer = 1, inner = 1;
  const int n = s[axis];
  for (int i = 0; i < axis; ++i) outer *= s[i];
  for (int i = axis + 1; i < static_cast<int>(s.size()); ++i) inner *= s[i];

  Tensor<T> out(s);
  for (int64_t o = 0; o < outer; ++o)
    for (int64_t in = 0; in < inner; ++in) {
      const int64_t base = o * n * inner + in;
      T mx = x->val[base];
      for (int k = 1; k < n; ++k) mx = std::max(mx, x->val[base + k * inner]);
      T z = T(0);
      for (int k = 0; k < n; ++k) {
        const T e = std::exp(x->val[base + k * inner] - mx);
        out[base + k * inner] = e;
        z += e;
      }
      for (int k = 0; k < n; ++k) out[base + k * inner] /= z;
    }
  return make_op<T>(std::move(out), {x}, [outer, inner, n](Node<T>& node) {
    auto& p = *node.parents[0];
    for (int64_t o = 0; o < outer; ++o)
      for (int64_t in = 0; in < inner; ++in) {
        const int64_t base = o * n * inner + in;
        T dot = T(0);
        for (int k = 0; k < n; ++k)
          dot += node.val[base + k * inner] * node.grad[base + k * inner];
        for (int k = 0; k < n; ++k) {
          const T pk = node.val[base + k * inner];
          p.grad[base + k * inner] += pk * (node.grad[base + k * inner] - dot);
        }
      }
  });
}

// concatenation along the channel axis (axis 0); trailing dims must agree
template <class T>
Var<T> concat_channels(const std::vector<Var<T>>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat: empty input");
  auto trail = xs[0]->val.shape;
  trail.erase(trail.begin());
  int ch = 0;
  int64_t inner = Tensor<T>::numel(trail);
  for (const auto& x : xs) {
    auto t = x->val.shape;
    t.erase(t.begin());
    if (t != trail) throw std::invalid_argument("concat: trailing shape mismatch");
    ch += x->val.shape[0];
  }
  std::vector<int> oshape = {ch};
  oshape.insert(oshape.end(), trail.begin(), trail.end());
  Tensor<T> out(oshape);
  int64_t off = 0;
  for (const auto& x : xs) {
    std::copy(x->val.v.begin(), x->val.v.end(), out.v.begin() + off);
    off += x->val.size();
  }
  return make_op<T>(std::move(out), xs, [](Node<T>& n) {
    int64_t off2 = 0;
    for (auto& p : n.parents) {
      if (p->requires_grad)
        for (int64_t i = 0; i < p->val.size(); ++i) p->grad[i] += n.grad[off2 + i];
      off2 += p->val.size();
    }
  });
}

template <class T>
Var<T> slice_channels(const Var<T>& x, int from, int to) {
  const auto& s = x->val.shape;
  if (from < 0 || to > s[0] || from >= to)
    throw std::invalid_argument("slice_channels: bad range");
  int64_t inner = 1;
  for (size_t i = 1; i < s.size(); ++i) inner *= s[i];
  std::vector<int> oshape = s;
  oshape[0] = to - from;
  Tensor<T> out(oshape);
  std::copy(x->val.v.begin() + from * inner, x->val.v.begin() + to * inner, out.v.begin());
  return make_op<T>(std::move(out), {x}, [from, inner](Node<T>& n) {
    auto& p = *n.parents[0];
    const int64_t off = from * inner;
    for (int64_t i = 0; i < n.val.size(); ++i) p.grad[off + i] += n.grad[i];
  });
}

template <class T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int stride, int pad) {
  if (x->val.rank() != 3 || w->val.rank() != 4 || x->val.shape[0] != w->val.shape[1])
    throw std::invalid_argument("conv2d: bad shapes");
  Tensor<T> out;
  kernels::conv2d_forward_omp(x->val, w->val, b ? b->val : Tensor<T>{}, stride, pad, out);
  std::vector<Var<T>> parents = {x, w};
  if (b) parents.push_back(b);
  return make_op<T>(std::move(out), std::move(parents), [stride, pad](Node<T>& n) {
    auto& px = *n.parents[0];
    auto& pw = *n.parents[1];
    if (px.requires_grad) kernels::conv2d_backward_input(n.grad, pw.val, stride, pad, px.grad);
    Tensor<T> dummy;
    Tensor<T>& db = (n.parents.size() > 2 && n.parents[2]->requires_grad)
                        ? n.parents[2]->grad
                        : dummy;
    if (pw.requires_grad || !db.empty()) {
      Tensor<T> dw_scratch;
      Tensor<T>& dw = pw.requires_grad ? pw.grad : (dw_scratch = Tensor<T>(pw.val.shape));
      kernels::conv2d_backward_weight(n.grad, px.val, stride, pad, dw, db);
    }
  });
}

template <class T>
Var<T> conv3d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int stride, int pad) {
  if (x->val.rank() != 4 || w->val.rank() != 5 || x->val.shape[0] != w->val.shape[1])
    throw std::invalid_argument("conv3d: bad shapes");
  Tensor<T> out;
  kernels::conv3d_forward_omp(x->val, w->val, b ? b->val : Tensor<T>{}, stride, pad, out);
  std::vector<Var<T>> parents = {x, w};
  if (b) parents.push_back(b);
  return make_op<T>(std::move(out), std::move(parents), [stride, pad](Node<T>& n) {
    auto& px = *n.parents[0];
    auto& pw = *n.parents[1];
    if (px.requires_grad) kernels::conv3d_backward_input(n.grad, pw.val, stride, pad, px.grad);
    Tensor<T> dummy;
    Tensor<T>& db = (n.parents.size() > 2 && n.parents[2]->requires_grad)
                        ? n.parents[2]->grad
                        : dummy;
    if (pw.requires_grad || !db.empty()) {
      Tensor<T> dw_scratch;
      Tensor<T>& dw = pw.requires_grad ? pw.grad : (dw_scratch = Tensor<T>(pw.val.shape));
      kernels::conv3d_backward_weight(n.grad, px.val, stride, pad, dw, db);
    }
  });
}

// stride-2 transposed 3D conv; out_dhw picks the inverse extent explicitly
template <class T>
Var<T> transposed_conv3d(const Var<T>& x, const Var<T>& w, const Var<T>& b,
                         const std::vector<int>& out_dhw, int stride = 2, int pad = 1) {
  if (x->val.rank() != 4 || w->val.rank() != 5 || x->val.shape[0] != w->val.shape[0])
    throw std::invalid_argument("transposed_conv3d: bad shapes");
  Tensor<T> out({w->val.shape[1], out_dhw[0], out_dhw[1], out_dhw[2]});
  kernels::tconv3d_forward(x->val, w->val, b ? b->val : Tensor<T>{}, stride, pad, out);
  std::vector<Var<T>> parents = {x, w};
  if (b) parents.push_back(b);
  return make_op<T>(std::move(out), std::move(parents), [stride, pad](Node<T>& n) {
    auto& px = *n.parents[0];
    auto& pw = *n.parents[1];
    if (px.requires_grad) kernels::tconv3d_backward_input(n.grad, pw.val, stride, pad, px.grad);
    Tensor<T> dummy;
    Tensor<T>& db = (n.parents.size() > 2 && n.parents[2]->requires_grad)
                        ? n.parents[2]->grad
                        : dummy;
    if (pw.requires_grad || !db.empty()) {
      Tensor<T> dw_scratch;
      Tensor<T>& dw = pw.requires_grad ? pw.grad : (dw_scratch = Tensor<T>(pw.val.shape));
      kernels::tconv3d_backward_weight(n.grad, px.val, stride, pad, dw, db);
    }
  });
}

// bilinear 2x upsample of [C,H,W], half-pixel centers, edge clamped
template <class T>
Var<T> bilinear_upsample_2x(const Var<T>& x) {
  if (x->val.rank() != 3) throw std::invalid_argument("bilinear_upsample_2x: rank != 3");
  const int c = x->val.shape[0], h = x->val.shape[1], w = x->val.shape[2];
  const int ho = 2 * h, wo = 2 * w;

  auto src = [](int o, int n) {
    double s = (o + 0.5) / 2.0 - 0.5;
    s = std::max(0.0, std::min(s, static_cast<double>(n - 1)));
    int i0 = static_cast<int>(std::floor(s));
    int i1 = std::min(i0 + 1, n - 1);
    return std::tuple<int, int, T>(i0, i1, static_cast<T>(s - i0));
  };

  Tensor<T> out({c, ho, wo});
  for (int ch = 0; ch < c; ++ch)
    for (int oy = 0; oy < ho; ++oy) {
      auto [y0, y1, fy] = src(oy, h);
      for (int ox = 0; ox < wo; ++ox) {
        auto [x0, x1, fx] = src(ox, w);
        out.at3(ch, oy, ox) =
            (T(1) - fy) * ((T(1) - fx) * x->val.at3(ch, y0, x0) + fx * x->val.at3(ch, y0, x1)) +
            fy * ((T(1) - fx) * x->val.at3(ch, y1, x0) + fx * x->val.at3(ch, y1, x1));
      }
    }
  return make_op<T>(std::move(out), {x}, [c, h, w, ho, wo, src](Node<T>& n) {
    auto& p = *n.parents[0];
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < c; ++ch)
      for (int oy = 0; oy < ho; ++oy) {
        auto [y0, y1, fy] = src(oy, h);
        for (int ox = 0; ox < wo; ++ox) {
          auto [x0, x1, fx] = src(ox, w);
          const T g = n.grad.at3(ch, oy, ox);
          p.grad.at3(ch, y0, x0) += g * (T(1) - fy) * (T(1) - fx);
          p.grad.at3(ch, y0, x1) += g * (T(1) - fy) * fx;
          p.grad.at3(ch, y1, x0) += g * fy * (T(1) - fx);
          p.grad.at3(ch, y1, x1) += g * fy * fx;
        }
      }
  });
}

// concatenation cost volume: left [C,H,W] + right shifted by d -> [2C,D,H,W];
// out-of-bounds right columns are zero-filled
template <class T>
Var<T> cost_volume(const Var<T>& left, const Var<T>& right, int max_disp) {
  detail::check_same_shape(left, right, "cost_volume");
  const int c = left->val.shape[0], h = left->val.shape[1], w = left->val.shape[2];
  if (max_disp < 1 || max_disp > w)
    throw std::invalid_argument("cost_volume: max_disp out of range");
  Tensor<T> out({2 * c, max_disp, h, w});
  for (int ch = 0; ch < c; ++ch)
    for (int d = 0; d < max_disp; ++d)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          out.at4(ch, d, y, x) = left->val.at3(ch, y, x);
          out.at4(c + ch, d, y, x) = (x >= d) ? right->val.at3(ch, y, x - d) : T(0);
        }
  return make_op<T>(std::move(out), {left, right}, [c, h, w, max_disp](Node<T>& n) {
    auto& pl = *n.parents[0];
    auto& pr = *n.parents[1];
    for (int ch = 0; ch < c; ++ch)
      for (int d = 0; d < max_disp; ++d)
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) {
            if (pl.requires_grad) pl.grad.at3(ch, y, x) += n.grad.at4(ch, d, y, x);
            if (pr.requires_grad && x >= d)
              pr.grad.at3(ch, y, x - d) += n.grad.at4(c + ch, d, y, x);
          }
  });
}

// expectation over the leading (disparity) axis of a probability volume
// probs [D,H,W] -> [1,H,W]
template <class T>
Var<T> disparity_expectation(const Var<T>& probs) {
  if (probs->val.rank() != 3) throw std::invalid_argument("disparity_expectation: rank != 3");
  const int d_n = probs->val.shape[0], h = probs->val.shape[1], w = probs->val.shape[2];
  Tensor<T> out({1, h, w});
  for (int d = 0; d < d_n; ++d)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        out.at3(0, y, x) += static_cast<T>(d) * probs->val.at3(d, y, x);
  // for a probability volume the exact expectation lies in [0, d_n-1], but
  // rounding in the sum can spill one ulp past either end; clamp with true
  // clamp semantics (zero gradient where the bound is active)
  std::vector<char> clamped(out.v.size(), 0);
  for (size_t i = 0; i < out.v.size(); ++i) {
    const T lo = T(0), hi = static_cast<T>(d_n - 1);
    if (out.v[i] < lo || out.v[i] > hi) {
      out.v[i] = std::min(std::max(out.v[i], lo), hi);
      clamped[i] = 1;
    }
  }
  return make_op<T>(std::move(out), {probs},
                    [d_n, h, w, clamped = std::move(clamped)](Node<T>& n) {
    auto& p = *n.parents[0];
    for (int d = 0; d < d_n; ++d)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (!clamped[static_cast<size_t>(y) * w + x])
            p.grad.at3(d, y, x) += static_cast<T>(d) * n.grad.at3(0, y, x);
  });
}

template <class T>
Var<T> reshape(const Var<T>& x, const std::vector<int>& shape) {
  if (Tensor<T>::numel(shape) != x->val.size())
    throw std::invalid_argument("reshape: element count mismatch");
  Tensor<T> out = x->val;
  out.shape = shape;
  return make_op<T>(std::move(out), {x}, [](Node<T>& n) {
    auto& p = *n.parents[0];
    for (int64_t i = 0; i < n.val.size(); ++i) p.grad[i] += n.grad[i];
  });
}

// batch norm over all axes but the channel axis (axis 0); works for
// [C,H,W] and [C,D,H,W] alike
template <class T>
struct BatchNormState {
  Tensor<T> running_mean;
  Tensor<T> running_var;
  T momentum = T(0.1);
  T eps = T(1e-5);

  explicit BatchNormState(int channels)
      : running_mean({channels}), running_var({channels}) {
    for (auto& v : running_var.v) v = T(1);
  }
};

template <class T>
Var<T> batch_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                  BatchNormState<T>& state, bool training) {
  const int c = x->val.shape[0];
  if (gamma->val.size() != c || beta->val.size() != c)
    throw std::invalid_argument("batch_norm: parameter size mismatch");
  const int64_t inner = x->val.size() / c;

  if (!training) {
    Tensor<T> out(x->val.shape);
    std::vector<T> scale(c), shift(c);
    for (int ch = 0; ch < c; ++ch) {
      const T invstd = T(1) / std::sqrt(state.running_var[ch] + state.eps);
      scale[ch] = gamma->val[ch] * invstd;
      shift[ch] = beta->val[ch] - state.running_mean[ch] * scale[ch];
    }
    for (int ch = 0; ch < c; ++ch)
      for (int64_t i = 0; i < inner; ++i)
        out[ch * inner + i] = scale[ch] * x->val[ch * inner + i] + shift[ch];
    return make_op<T>(std::move(out), {x, gamma, beta},
                      [c, inner, scale, rm = state.running_mean,
                       rv = state.running_var, eps = state.eps](Node<T>& n) {
                        auto& px = *n.parents[0];
                        auto& pg = *n.parents[1];
                        auto& pb = *n.parents[2];
                        for (int ch = 0; ch < c; ++ch) {
                          const T invstd = T(1) / std::sqrt(rv[ch] + eps);
                          for (int64_t i = 0; i < inner; ++i) {
                            const T g = n.grad[ch * inner + i];
                            if (px.requires_grad) px.grad[ch * inner + i] += g * scale[ch];
                            if (pg.requires_grad)
                              pg.grad[ch] += g * (px.val[ch * inner + i] - rm[ch]) * invstd;
                            if (pb.requires_grad) pb.grad[ch] += g;
                          }
                        }
                      });
  }

  auto xhat = std::make_shared<Tensor<T>>(x->val.shape);
  std::vector<T> invstd(c);
  for (int ch = 0; ch < c; ++ch) {
    T m = T(0);
    for (int64_t i = 0; i < inner; ++i) m += x->val[ch * inner + i];
    m /= static_cast<T>(inner);
    T var = T(0);
    for (int64_t i = 0; i < inner; ++i) {
      const T d = x->val[ch * inner + i] - m;
      var += d * d;
    }
    var /= static_cast<T>(inner);
    invstd[ch] = T(1) / std::sqrt(var + state.eps);
    for (int64_t i = 0; i < inner; ++i)
      (*xhat)[ch * inner + i] = (x->val[ch * inner + i] - m) * invstd[ch];
    state.running_mean[ch] =
        (T(1) - state.momentum) * state.running_mean[ch] + state.momentum * m;
    state.running_var[ch] =
        (T(1) - state.momentum) * state.running_var[ch] + state.momentum * var;
  }
  Tensor<T> out(x->val.shape);
  for (int ch = 0; ch < c; ++ch)
    for (int64_t i = 0; i < inner; ++i)
      out[ch * inner + i] = gamma->val[ch] * (*xhat)[ch * inner + i] + beta->val[ch];
  return make_op<T>(std::move(out), {x, gamma, beta},
                    [c, inner, xhat, invstd](Node<T>& n) {
                      auto& px = *n.parents[0];
                      auto& pg = *n.parents[1];
                      auto& pb = *n.parents[2];
                      const T ninv = T(1) / static_cast<T>(inner);
                      for (int ch = 0; ch < c; ++ch) {
                        T sum_dy = T(0), sum_dy_xhat = T(0);
                        for (int64_t i = 0; i < inner; ++i) {
                          const T g = n.grad[ch * inner + i];
                          sum_dy += g;
                          sum_dy_xhat += g * (*xhat)[ch * inner + i];
                        }
                        if (pg.requires_grad) pg.grad[ch] += sum_dy_xhat;
                        if (pb.requires_grad) pb.grad[ch] += sum_dy;
                        if (px.requires_grad) {
                          const T gm = pg.val[ch];
                          for (int64_t i = 0; i < inner; ++i) {
                            const T g = n.grad[ch * inner + i];
                            px.grad[ch * inner + i] +=
                                gm * invstd[ch] *
                                (g - ninv * sum_dy - (*xhat)[ch * inner + i] * ninv * sum_dy_xhat);
                          }
                        }
                      }
                    });
}

}  // namespace ugdf::ops
