#pragma once

#include "ugdf/tensor.hpp"

// Convolution kernels. Each parallel kernel distributes whole output (or
// gather-target) elements across threads, so the per-element accumulation
// order is identical to the serial reference and results are bitwise equal
// for any thread count.

namespace ugdf::kernels {

// x [Ci,H,W], w [Co,Ci,kh,kw], b [Co] (may be empty) -> out [Co,Ho,Wo]
template <class T>
void conv2d_forward_serial(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                           int stride, int pad, Tensor<T>& out);
template <class T>
void conv2d_forward_omp(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                        int stride, int pad, Tensor<T>& out);
template <class T>
void conv2d_backward_input(const Tensor<T>& dout, const Tensor<T>& w,
                           int stride, int pad, Tensor<T>& dx);
template <class T>
void conv2d_backward_weight(const Tensor<T>& dout, const Tensor<T>& x,
                            int stride, int pad, Tensor<T>& dw, Tensor<T>& db);

// x [Ci,D,H,W], w [Co,Ci,kd,kh,kw], b [Co] -> out [Co,Do,Ho,Wo]
template <class T>
void conv3d_forward_serial(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                           int stride, int pad, Tensor<T>& out);
template <class T>
void conv3d_forward_omp(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                        int stride, int pad, Tensor<T>& out);
template <class T>
void conv3d_backward_input(const Tensor<T>& dout, const Tensor<T>& w,
                           int stride, int pad, Tensor<T>& dx);
template <class T>
void conv3d_backward_weight(const Tensor<T>& dout, const Tensor<T>& x,
                            int stride, int pad, Tensor<T>& dw, Tensor<T>& db);

// transposed conv, x [Ci,D,H,W], w [Ci,Co,kd,kh,kw]; out shape is explicit
// because a stride-2 transposed conv has two valid inverse extents.
template <class T>
void tconv3d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                     int stride, int pad, Tensor<T>& out);
template <class T>
void tconv3d_backward_input(const Tensor<T>& dout, const Tensor<T>& w,
                            int stride, int pad, Tensor<T>& dx);
template <class T>
void tconv3d_backward_weight(const Tensor<T>& dout, const Tensor<T>& x,
                             int stride, int pad, Tensor<T>& dw, Tensor<T>& db);

inline int conv_out_extent(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

}  // namespace ugdf::kernels
