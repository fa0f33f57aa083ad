#include "ugdf/kernels.hpp"

#include <algorithm>

namespace ugdf::kernels {

namespace {

// Half-open range of o in [0, on) such that o*stride + off lands in [0, n).
// Every bounds condition in these kernels has this shape, so hoisting it out
// of the inner loops leaves them branch-free and vectorizable.
struct Range {
  int lo, hi;
};

inline Range valid_range(int on, int n, int stride, int off) {
  int lo = off < 0 ? (-off + stride - 1) / stride : 0;
  int hi = n - 1 - off < 0 ? 0 : (n - 1 - off) / stride + 1;
  return {std::min(lo, on), std::min(hi, on)};
}

// One output channel of a 2D convolution; shared by the serial and OpenMP
// entry points so both produce bitwise-identical accumulation orders.
template <class T>
void conv2d_channel(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                    int stride, int pad, int co, int ho, int wo, Tensor<T>& out) {
  const int ci_n = x.shape[0], h = x.shape[1], wid = x.shape[2];
  const int kh = w.shape[2], kw = w.shape[3];
  T* oplane = &out.v[static_cast<size_t>(co) * ho * wo];
  const T bias = b.empty() ? T(0) : b.v[co];
  std::fill(oplane, oplane + static_cast<size_t>(ho) * wo, bias);
  for (int ci = 0; ci < ci_n; ++ci)
    for (int ky = 0; ky < kh; ++ky) {
      const Range ry = valid_range(ho, h, stride, ky - pad);
      for (int kx = 0; kx < kw; ++kx) {
        const T wv = w.v[((static_cast<size_t>(co) * ci_n + ci) * kh + ky) * kw + kx];
        const Range rx = valid_range(wo, wid, stride, kx - pad);
          const int kxo = kx - pad;
        for (int oy = ry.lo; oy < ry.hi; ++oy) {
          const int iy = oy * stride - pad + ky;
          const T* xr = &x.v[(static_cast<size_t>(ci) * h + iy) * wid];
          T* orow = oplane + static_cast<size_t>(oy) * wo;
          if (stride == 1)
            for (int ox = rx.lo; ox < rx.hi; ++ox) orow[ox] += wv * xr[ox + kxo];
          else
            for (int ox = rx.lo; ox < rx.hi; ++ox) orow[ox] += wv * xr[ox * stride + kxo];
        }
      }
    }
}

template <class T>
void conv3d_channel(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                    int stride, int pad, int co, int do_, int ho, int wo, Tensor<T>& out) {
  const int ci_n = x.shape[0], d = x.shape[1], h = x.shape[2], wid = x.shape[3];
  const int kd = w.shape[2], kh = w.shape[3], kw = w.shape[4];
  T* oplane = &out.v[static_cast<size_t>(co) * do_ * ho * wo];
  const T bias = b.empty() ? T(0) : b.v[co];
  std::fill(oplane, oplane + static_cast<size_t>(do_) * ho * wo, bias);
  for (int ci = 0; ci < ci_n; ++ci)
    for (int kz = 0; kz < kd; ++kz) {
      const Range rz = valid_range(do_, d, stride, kz - pad);
      for (int ky = 0; ky < kh; ++ky) {
        const Range ry = valid_range(ho, h, stride, ky - pad);
        for (int kx = 0; kx < kw; ++kx) {
          const T wv =
              w.v[(((static_cast<size_t>(co) * ci_n + ci) * kd + kz) * kh + ky) * kw + kx];
          const Range rx = valid_range(wo, wid, stride, kx - pad);
          const int kxo = kx - pad;
          for (int oz = rz.lo; oz < rz.hi; ++oz) {
            const int iz = oz * stride - pad + kz;
            for (int oy = ry.lo; oy < ry.hi; ++oy) {
              const int iy = oy * stride - pad + ky;
              const T* xr =
                  &x.v[((static_cast<size_t>(ci) * d + iz) * h + iy) * wid];
              T* orow = oplane + (static_cast<size_t>(oz) * ho + oy) * wo;
              if (stride == 1)
                for (int ox = rx.lo; ox < rx.hi; ++ox) orow[ox] += wv * xr[ox + kxo];
              else
                for (int ox = rx.lo; ox < rx.hi; ++ox) orow[ox] += wv * xr[ox * stride + kxo];
            }
          }
        }
      }
    }
}

}  // namespace

template <class T>
void conv2d_forward_serial(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                           int stride, int pad, Tensor<T>& out) {
  const int co_n = w.shape[0];
  const int ho = conv_out_extent(x.shape[1], w.shape[2], stride, pad);
  const int wo = conv_out_extent(x.shape[2], w.shape[3], stride, pad);
  out = Tensor<T>({co_n, ho, wo});
  for (int co = 0; co < co_n; ++co) conv2d_channel(x, w, b, stride, pad, co, ho, wo, out);
}

template <class T>
void conv2d_forward_omp(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                        int stride, int pad, Tensor<T>& out) {
  const int co_n = w.shape[0];
  const int ho = conv_out_extent(x.shape[1], w.shape[2], stride, pad);
  const int wo = conv_out_extent(x.shape[2], w.shape[3], stride, pad);
  out = Tensor<T>({co_n, ho, wo});
#pragma omp parallel for schedule(static)
  for (int co = 0; co < co_n; ++co) conv2d_channel(x, w, b, stride, pad, co, ho, wo, out);
}

template <class T>
void conv2d_backward_input(const Tensor<T>& dout, const Tensor<T>& w,
                           int stride, int pad, Tensor<T>& dx) {
  const int co_n = w.shape[0], ci_n = w.shape[1], kh = w.shape[2], kw = w.shape[3];
  const int h = dx.shape[1], wid = dx.shape[2];
  const int ho = dout.shape[1], wo = dout.shape[2];
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < ci_n; ++ci)
    for (int co = 0; co < co_n; ++co)
      for (int ky = 0; ky < kh; ++ky) {
        const Range ry = valid_range(ho, h, stride, ky - pad);
        for (int kx = 0; kx < kw; ++kx) {
          const T wv = w.v[((static_cast<size_t>(co) * ci_n + ci) * kh + ky) * kw + kx];
          const Range rx = valid_range(wo, wid, stride, kx - pad);
          const int kxo = kx - pad;
          for (int oy = ry.lo; oy < ry.hi; ++oy) {
            const int iy = oy * stride - pad + ky;
            T* dxr = &dx.v[(static_cast<size_t>(ci) * h + iy) * wid];
            const T* dor = &dout.v[(static_cast<size_t>(co) * ho + oy) * wo];
            if (stride == 1)
              for (int ox = rx.lo; ox < rx.hi; ++ox) dxr[ox + kxo] += wv * dor[ox];
            else
              for (int ox = rx.lo; ox < rx.hi; ++ox) dxr[ox * stride + kxo] += wv * dor[ox];
          }
        }
      }
}

template <class T>
void conv2d_backward_weight(const Tensor<T>& dout, const Tensor<T>& x,
                            int stride, int pad, Tensor<T>& dw, Tensor<T>& db) {
  const int co_n = dw.shape[0], ci_n = dw.shape[1], kh = dw.shape[2], kw = dw.shape[3];
  const int h = x.shape[1], wid = x.shape[2];
  const int ho = dout.shape[1], wo = dout.shape[2];
#pragma omp parallel for collapse(2) schedule(static)
  for (int co = 0; co < co_n; ++co)
    for (int ci = 0; ci < ci_n; ++ci)
      for (int ky = 0; ky < kh; ++ky) {
        const Range ry = valid_range(ho, h, stride, ky - pad);
        for (int kx = 0; kx < kw; ++kx) {
          const Range rx = valid_range(wo, wid, stride, kx - pad);
          const int kxo = kx - pad;
          T acc = T(0);
          for (int oy = ry.lo; oy < ry.hi; ++oy) {
            const int iy = oy * stride - pad + ky;
            const T* dor = &dout.v[(static_cast<size_t>(co) * ho + oy) * wo];
            const T* xr = &x.v[(static_cast<size_t>(ci) * h + iy) * wid];
            if (stride == 1)
              for (int ox = rx.lo; ox < rx.hi; ++ox) acc += dor[ox] * xr[ox + kxo];
            else
              for (int ox = rx.lo; ox < rx.hi; ++ox) acc += dor[ox] * xr[ox * stride + kxo];
          }
          dw.v[((static_cast<size_t>(co) * ci_n + ci) * kh + ky) * kw + kx] += acc;
        }
      }
  if (!db.empty()) {
    for (int co = 0; co < co_n; ++co) {
      T acc = T(0);
      const T* dor = &dout.v[static_cast<size_t>(co) * ho * wo];
      for (int64_t i = 0; i < static_cast<int64_t>(ho) * wo; ++i) acc += dor[i];
      db.v[co] += acc;
    }
  }
}

template <class T>
void conv3d_forward_serial(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                           int stride, int pad, Tensor<T>& out) {
  const int co_n = w.shape[0];
  const int do_ = conv_out_extent(x.shape[1], w.shape[2], stride, pad);
  const int ho = conv_out_extent(x.shape[2], w.shape[3], stride, pad);
  const int wo = conv_out_extent(x.shape[3], w.shape[4], stride, pad);
  out = Tensor<T>({co_n, do_, ho, wo});
  for (int co = 0; co < co_n; ++co)
    conv3d_channel(x, w, b, stride, pad, co, do_, ho, wo, out);
}

template <class T>
void conv3d_forward_omp(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                        int stride, int pad, Tensor<T>& out) {
  const int co_n = w.shape[0];
  const int do_ = conv_out_extent(x.shape[1], w.shape[2], stride, pad);
  const int ho = conv_out_extent(x.shape[2], w.shape[3], stride, pad);
  const int wo = conv_out_extent(x.shape[3], w.shape[4], stride, pad);
  out = Tensor<T>({co_n, do_, ho, wo});
#pragma omp parallel for schedule(static)
  for (int co = 0; co < co_n; ++co)
    conv3d_channel(x, w, b, stride, pad, co, do_, ho, wo, out);
}

template <class T>
void conv3d_backward_input(const Tensor<T>& dout, const Tensor<T>& w,
                           int stride, int pad, Tensor<T>& dx) {
  const int co_n = w.shape[0], ci_n = w.shape[1];
  const int kd = w.shape[2], kh = w.shape[3], kw = w.shape[4];
  const int d = dx.shape[1], h = dx.shape[2], wid = dx.shape[3];
  const int do_ = dout.shape[1], ho = dout.shape[2], wo = dout.shape[3];
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < ci_n; ++ci)
    for (int co = 0; co < co_n; ++co)
      for (int kz = 0; kz < kd; ++kz) {
        const Range rz = valid_range(do_, d, stride, kz - pad);
        for (int ky = 0; ky < kh; ++ky) {
          const Range ry = valid_range(ho, h, stride, ky - pad);
          for (int kx = 0; kx < kw; ++kx) {
            const T wv =
                w.v[(((static_cast<size_t>(co) * ci_n + ci) * kd + kz) * kh + ky) * kw + kx];
            const Range rx = valid_range(wo, wid, stride, kx - pad);
          const int kxo = kx - pad;
            for (int oz = rz.lo; oz < rz.hi; ++oz) {
              const int iz = oz * stride - pad + kz;
              for (int oy = ry.lo; oy < ry.hi; ++oy) {
                const int iy = oy * stride - pad + ky;
                T* dxr =
                    &dx.v[((static_cast<size_t>(ci) * d + iz) * h + iy) * wid];
                const T* dor = &dout.v[((static_cast<size_t>(co) * do_ + oz) * ho + oy) * wo];
                if (stride == 1)
                  for (int ox = rx.lo; ox < rx.hi; ++ox) dxr[ox + kxo] += wv * dor[ox];
                else
                  for (int ox = rx.lo; ox < rx.hi; ++ox) dxr[ox * stride + kxo] += wv * dor[ox];
              }
            }
          }
        }
      }
}

template <class T>
void conv3d_backward_weight(const Tensor<T>& dout, const Tensor<T>& x,
                            int stride, int pad, Tensor<T>& dw, Tensor<T>& db) {
  const int co_n = dw.shape[0], ci_n = dw.shape[1];
  const int kd = dw.shape[2], kh = dw.shape[3], kw = dw.shape[4];
  const int d = x.shape[1], h = x.shape[2], wid = x.shape[3];
  const int do_ = dout.shape[1], ho = dout.shape[2], wo = dout.shape[3];
#pragma omp parallel for collapse(2) schedule(static)
  for (int co = 0; co < co_n; ++co)
    for (int ci = 0; ci < ci_n; ++ci)
      for (int kz = 0; kz < kd; ++kz) {
        const Range rz = valid_range(do_, d, stride, kz - pad);
        for (int ky = 0; ky < kh; ++ky) {
          const Range ry = valid_range(ho, h, stride, ky - pad);
          for (int kx = 0; kx < kw; ++kx) {
            const Range rx = valid_range(wo, wid, stride, kx - pad);
          const int kxo = kx - pad;
            T acc = T(0);
            for (int oz = rz.lo; oz < rz.hi; ++oz) {
              const int iz = oz * stride - pad + kz;
              for (int oy = ry.lo; oy < ry.hi; ++oy) {
                const int iy = oy * stride - pad + ky;
                const T* dor = &dout.v[((static_cast<size_t>(co) * do_ + oz) * ho + oy) * wo];
                const T* xr =
                    &x.v[((static_cast<size_t>(ci) * d + iz) * h + iy) * wid];
                if (stride == 1)
                  for (int ox = rx.lo; ox < rx.hi; ++ox) acc += dor[ox] * xr[ox + kxo];
                else
                  for (int ox = rx.lo; ox < rx.hi; ++ox) acc += dor[ox] * xr[ox * stride + kxo];
              }
            }
            dw.v[(((static_cast<size_t>(co) * ci_n + ci) * kd + kz) * kh + ky) * kw + kx] +=
                acc;
          }
        }
      }
  if (!db.empty()) {
    for (int co = 0; co < co_n; ++co) {
      T acc = T(0);
      const T* dor = &dout.v[static_cast<size_t>(co) * do_ * ho * wo];
      for (int64_t i = 0; i < static_cast<int64_t>(do_) * ho * wo; ++i) acc += dor[i];
      db.v[co] += acc;
    }
  }
}

template <class T>
void tconv3d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                     int stride, int pad, Tensor<T>& out) {
  // out must be pre-shaped [Co, Do, Ho, Wo]; a stride-2 transposed conv has
  // two valid inverse extents, so the caller decides.
  const int ci_n = w.shape[0], co_n = w.shape[1];
  const int kd = w.shape[2], kh = w.shape[3], kw = w.shape[4];
  const int d = x.shape[1], h = x.shape[2], wid = x.shape[3];
  const int do_ = out.shape[1], ho = out.shape[2], wo = out.shape[3];
#pragma omp parallel for schedule(static)
  for (int co = 0; co < co_n; ++co) {
    T* oplane = &out.v[static_cast<size_t>(co) * do_ * ho * wo];
    const T bias = b.empty() ? T(0) : b.v[co];
    std::fill(oplane, oplane + static_cast<size_t>(do_) * ho * wo, bias);
    for (int ci = 0; ci < ci_n; ++ci)
      for (int kz = 0; kz < kd; ++kz) {
        const Range rz = valid_range(d, do_, stride, kz - pad);
        for (int ky = 0; ky < kh; ++ky) {
          const Range ry = valid_range(h, ho, stride, ky - pad);
          for (int kx = 0; kx < kw; ++kx) {
            const T wv =
                w.v[(((static_cast<size_t>(ci) * co_n + co) * kd + kz) * kh + ky) * kw + kx];
            const Range rx = valid_range(wid, wo, stride, kx - pad);
            const int kxo = kx - pad;
            for (int iz = rz.lo; iz < rz.hi; ++iz) {
              const int oz = iz * stride - pad + kz;
              for (int iy = ry.lo; iy < ry.hi; ++iy) {
                const int oy = iy * stride - pad + ky;
                const T* xr = &x.v[((static_cast<size_t>(ci) * d + iz) * h + iy) * wid];
                T* orow = oplane + (static_cast<size_t>(oz) * ho + oy) * wo - pad + kx;
                if (stride == 1)
                  for (int ix = rx.lo; ix < rx.hi; ++ix) orow[ix] += wv * xr[ix];
                else
                  for (int ix = rx.lo; ix < rx.hi; ++ix) orow[ix * stride] += wv * xr[ix];
              }
            }
          }
        }
      }
  }
}

template <class T>
void tconv3d_backward_input(const Tensor<T>& dout, const Tensor<T>& w,
                            int stride, int pad, Tensor<T>& dx) {
  const int ci_n = w.shape[0], co_n = w.shape[1];
  const int kd = w.shape[2], kh = w.shape[3], kw = w.shape[4];
  const int d = dx.shape[1], h = dx.shape[2], wid = dx.shape[3];
  const int do_ = dout.shape[1], ho = dout.shape[2], wo = dout.shape[3];
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < ci_n; ++ci)
    for (int co = 0; co < co_n; ++co)
      for (int kz = 0; kz < kd; ++kz) {
        const Range rz = valid_range(d, do_, stride, kz - pad);
        for (int ky = 0; ky < kh; ++ky) {
          const Range ry = valid_range(h, ho, stride, ky - pad);
          for (int kx = 0; kx < kw; ++kx) {
            const T wv =
                w.v[(((static_cast<size_t>(ci) * co_n + co) * kd + kz) * kh + ky) * kw + kx];
            const Range rx = valid_range(wid, wo, stride, kx - pad);
            const int kxo = kx - pad;
            for (int iz = rz.lo; iz < rz.hi; ++iz) {
              const int oz = iz * stride - pad + kz;
              for (int iy = ry.lo; iy < ry.hi; ++iy) {
                const int oy = iy * stride - pad + ky;
                T* dxr = &dx.v[((static_cast<size_t>(ci) * d + iz) * h + iy) * wid];
                const T* dor =
                    &dout.v[((static_cast<size_t>(co) * do_ + oz) * ho + oy) * wo];
                if (stride == 1)
                  for (int ix = rx.lo; ix < rx.hi; ++ix) dxr[ix] += wv * dor[ix + kxo];
                else
                  for (int ix = rx.lo; ix < rx.hi; ++ix) dxr[ix] += wv * dor[ix * stride + kxo];
              }
            }
          }
        }
      }
}

template <class T>
void tconv3d_backward_weight(const Tensor<T>& dout, const Tensor<T>& x,
                             int stride, int pad, Tensor<T>& dw, Tensor<T>& db) {
  const int ci_n = dw.shape[0], co_n = dw.shape[1];
  const int kd = dw.shape[2], kh = dw.shape[3], kw = dw.shape[4];
  const int d = x.shape[1], h = x.shape[2], wid = x.shape[3];
  const int do_ = dout.shape[1], ho = dout.shape[2], wo = dout.shape[3];
#pragma omp parallel for collapse(2) schedule(static)
  for (int ci = 0; ci < ci_n; ++ci)
    for (int co = 0; co < co_n; ++co)
      for (int kz = 0; kz < kd; ++kz) {
        const Range rz = valid_range(d, do_, stride, kz - pad);
        for (int ky = 0; ky < kh; ++ky) {
          const Range ry = valid_range(h, ho, stride, ky - pad);
          for (int kx = 0; kx < kw; ++kx) {
            const Range rx = valid_range(wid, wo, stride, kx - pad);
            const int kxo = kx - pad;
            T acc = T(0);
            for (int iz = rz.lo; iz < rz.hi; ++iz) {
              const int oz = iz * stride - pad + kz;
              for (int iy = ry.lo; iy < ry.hi; ++iy) {
                const int oy = iy * stride - pad + ky;
                const T* xr = &x.v[((static_cast<size_t>(ci) * d + iz) * h + iy) * wid];
                const T* dor =
                    &dout.v[((static_cast<size_t>(co) * do_ + oz) * ho + oy) * wo];
                if (stride == 1)
                  for (int ix = rx.lo; ix < rx.hi; ++ix) acc += xr[ix] * dor[ix + kxo];
                else
                  for (int ix = rx.lo; ix < rx.hi; ++ix) acc += xr[ix] * dor[ix * stride + kxo];
              }
            }
            dw.v[(((static_cast<size_t>(ci) * co_n + co) * kd + kz) * kh + ky) * kw + kx] +=
                acc;
          }
        }
      }
  if (!db.empty()) {
    for (int co = 0; co < co_n; ++co) {
      T acc = T(0);
      const T* dor = &dout.v[static_cast<size_t>(co) * do_ * ho * wo];
      for (int64_t i = 0; i < static_cast<int64_t>(do_) * ho * wo; ++i) acc += dor[i];
      db.v[co] += acc;
    }
  }
}

#define UGDF_INSTANTIATE_KERNELS(T)                                                         \
  template void conv2d_forward_serial<T>(const Tensor<T>&, const Tensor<T>&,                \
                                         const Tensor<T>&, int, int, Tensor<T>&);           \
  template void conv2d_forward_omp<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                      int, int, Tensor<T>&);                                \
  template void conv2d_backward_input<T>(const Tensor<T>&, const Tensor<T>&, int, int,      \
                                         Tensor<T>&);                                       \
  template void conv2d_backward_weight<T>(const Tensor<T>&, const Tensor<T>&, int, int,     \
                                          Tensor<T>&, Tensor<T>&);                          \
  template void conv3d_forward_serial<T>(const Tensor<T>&, const Tensor<T>&,                \
                                         const Tensor<T>&, int, int, Tensor<T>&);           \
  template void conv3d_forward_omp<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                      int, int, Tensor<T>&);                                \
  template void conv3d_backward_input<T>(const Tensor<T>&, const Tensor<T>&, int, int,      \
                                         Tensor<T>&);                                       \
  template void conv3d_backward_weight<T>(const Tensor<T>&, const Tensor<T>&, int, int,     \
                                          Tensor<T>&, Tensor<T>&);                          \
  template void tconv3d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,    \
                                   int, int, Tensor<T>&);                                   \
  template void tconv3d_backward_input<T>(const Tensor<T>&, const Tensor<T>&, int, int,     \
                                          Tensor<T>&);                                      \
  template void tconv3d_backward_weight<T>(const Tensor<T>&, const Tensor<T>&, int, int,    \
                                           Tensor<T>&, Tensor<T>&);

UGDF_INSTANTIATE_KERNELS(float)
UGDF_INSTANTIATE_KERNELS(double)

}  // namespace ugdf::kernels
