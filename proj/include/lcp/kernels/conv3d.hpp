#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>

#include "lcp/parallel.hpp"
#include "lcp/tensor.hpp"

namespace lcp {

struct Conv3dGeom {
  std::int64_t stride_t = 1, stride_y = 1, stride_x = 1;
  std::int64_t pad_t = 0, pad_y = 0, pad_x = 0;
  std::int64_t groups = 1;
};

// weight layout: [C_out][C_in/groups][Kt][Ky][Kx]
inline Shape conv3d_out_shape(const Shape& in, const Shape& w, const Conv3dGeom& g) {
  const std::int64_t ot = (in[2] + 2 * g.pad_t - w[2]) / g.stride_t + 1;
  const std::int64_t oy = (in[3] + 2 * g.pad_y - w[3]) / g.stride_y + 1;
  const std::int64_t ox = (in[4] + 2 * g.pad_x - w[4]) / g.stride_x + 1;
  return {in[0], w[0], ot, oy, ox};
}

// Direct convolution. Parallel over (n, c_out); the accumulation order per
// output element is fixed (ci, kt, ky, kx), so serial and parallel runs are
// bit-identical.
template <class T>
void conv3d_forward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>* bias,
                    const Conv3dGeom& g, Tensor<T>& out, Exec mode) {
  const std::int64_t N = in.dim(0), Ci = in.dim(1), Ti = in.dim(2), Hi = in.dim(3), Wi = in.dim(4);
  const std::int64_t Co = w.dim(0), Cg = w.dim(1), Kt = w.dim(2), Ky = w.dim(3), Kx = w.dim(4);
  const std::int64_t To = out.dim(2), Ho = out.dim(3), Wo = out.dim(4);
  const std::int64_t co_per_g = Co / g.groups;
  if (Cg * g.groups != Ci) throw std::runtime_error("conv3d: channel/group mismatch");

  parallel_for(N * Co, mode, [&](std::int64_t job) {
    const std::int64_t n = job / Co;
    const std::int64_t co = job % Co;
    const std::int64_t grp = co / co_per_g;
    const T* wbase = w.data() + co * Cg * Kt * Ky * Kx;
    const T b = bias != nullptr ? (*bias)[co] : T(0);
    T* obase = out.data() + ((n * Co + co) * To) * Ho * Wo;
    const T* ibase = in.data() + (n * Ci + grp * Cg) * Ti * Hi * Wi;

    for (std::int64_t to = 0; to < To; ++to) {
      const std::int64_t t0 = to * g.stride_t - g.pad_t;
      const std::int64_t kt_lo = std::max<std::int64_t>(0, -t0);
      const std::int64_t kt_hi = std::min<std::int64_t>(Kt, Ti - t0);
      for (std::int64_t yo = 0; yo < Ho; ++yo) {
        const std::int64_t y0 = yo * g.stride_y - g.pad_y;
        const std::int64_t ky_lo = std::max<std::int64_t>(0, -y0);
        const std::int64_t ky_hi = std::min<std::int64_t>(Ky, Hi - y0);
        for (std::int64_t xo = 0; xo < Wo; ++xo) {
          const std::int64_t x0 = xo * g.stride_x - g.pad_x;
          const std::int64_t kx_lo = std::max<std::int64_t>(0, -x0);
          const std::int64_t kx_hi = std::min<std::int64_t>(Kx, Wi - x0);
          T acc = b;
          for (std::int64_t ci = 0; ci < Cg; ++ci) {
            const T* iplane = ibase + ci * Ti * Hi * Wi;
            const T* wplane = wbase + ci * Kt * Ky * Kx;
            for (std::int64_t kt = kt_lo; kt < kt_hi; ++kt) {
              const T* islab = iplane + (t0 + kt) * Hi * Wi;
              const T* wslab = wplane + kt * Ky * Kx;
              for (std::int64_t ky = ky_lo; ky < ky_hi; ++ky) {
                const T* irow = islab + (y0 + ky) * Wi + x0;
                const T* wrow = wslab + ky * Kx;
                for (std::int64_t kx = kx_lo; kx < kx_hi; ++kx) {
                  acc += irow[kx] * wrow[kx];
                }
              }
            }
          }
          obase[(to * Ho + yo) * Wo + xo] = acc;
        }
      }
    }
  });
}

// Gradient w.r.t. input, gather form: each input element sums over the output
// positions its value contributed to. Parallel over (n, c_in).
template <class T>
void conv3d_backward_input(const Tensor<T>& dout, const Tensor<T>& w, const Conv3dGeom& g,
                           Tensor<T>& din, Exec mode) {
  const std::int64_t N = din.dim(0), Ci = din.dim(1), Ti = din.dim(2), Hi = din.dim(3), Wi = din.dim(4);
  const std::int64_t Co = w.dim(0), Cg = w.dim(1), Kt = w.dim(2), Ky = w.dim(3), Kx = w.dim(4);
  const std::int64_t To = dout.dim(2), Ho = dout.dim(3), Wo = dout.dim(4);
  const std::int64_t co_per_g = Co / g.groups;

  parallel_for(N * Ci, mode, [&](std::int64_t job) {
    const std::int64_t n = job / Ci;
    const std::int64_t ci = job % Ci;
    const std::int64_t grp = ci / Cg;
    const std::int64_t cig = ci % Cg;
    T* dbase = din.data() + (n * Ci + ci) * Ti * Hi * Wi;

    for (std::int64_t ti = 0; ti < Ti; ++ti) {
      for (std::int64_t yi = 0; yi < Hi; ++yi) {
        for (std::int64_t xi = 0; xi < Wi; ++xi) {
          T acc = T(0);
          for (std::int64_t co = grp * co_per_g; co < (grp + 1) * co_per_g; ++co) {
            const T* wplane = w.data() + (co * Cg + cig) * Kt * Ky * Kx;
            const T* oplane = dout.data() + (n * Co + co) * To * Ho * Wo;
            for (std::int64_t kt = 0; kt < Kt; ++kt) {
              const std::int64_t tn = ti + g.pad_t - kt;
              if (tn < 0 || tn % g.stride_t != 0) continue;
              const std::int64_t to = tn / g.stride_t;
              if (to >= To) continue;
              for (std::int64_t ky = 0; ky < Ky; ++ky) {
                const std::int64_t yn = yi + g.pad_y - ky;
                if (yn < 0 || yn % g.stride_y != 0) continue;
                const std::int64_t yo = yn / g.stride_y;
                if (yo >= Ho) continue;
                for (std::int64_t kx = 0; kx < Kx; ++kx) {
                  const std::int64_t xn = xi + g.pad_x - kx;
                  if (xn < 0 || xn % g.stride_x != 0) continue;
                  const std::int64_t xo = xn / g.stride_x;
                  if (xo >= Wo) continue;
                  acc += oplane[(to * Ho + yo) * Wo + xo] * wplane[(kt * Ky + ky) * Kx + kx];
                }
              }
            }
          }
          dbase[(ti * Hi + yi) * Wi + xi] = acc;
        }
      }
    }
  });
}

// Gradient w.r.t. weights (accumulated into dw). Parallel over c_out; each
// thread owns one output channel's weight slab.
template <class T>
void conv3d_backward_weights(const Tensor<T>& in, const Tensor<T>& dout, const Conv3dGeom& g,
                             Tensor<T>& dw, Tensor<T>* dbias, Exec mode) {
  const std::int64_t N = in.dim(0), Ci = in.dim(1), Ti = in.dim(2), Hi = in.dim(3), Wi = in.dim(4);
  const std::int64_t Co = dw.dim(0), Cg = dw.dim(1), Kt = dw.dim(2), Ky = dw.dim(3), Kx = dw.dim(4);
  const std::int64_t To = dout.dim(2), Ho = dout.dim(3), Wo = dout.dim(4);
  const std::int64_t co_per_g = Co / g.groups;

  parallel_for(Co, mode, [&](std::int64_t co) {
    const std::int64_t grp = co / co_per_g;
    T* wbase = dw.data() + co * Cg * Kt * Ky * Kx;
    T bacc = T(0);
    for (std::int64_t n = 0; n < N; ++n) {
      const T* oplane = dout.data() + (n * Co + co) * To * Ho * Wo;
      const T* ibase = in.data() + (n * Ci + grp * Cg) * Ti * Hi * Wi;
      for (std::int64_t to = 0; to < To; ++to) {
        const std::int64_t t0 = to * g.stride_t - g.pad_t;
        const std::int64_t kt_lo = std::max<std::int64_t>(0, -t0);
        const std::int64_t kt_hi = std::min<std::int64_t>(Kt, Ti - t0);
        for (std::int64_t yo = 0; yo < Ho; ++yo) {
          const std::int64_t y0 = yo * g.stride_y - g.pad_y;
          const std::int64_t ky_lo = std::max<std::int64_t>(0, -y0);
          const std::int64_t ky_hi = std::min<std::int64_t>(Ky, Hi - y0);
          for (std::int64_t xo = 0; xo < Wo; ++xo) {
            const std::int64_t x0 = xo * g.stride_x - g.pad_x;
            const std::int64_t kx_lo = std::max<std::int64_t>(0, -x0);
            const std::int64_t kx_hi = std::min<std::int64_t>(Kx, Wi - x0);
            const T go = oplane[(to * Ho + yo) * Wo + xo];
            bacc += go;
            for (std::int64_t ci = 0; ci < Cg; ++ci) {
              const T* iplane = ibase + ci * Ti * Hi * Wi;
              T* wplane = wbase + ci * Kt * Ky * Kx;
              for (std::int64_t kt = kt_lo; kt < kt_hi; ++kt) {
                const T* islab = iplane + (t0 + kt) * Hi * Wi;
                T* wslab = wplane + kt * Ky * Kx;
                for (std::int64_t ky = ky_lo; ky < ky_hi; ++ky) {
                  const T* irow = islab + (y0 + ky) * Wi + x0;
                  T* wrow = wslab + ky * Kx;
                  for (std::int64_t kx = kx_lo; kx < kx_hi; ++kx) {
                    wrow[kx] += go * irow[kx];
                  }
                }
              }
            }
          }
        }
      }
    }
    if (dbias != nullptr) {
      (*dbias)[co] += bacc;
    }
  });
}

}  // namespace lcp
