#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "lcp/parallel.hpp"
#include "lcp/tensor.hpp"

namespace lcp {

struct Pool3dGeom {
  std::int64_t k_t = 1, k_y = 1, k_x = 1;
  std::int64_t stride_t = 1, stride_y = 1, stride_x = 1;
  std::int64_t pad_t = 0, pad_y = 0, pad_x = 0;
};

inline Shape pool3d_out_shape(const Shape& in, const Pool3dGeom& g) {
  const std::int64_t ot = (in[2] + 2 * g.pad_t - g.k_t) / g.stride_t + 1;
  const std::int64_t oy = (in[3] + 2 * g.pad_y - g.k_y) / g.stride_y + 1;
  const std::int64_t ox = (in[4] + 2 * g.pad_x - g.k_x) / g.stride_x + 1;
  return {in[0], in[1], ot, oy, ox};
}

// Max pool; argmax indices (flat within the n,c slab) are recorded for the
// backward pass. Parallel over (n, c) so the backward scatter stays
// race-free.
template <class T>
void maxpool3d_forward(const Tensor<T>& in, const Pool3dGeom& g, Tensor<T>& out,
                       std::vector<std::int64_t>& argmax, Exec mode) {
  const std::int64_t N = in.dim(0), C = in.dim(1), Ti = in.dim(2), Hi = in.dim(3), Wi = in.dim(4);
  const std::int64_t To = out.dim(2), Ho = out.dim(3), Wo = out.dim(4);
  argmax.assign(static_cast<std::size_t>(out.numel()), -1);

  parallel_for(N * C, mode, [&](std::int64_t job) {
    const T* islab = in.data() + job * Ti * Hi * Wi;
    T* oslab = out.data() + job * To * Ho * Wo;
    std::int64_t* aslab = argmax.data() + job * To * Ho * Wo;
    for (std::int64_t to = 0; to < To; ++to) {
      const std::int64_t t0 = to * g.stride_t - g.pad_t;
      for (std::int64_t yo = 0; yo < Ho; ++yo) {
        const std::int64_t y0 = yo * g.stride_y - g.pad_y;
        for (std::int64_t xo = 0; xo < Wo; ++xo) {
          const std::int64_t x0 = xo * g.stride_x - g.pad_x;
          T best = -std::numeric_limits<T>::infinity();
          std::int64_t best_idx = -1;
          for (std::int64_t kt = std::max<std::int64_t>(0, -t0); kt < std::min(g.k_t, Ti - t0); ++kt) {
            for (std::int64_t ky = std::max<std::int64_t>(0, -y0); ky < std::min(g.k_y, Hi - y0); ++ky) {
              for (std::int64_t kx = std::max<std::int64_t>(0, -x0); kx < std::min(g.k_x, Wi - x0); ++kx) {
                const std::int64_t idx = ((t0 + kt) * Hi + (y0 + ky)) * Wi + (x0 + kx);
                if (islab[idx] > best) {
                  best = islab[idx];
                  best_idx = idx;
                }
              }
            }
          }
          oslab[(to * Ho + yo) * Wo + xo] = best;
          aslab[(to * Ho + yo) * Wo + xo] = best_idx;
        }
      }
    }
  });
}

template <class T>
void maxpool3d_backward(const Tensor<T>& dout, const std::vector<std::int64_t>& argmax,
                        Tensor<T>& din, Exec mode) {
  const std::int64_t N = din.dim(0), C = din.dim(1);
  const std::int64_t in_slab = din.dim(2) * din.dim(3) * din.dim(4);
  const std::int64_t out_slab = dout.dim(2) * dout.dim(3) * dout.dim(4);
  din.fill(T(0));
  parallel_for(N * C, mode, [&](std::int64_t job) {
    const T* oslab = dout.data() + job * out_slab;
    const std::int64_t* aslab = argmax.data() + job * out_slab;
    T* islab = din.data() + job * in_slab;
    for (std::int64_t i = 0; i < out_slab; ++i) {
      if (aslab[i] >= 0) islab[aslab[i]] += oslab[i];
    }
  });
}

// Head pool: average over the most recent k temporal positions and the whole
// spatial extent. k == T gives the usual global average pool; smaller k is
// the temporal-kernel ablation knob. Output is N x C x 1 x 1 x 1.
template <class T>
void headpool_forward(const Tensor<T>& in, std::int64_t k, Tensor<T>& out, Exec mode) {
  const std::int64_t N = in.dim(0), C = in.dim(1), T_ = in.dim(2), H = in.dim(3), W = in.dim(4);
  const std::int64_t t_begin = T_ - k;
  const T inv = T(1) / static_cast<T>(k * H * W);
  parallel_for(N * C, mode, [&](std::int64_t job) {
    const T* slab = in.data() + job * T_ * H * W;
    T acc = T(0);
    for (std::int64_t t = t_begin; t < T_; ++t) {
      const T* plane = slab + t * H * W;
      for (std::int64_t i = 0; i < H * W; ++i) acc += plane[i];
    }
    out[job] = acc * inv;
  });
}

template <class T>
void headpool_backward(const Tensor<T>& dout, std::int64_t k, Tensor<T>& din, Exec mode) {
  const std::int64_t N = din.dim(0), C = din.dim(1), T_ = din.dim(2), H = din.dim(3), W = din.dim(4);
  const std::int64_t t_begin = T_ - k;
  const T inv = T(1) / static_cast<T>(k * H * W);
  din.fill(T(0));
  parallel_for(N * C, mode, [&](std::int64_t job) {
    T* slab = din.data() + job * T_ * H * W;
    const T g = dout[job] * inv;
    for (std::int64_t t = t_begin; t < T_; ++t) {
      T* plane = slab + t * H * W;
      for (std::int64_t i = 0; i < H * W; ++i) plane[i] = g;
    }
  });
}

}  // namespace lcp
