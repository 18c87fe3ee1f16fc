#pragma once

#include <cmath>
#include <cstdint>

#include "lcp/parallel.hpp"
#include "lcp/tensor.hpp"

namespace lcp {

// Per-channel batch norm over (N, T, H, W). Reductions run serially inside
// each channel, parallelism is across channels, keeping results independent
// of the thread count.
template <class T>
struct BnCache {
  Tensor<T> xhat;      // normalized input
  Tensor<T> inv_std;   // per channel
};

template <class T>
void batchnorm_forward_train(const Tensor<T>& in, const Tensor<T>& gamma, const Tensor<T>& beta,
                             Tensor<T>& running_mean, Tensor<T>& running_var, T momentum, T eps,
                             Tensor<T>& out, BnCache<T>& cache, Exec mode) {
  const std::int64_t N = in.dim(0), C = in.dim(1);
  const std::int64_t slab = in.dim(2) * in.dim(3) * in.dim(4);
  const std::int64_t count = N * slab;
  cache.xhat = Tensor<T>(in.shape());
  cache.inv_std = Tensor<T>({C});

  parallel_for(C, mode, [&](std::int64_t c) {
    T sum = T(0);
    for (std::int64_t n = 0; n < N; ++n) {
      const T* p = in.data() + (n * C + c) * slab;
      for (std::int64_t i = 0; i < slab; ++i) sum += p[i];
    }
    const T mean = sum / static_cast<T>(count);
    T sq = T(0);
    for (std::int64_t n = 0; n < N; ++n) {
      const T* p = in.data() + (n * C + c) * slab;
      for (std::int64_t i = 0; i < slab; ++i) {
        const T d = p[i] - mean;
        sq += d * d;
      }
    }
    const T var = sq / static_cast<T>(count);
    const T inv_std = T(1) / std::sqrt(var + eps);
    cache.inv_std[c] = inv_std;

    const T unbiased = count > 1 ? sq / static_cast<T>(count - 1) : var;
    running_mean[c] = (T(1) - momentum) * running_mean[c] + momentum * mean;
    running_var[c] = (T(1) - momentum) * running_var[c] + momentum * unbiased;

    const T g = gamma[c], b = beta[c];
    for (std::int64_t n = 0; n < N; ++n) {
      const T* p = in.data() + (n * C + c) * slab;
      T* xh = cache.xhat.data() + (n * C + c) * slab;
      T* o = out.data() + (n * C + c) * slab;
      for (std::int64_t i = 0; i < slab; ++i) {
        const T v = (p[i] - mean) * inv_std;
        xh[i] = v;
        o[i] = g * v + b;
      }
    }
  });
}

template <class T>
void batchnorm_forward_eval(const Tensor<T>& in, const Tensor<T>& gamma, const Tensor<T>& beta,
                            const Tensor<T>& running_mean, const Tensor<T>& running_var, T eps,
                            Tensor<T>& out, Exec mode) {
  const std::int64_t N = in.dim(0), C = in.dim(1);
  const std::int64_t slab = in.dim(2) * in.dim(3) * in.dim(4);
  parallel_for(N * C, mode, [&](std::int64_t job) {
    const std::int64_t c = job % C;
    const T inv_std = T(1) / std::sqrt(running_var[c] + eps);
    const T g = gamma[c], b = beta[c], m = running_mean[c];
    const T* p = in.data() + job * slab;
    T* o = out.data() + job * slab;
    for (std::int64_t i = 0; i < slab; ++i) o[i] = g * (p[i] - m) * inv_std + b;
  });
}

template <class T>
void batchnorm_backward(const Tensor<T>& dout, const Tensor<T>& gamma, const BnCache<T>& cache,
                        Tensor<T>& din, Tensor<T>& dgamma, Tensor<T>& dbeta, Exec mode) {
  const std::int64_t N = dout.dim(0), C = dout.dim(1);
  const std::int64_t slab = dout.dim(2) * dout.dim(3) * dout.dim(4);
  const std::int64_t count = N * slab;

  parallel_for(C, mode, [&](std::int64_t c) {
    T sum_dy = T(0), sum_dy_xhat = T(0);
    for (std::int64_t n = 0; n < N; ++n) {
      const T* dy = dout.data() + (n * C + c) * slab;
      const T* xh = cache.xhat.data() + (n * C + c) * slab;
      for (std::int64_t i = 0; i < slab; ++i) {
        sum_dy += dy[i];
        sum_dy_xhat += dy[i] * xh[i];
      }
    }
    dgamma[c] += sum_dy_xhat;
    dbeta[c] += sum_dy;

    const T scale = gamma[c] * cache.inv_std[c] / static_cast<T>(count);
    for (std::int64_t n = 0; n < N; ++n) {
      const T* dy = dout.data() + (n * C + c) * slab;
      const T* xh = cache.xhat.data() + (n * C + c) * slab;
      T* dx = din.data() + (n * C + c) * slab;
      for (std::int64_t i = 0; i < slab; ++i) {
        dx[i] = scale * (static_cast<T>(count) * dy[i] - sum_dy - xh[i] * sum_dy_xhat);
      }
    }
  });
}

}  // namespace lcp
