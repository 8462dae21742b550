#ifndef SSTML_NN_LAYERS_HPP
#define SSTML_NN_LAYERS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sstml/nn/gemm.hpp"
#include "sstml/nn/tensor.hpp"

namespace sstml::nn {

struct ConvSpec {
  int in_c = 0, out_c = 0, k = 3, stride = 1, pad = 1;
  int out_size(int in) const { return (in + 2 * pad - k) / stride + 1; }
  int patch() const { return in_c * k * k; }
};

template <typename T>
struct ConvLayer {
  ConvSpec spec;
  Tensor<T> w;  // [out_c, in_c*k*k]; bias-free (normalization follows)
};

template <typename T>
struct BatchNormLayer {
  int channels = 0;
  Tensor<T> gamma, beta;
  Tensor<T> run_mean, run_var;  // eval-mode statistics
};

template <typename T>
struct LinearLayer {
  int in = 0, out = 0;
  Tensor<T> w;  // [out, in]
  Tensor<T> b;  // [out]
};

template <typename T>
struct BnCache {
  Tensor<T> xhat;          // [B,C,H,W]
  std::vector<T> invstd;   // [C]
};

namespace detail {

template <typename T>
std::vector<T>& workspace(int which) {
  thread_local std::vector<T> buffers[3];
  return buffers[which];
}

}  // namespace detail

/// col[C*k*k, OH*OW] <- patches of x[C,H,W]; zero padding.
template <typename T>
void im2col(const T* x, int H, int W, const ConvSpec& s, T* col) {
  const int OH = s.out_size(H), OW = s.out_size(W);
  for (int c = 0; c < s.in_c; ++c) {
    const T* xc = x + static_cast<long long>(c) * H * W;
    for (int ky = 0; ky < s.k; ++ky) {
      for (int kx = 0; kx < s.k; ++kx) {
        T* row = col + (static_cast<long long>(c) * s.k * s.k + ky * s.k + kx) * OH * OW;
        for (int oy = 0; oy < OH; ++oy) {
          const int iy = oy * s.stride + ky - s.pad;
          T* out = row + static_cast<long long>(oy) * OW;
          if (iy < 0 || iy >= H) {
            std::fill(out, out + OW, T(0));
            continue;
          }
          const T* in_row = xc + static_cast<long long>(iy) * W;
          for (int ox = 0; ox < OW; ++ox) {
            const int ix = ox * s.stride + kx - s.pad;
            out[ox] = (ix >= 0 && ix < W) ? in_row[ix] : T(0);
          }
        }
      }
    }
  }
}

/// Scatter-add of col back into x[C,H,W]; x must be pre-zeroed.
template <typename T>
void col2im(const T* col, int H, int W, const ConvSpec& s, T* x) {
  const int OH = s.out_size(H), OW = s.out_size(W);
  for (int c = 0; c < s.in_c; ++c) {
    T* xc = x + static_cast<long long>(c) * H * W;
    for (int ky = 0; ky < s.k; ++ky) {
      for (int kx = 0; kx < s.k; ++kx) {
        const T* row = col + (static_cast<long long>(c) * s.k * s.k + ky * s.k + kx) * OH * OW;
        for (int oy = 0; oy < OH; ++oy) {
          const int iy = oy * s.stride + ky - s.pad;
          if (iy < 0 || iy >= H) continue;
          T* in_row = xc + static_cast<long long>(iy) * W;
          const T* src = row + static_cast<long long>(oy) * OW;
          for (int ox = 0; ox < OW; ++ox) {
            const int ix = ox * s.stride + kx - s.pad;
            if (ix >= 0 && ix < W) in_row[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <typename T>
Tensor<T> conv_forward(const ConvLayer<T>& layer, const Tensor<T>& x) {
  const ConvSpec& s = layer.spec;
  if (x.shape.size() != 4 || x.shape[1] != s.in_c)
    throw std::invalid_argument("shape-error: conv input expected (B," +
                                std::to_string(s.in_c) + ",H,W), got " + shape_string(x.shape));
  const int B = x.shape[0], H = x.shape[2], W = x.shape[3];
  const int OH = s.out_size(H), OW = s.out_size(W);
  Tensor<T> y({B, s.out_c, OH, OW});
  auto& col = detail::workspace<T>(0);
  col.resize(static_cast<std::size_t>(s.patch()) * OH * OW);
  for (int b = 0; b < B; ++b) {
    im2col(x.ptr() + static_cast<long long>(b) * s.in_c * H * W, H, W, s, col.data());
    gemm_nn(s.out_c, OH * OW, s.patch(), layer.w.ptr(), col.data(),
            y.ptr() + static_cast<long long>(b) * s.out_c * OH * OW, false);
  }
  return y;
}

/// dx and dw from dy; x is the cached forward input. dw accumulates into
/// grad_w (already sized [out_c, patch]).
template <typename T>
Tensor<T> conv_backward(const ConvLayer<T>& layer, const Tensor<T>& x, const Tensor<T>& dy,
                        Tensor<T>& grad_w) {
  const ConvSpec& s = layer.spec;
  const int B = x.shape[0], H = x.shape[2], W = x.shape[3];
  const int OH = s.out_size(H), OW = s.out_size(W);
  const int ohw = OH * OW, patch = s.patch();

  Tensor<T> dx(x.shape);
  auto& col = detail::workspace<T>(0);
  auto& colT = detail::workspace<T>(1);
  auto& scratch = detail::workspace<T>(2);
  col.resize(static_cast<std::size_t>(patch) * ohw);
  colT.resize(col.size());
  scratch.resize(std::max(col.size(), static_cast<std::size_t>(patch) * s.out_c));

  // w^T once; reused for every image's dx.
  T* wT = scratch.data();
  for (int o = 0; o < s.out_c; ++o)
    for (int p = 0; p < patch; ++p) wT[static_cast<long long>(p) * s.out_c + o] =
        layer.w.data[static_cast<long long>(o) * patch + p];

  auto& dcol = detail::workspace<T>(0);  // aliases col; used after col is consumed
  for (int b = 0; b < B; ++b) {
    const T* xb = x.ptr() + static_cast<long long>(b) * s.in_c * H * W;
    const T* dyb = dy.ptr() + static_cast<long long>(b) * s.out_c * ohw;

    // dW += dy_b * col^T: transpose col, then plain gemm keeps the fast kernel.
    im2col(xb, H, W, s, col.data());
    for (int p = 0; p < patch; ++p)
      for (int j = 0; j < ohw; ++j)
        colT[static_cast<std::size_t>(j) * patch + p] = col[static_cast<std::size_t>(p) * ohw + j];
    gemm_nn(s.out_c, patch, ohw, dyb, colT.data(), grad_w.ptr(), true);

    // dx_b = col2im(w^T * dy_b)
    gemm_nn(patch, ohw, s.out_c, wT, dyb, dcol.data(), false);
    col2im(dcol.data(), H, W, s, dx.ptr() + static_cast<long long>(b) * s.in_c * H * W);
  }
  return dx;
}

inline constexpr double kBnEps = 1e-5;
inline constexpr double kBnMomentum = 0.1;

template <typename T>
Tensor<T> batchnorm_forward(BatchNormLayer<T>& layer, const Tensor<T>& x, bool train_mode,
                            BnCache<T>* cache) {
  const int B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  if (C != layer.channels)
    throw std::invalid_argument("shape-error: batchnorm expected " +
                                std::to_string(layer.channels) + " channels, got " +
                                std::to_string(C));
  Tensor<T> y(x.shape);
  const long long plane = static_cast<long long>(H) * W;
  const long long n = static_cast<long long>(B) * plane;
  if (cache) {
    cache->xhat = Tensor<T>(x.shape);
    cache->invstd.assign(C, T(0));
  }
  for (int c = 0; c < C; ++c) {
    T mean, inv;
    if (train_mode) {
      double sum = 0.0, sq = 0.0;
      for (int b = 0; b < B; ++b) {
        const T* p = x.ptr() + (static_cast<long long>(b) * C + c) * plane;
        for (long long i = 0; i < plane; ++i) {
          sum += p[i];
          sq += static_cast<double>(p[i]) * p[i];
        }
      }
      const double mu = sum / n;
      const double var = std::max(0.0, sq / n - mu * mu);
      mean = static_cast<T>(mu);
      inv = static_cast<T>(1.0 / std::sqrt(var + kBnEps));
      const double unbiased = n > 1 ? var * n / (n - 1) : var;
      layer.run_mean.data[c] =
          static_cast<T>((1.0 - kBnMomentum) * layer.run_mean.data[c] + kBnMomentum * mu);
      layer.run_var.data[c] =
          static_cast<T>((1.0 - kBnMomentum) * layer.run_var.data[c] + kBnMomentum * unbiased);
    } else {
      mean = layer.run_mean.data[c];
      inv = static_cast<T>(1.0 / std::sqrt(static_cast<double>(layer.run_var.data[c]) + kBnEps));
    }
    const T g = layer.gamma.data[c], bet = layer.beta.data[c];
    for (int b = 0; b < B; ++b) {
      const long long off = (static_cast<long long>(b) * C + c) * plane;
      const T* p = x.ptr() + off;
      T* q = y.ptr() + off;
      T* xh = cache ? cache->xhat.ptr() + off : nullptr;
      for (long long i = 0; i < plane; ++i) {
        const T norm = (p[i] - mean) * inv;
        if (xh) xh[i] = norm;
        q[i] = g * norm + bet;
      }
    }
    if (cache) cache->invstd[c] = inv;
  }
  return y;
}

template <typename T>
Tensor<T> batchnorm_backward(const BatchNormLayer<T>& layer, const BnCache<T>& cache,
                             const Tensor<T>& dy, Tensor<T>& grad_gamma, Tensor<T>& grad_beta) {
  const int B = dy.shape[0], C = dy.shape[1], H = dy.shape[2], W = dy.shape[3];
  const long long plane = static_cast<long long>(H) * W;
  const long long n = static_cast<long long>(B) * plane;
  Tensor<T> dx(dy.shape);
  for (int c = 0; c < C; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int b = 0; b < B; ++b) {
      const long long off = (static_cast<long long>(b) * C + c) * plane;
      const T* d = dy.ptr() + off;
      const T* xh = cache.xhat.ptr() + off;
      for (long long i = 0; i < plane; ++i) {
        sum_dy += d[i];
        sum_dy_xhat += static_cast<double>(d[i]) * xh[i];
      }
    }
    grad_gamma.data[c] += static_cast<T>(sum_dy_xhat);
    grad_beta.data[c] += static_cast<T>(sum_dy);
    const double scale = static_cast<double>(layer.gamma.data[c]) * cache.invstd[c] / n;
    for (int b = 0; b < B; ++b) {
      const long long off = (static_cast<long long>(b) * C + c) * plane;
      const T* d = dy.ptr() + off;
      const T* xh = cache.xhat.ptr() + off;
      T* out = dx.ptr() + off;
      for (long long i = 0; i < plane; ++i)
        out[i] = static_cast<T>(scale * (n * d[i] - sum_dy - xh[i] * sum_dy_xhat));
    }
  }
  return dx;
}

template <typename T>
void relu_inplace(Tensor<T>& x) {
  for (T& v : x.data) v = v > T(0) ? v : T(0);
}

/// dx = dy masked by the cached post-activation output.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& out, const Tensor<T>& dy) {
  Tensor<T> dx(dy.shape);
  for (std::size_t i = 0; i < dy.size(); ++i)
    dx.data[i] = out.data[i] > T(0) ? dy.data[i] : T(0);
  return dx;
}

/// 3x3 stride-2 pad-1 max pooling (resnet18 stem). Records argmax for the
/// backward scatter.
template <typename T>
Tensor<T> maxpool_forward(const Tensor<T>& x, std::vector<int>* argmax) {
  const int B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  const int OH = (H - 1) / 2 + 1, OW = (W - 1) / 2 + 1;
  Tensor<T> y({B, C, OH, OW});
  if (argmax) argmax->assign(y.size(), -1);
  long long o = 0;
  for (int bc = 0; bc < B * C; ++bc) {
    const T* p = x.ptr() + static_cast<long long>(bc) * H * W;
    for (int oy = 0; oy < OH; ++oy) {
      for (int ox = 0; ox < OW; ++ox, ++o) {
        T best = std::numeric_limits<T>::lowest();
        int best_idx = -1;
        for (int ky = -1; ky <= 1; ++ky) {
          const int iy = oy * 2 + ky;
          if (iy < 0 || iy >= H) continue;
          for (int kx = -1; kx <= 1; ++kx) {
            const int ix = ox * 2 + kx;
            if (ix < 0 || ix >= W) continue;
            const int idx = iy * W + ix;
            if (p[idx] > best) {
              best = p[idx];
              best_idx = idx;
            }
          }
        }
        y.data[o] = best;
        if (argmax) (*argmax)[o] = bc * H * W + best_idx;
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> maxpool_backward(const std::vector<int>& argmax, const Tensor<T>& dy,
                           const std::vector<int>& input_shape) {
  Tensor<T> dx(input_shape);
  for (std::size_t i = 0; i < dy.size(); ++i) dx.data[argmax[i]] += dy.data[i];
  return dx;
}

/// Global average pool: (B,C,H,W) -> (B,C).
template <typename T>
Tensor<T> gap_forward(const Tensor<T>& x) {
  const int B = x.shape[0], C = x.shape[1];
  const long long plane = static_cast<long long>(x.shape[2]) * x.shape[3];
  Tensor<T> y({B, C});
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) {
      double s = 0.0;
      const T* p = x.ptr() + (static_cast<long long>(b) * C + c) * plane;
      for (long long i = 0; i < plane; ++i) s += p[i];
      y.data[static_cast<long long>(b) * C + c] = static_cast<T>(s / plane);
    }
  return y;
}

template <typename T>
Tensor<T> gap_backward(const Tensor<T>& dy, const std::vector<int>& input_shape) {
  Tensor<T> dx(input_shape);
  const int B = input_shape[0], C = input_shape[1];
  const long long plane = static_cast<long long>(input_shape[2]) * input_shape[3];
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) {
      const T g = dy.data[static_cast<long long>(b) * C + c] / static_cast<T>(plane);
      T* p = dx.ptr() + (static_cast<long long>(b) * C + c) * plane;
      for (long long i = 0; i < plane; ++i) p[i] = g;
    }
  return dx;
}

template <typename T>
Tensor<T> linear_forward(const LinearLayer<T>& layer, const Tensor<T>& x) {
  const int B = x.shape[0];
  if (x.shape.size() != 2 || x.shape[1] != layer.in)
    throw std::invalid_argument("shape-error: linear input expected (B," +
                                std::to_string(layer.in) + "), got " + shape_string(x.shape));
  Tensor<T> y({B, layer.out});
  gemm_nt(B, layer.out, layer.in, x.ptr(), layer.w.ptr(), y.ptr(), false);
  for (int b = 0; b < B; ++b)
    for (int o = 0; o < layer.out; ++o) y.data[static_cast<long long>(b) * layer.out + o] +=
        layer.b.data[o];
  return y;
}

template <typename T>
Tensor<T> linear_backward(const LinearLayer<T>& layer, const Tensor<T>& x, const Tensor<T>& dy,
                          Tensor<T>& grad_w, Tensor<T>& grad_b) {
  const int B = x.shape[0];
  Tensor<T> dx({B, layer.in});
  gemm_nn(B, layer.in, layer.out, dy.ptr(), layer.w.ptr(), dx.ptr(), false);
  for (int b = 0; b < B; ++b) {
    const T* xb = x.ptr() + static_cast<long long>(b) * layer.in;
    const T* db = dy.ptr() + static_cast<long long>(b) * layer.out;
    for (int o = 0; o < layer.out; ++o) {
      grad_b.data[o] += db[o];
      T* gw = grad_w.ptr() + static_cast<long long>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) gw[i] += db[o] * xb[i];
    }
  }
  return dx;
}

}  // namespace sstml::nn

#endif
