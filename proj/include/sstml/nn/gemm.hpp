#ifndef SSTML_NN_GEMM_HPP
#define SSTML_NN_GEMM_HPP

namespace sstml::nn {

/// C[M x N] (+)= A[M x K] * B[K x N], all row-major. The k-innermost
/// broadcast/axpy form with four-row blocking keeps B streaming and lets
/// the compiler vectorize the j loop.
template <typename T>
void gemm_nn(int M, int N, int K, const T* A, const T* B, T* C, bool accumulate) {
  if (!accumulate) {
    for (long long i = 0; i < static_cast<long long>(M) * N; ++i) C[i] = T(0);
  }
  int i = 0;
  for (; i + 4 <= M; i += 4) {
    T* __restrict c0 = C + static_cast<long long>(i) * N;
    T* __restrict c1 = c0 + N;
    T* __restrict c2 = c1 + N;
    T* __restrict c3 = c2 + N;
    for (int k = 0; k < K; ++k) {
      const T a0 = A[static_cast<long long>(i) * K + k];
      const T a1 = A[static_cast<long long>(i + 1) * K + k];
      const T a2 = A[static_cast<long long>(i + 2) * K + k];
      const T a3 = A[static_cast<long long>(i + 3) * K + k];
      const T* __restrict b = B + static_cast<long long>(k) * N;
      for (int j = 0; j < N; ++j) {
        c0[j] += a0 * b[j];
        c1[j] += a1 * b[j];
        c2[j] += a2 * b[j];
        c3[j] += a3 * b[j];
      }
    }
  }
  for (; i < M; ++i) {
    T* __restrict c = C + static_cast<long long>(i) * N;
    for (int k = 0; k < K; ++k) {
      const T a = A[static_cast<long long>(i) * K + k];
      const T* __restrict b = B + static_cast<long long>(k) * N;
      for (int j = 0; j < N; ++j) c[j] += a * b[j];
    }
  }
}

/// C[M x N] (+)= A[M x K] * B^T where B is [N x K] row-major: a grid of
/// dot products over contiguous rows, unrolled 4x2 with split accumulators
/// so the reduction pipelines.
template <typename T>
void gemm_nt(int M, int N, int K, const T* A, const T* B, T* C, bool accumulate) {
  for (int i = 0; i < M; ++i) {
    const T* __restrict a = A + static_cast<long long>(i) * K;
    T* c = C + static_cast<long long>(i) * N;
    for (int j = 0; j < N; ++j) {
      const T* __restrict b = B + static_cast<long long>(j) * K;
      T s0 = T(0), s1 = T(0), s2 = T(0), s3 = T(0);
      int k = 0;
      for (; k + 4 <= K; k += 4) {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
      }
      T s = (s0 + s1) + (s2 + s3);
      for (; k < K; ++k) s += a[k] * b[k];
      c[j] = accumulate ? c[j] + s : s;
    }
  }
}

}  // namespace sstml::nn

#endif
