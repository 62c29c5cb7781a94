#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <vector>

#include "csi2img/parallel.hpp"

namespace csi2img {

// Deterministic kernels: every output element is accumulated in an order
// fixed by the code alone, so results are identical for any worker count.

// Dot product with eight independent accumulator lanes and a fixed-order
// tail/merge. Lane l always holds indices congruent to l mod 8, so the
// result is identical however the build vectorizes it.
template <typename T>
inline T dot_lanes(const T* a, const T* b, int k) {
    T lanes[8] = {T(0), T(0), T(0), T(0), T(0), T(0), T(0), T(0)};
    int kk = 0;
    for (; kk + 8 <= k; kk += 8)
        for (int l = 0; l < 8; ++l) lanes[l] += a[kk + l] * b[kk + l];
    T s = T(0);
    for (int l = 0; l < 8; ++l) s += lanes[l];
    for (; kk < k; ++kk) s += a[kk] * b[kk];
    return s;
}

#if defined(__AVX__)
// Same contract as the generic version with the lanes held in one ymm
// register; the autovectorizer makes a mess of the generic form on
// wider-vector targets.
template <>
inline float dot_lanes<float>(const float* a, const float* b, int k) {
    typedef float vf8 __attribute__((vector_size(32)));
    vf8 acc = {0.f, 0.f, 0.f, 0.f, 0.f, 0.f, 0.f, 0.f};
    int kk = 0;
    for (; kk + 8 <= k; kk += 8) {
        vf8 va, vb;
        __builtin_memcpy(&va, a + kk, 32);
        __builtin_memcpy(&vb, b + kk, 32);
        acc += va * vb;
    }
    float s = 0.f;
    for (int l = 0; l < 8; ++l) s += acc[l];
    for (; kk < k; ++kk) s += a[kk] * b[kk];
    return s;
}
#endif

// C[m x n] = A[m x k] * B[k x n], row-major, optionally accumulating.
//
// Narrow outputs (small n, the reduced-width convolutions) go through a
// row-dot kernel on a transposed copy of B; wide outputs use a saxpy loop
// that vectorizes over n.
template <typename T>
void gemm(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate = false) {
    if (n <= 16) {
        std::vector<T> bt(size_t(n) * size_t(k));
        for (int kk = 0; kk < k; ++kk)
            for (int j = 0; j < n; ++j) bt[size_t(j) * k + kk] = b[size_t(kk) * n + j];
        const T* btp = bt.data();
        parallel_for(0, m, [=](int64_t lo, int64_t hi) {
            for (int64_t i = lo; i < hi; ++i) {
                const T* arow = a + i * k;
                T* crow = c + i * n;
                for (int j = 0; j < n; ++j) {
                    const T dot = dot_lanes(arow, btp + int64_t(j) * k, k);
                    crow[j] = accumulate ? crow[j] + dot : dot;
                }
            }
        });
        return;
    }
    parallel_for(0, m, [=](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            T* crow = c + i * n;
            if (!accumulate)
                for (int j = 0; j < n; ++j) crow[j] = T(0);
            const T* arow = a + i * k;
            for (int kk = 0; kk < k; ++kk) {
                const T av = arow[kk];
                const T* brow = b + int64_t(kk) * n;
                for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    });
}

// C[k x n] = A^T * B for A[m x k], B[m x n]; the weight-gradient reduction.
//
// Narrow n accumulates transposed per-chunk partials over a fixed number of
// row chunks (so the reduction order does not depend on the worker count),
// then folds the chunks in index order. Wide n keeps the per-output-row
// loop, which already vectorizes over n.
template <typename T>
void gemm_at(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate = false) {
    if (n <= 16) {
        constexpr int kChunks = 16;
        const int64_t chunk_rows = (int64_t(m) + kChunks - 1) / kChunks;
        std::vector<T> partials(size_t(kChunks) * size_t(n) * size_t(k), T(0));
        T* pp = partials.data();
        parallel_for(0, kChunks, [=](int64_t clo, int64_t chi) {
            for (int64_t ci = clo; ci < chi; ++ci) {
                const int64_t rlo = ci * chunk_rows;
                const int64_t rhi = std::min<int64_t>(m, rlo + chunk_rows);
                T* part = pp + ci * int64_t(n) * k;  // [n x k]
                for (int64_t r = rlo; r < rhi; ++r) {
                    const T* arow = a + r * k;
                    const T* brow = b + r * n;
                    for (int j = 0; j < n; ++j) {
                        const T bv = brow[j];
                        T* prow = part + int64_t(j) * k;
                        for (int kk = 0; kk < k; ++kk) prow[kk] += bv * arow[kk];
                    }
                }
            }
        });
        for (int kk = 0; kk < k; ++kk)
            for (int j = 0; j < n; ++j) {
                T s = accumulate ? c[size_t(kk) * n + j] : T(0);
                for (int ci = 0; ci < kChunks; ++ci)
                    s += partials[(size_t(ci) * n + j) * k + kk];
                c[size_t(kk) * n + j] = s;
            }
        return;
    }
    parallel_for(0, k, [=](int64_t lo, int64_t hi) {
        for (int64_t kk = lo; kk < hi; ++kk) {
            T* crow = c + kk * n;
            if (!accumulate)
                for (int j = 0; j < n; ++j) crow[j] = T(0);
            for (int r = 0; r < m; ++r) {
                const T av = a[int64_t(r) * k + kk];
                const T* brow = b + int64_t(r) * n;
                for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    });
}

}  // namespace csi2img
