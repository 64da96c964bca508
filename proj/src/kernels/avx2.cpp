// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

// AVX2 + FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; nothing here may be called unless the CPU reports both.
#include <immintrin.h>

#include "kernel_variants.hpp"

namespace lunar::kernels::detail {

namespace {

inline float hsum(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 shuf = _mm_movehdup_ps(lo);
    __m128 sums = _mm_add_ps(lo, shuf);
    shuf = _mm_movehl_ps(shuf, sums);
    sums = _mm_add_ss(sums, shuf);
    return _mm_cvtss_f32(sums);
}

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d high64 = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, high64));
}

// One output row of C over columns [j0, n): C[j] (+)= sum_p a[p] * B[p][j].
void gemm_row_tail(std::size_t n, std::size_t j0, std::size_t k, const float* arow, const float* b,
                   std::size_t ldb, float* crow) {
    std::size_t j = j0;
    for (; j + 8 <= n; j += 8) {
        __m256 acc = _mm256_loadu_ps(crow + j);
        for (std::size_t p = 0; p < k; ++p) {
            acc = _mm256_fmadd_ps(_mm256_set1_ps(arow[p]), _mm256_loadu_ps(b + p * ldb + j), acc);
        }
        _mm256_storeu_ps(crow + j, acc);
    }
    for (; j < n; ++j) {
        float acc = crow[j];
        for (std::size_t p = 0; p < k; ++p) {
            acc += arow[p] * b[p * ldb + j];
        }
        crow[j] = acc;
    }
}

}  // namespace

float dot_avx2(const float* x, const float* y, std::size_t n) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
    }
    float acc = hsum(_mm256_add_ps(acc0, acc1));
    for (; i < n; ++i) {
        acc += x[i] * y[i];
    }
    return acc;
}

double dot_f64_avx2(const float* x, const float* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 xv = _mm256_loadu_ps(x + i);
        const __m256 yv = _mm256_loadu_ps(y + i);
        acc0 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(xv)),
                               _mm256_cvtps_pd(_mm256_castps256_ps128(yv)), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(xv, 1)),
                               _mm256_cvtps_pd(_mm256_extractf128_ps(yv, 1)), acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        acc += static_cast<double>(x[i]) * static_cast<double>(y[i]);
    }
    return acc;
}

void axpy_avx2(float alpha, const float* x, float* y, std::size_t n) {
    const __m256 av = _mm256_set1_ps(alpha);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    }
    for (; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

// 4x16 register tile: eight accumulators, B rows streamed once per tile.
void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                  const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
    if (!accumulate) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                c[i * ldc + j] = 0.0f;
            }
        }
    }
    const std::size_t n16 = n - n % 16;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const float* a0 = a + (i + 0) * lda;
        const float* a1 = a + (i + 1) * lda;
        const float* a2 = a + (i + 2) * lda;
        const float* a3 = a + (i + 3) * lda;
        float* c0 = c + (i + 0) * ldc;
        float* c1 = c + (i + 1) * ldc;
        float* c2 = c + (i + 2) * ldc;
        float* c3 = c + (i + 3) * ldc;
        for (std::size_t j = 0; j < n16; j += 16) {
            __m256 r00 = _mm256_loadu_ps(c0 + j), r01 = _mm256_loadu_ps(c0 + j + 8);
            __m256 r10 = _mm256_loadu_ps(c1 + j), r11 = _mm256_loadu_ps(c1 + j + 8);
            __m256 r20 = _mm256_loadu_ps(c2 + j), r21 = _mm256_loadu_ps(c2 + j + 8);
            __m256 r30 = _mm256_loadu_ps(c3 + j), r31 = _mm256_loadu_ps(c3 + j + 8);
            for (std::size_t p = 0; p < k; ++p) {
                const float* brow = b + p * ldb + j;
                const __m256 b0 = _mm256_loadu_ps(brow);
                const __m256 b1 = _mm256_loadu_ps(brow + 8);
                __m256 av = _mm256_set1_ps(a0[p]);
                r00 = _mm256_fmadd_ps(av, b0, r00);
                r01 = _mm256_fmadd_ps(av, b1, r01);
                av = _mm256_set1_ps(a1[p]);
                r10 = _mm256_fmadd_ps(av, b0, r10);
                r11 = _mm256_fmadd_ps(av, b1, r11);
                av = _mm256_set1_ps(a2[p]);
                r20 = _mm256_fmadd_ps(av, b0, r20);
                r21 = _mm256_fmadd_ps(av, b1, r21);
                av = _mm256_set1_ps(a3[p]);
                r30 = _mm256_fmadd_ps(av, b0, r30);
                r31 = _mm256_fmadd_ps(av, b1, r31);
            }
            _mm256_storeu_ps(c0 + j, r00);
            _mm256_storeu_ps(c0 + j + 8, r01);
            _mm256_storeu_ps(c1 + j, r10);
            _mm256_storeu_ps(c1 + j + 8, r11);
            _mm256_storeu_ps(c2 + j, r20);
            _mm256_storeu_ps(c2 + j + 8, r21);
            _mm256_storeu_ps(c3 + j, r30);
            _mm256_storeu_ps(c3 + j + 8, r31);
        }
        if (n16 < n) {
            gemm_row_tail(n, n16, k, a0, b, ldb, c0);
            gemm_row_tail(n, n16, k, a1, b, ldb, c1);
            gemm_row_tail(n, n16, k, a2, b, ldb, c2);
            gemm_row_tail(n, n16, k, a3, b, ldb, c3);
        }
    }
    for (; i < m; ++i) {
        gemm_row_tail(n, 0, k, a + i * lda, b, ldb, c + i * ldc);
    }
}

}  // namespace lunar::kernels::detail
