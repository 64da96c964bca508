// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

// AArch64 NEON variants. Built only on aarch64 targets, where NEON is part of
// the base ISA.
#include <arm_neon.h>

#include "kernel_variants.hpp"

namespace lunar::kernels::detail {

float dot_neon(const float* x, const float* y, std::size_t n) {
    float32x4_t acc0 = vdupq_n_f32(0.0f);
    float32x4_t acc1 = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = vfmaq_f32(acc0, vld1q_f32(x + i), vld1q_f32(y + i));
        acc1 = vfmaq_f32(acc1, vld1q_f32(x + i + 4), vld1q_f32(y + i + 4));
    }
    float acc = vaddvq_f32(vaddq_f32(acc0, acc1));
    for (; i < n; ++i) {
        acc += x[i] * y[i];
    }
    return acc;
}

double dot_f64_neon(const float* x, const float* y, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t xv = vld1q_f32(x + i);
        const float32x4_t yv = vld1q_f32(y + i);
        acc0 = vfmaq_f64(acc0, vcvt_f64_f32(vget_low_f32(xv)), vcvt_f64_f32(vget_low_f32(yv)));
        acc1 = vfmaq_f64(acc1, vcvt_high_f64_f32(xv), vcvt_high_f64_f32(yv));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) {
        acc += static_cast<double>(x[i]) * static_cast<double>(y[i]);
    }
    return acc;
}

void axpy_neon(float alpha, const float* x, float* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f32(y + i, vfmaq_n_f32(vld1q_f32(y + i), vld1q_f32(x + i), alpha));
    }
    for (; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void gemm_nn_neon(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                  const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        float* crow = c + i * ldc;
        if (!accumulate) {
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] = 0.0f;
            }
        }
        const float* arow = a + i * lda;
        for (std::size_t p = 0; p < k; ++p) {
            axpy_neon(arow[p], b + p * ldb, crow, n);
        }
    }
}

}  // namespace lunar::kernels::detail
