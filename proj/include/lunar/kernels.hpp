// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

// Dense f32 inner-loop kernels with a scalar reference implementation and
// SIMD variants selected once at runtime. Everything numeric in the model and
// in linalg funnels through one of these entry points.
#pragma once

#include <cstddef>
#include <string_view>

namespace lunar::kernels {

// All matrices are row-major with explicit leading dimensions.
struct KernelTable {
    const char* name;

    // sum_i x[i]*y[i], f32 accumulation.
    float (*dot)(const float* x, const float* y, std::size_t n);
    // sum_i x[i]*y[i], f64 accumulation.
    double (*dot_f64)(const float* x, const float* y, std::size_t n);
    // y += alpha * x
    void (*axpy)(float alpha, const float* x, float* y, std::size_t n);
    // C(m x n) = A(m x k) * B(k x n), or C += A*B when accumulate is set.
    void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                    const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate);
};

const KernelTable& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// Chosen on first use: the best supported variant, unless the environment
// variable LUNAR_LAB_KERNELS names one explicitly ("scalar", "avx2", "neon").
const KernelTable& active();

// Overrides the active table (tests, benchmarks). Not thread-safe with
// concurrent kernel calls.
void set_active(const KernelTable& table);

// Convenience wrappers over active().
inline float dot(const float* x, const float* y, std::size_t n) { return active().dot(x, y, n); }
inline double dot_f64(const float* x, const float* y, std::size_t n) { return active().dot_f64(x, y, n); }
inline void axpy(float alpha, const float* x, float* y, std::size_t n) { active().axpy(alpha, x, y, n); }

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda, const float* b,
             std::size_t ldb, float* c, std::size_t ldc, bool accumulate = false);

// C(m x n) (+)= A(m x k) * B(n x k)^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda, const float* b,
             std::size_t ldb, float* c, std::size_t ldc, bool accumulate = false);

// C(k x n) (+)= A(m x k)^T * B(m x n)
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda, const float* b,
             std::size_t ldb, float* c, std::size_t ldc, bool accumulate = false);

}  // namespace lunar::kernels
