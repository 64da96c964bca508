// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstddef>

namespace lunar::kernels::detail {

float dot_scalar(const float* x, const float* y, std::size_t n);
double dot_f64_scalar(const float* x, const float* y, std::size_t n);
void axpy_scalar(float alpha, const float* x, float* y, std::size_t n);
void gemm_nn_scalar(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                    const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate);

#if defined(LUNAR_HAVE_AVX2)
float dot_avx2(const float* x, const float* y, std::size_t n);
double dot_f64_avx2(const float* x, const float* y, std::size_t n);
void axpy_avx2(float alpha, const float* x, float* y, std::size_t n);
void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                  const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate);
#endif

#if defined(LUNAR_HAVE_NEON)
float dot_neon(const float* x, const float* y, std::size_t n);
double dot_f64_neon(const float* x, const float* y, std::size_t n);
void axpy_neon(float alpha, const float* x, float* y, std::size_t n);
void gemm_nn_neon(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
                  const float* b, std::size_t ldb, float* c, std::size_t ldc, bool accumulate);
#endif

}  // namespace lunar::kernels::detail
