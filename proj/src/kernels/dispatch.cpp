// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "kernel_variants.hpp"
#include "lunar/kernels.hpp"

namespace lunar::kernels {

namespace {

const KernelTable kScalar{"scalar", detail::dot_scalar, detail::dot_f64_scalar, detail::axpy_scalar,
                          detail::gemm_nn_scalar};

#if defined(LUNAR_HAVE_AVX2)
const KernelTable kAvx2{"avx2", detail::dot_avx2, detail::dot_f64_avx2, detail::axpy_avx2, detail::gemm_nn_avx2};
#endif

#if defined(LUNAR_HAVE_NEON)
const KernelTable kNeon{"neon", detail::dot_neon, detail::dot_f64_neon, detail::axpy_neon, detail::gemm_nn_neon};
#endif

const KernelTable* pick_default() {
    const char* env = std::getenv("LUNAR_LAB_KERNELS");
    const std::string_view want = env != nullptr ? env : "";
    if (want == "scalar") {
        return &kScalar;
    }
    if (want == "avx2" && avx2_table() != nullptr) {
        return avx2_table();
    }
    if (want == "neon" && neon_table() != nullptr) {
        return neon_table();
    }
    if (const KernelTable* t = avx2_table()) {
        return t;
    }
    if (const KernelTable* t = neon_table()) {
        return t;
    }
    return &kScalar;
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> table{pick_default()};
    return table;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(LUNAR_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &kAvx2 : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable* neon_table() {
#if defined(LUNAR_HAVE_NEON)
    return &kNeon;
#else
    return nullptr;
#endif
}

const KernelTable& active() { return *slot().load(std::memory_order_relaxed); }

void set_active(const KernelTable& table) { slot().store(&table, std::memory_order_relaxed); }

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda, const float* b,
             std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
    active().gemm_nn(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda, const float* b,
             std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
    const KernelTable& t = active();
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = a + i * lda;
        float* crow = c + i * ldc;
        for (std::size_t j = 0; j < n; ++j) {
            const float v = t.dot(arow, b + j * ldb, k);
            crow[j] = accumulate ? crow[j] + v : v;
        }
    }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda, const float* b,
             std::size_t ldb, float* c, std::size_t ldc, bool accumulate) {
    const KernelTable& t = active();
    if (!accumulate) {
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t j = 0; j < n; ++j) {
                c[p * ldc + j] = 0.0f;
            }
        }
    }
    for (std::size_t r = 0; r < m; ++r) {
        const float* arow = a + r * lda;
        const float* brow = b + r * ldb;
        for (std::size_t p = 0; p < k; ++p) {
            if (arow[p] != 0.0f) {
                t.axpy(arow[p], brow, c + p * ldc, n);
            }
        }
    }
}

}  // namespace lunar::kernels
