// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

// Shared helpers for the unit tests: seeded random matrices and small
// independent oracles (elimination rank, Gauss-Jordan solve, Jacobi sweep)
// written without the library's linear algebra.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lunar/linalg.hpp"

namespace lunar::test {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Matrix m(rows, cols);
    for (auto& v : m.values()) {
        v = static_cast<float>(nd(rng));
    }
    return m;
}

using Dense = std::vector<std::vector<long double>>;

inline Dense to_dense(const Matrix& m) {
    Dense d(m.rows(), std::vector<long double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            d[i][j] = m(i, j);
        }
    }
    return d;
}

// Row echelon rank with partial pivoting; entries below tol * max|entry| count as zero.
inline std::size_t rank_oracle(Dense a, long double rel_tol = 1e-9L) {
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a[0].size() : 0;
    long double amax = 0;
    for (const auto& r : a) {
        for (auto v : r) {
            amax = std::max(amax, std::fabs(v));
        }
    }
    const long double tol = rel_tol * std::max(amax, 1.0L);
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t piv = rank;
        for (std::size_t r = rank + 1; r < rows; ++r) {
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) {
                piv = r;
            }
        }
        if (std::fabs(a[piv][c]) <= tol) {
            continue;
        }
        std::swap(a[piv], a[rank]);
        for (std::size_t r = rank + 1; r < rows; ++r) {
            const long double f = a[r][c] / a[rank][c];
            for (std::size_t k = c; k < cols; ++k) {
                a[r][k] -= f * a[rank][k];
            }
        }
        ++rank;
    }
    return rank;
}

// Solves (H^T H + lambda I) W = H^T A by Gauss-Jordan in long double.
inline Dense ridge_oracle(const Matrix& h, const Matrix& a, long double lambda) {
    const std::size_t n = h.rows();
    const std::size_t p = h.cols();
    const std::size_t q = a.cols();
    Dense aug(p, std::vector<long double>(p + q, 0.0L));
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            long double s = 0;
            for (std::size_t r = 0; r < n; ++r) {
                s += static_cast<long double>(h(r, i)) * h(r, j);
            }
            aug[i][j] = s + (i == j ? lambda : 0.0L);
        }
        for (std::size_t j = 0; j < q; ++j) {
            long double s = 0;
            for (std::size_t r = 0; r < n; ++r) {
                s += static_cast<long double>(h(r, i)) * a(r, j);
            }
            aug[i][p + j] = s;
        }
    }
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < p; ++r) {
            if (std::fabs(aug[r][c]) > std::fabs(aug[piv][c])) {
                piv = r;
            }
        }
        std::swap(aug[piv], aug[c]);
        const long double d = aug[c][c];
        for (auto& v : aug[c]) {
            v /= d;
        }
        for (std::size_t r = 0; r < p; ++r) {
            if (r == c) {
                continue;
            }
            const long double f = aug[r][c];
            for (std::size_t k = 0; k < p + q; ++k) {
                aug[r][k] -= f * aug[c][k];
            }
        }
    }
    Dense w(p, std::vector<long double>(q));
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < q; ++j) {
            w[i][j] = aug[i][p + j];
        }
    }
    return w;
}

// Eigenvalues of a symmetric matrix by classical Jacobi rotations (largest
// off-diagonal first), ascending.
inline std::vector<long double> jacobi_oracle(Dense a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 200 * static_cast<int>(n * n); ++sweep) {
        std::size_t p = 0, q = 1;
        long double best = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (std::fabs(a[i][j]) > best) {
                    best = std::fabs(a[i][j]);
                    p = i;
                    q = j;
                }
            }
        }
        if (best < 1e-15L) {
            break;
        }
        const long double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const long double t = (theta >= 0 ? 1 : -1) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
        const long double c = 1 / std::sqrt(t * t + 1);
        const long double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
            const long double akp = a[k][p], akq = a[k][q];
            a[k][p] = c * akp - s * akq;
            a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
            const long double apk = a[p][k], aqk = a[q][k];
            a[p][k] = c * apk - s * aqk;
            a[q][k] = s * apk + c * aqk;
        }
    }
    std::vector<long double> ev(n);
    for (std::size_t i = 0; i < n; ++i) {
        ev[i] = a[i][i];
    }
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline long double rel_frobenius(const Dense& a, const Matrix& b) {
    long double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a[i].size(); ++j) {
            const long double d = a[i][j] - b(i, j);
            num += d * d;
            den += a[i][j] * a[i][j];
        }
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-30L);
}

}  // namespace lunar::test
