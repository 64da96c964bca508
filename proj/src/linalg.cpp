// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "lunar/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lunar/errors.hpp"
#include "lunar/kernels.hpp"

namespace lunar {

namespace {

std::string shape(std::size_t r, std::size_t c) { return std::to_string(r) + "x" + std::to_string(c); }

// In-place lower Cholesky of an n x n SPD matrix. Returns false on a
// non-positive pivot.
bool cholesky(std::vector<double>& a, std::size_t n) {
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        max_diag = std::max(max_diag, std::abs(a[i * n + i]));
    }
    const double floor = max_diag * 1e-15;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) {
            d -= a[j * n + k] * a[j * n + k];
        }
        if (!(d > floor)) {
            return false;
        }
        const double ljj = std::sqrt(d);
        a[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / ljj;
        }
    }
    return true;
}

// Solves L L^T X = B for X, overwriting b (n x q).
void cholesky_solve(const std::vector<double>& l, std::size_t n, std::vector<double>& b, std::size_t q) {
    for (std::size_t c = 0; c < q; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[i * q + c];
            for (std::size_t k = 0; k < i; ++k) {
                s -= l[i * n + k] * b[k * q + c];
            }
            b[i * q + c] = s / l[i * n + i];
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = b[ii * q + c];
            for (std::size_t k = ii + 1; k < n; ++k) {
                s -= l[k * n + ii] * b[k * q + c];
            }
            b[ii * q + c] = s / l[ii * n + ii];
        }
    }
}

// G W with G (p x p) and W (p x q), both f64.
std::vector<double> mul_f64(const MatrixF64& g, const MatrixF64& w) {
    std::vector<double> out(g.rows * w.cols, 0.0);
    for (std::size_t i = 0; i < g.rows; ++i) {
        for (std::size_t k = 0; k < g.cols; ++k) {
            const double gv = g(i, k);
            if (gv == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < w.cols; ++j) {
                out[i * w.cols + j] += gv * w(k, j);
            }
        }
    }
    return out;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, float fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
        throw DimensionError("matrix dimensions must be positive, got " + shape(rows, cols));
    }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) {
        throw DimensionError("matrix dimensions must be positive, got " + shape(rows, cols));
    }
    if (data_.size() != rows * cols) {
        throw DimensionError("matrix data length " + std::to_string(data_.size()) + " does not match " +
                             shape(rows, cols));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0f;
    }
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<float>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r > 0 ? rows.begin()->size() : 0;
    std::vector<float> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) {
            throw DimensionError("ragged initializer for matrix");
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(data));
}

MatrixF64 to_f64(const Matrix& m) {
    MatrixF64 out(m.rows(), m.cols());
    std::copy(m.values().begin(), m.values().end(), out.data.begin());
    return out;
}

Matrix to_f32(const MatrixF64& m) {
    std::vector<float> data(m.data.size());
    std::transform(m.data.begin(), m.data.end(), data.begin(), [](double v) { return static_cast<float>(v); });
    return Matrix(m.rows, m.cols, std::move(data));
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            t(j, i) = a(i, j);
        }
    }
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: " + shape(a.rows(), a.cols()) + " times " + shape(b.rows(), b.cols()));
    }
    const Matrix bt = transpose(b);
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            c(i, j) = static_cast<float>(kernels::dot_f64(a.row(i).data(), bt.row(j).data(), a.cols()));
        }
    }
    return c;
}

double frobenius_norm(const Matrix& a) { return std::sqrt(kernels::dot_f64(a.data(), a.data(), a.size())); }

double frobenius_distance(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("frobenius_distance: shape mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.data()[i]) - static_cast<double>(b.data()[i]);
        s += d * d;
    }
    return std::sqrt(s);
}

MatrixF64 gram(const Matrix& h) {
    const Matrix ht = transpose(h);
    const std::size_t p = h.cols();
    MatrixF64 g(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = kernels::dot_f64(ht.row(i).data(), ht.row(j).data(), h.rows());
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

MatrixF64 cross(const Matrix& h, const Matrix& a) {
    if (h.rows() != a.rows()) {
        throw DimensionError("cross: row mismatch " + shape(h.rows(), h.cols()) + " vs " + shape(a.rows(), a.cols()));
    }
    const Matrix ht = transpose(h);
    const Matrix at = transpose(a);
    MatrixF64 out(h.cols(), a.cols());
    for (std::size_t i = 0; i < h.cols(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(i, j) = kernels::dot_f64(ht.row(i).data(), at.row(j).data(), h.rows());
        }
    }
    return out;
}

double trace(const MatrixF64& g) {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(g.rows, g.cols); ++i) {
        t += g(i, i);
    }
    return t;
}

double ridge_objective(const Matrix& h, const Matrix& a, const MatrixF64& w, double lambda) {
    if (h.cols() != w.rows || h.rows() != a.rows() || a.cols() != w.cols) {
        throw DimensionError("ridge_objective: inconsistent shapes");
    }
    double loss = 0.0;
    for (std::size_t r = 0; r < h.rows(); ++r) {
        for (std::size_t j = 0; j < w.cols; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < h.cols(); ++k) {
                s += static_cast<double>(h(r, k)) * w(k, j);
            }
            const double d = s - static_cast<double>(a(r, j));
            loss += d * d;
        }
    }
    if (lambda > 0.0) {
        double wn = 0.0;
        for (double v : w.data) {
            wn += v * v;
        }
        loss += lambda * wn;
    }
    return loss;
}

double ridge_objective(const Matrix& h, const Matrix& a, const Matrix& w, double lambda) {
    return ridge_objective(h, a, to_f64(w), lambda);
}

RidgeSolution ridge_solve(const Matrix& h, const Matrix& a, double lambda) {
    if (h.rows() != a.rows()) {
        throw DimensionError("ridge_solve: H has " + std::to_string(h.rows()) + " rows but A has " +
                             std::to_string(a.rows()));
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw DimensionError("ridge_solve: lambda must be finite and non-negative");
    }
    const std::size_t n = h.rows();
    const std::size_t p = h.cols();
    const std::size_t q = a.cols();

    RidgeSolution sol;
    sol.lambda = lambda;
    sol.weights_f64 = MatrixF64(p, q);
    const MatrixF64 g = gram(h);

    if (n >= p) {
        std::vector<double> sys = g.data;
        for (std::size_t i = 0; i < p; ++i) {
            sys[i * p + i] += lambda;
        }
        if (!cholesky(sys, p)) {
            throw SingularSystemError("ridge_solve: H^T H + lambda I is not positive definite (lambda=" +
                                      std::to_string(lambda) + ", p=" + std::to_string(p) + ")");
        }
        MatrixF64 rhs = cross(h, a);
        cholesky_solve(sys, p, rhs.data, q);
        sol.weights_f64 = std::move(rhs);
    } else {
        // Dual form: W = H^T (H H^T + lambda I)^{-1} A.
        std::vector<double> sys(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const double v = kernels::dot_f64(h.row(i).data(), h.row(j).data(), p);
                sys[i * n + j] = v;
                sys[j * n + i] = v;
            }
            sys[i * n + i] += lambda;
        }
        if (!cholesky(sys, n)) {
            throw SingularSystemError("ridge_solve: H H^T + lambda I is not positive definite; H is not full row rank "
                                      "(lambda=" + std::to_string(lambda) + ", rows=" + std::to_string(n) + ")");
        }
        std::vector<double> z(n * q);
        std::copy(a.values().begin(), a.values().end(), z.begin());
        cholesky_solve(sys, n, z, q);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t k = 0; k < p; ++k) {
                const double hv = h(r, k);
                if (hv == 0.0) {
                    continue;
                }
                for (std::size_t j = 0; j < q; ++j) {
                    sol.weights_f64(k, j) += hv * z[r * q + j];
                }
            }
        }
    }

    // Normal-equation residual of the f64 solution.
    const MatrixF64 hta = cross(h, a);
    std::vector<double> gw = mul_f64(g, sol.weights_f64);
    double nr = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < q; ++j) {
            const double d = gw[i * q + j] + lambda * sol.weights_f64(i, j) - hta(i, j);
            nr += d * d;
        }
    }
    sol.normal_residual = std::sqrt(nr);
    sol.weights = to_f32(sol.weights_f64);
    sol.residual_frobenius = std::sqrt(ridge_objective(h, a, sol.weights, 0.0));
    return sol;
}

double default_gram_tolerance(const Matrix& h) {
    return 1e-8 * trace(gram(h)) / static_cast<double>(h.cols());
}

std::vector<double> symmetric_eigenvalues(const MatrixF64& g) {
    if (g.rows != g.cols) {
        throw DimensionError("symmetric_eigenvalues: matrix is not square");
    }
    const std::size_t n = g.rows;
    std::vector<double> a = g.data;
    double total = 0.0;
    for (double v : a) {
        total += v * v;
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if (off <= 1e-30 * total || off == 0.0) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) {
                    continue;
                }
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) {
        eig[i] = a[i * n + i];
    }
    std::sort(eig.begin(), eig.end());
    return eig;
}

GramCheck gram_is_invertible(const Matrix& h, double tol) {
    const std::vector<double> eig = symmetric_eigenvalues(gram(h));
    GramCheck out;
    out.min_eigenvalue = eig.front();
    out.invertible = out.min_eigenvalue > tol;
    return out;
}

GramCheck gram_is_invertible(const Matrix& h) { return gram_is_invertible(h, default_gram_tolerance(h)); }

EigenEstimate max_eigenvalue_sym(const MatrixF64& g, std::size_t iters, double tol) {
    if (g.rows != g.cols) {
        throw DimensionError("max_eigenvalue_sym: matrix is not square");
    }
    const std::size_t n = g.rows;
    // Deterministic, non-degenerate start vector.
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = 1.0 + 0.1 * std::sin(static_cast<double>(i) + 1.0);
    }
    auto normalize = [](std::vector<double>& x) {
        const double nrm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
        if (nrm > 0.0) {
            for (double& e : x) {
                e /= nrm;
            }
        }
        return nrm;
    };
    normalize(v);

    EigenEstimate est;
    std::vector<double> w(n);
    double prev = 0.0;
    for (std::size_t it = 1; it <= iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                s += g(i, j) * v[j];
            }
            w[i] = s;
        }
        const double rayleigh = std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
        est.value = std::max(rayleigh, 0.0);
        est.iterations = it;
        if (normalize(w) == 0.0) {
            est.converged = true;
            est.value = 0.0;
            return est;
        }
        v.swap(w);
        if (it > 1 && std::abs(rayleigh - prev) <= tol * std::max(std::abs(rayleigh), 1e-300)) {
            est.converged = true;
            return est;
        }
        prev = rayleigh;
    }
    return est;
}

EigenEstimate max_eigenvalue_sym(const Matrix& g, std::size_t iters, double tol) {
    return max_eigenvalue_sym(to_f64(g), iters, tol);
}

Matrix finite_diff_gradient(const MatrixLoss& loss, const Matrix& w, double eps) {
    if (!(eps > 0.0)) {
        throw DimensionError("finite_diff_gradient: eps must be positive");
    }
    Matrix grad(w.rows(), w.cols());
    Matrix probe = w;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const float orig = probe.data()[i];
        probe.data()[i] = static_cast<float>(orig + eps);
        const double up = loss(probe);
        probe.data()[i] = static_cast<float>(orig - eps);
        const double down = loss(probe);
        probe.data()[i] = orig;
        grad.data()[i] = static_cast<float>((up - down) / (2.0 * eps));
    }
    return grad;
}

}  // namespace lunar
