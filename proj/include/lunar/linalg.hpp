// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

// Dense real linear algebra: the f32 matrix type shared by the model and the
// unlearning engine, plus the f64 ridge solver and the numerical oracles the
// solver is checked against.
#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace lunar {

// Row-major 32-bit matrix. rows >= 1 and cols >= 1 for every constructed value.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, float fill = 0.0f);
    Matrix(std::size_t rows, std::size_t cols, std::vector<float> data);

    static Matrix identity(std::size_t n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<float>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    float operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<float> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const float> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    float* data() noexcept { return data_.data(); }
    const float* data() const noexcept { return data_.data(); }
    std::vector<float>& values() noexcept { return data_; }
    const std::vector<float>& values() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<float> data_;
};

// Row-major 64-bit matrix used where the solver keeps full precision.
struct MatrixF64 {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    MatrixF64() = default;
    MatrixF64(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

MatrixF64 to_f64(const Matrix& m);
Matrix to_f32(const MatrixF64& m);

// Standard product with f64 accumulation. Throws DimensionError when a.cols != b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
double frobenius_norm(const Matrix& a);
double frobenius_distance(const Matrix& a, const Matrix& b);

// H^T H accumulated in f64.
MatrixF64 gram(const Matrix& h);
// H^T A accumulated in f64.
MatrixF64 cross(const Matrix& h, const Matrix& a);
double trace(const MatrixF64& g);

struct RidgeSolution {
    Matrix weights;            // p x q, rounded to f32 for installation into a model
    MatrixF64 weights_f64;     // the solver's full-precision answer
    double lambda = 0.0;
    double residual_frobenius = 0.0;  // ||H * weights - A||_F for the f32 weights
    double normal_residual = 0.0;     // ||(H^T H + lambda I) W - H^T A||_F for the f64 weights
};

// weights = (H^T H + lambda I)^{-1} H^T A via Cholesky. When H has fewer rows
// than columns the equivalent dual system (H H^T + lambda I) Z = A is solved
// instead and W = H^T Z, which at lambda = 0 is the minimum-norm interpolant.
// Throws SingularSystemError if lambda = 0 and the system is not positive definite,
// DimensionError on mismatched row counts or negative lambda.
RidgeSolution ridge_solve(const Matrix& h, const Matrix& a, double lambda);

// ||H W - A||_F^2 + lambda ||W||_F^2 in f64.
double ridge_objective(const Matrix& h, const Matrix& a, const MatrixF64& w, double lambda);
double ridge_objective(const Matrix& h, const Matrix& a, const Matrix& w, double lambda);

struct GramCheck {
    bool invertible = false;
    double min_eigenvalue = 0.0;
};

// Default singularity tolerance: 1e-8 * trace(H^T H) / p.
double default_gram_tolerance(const Matrix& h);
GramCheck gram_is_invertible(const Matrix& h, double tol);
GramCheck gram_is_invertible(const Matrix& h);

// Eigenvalues of a symmetric f64 matrix (cyclic Jacobi), ascending.
std::vector<double> symmetric_eigenvalues(const MatrixF64& g);

struct EigenEstimate {
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Largest eigenvalue of a symmetric PSD matrix by power iteration. On
// non-convergence the last Rayleigh quotient is returned with converged=false.
EigenEstimate max_eigenvalue_sym(const MatrixF64& g, std::size_t iters, double tol);
EigenEstimate max_eigenvalue_sym(const Matrix& g, std::size_t iters, double tol);

using MatrixLoss = std::function<double(const Matrix&)>;

// Central differences, entry by entry: (f(w + eps E_ij) - f(w - eps E_ij)) / (2 eps).
Matrix finite_diff_gradient(const MatrixLoss& loss, const Matrix& w, double eps);

}  // namespace lunar
