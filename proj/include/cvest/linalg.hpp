#pragma once

#include <cstddef>
#include <vector>

namespace cvest {

// Small dense row-major matrix. Everything in this project is tiny (covariance
// blocks of the surrogate dimension, OLS normal equations), so no BLAS.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Cholesky factor L (lower triangular, A = L L^T) of a symmetric matrix.
// Returns false if a pivot is non-positive or non-finite.
bool cholesky_factor(const Matrix& a, Matrix& l);

// Solve L L^T x = b given the factor from cholesky_factor.
std::vector<double> cholesky_solve(const Matrix& l, const std::vector<double>& b);

// Solve a x = b for symmetric positive semidefinite a, adding a ridge of
// eps * trace(a)/dim to the diagonal before factoring. The ridge starts at
// eps = 1e-10 and escalates by 10x up to 1e-4; if no attempt factors, throws
// Error(singular_covariance).
std::vector<double> solve_spd_ridge(const Matrix& a, const std::vector<double>& b);

double dot(const std::vector<double>& a, const std::vector<double>& b);

} // namespace cvest
