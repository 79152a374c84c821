#pragma once

#include <cassert>
#include <initializer_list>
#include <utility>
#include <vector>

#include "alora/rng.hpp"

namespace alora {

// Dense row-major matrix of 64-bit reals. The universal numeric carrier:
// weights, low-rank factors, input/output batches all live here.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(checked_size(rows, cols), 0.0) {}

    static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    // Entries i.i.d. N(0, stddev^2) drawn row-major from rng.
    static Matrix gaussian(int rows, int cols, Rng& rng, double stddev = 1.0);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(int i, int j) {
        assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
        return data_[static_cast<std::size_t>(i) * cols_ + j];
    }
    double operator()(int i, int j) const {
        assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
        return data_[static_cast<std::size_t>(i) * cols_ + j];
    }

    double* row(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }
    const double* row(int i) const { return data_.data() + static_cast<std::size_t>(i) * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const;

    bool operator==(const Matrix& other) const = default;

private:
    static std::size_t checked_size(int rows, int cols);

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// a (m x p) times b (p x n). Accumulates each output entry over the inner
// index in ascending order, so appending rows/columns of exact zeros at
// the end of the inner dimension leaves existing results bit-identical.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double c);

// dst += c * m
void axpy(Matrix& dst, double c, const Matrix& m);

double frobenius_norm(const Matrix& m);
double frobenius_inner(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& m);

// Thin SVD, m = u * diag(sigma) * v^T with p = min(rows, cols) columns.
struct SvdResult {
    Matrix u;                  // rows x p, orthonormal columns
    std::vector<double> sigma; // length p, non-increasing, >= 0
    Matrix v;                  // cols x p, orthonormal columns
};

// One-sided Jacobi SVD. Accurate and dependency-free for the small dense
// matrices in scope. Sign convention: the first nonzero entry of each
// left singular vector is non-negative. Throws NumericalError carrying
// the worst relative off-diagonal coupling if 60 sweeps do not converge,
// std::invalid_argument on non-finite input.
SvdResult svd(const Matrix& m);

// Best rank-r approximation (sum of the r leading singular triplets) and
// the exact Frobenius residual sqrt(sum of tail sigma^2).
// Throws std::invalid_argument unless 1 <= r <= min(rows, cols).
std::pair<Matrix, double> truncate_rank(const Matrix& m, int r);

} // namespace alora
