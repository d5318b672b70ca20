#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ezdl {

/// Dense column-major matrix. vec() of a matrix is its storage, so reshaping
/// a vector of length rows*cols into a matrix stacks columns.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static Matrix identity(std::size_t n);
    /// Row-wise literal, for tests and small constants.
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    /// Inverse vectorization: rows*cols values, column-major.
    static Matrix from_vec(std::span<const double> values, std::size_t rows, std::size_t cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[j * rows_ + i]; }

    std::span<double> col(std::size_t j) noexcept { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> col(std::size_t j) const noexcept { return {data_.data() + j * rows_, rows_}; }

    std::span<double> vec() noexcept { return data_; }
    std::span<const double> vec() const noexcept { return data_; }

    Matrix transpose() const;
    double frobenius_norm() const noexcept;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);

/// y = A x
void multiply(const Matrix& a, std::span<const double> x, std::span<double> y);
/// y = A^T x
void multiply_transposed(const Matrix& a, std::span<const double> x, std::span<double> y);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm2(std::span<const double> a) noexcept;

/// Leading k singular triplets, singular values descending.
struct Svd {
    Matrix u;               // rows x k
    std::vector<double> s;  // k
    Matrix v;               // cols x k
};

/// One-sided Jacobi sweeps, at most kMaxJacobiSweeps. The first nonzero
/// entry of every right singular vector is positive.
/// Throws ConvergenceFailure or OutOfRange for k outside [1, min(rows, cols)].
Svd svd_topk(const Matrix& m, std::size_t k);

/// Best approximation of rank <= k in the Frobenius norm (Eckart-Young).
Matrix rank_project(const Matrix& m, std::size_t k);

struct SymmetricEigen {
    std::vector<double> values;  // descending
    Matrix vectors;              // column j belongs to values[j]
};

/// Cyclic Jacobi rotations. Throws NotSymmetric or ConvergenceFailure.
SymmetricEigen sym_eigh(const Matrix& a);

inline constexpr int kMaxJacobiSweeps = 60;
inline constexpr double kJacobiTolerance = 1e-12;

} // namespace ezdl
