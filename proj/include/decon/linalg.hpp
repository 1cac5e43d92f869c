#pragma once

// Small dense linear algebra for the model side (p x p with p <~ 100) plus a
// tall-skinny Householder QR whose column operations run through the
// data-parallel kernels. Everything is value-semantic and deterministic.

#include <cstddef>
#include <span>
#include <vector>

namespace decon::linalg {

// Dense row-major matrix.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    Matrix transposed() const;
    Matrix operator*(const Matrix& rhs) const;
    Matrix operator+(const Matrix& rhs) const;
    Matrix operator-(const Matrix& rhs) const;
    Matrix scaled(double a) const;

    // Submatrix with the given row/column index sets, in the given order.
    Matrix select(std::span<const std::size_t> row_idx, std::span<const std::size_t> col_idx) const;

    double max_abs() const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix mat_vec_outer(std::span<const double> a, std::span<const double> b);
std::vector<double> mat_vec(const Matrix& m, std::span<const double> v);

// Symmetric eigendecomposition by cyclic Jacobi. Returns eigenvalues in
// ascending order; columns of `vectors` are the matching eigenvectors.
struct EigenSym {
    std::vector<double> values;
    Matrix vectors;
};
EigenSym eigen_sym(const Matrix& a);

// Factor A with A * A^T = S for symmetric PSD S (eigendecomposition with
// eigenvalues below zero clipped when within tolerance). Throws PsdError if S
// is asymmetric or has an eigenvalue below -tol * max(1, |lambda|_max).
Matrix psd_factor(const Matrix& s, double tol = 1e-10);

// Minimum eigenvalue of a symmetric matrix (convenience for PSD checks).
double min_eigenvalue_sym(const Matrix& s);

// Singular values of a small dense matrix via one-sided Jacobi, descending.
std::vector<double> singular_values(const Matrix& a);

// Dense inverse with partial pivoting. Throws RankError on singular input.
Matrix invert_dense(const Matrix& a);

// Householder QR of a tall col-major matrix (n rows, k cols, k <= n).
// The factor can be reused to solve for several right-hand sides.
class TallQr {
  public:
    TallQr(std::vector<double> col_major, std::size_t n, std::size_t k);

    std::size_t n() const { return n_; }
    std::size_t k() const { return k_; }

    // Least-squares solution of min ||A x - y||; y has length n.
    std::vector<double> solve(std::span<const double> y) const;

    // R factor (k x k upper triangular).
    Matrix r() const;

    // Ratio of smallest to largest singular value of R.
    double sv_ratio() const;

    // Diagonal of (A^T A)^{-1} = (R^T R)^{-1}, for coefficient standard errors.
    std::vector<double> normal_inverse_diag() const;

  private:
    std::size_t n_ = 0;
    std::size_t k_ = 0;
    std::vector<double> a_;    // Householder vectors below the diagonal, R on/above
    std::vector<double> tau_;  // reflector scales
};

// Least squares on a small dense row-major system (used by analytic oracles).
std::vector<double> lstsq_small(const Matrix& a, std::span<const double> y);

}  // namespace decon::linalg
