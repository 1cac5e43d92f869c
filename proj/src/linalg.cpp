#include "decon/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "decon/errors.hpp"
#include "decon/kernels.hpp"

namespace decon::linalg {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_) throw ShapeError("matrix product: inner dimensions disagree");
    Matrix out(rows_, rhs.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t j = 0; j < cols_; ++j) {
            const double a = (*this)(r, j);
            if (a == 0.0) continue;
            for (std::size_t c = 0; c < rhs.cols_; ++c) out(r, c) += a * rhs(j, c);
        }
    }
    return out;
}

Matrix Matrix::operator+(const Matrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw ShapeError("matrix sum: shape mismatch");
    Matrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
    return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw ShapeError("matrix diff: shape mismatch");
    Matrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
    return out;
}

Matrix Matrix::scaled(double a) const {
    Matrix out = *this;
    for (double& v : out.data_) v *= a;
    return out;
}

Matrix Matrix::select(std::span<const std::size_t> row_idx,
                      std::span<const std::size_t> col_idx) const {
    Matrix out(row_idx.size(), col_idx.size());
    for (std::size_t r = 0; r < row_idx.size(); ++r)
        for (std::size_t c = 0; c < col_idx.size(); ++c) out(r, c) = (*this)(row_idx[r], col_idx[c]);
    return out;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (const double v : data_) m = std::max(m, std::abs(v));
    return m;
}

Matrix mat_vec_outer(std::span<const double> a, std::span<const double> b) {
    Matrix out(a.size(), b.size());
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t c = 0; c < b.size(); ++c) out(r, c) = a[r] * b[c];
    return out;
}

std::vector<double> mat_vec(const Matrix& m, std::span<const double> v) {
    if (m.cols() != v.size()) throw ShapeError("mat_vec: dimension mismatch");
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out[r] += m(r, c) * v[c];
    return out;
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi eigendecomposition
// ---------------------------------------------------------------------------

EigenSym eigen_sym(const Matrix& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw ShapeError("eigen_sym: matrix not square");
    Matrix m = a;
    Matrix v = Matrix::identity(n);

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += m(i, j) * m(i, j);
        return std::sqrt(2.0 * s);
    };

    const double scale = std::max(m.max_abs(), 1e-300);
    const double tol = 1e-15 * scale * static_cast<double>(n);
    for (int sweep = 0; sweep < 100 && off_norm() > tol; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double mip = m(i, p), miq = m(i, q);
                    m(i, p) = c * mip - s * miq;
                    m(i, q) = s * mip + c * miq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double mpi = m(p, i), mqi = m(q, i);
                    m(p, i) = c * mpi - s * mqi;
                    m(q, i) = s * mpi + c * mqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return m(i, i) < m(j, j); });

    EigenSym out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        out.values[c] = m(order[c], order[c]);
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
    }
    return out;
}

double min_eigenvalue_sym(const Matrix& s) {
    const EigenSym e = eigen_sym(s);
    return e.values.front();
}

Matrix psd_factor(const Matrix& s, double tol) {
    const std::size_t n = s.rows();
    if (s.cols() != n) throw ShapeError("psd_factor: matrix not square");
    double asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) asym = std::max(asym, std::abs(s(i, j) - s(j, i)));
    if (asym > 1e-9 * std::max(1.0, s.max_abs()))
        throw PsdError("covariance matrix is not symmetric");

    const EigenSym e = eigen_sym(s);
    const double lmax = std::max(std::abs(e.values.back()), 1.0);
    Matrix f(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        double lambda = e.values[c];
        if (lambda < -tol * lmax)
            throw PsdError("covariance matrix is not positive semidefinite (min eigenvalue " +
                           std::to_string(e.values.front()) + ")");
        lambda = std::max(lambda, 0.0);
        const double root = std::sqrt(lambda);
        for (std::size_t r = 0; r < n; ++r) f(r, c) = e.vectors(r, c) * root;
    }
    return f;
}

// ---------------------------------------------------------------------------
// One-sided Jacobi singular values
// ---------------------------------------------------------------------------

std::vector<double> singular_values(const Matrix& a) {
    const std::size_t n = a.rows(), k = a.cols();
    // Column-major copy of A; rotate column pairs until mutually orthogonal.
    std::vector<double> w(n * k);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t r = 0; r < n; ++r) w[c * n + r] = a(r, c);

    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                double* cp = &w[p * n];
                double* cq = &w[q * n];
                const double alpha = kernels::scalar::dot(cp, cp, n);
                const double beta = kernels::scalar::dot(cq, cq, n);
                const double gamma = kernels::scalar::dot(cp, cq, n);
                if (std::abs(gamma) <= 1e-300 ||
                    std::abs(gamma) < 1e-16 * std::sqrt(alpha * beta))
                    continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t r = 0; r < n; ++r) {
                    const double vp = cp[r], vq = cq[r];
                    cp[r] = c * vp - s * vq;
                    cq[r] = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sv(k);
    for (std::size_t c = 0; c < k; ++c)
        sv[c] = std::sqrt(kernels::scalar::dot(&w[c * n], &w[c * n], n));
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

Matrix invert_dense(const Matrix& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw ShapeError("invert_dense: matrix not square");
    Matrix m = a;
    Matrix inv = Matrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
        if (std::abs(m(piv, col)) < 1e-300) throw RankError("invert_dense: singular matrix");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(m(piv, c), m(col, c));
                std::swap(inv(piv, c), inv(col, c));
            }
        }
        const double d = m(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            m(col, c) /= d;
            inv(col, c) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = m(r, col);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                m(r, c) -= f * m(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

// ---------------------------------------------------------------------------
// Tall Householder QR
// ---------------------------------------------------------------------------

TallQr::TallQr(std::vector<double> col_major, std::size_t n, std::size_t k)
    : n_(n), k_(k), a_(std::move(col_major)), tau_(k, 0.0) {
    if (a_.size() != n * k) throw ShapeError("TallQr: buffer size does not match n*k");
    if (k > n) throw ShapeError("TallQr: more columns than rows");

    for (std::size_t j = 0; j < k_; ++j) {
        double* col = &a_[j * n_ + j];
        const std::size_t m = n_ - j;
        const double sigma = kernels::dot(col, col, m);
        const double norm = std::sqrt(sigma);
        if (norm == 0.0) {
            tau_[j] = 0.0;
            continue;
        }
        const double alpha = (col[0] >= 0.0) ? -norm : norm;
        const double v0 = col[0] - alpha;
        // v = (v0, col[1..m)) with implicit leading 1 after normalization
        tau_[j] = -v0 / alpha;  // = 2 v0^2 / (v0^2 + rest), standard LAPACK form
        const double inv_v0 = 1.0 / v0;
        for (std::size_t r = 1; r < m; ++r) col[r] *= inv_v0;
        col[0] = alpha;  // R diagonal

        for (std::size_t c = j + 1; c < k_; ++c) {
            double* target = &a_[c * n_ + j];
            double w = target[0] + kernels::dot(col + 1, target + 1, m - 1);
            w *= tau_[j];
            target[0] -= w;
            kernels::axpy(-w, col + 1, target + 1, m - 1);
        }
    }
}

std::vector<double> TallQr::solve(std::span<const double> y) const {
    if (y.size() != n_) throw ShapeError("TallQr::solve: rhs length mismatch");
    std::vector<double> work(y.begin(), y.end());
    for (std::size_t j = 0; j < k_; ++j) {
        if (tau_[j] == 0.0) continue;
        const double* v = &a_[j * n_ + j];
        const std::size_t m = n_ - j;
        double w = work[j] + kernels::dot(v + 1, &work[j + 1], m - 1);
        w *= tau_[j];
        work[j] -= w;
        kernels::axpy(-w, v + 1, &work[j + 1], m - 1);
    }
    std::vector<double> x(k_, 0.0);
    for (std::size_t jj = k_; jj-- > 0;) {
        double s = work[jj];
        for (std::size_t c = jj + 1; c < k_; ++c) s -= a_[c * n_ + jj] * x[c];
        const double d = a_[jj * n_ + jj];
        if (d == 0.0) throw RankError("TallQr::solve: zero diagonal in R");
        x[jj] = s / d;
    }
    return x;
}

Matrix TallQr::r() const {
    Matrix r(k_, k_);
    for (std::size_t c = 0; c < k_; ++c)
        for (std::size_t row = 0; row <= c; ++row) r(row, c) = a_[c * n_ + row];
    return r;
}

double TallQr::sv_ratio() const {
    const std::vector<double> sv = singular_values(r());
    if (sv.empty() || sv.front() == 0.0) return 0.0;
    return sv.back() / sv.front();
}

std::vector<double> TallQr::normal_inverse_diag() const {
    // (R^T R)^{-1} diagonal via R^{-1}: diag = row sums of squares of R^{-1}.
    Matrix rinv = invert_dense(r());
    std::vector<double> d(k_, 0.0);
    for (std::size_t i = 0; i < k_; ++i)
        for (std::size_t c = 0; c < k_; ++c) d[i] += rinv(i, c) * rinv(i, c);
    return d;
}

std::vector<double> lstsq_small(const Matrix& a, std::span<const double> y) {
    const std::size_t n = a.rows(), k = a.cols();
    if (y.size() != n) throw ShapeError("lstsq_small: rhs length mismatch");
    std::vector<double> cm(n * k);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t r = 0; r < n; ++r) cm[c * n + r] = a(r, c);
    return TallQr(std::move(cm), n, k).solve(y);
}

}  // namespace decon::linalg
