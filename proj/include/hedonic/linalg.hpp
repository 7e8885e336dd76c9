#pragma once

// Small dense linear algebra for Hessian blocks and the G matrix (dimension
// <= ~12). Nothing here is meant for large problems.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "hedonic/error.hpp"

namespace hedonic {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw Error(ErrorCode::ShapeMismatch, "ragged matrix literal");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  double frobenius_norm() const {
    double acc = 0.0;
    for (double v : data_) acc += v * v;
    return std::sqrt(acc);
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "matrix product");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline std::vector<double> operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw Error(ErrorCode::ShapeMismatch, "matrix-vector product");
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * x[j];
  return out;
}

inline Matrix operator+(Matrix a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::ShapeMismatch, "matrix sum");
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) += b(i, j);
  return a;
}

inline Matrix operator-(Matrix a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::ShapeMismatch, "matrix difference");
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) -= b(i, j);
  return a;
}

inline Matrix operator*(double s, Matrix a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) *= s;
  return a;
}

/// (A + Aᵀ)/2; used to strip rounding asymmetry from products that are
/// symmetric in exact arithmetic.
inline Matrix symmetric_part(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::ShapeMismatch, "symmetric_part of non-square");
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column c pairs with values[c]
  std::size_t sweeps = 0;
  double max_residual = 0.0;   // max_c ||A v_c - lambda_c v_c||_2
};

/// Cyclic Jacobi rotations. Stops once the off-diagonal Frobenius norm drops
/// to rel_tol * ||A||_F.
inline EigenDecomposition jacobi_eigen(const Matrix& input, double rel_tol = 1e-12,
                                       std::size_t max_sweeps = 100) {
  const std::size_t n = input.rows();
  if (input.cols() != n) throw Error(ErrorCode::ShapeMismatch, "jacobi_eigen needs a square matrix");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (input(i, j) != input(j, i))
        throw Error(ErrorCode::ShapeMismatch, "jacobi_eigen needs a symmetric matrix");

  Matrix a = input;
  Matrix v = Matrix::identity(n);
  const double target = rel_tol * input.frobenius_norm();

  auto off_norm = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) acc += a(i, j) * a(i, j);
    return std::sqrt(acc);
  };

  std::size_t sweep = 0;
  while (off_norm() > target) {
    if (sweep++ >= max_sweeps) throw Error(ErrorCode::IterationLimit, "jacobi_eigen did not converge");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return a(l, l) < a(r, r); });

  EigenDecomposition out;
  out.sweeps = sweep;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, c) = v(k, order[c]);
  }
  for (std::size_t c = 0; c < n; ++c) {
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double av = 0.0;
      for (std::size_t k = 0; k < n; ++k) av += input(i, k) * out.vectors(k, c);
      const double r = av - out.values[c] * out.vectors(i, c);
      res += r * r;
    }
    out.max_residual = std::max(out.max_residual, std::sqrt(res));
  }
  return out;
}

struct Inertia {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t zero = 0;
  double threshold = 0.0;
};

/// Counts eigenvalue signs with the relative zero band rel * (max|lambda| + 1).
inline Inertia classify_eigenvalues(std::span<const double> values, double rel = 1e-9) {
  double largest = 0.0;
  for (double v : values) largest = std::max(largest, std::abs(v));
  Inertia in;
  in.threshold = rel * (largest + 1.0);
  for (double v : values) {
    if (v > in.threshold) ++in.positive;
    else if (v < -in.threshold) ++in.negative;
    else ++in.zero;
  }
  return in;
}

/// LU factorisation with partial pivoting. A matrix is flagged singular when
/// some pivot falls below rel_tol * ||A||_F (or A is identically zero).
class LuDecomposition {
 public:
  explicit LuDecomposition(const Matrix& a, double rel_tol = 1e-10) : lu_(a), perm_(a.rows()) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw Error(ErrorCode::ShapeMismatch, "LU needs a square matrix");
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    const double scale = a.frobenius_norm();
    const double floor = rel_tol * scale;
    singular_ = scale == 0.0 && n > 0;
    min_pivot_ = n ? std::numeric_limits<double>::infinity() : 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      for (std::size_t r = k + 1; r < n; ++r)
        if (std::abs(lu_(r, k)) > std::abs(lu_(piv, k))) piv = r;
      if (piv != k) {
        for (std::size_t c = 0; c < n; ++c) std::swap(lu_(k, c), lu_(piv, c));
        std::swap(perm_[k], perm_[piv]);
        sign_ = -sign_;
      }
      const double p = lu_(k, k);
      min_pivot_ = std::min(min_pivot_, std::abs(p));
      if (std::abs(p) <= floor || p == 0.0) {
        singular_ = true;
        continue;
      }
      for (std::size_t r = k + 1; r < n; ++r) {
        const double f = lu_(r, k) / p;
        lu_(r, k) = f;
        if (f == 0.0) continue;
        for (std::size_t c = k + 1; c < n; ++c) lu_(r, c) -= f * lu_(k, c);
      }
    }
  }

  bool singular() const noexcept { return singular_; }
  double min_pivot() const noexcept { return min_pivot_; }

  double determinant() const {
    double d = sign_;
    for (std::size_t k = 0; k < lu_.rows(); ++k) d *= lu_(k, k);
    return d;
  }

  std::vector<double> solve(std::span<const double> b) const {
    if (singular_) throw Error(ErrorCode::ShapeMismatch, "solve with a singular matrix");
    const std::size_t n = lu_.rows();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = b[perm_[i]];
      for (std::size_t k = 0; k < i; ++k) acc -= lu_(i, k) * x[k];
      x[i] = acc;
    }
    for (std::size_t i = n; i-- > 0;) {
      double acc = x[i];
      for (std::size_t k = i + 1; k < n; ++k) acc -= lu_(i, k) * x[k];
      x[i] = acc / lu_(i, i);
    }
    return x;
  }

  Matrix inverse() const {
    const std::size_t n = lu_.rows();
    Matrix inv(n, n);
    std::vector<double> e(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
      std::fill(e.begin(), e.end(), 0.0);
      e[c] = 1.0;
      const auto col = solve(e);
      for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
    }
    return inv;
  }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
  bool singular_ = false;
  double min_pivot_ = 0.0;
};

}  // namespace hedonic
