#ifndef FJREC_NUMERICS_MATRIX_HPP_
#define FJREC_NUMERICS_MATRIX_HPP_

/**
 * @file
 * @brief Small dense row-major matrix and vector types.
 *
 * Sizes in this library are at most a few hundred, so the types are plain
 * value wrappers around std::vector with the handful of operations the
 * opinion-dynamics and QP code needs. Constructors taking external data
 * reject NaN/Inf; element access is unchecked.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fjrec/error.hpp"

namespace fjrec {

namespace detail {

inline void require_finite(std::span<const double> values, const char * what)
{
  for (double v : values) {
    if (!std::isfinite(v)) { throw Error(ErrorKind::NonFinite, std::string(what) + " contains NaN or Inf"); }
  }
}

}  // namespace detail

class DenseVector
{
public:
  DenseVector() = default;

  explicit DenseVector(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}

  DenseVector(std::initializer_list<double> values) : data_(values)
  {
    detail::require_finite(data_, "vector");
  }

  explicit DenseVector(std::vector<double> values) : data_(std::move(values))
  {
    detail::require_finite(data_, "vector");
  }

  static DenseVector ones(std::size_t dim) { return DenseVector(dim, 1.0); }

  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  double & operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  [[nodiscard]] std::span<double> span() noexcept { return data_; }
  [[nodiscard]] std::span<const double> span() const noexcept { return data_; }
  [[nodiscard]] const std::vector<double> & values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  [[nodiscard]] double sum() const noexcept { return std::accumulate(data_.begin(), data_.end(), 0.0); }
  [[nodiscard]] double mean() const noexcept { return empty() ? 0.0 : sum() / static_cast<double>(size()); }
  [[nodiscard]] double min() const { return *std::min_element(data_.begin(), data_.end()); }
  [[nodiscard]] double max() const { return *std::max_element(data_.begin(), data_.end()); }

  [[nodiscard]] double norm_inf() const noexcept
  {
    double r = 0.0;
    for (double v : data_) { r = std::max(r, std::abs(v)); }
    return r;
  }

  [[nodiscard]] double squared_norm() const noexcept
  {
    double r = 0.0;
    for (double v : data_) { r += v * v; }
    return r;
  }

  DenseVector & operator+=(const DenseVector & o)
  {
    check_same(o);
    for (std::size_t i = 0; i < size(); ++i) { data_[i] += o.data_[i]; }
    return *this;
  }

  DenseVector & operator-=(const DenseVector & o)
  {
    check_same(o);
    for (std::size_t i = 0; i < size(); ++i) { data_[i] -= o.data_[i]; }
    return *this;
  }

  DenseVector & operator*=(double s) noexcept
  {
    for (double & v : data_) { v *= s; }
    return *this;
  }

  /// this += s * o
  DenseVector & axpy(double s, const DenseVector & o)
  {
    check_same(o);
    for (std::size_t i = 0; i < size(); ++i) { data_[i] += s * o.data_[i]; }
    return *this;
  }

  friend bool operator==(const DenseVector &, const DenseVector &) = default;

private:
  void check_same(const DenseVector & o) const
  {
    if (o.size() != size()) { throw Error(ErrorKind::DimensionMismatch, "vector sizes differ"); }
  }

  std::vector<double> data_;
};

inline DenseVector operator+(DenseVector a, const DenseVector & b) { return a += b; }
inline DenseVector operator-(DenseVector a, const DenseVector & b) { return a -= b; }
inline DenseVector operator*(double s, DenseVector a) { return a *= s; }
inline DenseVector operator*(DenseVector a, double s) { return a *= s; }

inline double dot(const DenseVector & a, const DenseVector & b)
{
  if (a.size() != b.size()) { throw Error(ErrorKind::DimensionMismatch, "dot: sizes differ"); }
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) { r += a[i] * b[i]; }
  return r;
}

/// Max-norm distance between two vectors.
inline double max_abs_diff(const DenseVector & a, const DenseVector & b)
{
  if (a.size() != b.size()) { throw Error(ErrorKind::DimensionMismatch, "max_abs_diff: sizes differ"); }
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) { r = std::max(r, std::abs(a[i] - b[i])); }
  return r;
}

class DenseMatrix
{
public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill)
  {}

  /// Nested initializer, one inner list per row.
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
      : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0)
  {
    data_.reserve(rows_ * cols_);
    for (const auto & r : rows) {
      if (r.size() != cols_) { throw Error(ErrorKind::DimensionMismatch, "ragged matrix initializer"); }
      data_.insert(data_.end(), r.begin(), r.end());
    }
    detail::require_finite(data_, "matrix");
  }

  static DenseMatrix from_row_major(std::size_t rows, std::size_t cols, std::vector<double> values)
  {
    if (values.size() != rows * cols) {
      throw Error(ErrorKind::DimensionMismatch, "row-major data has wrong length");
    }
    detail::require_finite(values, "matrix");
    DenseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.data_ = std::move(values);
    return m;
  }

  static DenseMatrix identity(std::size_t n)
  {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) { m(i, i) = 1.0; }
    return m;
  }

  static DenseMatrix diagonal(const DenseVector & d)
  {
    DenseMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) { m(i, i) = d[i]; }
    return m;
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }

  double & operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  [[nodiscard]] std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept
  {
    return {data_.data() + i * cols_, cols_};
  }

  [[nodiscard]] DenseVector col(std::size_t j) const
  {
    DenseVector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) { c[i] = (*this)(i, j); }
    return c;
  }

  [[nodiscard]] const std::vector<double> & values() const noexcept { return data_; }

  [[nodiscard]] double row_sum(std::size_t i) const noexcept
  {
    auto r = row(i);
    return std::accumulate(r.begin(), r.end(), 0.0);
  }

  /// Induced infinity norm (max absolute row sum).
  [[nodiscard]] double norm_inf() const noexcept
  {
    double r = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (double v : row(i)) { s += std::abs(v); }
      r = std::max(r, s);
    }
    return r;
  }

  [[nodiscard]] double max_abs() const noexcept
  {
    double r = 0.0;
    for (double v : data_) { r = std::max(r, std::abs(v)); }
    return r;
  }

  [[nodiscard]] DenseMatrix transpose() const
  {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) { t(j, i) = (*this)(i, j); }
    }
    return t;
  }

  DenseMatrix & operator+=(const DenseMatrix & o)
  {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) { data_[k] += o.data_[k]; }
    return *this;
  }

  DenseMatrix & operator-=(const DenseMatrix & o)
  {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) { data_[k] -= o.data_[k]; }
    return *this;
  }

  DenseMatrix & operator*=(double s) noexcept
  {
    for (double & v : data_) { v *= s; }
    return *this;
  }

  friend bool operator==(const DenseMatrix &, const DenseMatrix &) = default;

private:
  void check_same(const DenseMatrix & o) const
  {
    if (o.rows_ != rows_ || o.cols_ != cols_) { throw Error(ErrorKind::DimensionMismatch, "matrix shapes differ"); }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline DenseMatrix operator+(DenseMatrix a, const DenseMatrix & b) { return a += b; }
inline DenseMatrix operator-(DenseMatrix a, const DenseMatrix & b) { return a -= b; }
inline DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

inline DenseVector operator*(const DenseMatrix & m, const DenseVector & x)
{
  if (m.cols() != x.size()) { throw Error(ErrorKind::DimensionMismatch, "matrix-vector product"); }
  DenseVector y(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) { s += r[j] * x[j]; }
    y[i] = s;
  }
  return y;
}

inline DenseMatrix operator*(const DenseMatrix & a, const DenseMatrix & b)
{
  if (a.cols() != b.rows()) { throw Error(ErrorKind::DimensionMismatch, "matrix-matrix product"); }
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) { continue; }
      for (std::size_t j = 0; j < b.cols(); ++j) { c(i, j) += aik * b(k, j); }
    }
  }
  return c;
}

/// Aᵀx without forming the transpose.
inline DenseVector transpose_times(const DenseMatrix & m, const DenseVector & x)
{
  if (m.rows() != x.size()) { throw Error(ErrorKind::DimensionMismatch, "transposed matrix-vector product"); }
  DenseVector y(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) { y[j] += r[j] * x[i]; }
  }
  return y;
}

/// Outer product a·bᵀ.
inline DenseMatrix outer(const DenseVector & a, const DenseVector & b)
{
  DenseMatrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) { m(i, j) = a[i] * b[j]; }
  }
  return m;
}

/// Scales row i by d[i], i.e. diag(d)·M.
inline DenseMatrix scale_rows(const DenseVector & d, DenseMatrix m)
{
  if (d.size() != m.rows()) { throw Error(ErrorKind::DimensionMismatch, "scale_rows"); }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (double & v : m.row(i)) { v *= d[i]; }
  }
  return m;
}

/// Component-wise product.
inline DenseVector hadamard(const DenseVector & a, const DenseVector & b)
{
  if (a.size() != b.size()) { throw Error(ErrorKind::DimensionMismatch, "hadamard"); }
  DenseVector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) { c[i] = a[i] * b[i]; }
  return c;
}

inline double max_abs_diff(const DenseMatrix & a, const DenseMatrix & b)
{
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "max_abs_diff: shapes differ");
  }
  double r = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) { r = std::max(r, std::abs(a.values()[k] - b.values()[k])); }
  return r;
}

}  // namespace fjrec

#endif  // FJREC_NUMERICS_MATRIX_HPP_
